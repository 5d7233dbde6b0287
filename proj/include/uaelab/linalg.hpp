#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Small dense column-free matrix kit for the block-analysis code paths.
// Everything is double precision and row-major; sizes stay tiny (d <= 16),
// so clarity wins over blocking tricks.

namespace uaelab {

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static Mat identity(std::size_t n);
  static Mat zero(std::size_t r, std::size_t c);
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& m);
Mat add(const Mat& a, const Mat& b);
Mat scale(const Mat& m, double s);
// a + s*b
Mat add_scaled(const Mat& a, const Mat& b, double s);

double frobenius_norm(const Mat& m);
bool all_finite(const Mat& m);

// Matrix-vector product y = m x.
std::vector<double> matvec(const Mat& m, const std::vector<double>& x);

// Orthonormal factor of an n x n matrix via modified Gram-Schmidt.
// Throws std::invalid_argument when the input is rank deficient beyond
// repair (a column collapses to zero length).
Mat gram_schmidt_q(const Mat& m);

// Random n x n matrix with iid standard normal entries from the given
// engine state (deterministic for a fixed seed).
Mat random_gaussian(std::size_t n, std::uint64_t seed);

// Orthogonal matrix sampled as the Q factor of a seeded Gaussian matrix.
Mat random_orthogonal(std::size_t n, std::uint64_t seed);

// Q diag(lambda) Q^T for an orthogonal Q; symmetric by construction.
Mat spd_from_spectrum(const Mat& q, const std::vector<double>& lambda);

struct SpectralNormResult {
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

// Largest singular value by power iteration on m^T m. `tol` bounds the
// relative change of the Rayleigh estimate between sweeps. When the loop
// exhausts `max_iterations` the best estimate is still returned with
// `converged` false so callers can decide whether to warn or retry.
SpectralNormResult spectral_norm(const Mat& m, double tol = 1e-10,
                                 std::size_t max_iterations = 10000);

}  // namespace uaelab
