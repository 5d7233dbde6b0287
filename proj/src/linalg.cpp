#include "uaelab/linalg.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace uaelab {

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::zero(std::size_t r, std::size_t c) { return Mat(r, c); }

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
  Mat out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Mat transpose(const Mat& m) {
  Mat out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
  return out;
}

Mat add(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "add");
  Mat out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
  return out;
}

Mat scale(const Mat& m, double s) {
  Mat out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = m.data[i] * s;
  return out;
}

Mat add_scaled(const Mat& a, const Mat& b, double s) {
  require_same_shape(a, b, "add_scaled");
  Mat out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + s * b.data[i];
  return out;
}

double frobenius_norm(const Mat& m) {
  double acc = 0.0;
  for (double v : m.data) acc += v * v;
  return std::sqrt(acc);
}

bool all_finite(const Mat& m) {
  for (double v : m.data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::vector<double> matvec(const Mat& m, const std::vector<double>& x) {
  if (m.cols != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += m(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

Mat gram_schmidt_q(const Mat& m) {
  if (m.rows != m.cols) throw std::invalid_argument("gram_schmidt_q: square input required");
  const std::size_t n = m.rows;
  Mat q = m;
  for (std::size_t j = 0; j < n; ++j) {
    // Two orthogonalization passes keep Q^T Q near identity even for
    // poorly conditioned inputs.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += q(i, k) * q(i, j);
        for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, k);
      }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += q(i, j) * q(i, j);
    norm = std::sqrt(norm);
    if (norm < 1e-12)
      throw std::invalid_argument("gram_schmidt_q: rank deficient input");
    for (std::size_t i = 0; i < n; ++i) q(i, j) /= norm;
  }
  return q;
}

Mat random_gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat m(n, n);
  for (double& v : m.data) v = gauss(rng);
  return m;
}

Mat random_orthogonal(std::size_t n, std::uint64_t seed) {
  // A fresh Gaussian draw is full rank with probability one; retry on the
  // measure-zero failure just in case a degenerate draw slips through.
  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    try {
      return gram_schmidt_q(random_gaussian(n, seed + attempt * 0x9e3779b97f4a7c15ull));
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
  throw std::runtime_error("random_orthogonal: repeated rank-deficient draws");
}

Mat spd_from_spectrum(const Mat& q, const std::vector<double>& lambda) {
  if (q.rows != q.cols) throw std::invalid_argument("spd_from_spectrum: square Q required");
  if (q.rows != lambda.size())
    throw std::invalid_argument("spd_from_spectrum: spectrum size mismatch");
  const std::size_t n = q.rows;
  Mat out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += q(i, k) * lambda[k] * q(j, k);
      out(i, j) = acc;
    }
  // Symmetrize to scrub the last bits of rounding skew.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (out(i, j) + out(j, i));
      out(i, j) = s;
      out(j, i) = s;
    }
  return out;
}

SpectralNormResult spectral_norm(const Mat& m, double tol, std::size_t max_iterations) {
  SpectralNormResult res;
  if (m.rows == 0 || m.cols == 0) {
    res.converged = true;
    return res;
  }
  // Power iteration on m^T m; the Rayleigh quotient converges to the
  // squared top singular value.
  const Mat mt = transpose(m);
  std::vector<double> v(m.cols, 0.0);
  // Deterministic start vector with all modes populated.
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = 1.0 + 1e-3 * static_cast<double>(j);
  double vnorm = 0.0;
  for (double x : v) vnorm += x * x;
  vnorm = std::sqrt(vnorm);
  for (double& x : v) x /= vnorm;

  double prev = 0.0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    std::vector<double> mv = matvec(m, v);
    std::vector<double> w = matvec(mt, mv);
    double ray = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) ray += v[j] * w[j];
    double wnorm = 0.0;
    for (double x : w) wnorm += x * x;
    wnorm = std::sqrt(wnorm);
    res.iterations = it;
    if (wnorm == 0.0) {
      // m v vanished: v lies in the null space, the matrix may still be
      // nonzero, but for our symmetric-product iteration this only occurs
      // for the zero matrix or a pathological start; report what we have.
      res.value = 0.0;
      res.converged = true;
      return res;
    }
    for (double& x : w) x /= wnorm;
    v = std::move(w);
    const double est = std::sqrt(std::max(ray, 0.0));
    if (it > 1) {
      const double denom = std::max({std::abs(est), std::abs(prev), 1e-300});
      if (std::abs(est - prev) / denom < tol) {
        res.value = est;
        res.converged = true;
        return res;
      }
    }
    prev = est;
  }
  res.value = prev;
  res.converged = false;
  return res;
}

}  // namespace uaelab
