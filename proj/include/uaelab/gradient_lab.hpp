#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "uaelab/blocks.hpp"
#include "uaelab/harness.hpp"
#include "uaelab/linalg.hpp"

// Numeric verification of the residual-chain gradient theory: the spectral
// gain of stacked symmetric positive-definite perturbations, the chain
// Jacobian recurrence against finite differences, the norm interval for
// small stage maps, and the residual-budget phase experiment on the toy
// training bench.

namespace uaelab {

// Worker count for sweep parallelism: UAELAB_THREADS when set, otherwise
// the hardware concurrency, never below 1.
std::size_t worker_count();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct SpdPair {
  std::size_t d = 0;
  Mat q;
  std::vector<double> alpha, beta;  // strictly positive spectra
  Mat a, b;                         // Q diag(alpha) Q^T, Q diag(beta) Q^T
};

// Commuting pair sharing one orthogonal eigenbasis; eigenvalues uniform in
// [eig_lo, eig_hi], which must be strictly positive.
SpdPair sample_spd_commuting_pair(std::size_t d, std::uint64_t seed, double eig_lo,
                                  double eig_hi);

struct SpectralGainReport {
  double closed_a = 0.0;   // max_i (1 + alpha_i)
  double closed_ab = 0.0;  // max_i (1 + alpha_i)(1 + beta_i)
  double power_a = 0.0;    // ||E + A|| by power iteration
  double power_ab = 0.0;   // ||(E + A)(E + B)|| by power iteration
  double power_error = 0.0;
  bool power_converged = false;
  bool strict_gain = false;  // closed_ab > closed_a
};

SpectralGainReport verify_spectral_gain(const SpdPair& pair);

struct JacobianCheckReport {
  std::size_t trials = 0;
  double max_error = 0.0;  // worst |closed - finite difference| entry
};

// Closed-form chain Jacobian versus central finite differences on random
// dense stage maps for the (l, epsilon) layout.
JacobianCheckReport verify_jacobian_recurrence(int l, int epsilon, std::size_t dim,
                                               std::size_t trials, std::uint64_t seed);

struct JacobianBoundsReport {
  std::size_t trials = 0;
  std::size_t inside = 0;
  double lower = 0.0;  // 1 + sum |c_j|
  double upper = 0.0;  // 2 + sum |c_j|
  double min_norm = 0.0;
  double max_norm = 0.0;
  bool all_inside = false;
  bool boundary_case = false;  // eta = 0: norm sits exactly on the lower edge
  bool power_converged = false;
};

// Fully carried linear chains with symmetric positive-definite stage maps
// whose spectra lie in [eta/2, eta]; tests strict membership of ||J|| in
// the open interval (lower, upper).
JacobianBoundsReport verify_jacobian_bounds(int l, const std::vector<double>& coefficients,
                                            double eta, std::size_t trials,
                                            std::uint64_t seed, std::size_t dim = 4);

struct GradientTrace {
  // rows[epoch][block]: Frobenius norm of each block's first-conv weight
  // gradient, blocks ordered input to output.
  std::vector<std::vector<double>> rows;
  bool diverged = false;
  int diverged_epoch = -1;
};

enum class GradOrdering { input_smaller, input_larger, inconclusive };
std::string ordering_name(GradOrdering o);

// Trains the cascade on the toy bench and returns the per-epoch gradient
// norms. Divergence truncates the trace; it is data, not an error.
GradientTrace trace_gradients(CascadeModel& model, const std::vector<SrSample>& dataset,
                              const TrainConfig& config);

// Compares the first and last block at the final recorded epoch.
GradOrdering classify_ordering(const GradientTrace& trace);

struct EpsilonRunConfig {
  std::size_t blocks = 5;
  std::size_t channels = 8;
  std::size_t image = 16;
  std::size_t scale = 2;
  std::size_t samples = 12;
  TrainConfig train;  // seed is overwritten per run
  double delta_safe = 0.0;
};

struct EpsilonExperimentOutcome {
  int l = 0;
  int epsilon = 0;
  bool admissible = false;
  double min_l1 = 0.0;
  bool diverged = false;
  GradOrdering ordering = GradOrdering::inconclusive;
  std::uint64_t seed = 0;
  GradientTrace trace;
};

// Trains a block cascade for one (l, epsilon) cell. Divergence means a
// non-finite loss or gradient, or a minimum loss more than twice the
// matched admissible baseline (same l and seed, epsilon = l/4). Pass the
// baseline's minimum loss when already known; a negative value lets the
// run compute it on demand.
EpsilonExperimentOutcome run_epsilon_experiment(int l, int epsilon,
                                                const EpsilonRunConfig& cfg,
                                                std::uint64_t seed,
                                                double baseline_min_loss = -1.0);

// Full grid, baselines computed once per (l, seed), cells in parallel.
// Results ordered by (l, epsilon, seed).
std::vector<EpsilonExperimentOutcome> run_epsilon_sweep(const std::vector<int>& ls,
                                                        const std::vector<int>& epsilons,
                                                        const std::vector<std::uint64_t>& seeds,
                                                        const EpsilonRunConfig& cfg);

}  // namespace uaelab
