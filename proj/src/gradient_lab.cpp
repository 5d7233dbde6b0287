#include "uaelab/gradient_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace uaelab {

std::size_t worker_count() {
  if (const char* env = std::getenv("UAELAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc >= 1 ? hc : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(n, worker_count());
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

SpdPair sample_spd_commuting_pair(std::size_t d, std::uint64_t seed, double eig_lo,
                                  double eig_hi) {
  if (d < 1) throw std::invalid_argument("sample_spd_commuting_pair: d must be >= 1");
  if (!(eig_lo > 0.0) || eig_hi < eig_lo)
    throw std::invalid_argument("sample_spd_commuting_pair: eigenvalue range must be positive");
  std::mt19937_64 rng(seed);
  SpdPair p;
  p.d = d;
  p.q = random_orthogonal(d, rng());
  p.alpha.resize(d);
  p.beta.resize(d);
  for (double& v : p.alpha) v = eig_lo + (eig_hi - eig_lo) * uniform01(rng);
  for (double& v : p.beta) v = eig_lo + (eig_hi - eig_lo) * uniform01(rng);
  p.a = spd_from_spectrum(p.q, p.alpha);
  p.b = spd_from_spectrum(p.q, p.beta);
  return p;
}

SpectralGainReport verify_spectral_gain(const SpdPair& pair) {
  SpectralGainReport r;
  for (std::size_t i = 0; i < pair.d; ++i) {
    r.closed_a = std::max(r.closed_a, 1.0 + pair.alpha[i]);
    r.closed_ab = std::max(r.closed_ab, (1.0 + pair.alpha[i]) * (1.0 + pair.beta[i]));
  }
  const Mat ea = add(Mat::identity(pair.d), pair.a);
  const Mat eb = add(Mat::identity(pair.d), pair.b);
  const Mat prod = matmul(ea, eb);
  const SpectralNormResult pa = spectral_norm(ea, 1e-13, 200000);
  const SpectralNormResult pab = spectral_norm(prod, 1e-13, 200000);
  r.power_a = pa.value;
  r.power_ab = pab.value;
  r.power_converged = pa.converged && pab.converged;
  r.power_error = std::max(std::abs(pa.value - r.closed_a), std::abs(pab.value - r.closed_ab));
  r.strict_gain = r.closed_ab > r.closed_a;
  return r;
}

JacobianCheckReport verify_jacobian_recurrence(int l, int epsilon, std::size_t dim,
                                               std::size_t trials, std::uint64_t seed) {
  if (dim < 1 || dim > 16) throw std::invalid_argument("verify_jacobian_recurrence: bad dim");
  if (trials < 1) throw std::invalid_argument("verify_jacobian_recurrence: trials must be >= 1");
  const CrbTopology topo = topology_for(l, epsilon);
  JacobianCheckReport rep;
  rep.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * t);
    std::vector<Mat> maps;
    for (int s = 0; s < topo.stages; ++s) {
      Mat w = random_gaussian(dim, rng());
      // Keep stage maps moderate so finite differences stay well scaled.
      for (double& v : w.data) v = std::fmod(v, 3.0) * 0.3;
      maps.push_back(std::move(w));
    }
    const LinearChain chain = make_linear_chain(topo, std::move(maps));
    const Mat jac = block_jacobian_closed_form(chain);

    std::vector<double> x0(dim);
    for (double& v : x0) v = 2.0 * uniform01(rng) - 1.0;
    const double h = 1e-4;
    for (std::size_t j = 0; j < dim; ++j) {
      std::vector<double> xp = x0, xm = x0;
      xp[j] += h;
      xm[j] -= h;
      const std::vector<double> fp = chain.forward(xp);
      const std::vector<double> fm = chain.forward(xm);
      for (std::size_t i = 0; i < dim; ++i) {
        const double fd = (fp[i] - fm[i]) / (2.0 * h);
        rep.max_error = std::max(rep.max_error, std::abs(fd - jac(i, j)));
      }
    }
  }
  return rep;
}

JacobianBoundsReport verify_jacobian_bounds(int l, const std::vector<double>& coefficients,
                                            double eta, std::size_t trials,
                                            std::uint64_t seed, std::size_t dim) {
  if (eta < 0.0 || eta >= 1.0)
    throw std::invalid_argument("verify_jacobian_bounds: eta must lie in [0, 1)");
  if (trials < 1) throw std::invalid_argument("verify_jacobian_bounds: trials must be >= 1");
  const CrbTopology topo = topology_for_coefficients(l, coefficients);

  JacobianBoundsReport rep;
  rep.trials = trials;
  rep.lower = 1.0 + topo.extra_mass();
  rep.upper = 2.0 + topo.extra_mass();
  rep.boundary_case = eta == 0.0;
  rep.power_converged = true;
  rep.min_norm = std::numeric_limits<double>::infinity();
  rep.max_norm = -std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * t);
    std::vector<Mat> maps;
    for (int s = 0; s < topo.stages; ++s) {
      if (eta == 0.0) {
        maps.push_back(Mat::zero(dim, dim));
        continue;
      }
      const Mat q = random_orthogonal(dim, rng());
      std::vector<double> lambda(dim);
      for (double& v : lambda) v = 0.5 * eta + 0.5 * eta * uniform01(rng);
      maps.push_back(spd_from_spectrum(q, lambda));
    }
    const LinearChain chain = make_linear_chain(topo, std::move(maps));
    const Mat jac = block_jacobian_closed_form(chain);
    const SpectralNormResult sn = spectral_norm(jac, 1e-12, 200000);
    if (!sn.converged) rep.power_converged = false;
    rep.min_norm = std::min(rep.min_norm, sn.value);
    rep.max_norm = std::max(rep.max_norm, sn.value);
    if (sn.value > rep.lower && sn.value < rep.upper) ++rep.inside;
  }
  rep.all_inside = rep.inside == rep.trials;
  return rep;
}

std::string ordering_name(GradOrdering o) {
  switch (o) {
    case GradOrdering::input_smaller: return "input_smaller";
    case GradOrdering::input_larger: return "input_larger";
    case GradOrdering::inconclusive: return "inconclusive";
  }
  return "?";
}

GradientTrace trace_gradients(CascadeModel& model, const std::vector<SrSample>& dataset,
                              const TrainConfig& config) {
  if (model.blocks.size() < 2)
    throw std::invalid_argument("trace_gradients: at least two blocks required");
  const TrainResult res = train(model, dataset, config);
  GradientTrace trace;
  trace.rows = res.grad_norms;
  trace.diverged = res.diverged;
  trace.diverged_epoch = res.diverged_epoch;
  return trace;
}

GradOrdering classify_ordering(const GradientTrace& trace) {
  if (trace.rows.empty()) return GradOrdering::inconclusive;
  const auto& last = trace.rows.back();
  if (last.size() < 2) return GradOrdering::inconclusive;
  const double first = last.front(), final = last.back();
  if (!std::isfinite(first) || !std::isfinite(final)) return GradOrdering::inconclusive;
  if (first < final) return GradOrdering::input_smaller;
  if (first > final) return GradOrdering::input_larger;
  return GradOrdering::inconclusive;
}

EpsilonExperimentOutcome run_epsilon_experiment(int l, int epsilon,
                                                const EpsilonRunConfig& cfg,
                                                std::uint64_t seed,
                                                double baseline_min_loss) {
  const CrbTopology topo = topology_for(l, epsilon);
  const int base_epsilon = l / 4;

  EpsilonExperimentOutcome out;
  out.l = l;
  out.epsilon = epsilon;
  out.seed = seed;
  out.admissible = topo.admissible(cfg.delta_safe);

  if (epsilon != base_epsilon && baseline_min_loss < 0.0)
    baseline_min_loss =
        run_epsilon_experiment(l, base_epsilon, cfg, seed, 0.0).min_l1;

  const std::vector<SrSample> dataset =
      make_toy_dataset(cfg.samples, cfg.image, cfg.scale, seed);
  BlockConfig bc;
  bc.kind = BlockKind::crb_star;
  bc.channels = cfg.channels;
  bc.l = l;
  bc.epsilon = epsilon;
  bc.delta_safe = cfg.delta_safe;
  CascadeModel model = make_cascade(bc, cfg.blocks, seed);
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  const TrainResult res = train(model, dataset, tc);

  out.min_l1 = res.min_loss;
  out.diverged = res.diverged;
  out.trace.rows = res.grad_norms;
  out.trace.diverged = res.diverged;
  out.trace.diverged_epoch = res.diverged_epoch;
  if (!out.diverged && epsilon != base_epsilon && baseline_min_loss > 0.0 &&
      out.min_l1 > 2.0 * baseline_min_loss)
    out.diverged = true;  // loss floor degraded past the admissible baseline
  out.ordering = classify_ordering(out.trace);
  return out;
}

std::vector<EpsilonExperimentOutcome> run_epsilon_sweep(
    const std::vector<int>& ls, const std::vector<int>& epsilons,
    const std::vector<std::uint64_t>& seeds, const EpsilonRunConfig& cfg) {
  if (ls.empty() || epsilons.empty() || seeds.empty())
    throw std::invalid_argument("run_epsilon_sweep: empty grid");

  // Baselines first: one (l, l/4) run per (l, seed).
  struct BaseKey {
    int l;
    std::uint64_t seed;
  };
  std::vector<BaseKey> base_keys;
  for (int l : ls)
    for (std::uint64_t s : seeds) base_keys.push_back({l, s});
  std::vector<EpsilonExperimentOutcome> baselines(base_keys.size());
  parallel_for(base_keys.size(), [&](std::size_t i) {
    baselines[i] =
        run_epsilon_experiment(base_keys[i].l, base_keys[i].l / 4, cfg, base_keys[i].seed, 0.0);
  });
  auto baseline_of = [&](int l, std::uint64_t seed) -> const EpsilonExperimentOutcome& {
    for (std::size_t i = 0; i < base_keys.size(); ++i)
      if (base_keys[i].l == l && base_keys[i].seed == seed) return baselines[i];
    throw std::logic_error("run_epsilon_sweep: missing baseline");
  };

  struct Cell {
    int l;
    int epsilon;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int l : ls)
    for (int e : epsilons)
      for (std::uint64_t s : seeds) cells.push_back({l, e, s});
  std::vector<EpsilonExperimentOutcome> out(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    if (c.epsilon == c.l / 4) {
      out[i] = baseline_of(c.l, c.seed);
      return;
    }
    out[i] = run_epsilon_experiment(c.l, c.epsilon, cfg, c.seed,
                                    baseline_of(c.l, c.seed).min_l1);
  });
  return out;
}

}  // namespace uaelab
