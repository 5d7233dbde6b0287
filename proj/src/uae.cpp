#include "uaelab/uae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uaelab {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double swish(double x) { return x * sigmoid(x); }

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

const std::vector<UaeForm>& builtin_forms() {
  static const std::vector<UaeForm> forms = {
      {"phi1", [](double l) { return l; }, [](double k) { return std::exp(k + 1.0); },
       [](double n) { return std::log10(n / 100.0); }, 100.0},
      {"phi2", [](double l) { return l; }, [](double k) { return std::exp(k + 1.0); },
       [](double n) { return sigmoid(n / 100.0); }, 0.0},
      {"phi3", [](double l) { return l; }, [](double k) { return swish(k + 1.0); },
       [](double n) { return std::log10(n / 100.0); }, 100.0},
      {"phi4", [](double l) { return l * l; }, [](double k) { return std::exp(k + 1.0); },
       [](double n) { return std::log10(n / 100.0); }, 100.0},
      {"phi5", [](double l) { return l * l + 1.0; },
       [](double k) { return 5.0 * k * k + 1.0; },
       [](double n) { return std::sqrt(n + 2.0); }, 0.0},
      {"phi6", [](double l) { return softplus(l); },
       [](double k) { return softplus(2.0 * k + 1.0); },
       [](double n) { return std::tanh(n / 100.0); }, 0.0},
  };
  return forms;
}

const UaeForm& form_by_name(const std::string& name) {
  for (const auto& f : builtin_forms()) {
    if (f.name == name) return f;
  }
  throw std::invalid_argument("unknown form: '" + name + "' (use phi1..phi6)");
}

double evaluate_uae(const UaeForm& form, const ModuleDescriptor& desc) {
  validate_descriptor(desc);
  if (static_cast<double>(desc.n) < form.min_n) {
    throw std::domain_error("form '" + form.name + "' rejects module '" + desc.name +
                            "': n = " + std::to_string(desc.n) + " is below the domain floor " +
                            std::to_string(static_cast<long long>(form.min_n)));
  }
  double a = form.alpha(static_cast<double>(desc.l));
  double b = form.beta(static_cast<double>(desc.k));
  double t = form.theta(static_cast<double>(desc.n));
  return a * b * t / static_cast<double>(desc.f);
}

namespace {

// Central second difference with a rounding-noise tolerance derived from the
// sampled magnitudes; tells apart "genuinely signed" from "zero up to noise".
struct SecondDerivative {
  double value;
  double noise;
};

SecondDerivative second_derivative(const std::function<double(double)>& fn, double x) {
  double h = 1e-4 * std::max(std::abs(x), 1.0);
  double fm = fn(x - h), f0 = fn(x), fp = fn(x + h);
  double value = (fp - 2.0 * f0 + fm) / (h * h);
  double scale = std::max({std::abs(fm), std::abs(f0), std::abs(fp), 1e-30});
  double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale / (h * h);
  return {value, noise};
}

std::vector<double> make_grid(const VariableGrid& g, const char* what) {
  if (g.points < 3) {
    throw std::invalid_argument(std::string("degenerate ") + what + " grid: need >= 3 points");
  }
  if (!(g.hi > g.lo)) {
    throw std::invalid_argument(std::string("degenerate ") + what + " grid: hi must exceed lo");
  }
  std::vector<double> xs(g.points);
  for (int i = 0; i < g.points; ++i) {
    xs[i] = g.lo + (g.hi - g.lo) * i / (g.points - 1);
  }
  return xs;
}

}  // namespace

ConstraintReport validate_form_constraints(const UaeForm& form, const SampleRanges& ranges) {
  if (!(ranges.n.lo > 0.0)) {
    throw std::invalid_argument("n grid must be strictly positive");
  }
  if (ranges.l.points != ranges.k.points) {
    throw std::invalid_argument("l and k grids must share a point count for the pointwise "
                                "beta'' vs alpha'' comparison");
  }
  auto ls = make_grid(ranges.l, "l");
  auto ks = make_grid(ranges.k, "k");
  auto ns = make_grid(ranges.n, "n");

  ConstraintReport rep;
  rep.theta_concave = rep.beta_convex = rep.alpha_convex = rep.beta_dominates = true;
  rep.worst_theta = -std::numeric_limits<double>::infinity();
  rep.worst_beta = std::numeric_limits<double>::infinity();
  rep.worst_alpha = std::numeric_limits<double>::infinity();
  rep.worst_gap = std::numeric_limits<double>::infinity();

  for (double n : ns) {
    auto d = second_derivative(form.theta, n);
    if (!(d.value < -d.noise)) rep.theta_concave = false;
    rep.worst_theta = std::max(rep.worst_theta, d.value);
  }
  for (size_t j = 0; j < ks.size(); ++j) {
    auto db = second_derivative(form.beta, ks[j]);
    auto da = second_derivative(form.alpha, ls[j]);
    if (!(db.value > db.noise)) rep.beta_convex = false;
    if (!(da.value > -da.noise)) rep.alpha_convex = false;
    if (!(db.value - da.value > db.noise + da.noise)) rep.beta_dominates = false;
    rep.worst_beta = std::min(rep.worst_beta, db.value);
    rep.worst_alpha = std::min(rep.worst_alpha, da.value);
    rep.worst_gap = std::min(rep.worst_gap, db.value - da.value);
  }
  return rep;
}

namespace {

bool strictly_less(double a, double b, double rel_tie) {
  double m = std::max(std::abs(a), std::abs(b));
  if (m == 0.0) return false;
  return a < b && (b - a) / m > rel_tie;
}

}  // namespace

std::vector<RankedModule> rank_modules(const UaeForm& form,
                                       const std::vector<ModuleDescriptor>& descs,
                                       double rel_tie) {
  std::vector<RankedModule> out;
  out.reserve(descs.size());
  for (const auto& d : descs) out.push_back({d.name, evaluate_uae(form, d), false});
  std::stable_sort(out.begin(), out.end(), [](const RankedModule& a, const RankedModule& b) {
    if (a.phi != b.phi) return a.phi < b.phi;
    return a.name < b.name;
  });
  for (size_t i = 1; i < out.size(); ++i) {
    out[i].tied_with_previous =
        !strictly_less(out[i - 1].phi, out[i].phi, rel_tie);
  }
  return out;
}

InvarianceReport ranking_invariance(const std::vector<UaeForm>& forms,
                                    const std::vector<ModuleDescriptor>& descs,
                                    double rel_tie) {
  if (forms.empty()) throw std::invalid_argument("ranking_invariance needs at least one form");
  InvarianceReport rep;
  rep.invariant = true;
  std::vector<std::vector<double>> phis(forms.size());
  for (size_t fi = 0; fi < forms.size(); ++fi) {
    phis[fi].reserve(descs.size());
    for (const auto& d : descs) phis[fi].push_back(evaluate_uae(forms[fi], d));
    rep.orderings.push_back(rank_modules(forms[fi], descs, rel_tie));
  }
  for (size_t a = 0; a < descs.size(); ++a) {
    for (size_t b = a + 1; b < descs.size(); ++b) {
      int dir = 0;  // -1: a<b strictly somewhere, +1: b<a strictly somewhere
      bool conflict = false;
      for (size_t fi = 0; fi < forms.size() && !conflict; ++fi) {
        int d = 0;
        if (strictly_less(phis[fi][a], phis[fi][b], rel_tie)) d = -1;
        else if (strictly_less(phis[fi][b], phis[fi][a], rel_tie)) d = 1;
        if (d == 0) continue;
        if (dir == 0) dir = d;
        else if (dir != d) conflict = true;
      }
      if (conflict) {
        rep.invariant = false;
        rep.conflicts.push_back(descs[a].name + " vs " + descs[b].name +
                                ": opposite strict orderings across forms");
      }
    }
  }
  return rep;
}

double ablate(const UaeForm& form, const ModuleDescriptor& desc, const FactorSubset& subset) {
  if (!subset.alpha && !subset.beta && !subset.theta) {
    throw std::invalid_argument("ablation subset is empty; keep at least one factor");
  }
  validate_descriptor(desc);
  double a = subset.alpha ? form.alpha(static_cast<double>(desc.l)) : 1.0;
  double b = subset.beta ? form.beta(static_cast<double>(desc.k)) : 1.0;
  double t = 1.0;
  if (subset.theta) {
    if (static_cast<double>(desc.n) < form.min_n) {
      throw std::domain_error("form '" + form.name + "' rejects module '" + desc.name +
                              "': n below the domain floor");
    }
    t = form.theta(static_cast<double>(desc.n));
  }
  return a * b * t / static_cast<double>(desc.f);
}

double elasticity(const UaeForm& form, const ModuleDescriptor& desc, char variable,
                  double eval_point_shift) {
  const std::function<double(double)>* fn = nullptr;
  double x = 0.0;
  switch (variable) {
    case 'l': fn = &form.alpha; x = static_cast<double>(desc.l); break;
    case 'k': fn = &form.beta; x = static_cast<double>(desc.k); break;
    case 'n': fn = &form.theta; x = static_cast<double>(desc.n); break;
    default: throw std::invalid_argument("elasticity variable must be 'l', 'k' or 'n'");
  }
  double xs = x + eval_point_shift;
  if (!(xs > 0.0)) {
    throw std::domain_error("elasticity evaluation point must be strictly positive; got " +
                            std::to_string(xs));
  }
  double h = 1e-4;  // relative step in log space
  double up = (*fn)(xs * std::exp(h));
  double dn = (*fn)(xs * std::exp(-h));
  if (!(up > 0.0) || !(dn > 0.0)) {
    throw std::domain_error("elasticity needs a positive factor around the evaluation point");
  }
  return std::abs((std::log(up) - std::log(dn)) / (2.0 * h));
}

ShapleyValues shapley(const UaeForm& form, const ModuleDescriptor& desc, double v_empty) {
  auto v = [&](bool a, bool b, bool t) {
    if (!a && !b && !t) return v_empty;
    return ablate(form, desc, {a, b, t});
  };
  ShapleyValues sv;
  sv.v_empty = v_empty;
  sv.v_full = v(true, true, true);
  // standard 3-player weights: 1/3 joining empty, 1/6 joining a single,
  // 1/3 completing the grand coalition
  sv.c_alpha = (v(1, 0, 0) - v_empty) / 3.0 + (v(1, 1, 0) - v(0, 1, 0)) / 6.0 +
               (v(1, 0, 1) - v(0, 0, 1)) / 6.0 + (sv.v_full - v(0, 1, 1)) / 3.0;
  sv.c_beta = (v(0, 1, 0) - v_empty) / 3.0 + (v(1, 1, 0) - v(1, 0, 0)) / 6.0 +
              (v(0, 1, 1) - v(0, 0, 1)) / 6.0 + (sv.v_full - v(1, 0, 1)) / 3.0;
  sv.c_theta = (v(0, 0, 1) - v_empty) / 3.0 + (v(1, 0, 1) - v(1, 0, 0)) / 6.0 +
               (v(0, 1, 1) - v(0, 1, 0)) / 6.0 + (sv.v_full - v(1, 1, 0)) / 3.0;
  return sv;
}

SensitivityReport sensitivity(const UaeForm& form, const ModuleDescriptor& desc,
                              double eval_point_shift, double v_empty) {
  SensitivityReport rep;
  rep.s_alpha = elasticity(form, desc, 'l', eval_point_shift);
  rep.s_beta = elasticity(form, desc, 'k', eval_point_shift);
  rep.s_theta = elasticity(form, desc, 'n', eval_point_shift);
  double sum = rep.s_alpha + rep.s_beta + rep.s_theta;
  if (sum > 0.0) {
    rep.normalized_defined = true;
    rep.ns_alpha = rep.s_alpha / sum;
    rep.ns_beta = rep.s_beta / sum;
    rep.ns_theta = rep.s_theta / sum;
  }
  ShapleyValues sv = shapley(form, desc, v_empty);
  rep.c_alpha = sv.c_alpha;
  rep.c_beta = sv.c_beta;
  rep.c_theta = sv.c_theta;
  rep.v_full = sv.v_full;
  rep.v_empty = sv.v_empty;
  return rep;
}

}  // namespace uaelab
