#pragma once

#include <functional>
#include <string>
#include <vector>

#include "uaelab/descriptor.hpp"

// Universality scoring. A form is a separable score
//   phi(desc) = alpha(l) * beta(k) * theta(n) / f
// where lower phi reads as "more universal". The six built-in forms:
//   phi1 = l * e^(k+1) * log10(n/100) / f
//   phi2 = l * e^(k+1) * sigmoid(n/100) / f
//   phi3 = l * swish(k+1) * log10(n/100) / f
//   phi4 = l^2 * e^(k+1) * log10(n/100) / f
//   phi5 = (l^2+1) * (5k^2+1) * sqrt(n+2) / f
//   phi6 = softplus(l) * softplus(2k+1) * tanh(n/100) / f
// Well-formed factors are convex in l and k, concave in n, with the curvature
// of beta dominating alpha; validate_form_constraints checks that numerically.

namespace uaelab {

struct UaeForm {
  std::string name;
  std::function<double(double)> alpha;  // of l
  std::function<double(double)> beta;   // of k
  std::function<double(double)> theta;  // of n
  double min_n = 0.0;  // evaluation rejects n below this (log domains)
};

const std::vector<UaeForm>& builtin_forms();
const UaeForm& form_by_name(const std::string& name);

double evaluate_uae(const UaeForm& form, const ModuleDescriptor& desc);

struct VariableGrid {
  double lo = 0.0;
  double hi = 0.0;
  int points = 17;
};

struct SampleRanges {
  VariableGrid l;
  VariableGrid k;
  VariableGrid n;
};

struct ConstraintReport {
  bool theta_concave = false;     // theta'' < 0 everywhere on the n grid
  bool beta_convex = false;       // beta''  > 0 everywhere on the k grid
  bool alpha_convex = false;      // alpha'' >= 0 everywhere on the l grid
  bool beta_dominates = false;    // beta''(k_j) > alpha''(l_j) pointwise
  double worst_theta = 0.0;       // most offending theta'' value
  double worst_beta = 0.0;
  double worst_alpha = 0.0;
  double worst_gap = 0.0;         // min over j of beta'' - alpha''
  bool all_hold() const { return theta_concave && beta_convex && alpha_convex && beta_dominates; }
};

ConstraintReport validate_form_constraints(const UaeForm& form, const SampleRanges& ranges);

struct RankedModule {
  std::string name;
  double phi = 0.0;
  bool tied_with_previous = false;
};

// Two modules are strictly ordered under a form when their relative gap
// |a-b|/max(a,b) exceeds the tie tolerance; orderings of several forms count
// as identical when no pair is strictly ordered in opposite directions by two
// forms.
inline constexpr double kDefaultTieTolerance = 0.25;

// Ascending by phi, name-lexicographic among equals. Adjacent entries within
// rel_tie of each other are flagged as ties.
std::vector<RankedModule> rank_modules(const UaeForm& form,
                                       const std::vector<ModuleDescriptor>& descs,
                                       double rel_tie = kDefaultTieTolerance);

struct InvarianceReport {
  bool invariant = false;
  std::vector<std::string> conflicts;  // human-readable pair conflicts
  std::vector<std::vector<RankedModule>> orderings;  // one per form
};

InvarianceReport ranking_invariance(const std::vector<UaeForm>& forms,
                                    const std::vector<ModuleDescriptor>& descs,
                                    double rel_tie = kDefaultTieTolerance);

struct FactorSubset {
  bool alpha = false;
  bool beta = false;
  bool theta = false;
};

// phi with the excluded factors replaced by 1; the division by f stays.
double ablate(const UaeForm& form, const ModuleDescriptor& desc, const FactorSubset& subset);

struct SensitivityReport {
  double s_alpha = 0.0, s_beta = 0.0, s_theta = 0.0;     // log-log elasticities
  double ns_alpha = 0.0, ns_beta = 0.0, ns_theta = 0.0;  // normalized to sum 1
  bool normalized_defined = false;
  double c_alpha = 0.0, c_beta = 0.0, c_theta = 0.0;     // Shapley attributions
  double v_full = 0.0, v_empty = 0.0;
};

// Elasticities S_i = |d ln phi / d ln x_i| by central differences in log
// space; each variable is evaluated at x + eval_point_shift so k = 0 stays in
// the log domain. Shapley attributions use the standard three-player weights
// over the ablation game, with v(empty) fixed at v_empty (default 0), so
// C_alpha + C_beta + C_theta = v(full) - v(empty) identically.
SensitivityReport sensitivity(const UaeForm& form, const ModuleDescriptor& desc,
                              double eval_point_shift = 0.02, double v_empty = 0.0);

double elasticity(const UaeForm& form, const ModuleDescriptor& desc, char variable,
                  double eval_point_shift = 0.02);

struct ShapleyValues {
  double c_alpha = 0.0, c_beta = 0.0, c_theta = 0.0;
  double v_full = 0.0, v_empty = 0.0;
};

ShapleyValues shapley(const UaeForm& form, const ModuleDescriptor& desc, double v_empty = 0.0);

}  // namespace uaelab
