#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uaelab/autograd.hpp"
#include "uaelab/linalg.hpp"

// Residual block family. RB is the classic two-conv residual unit. CRB
// keeps RB's parameter tensors but applies the tied body twice, so the
// forward depth doubles while the parameter count stays fixed. DCRB is the
// depthwise variant. CRB* generalizes to an arbitrary stage count with
// optional per-stage carries and raw-input skip coefficients.

namespace uaelab {

enum class BlockKind { rb, crb, dcrb, crb_star };

std::string block_kind_name(BlockKind k);

// Stage layout of a residual chain. Each stage spends four forward layers
// (conv, relu, conv, add). carried[k] marks a unit skip of the previous
// stage output; coefficients[j] weights a skip of the raw block input into
// stage j+1 (stage indices 0-based, so the first stage never takes one).
struct CrbTopology {
  int l = 0;
  int stages = 0;
  std::vector<bool> carried;
  std::vector<double> coefficients;  // size stages-1, may be all zero

  double extra_mass() const;       // sum of |coefficients|
  double residual_count() const;   // carries + extra mass
  bool admissible(double delta_safe) const;  // extra mass within the margin
};

// Maximum admissible residual count for a forward budget of l layers.
int epsilon_bound(int l, double delta_safe);

// Layout for an integer residual budget: up to l/4 unit carries first,
// then raw-input skips. Skips enter at stages 2, 3, ... in order; once
// each of those slots holds one unit, the remainder stacks onto the first.
CrbTopology topology_for(int l, int epsilon);

// Layout with every stage carried and explicit raw-input coefficients.
CrbTopology topology_for_coefficients(int l, const std::vector<double>& coefficients);

struct BlockConfig {
  BlockKind kind = BlockKind::rb;
  std::size_t channels = 64;
  std::size_t kernel = 3;
  int l = 0;         // 0 selects the kind's default depth (rb 4, crb/dcrb 8)
  int epsilon = -1;  // crb_star residual budget; -1 selects l/4
  std::vector<double> coefficients;  // crb_star explicit skips, overrides epsilon
  double delta_safe = 0.0;
  bool zero_init = false;  // test mode: all weights zero, body is a no-op
};

struct BlockInstance {
  BlockKind kind = BlockKind::rb;
  std::size_t channels = 0;
  std::size_t kernel = 0;
  bool depthwise = false;
  CrbTopology topology;
  double delta_safe = 0.0;
  // Tied body parameters: conv1 weight/bias, conv2 weight/bias. Every
  // stage reuses the same leaves, so gradient accumulation across stages
  // is automatic.
  std::vector<Parameter> params;

  Var forward(const Var& input) const;
  std::int64_t parameter_count() const;
  bool admissible() const { return topology.admissible(delta_safe); }
  const Parameter& first_conv() const { return params.front(); }
};

BlockInstance build_block(const BlockConfig& config, std::uint64_t seed);

// Fully carried chain of l/4 tied stages with explicit raw-input skips.
BlockInstance build_generalized_crb(int l, const std::vector<double>& coefficients,
                                    std::uint64_t seed, std::size_t channels = 64,
                                    double delta_safe = 0.0);

// Linear-map harness: stages are independent matrices W_k instead of the
// conv body, so the chain Jacobian has an exact closed form and the
// recurrence can be validated against finite differences.
struct LinearChain {
  std::size_t dim = 0;
  CrbTopology topology;
  std::vector<Mat> stage_maps;  // one per stage, each dim x dim

  std::vector<double> forward(const std::vector<double>& x) const;
};

LinearChain make_linear_chain(const CrbTopology& topology, std::vector<Mat> stage_maps);

// Jacobian of the chain output with respect to its input, accumulated
// stage by stage: D_k = (W_k + [carried_k] E) D_{k-1} + e_k E, where e_k
// is the raw-input coefficient entering stage k and D_0 = E.
Mat block_jacobian_closed_form(const LinearChain& chain);

// Conv blocks have nonlinear stages; the closed form does not apply.
Mat block_jacobian_closed_form(const BlockInstance& block);

}  // namespace uaelab
