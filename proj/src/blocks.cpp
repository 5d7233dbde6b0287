#include "uaelab/blocks.hpp"

#include <cmath>
#include <stdexcept>

namespace uaelab {

namespace {

void check_budget(int l) {
  if (l < 4) throw std::invalid_argument("residual chain: l must be at least 4");
  if (l % 4 != 0)
    throw std::invalid_argument("residual chain: l must be a multiple of 4 (4 layers per stage)");
}

}  // namespace

std::string block_kind_name(BlockKind k) {
  switch (k) {
    case BlockKind::rb: return "RB";
    case BlockKind::crb: return "CRB";
    case BlockKind::dcrb: return "DCRB";
    case BlockKind::crb_star: return "CRB*";
  }
  return "?";
}

double CrbTopology::extra_mass() const {
  double m = 0.0;
  for (double c : coefficients) m += std::abs(c);
  return m;
}

double CrbTopology::residual_count() const {
  double carries = 0.0;
  for (bool c : carried)
    if (c) carries += 1.0;
  return carries + extra_mass();
}

bool CrbTopology::admissible(double delta_safe) const {
  return extra_mass() <= delta_safe + 1e-12;
}

int epsilon_bound(int l, double delta_safe) {
  if (l < 4) throw std::invalid_argument("epsilon_bound: no full residual stage fits below l=4");
  if (delta_safe < 0.0) throw std::invalid_argument("epsilon_bound: delta_safe must be >= 0");
  return l / 4 + static_cast<int>(std::floor(delta_safe));
}

CrbTopology topology_for(int l, int epsilon) {
  check_budget(l);
  if (epsilon < 0) throw std::invalid_argument("topology_for: epsilon must be >= 0");
  CrbTopology t;
  t.l = l;
  t.stages = l / 4;
  t.carried.assign(t.stages, false);
  t.coefficients.assign(t.stages > 1 ? t.stages - 1 : 0, 0.0);
  const int carries = std::min(epsilon, t.stages);
  for (int i = 0; i < carries; ++i) t.carried[i] = true;
  int extras = epsilon - carries;
  // One unit per raw-input slot in order, then the remainder stacks onto
  // the first slot.
  for (std::size_t j = 0; j < t.coefficients.size() && extras > 0; ++j) {
    t.coefficients[j] = 1.0;
    --extras;
  }
  if (extras > 0) {
    if (t.coefficients.empty())
      throw std::invalid_argument("topology_for: no raw-input slot for the extra residuals");
    t.coefficients[0] += static_cast<double>(extras);
  }
  return t;
}

CrbTopology topology_for_coefficients(int l, const std::vector<double>& coefficients) {
  check_budget(l);
  CrbTopology t;
  t.l = l;
  t.stages = l / 4;
  t.carried.assign(t.stages, true);
  const std::size_t slots = t.stages > 1 ? static_cast<std::size_t>(t.stages - 1) : 0;
  if (coefficients.size() > slots)
    throw std::invalid_argument("topology_for_coefficients: more coefficients than stages admit");
  t.coefficients.assign(slots, 0.0);
  for (std::size_t j = 0; j < coefficients.size(); ++j) t.coefficients[j] = coefficients[j];
  return t;
}

namespace {

BlockInstance assemble(BlockKind kind, std::size_t channels, std::size_t kernel,
                       bool depthwise, CrbTopology topology, double delta_safe,
                       bool zero_init, std::uint64_t seed) {
  if (channels == 0) throw std::invalid_argument("build_block: channels must be positive");
  if (kernel == 0 || kernel % 2 == 0)
    throw std::invalid_argument("build_block: kernel must be odd and positive");
  BlockInstance b;
  b.kind = kind;
  b.channels = channels;
  b.kernel = kernel;
  b.depthwise = depthwise;
  b.topology = std::move(topology);
  b.delta_safe = delta_safe;

  std::mt19937_64 rng(seed);
  auto make_conv = [&](const std::string& label) {
    Tensor w(depthwise ? std::vector<std::size_t>{channels, 1, kernel, kernel}
                       : std::vector<std::size_t>{channels, channels, kernel, kernel});
    Tensor bias({channels});
    if (!zero_init) {
      const std::size_t fan = (depthwise ? 1 : channels) * kernel * kernel;
      fill_xavier_uniform(w, fan, fan, rng);
    }
    b.params.push_back({make_leaf(std::move(w), true), label});
    b.params.push_back({make_leaf(std::move(bias), true), label + "_bias"});
  };
  make_conv("conv1");
  make_conv("conv2");
  return b;
}

}  // namespace

BlockInstance build_block(const BlockConfig& config, std::uint64_t seed) {
  switch (config.kind) {
    case BlockKind::rb: {
      if (config.l != 0 && config.l != 4)
        throw std::invalid_argument("build_block: RB has a fixed depth of 4");
      if (config.epsilon != -1 && config.epsilon != 1)
        throw std::invalid_argument("build_block: epsilon inconsistent with kind RB");
      if (!config.coefficients.empty())
        throw std::invalid_argument("build_block: RB takes no skip coefficients");
      return assemble(BlockKind::rb, config.channels, config.kernel, false,
                      topology_for(4, 1), config.delta_safe, config.zero_init, seed);
    }
    case BlockKind::crb:
    case BlockKind::dcrb: {
      if (config.l != 0 && config.l != 8)
        throw std::invalid_argument("build_block: CRB/DCRB have a fixed depth of 8");
      if (config.epsilon != -1 && config.epsilon != 2)
        throw std::invalid_argument("build_block: epsilon inconsistent with kind CRB/DCRB");
      if (!config.coefficients.empty())
        throw std::invalid_argument("build_block: CRB/DCRB take no skip coefficients");
      return assemble(config.kind, config.channels, config.kernel,
                      config.kind == BlockKind::dcrb, topology_for(8, 2),
                      config.delta_safe, config.zero_init, seed);
    }
    case BlockKind::crb_star: {
      const int l = config.l == 0 ? 8 : config.l;
      CrbTopology topo = config.coefficients.empty()
                             ? topology_for(l, config.epsilon == -1 ? l / 4 : config.epsilon)
                             : topology_for_coefficients(l, config.coefficients);
      return assemble(BlockKind::crb_star, config.channels, config.kernel, false,
                      std::move(topo), config.delta_safe, config.zero_init, seed);
    }
  }
  throw std::invalid_argument("build_block: unknown kind");
}

BlockInstance build_generalized_crb(int l, const std::vector<double>& coefficients,
                                    std::uint64_t seed, std::size_t channels,
                                    double delta_safe) {
  BlockConfig cfg;
  cfg.kind = BlockKind::crb_star;
  cfg.channels = channels;
  cfg.l = l;
  cfg.coefficients = coefficients;
  cfg.delta_safe = delta_safe;
  return build_block(cfg, seed);
}

Var BlockInstance::forward(const Var& input) const {
  const Var& w1 = params[0].var;
  const Var& b1 = params[1].var;
  const Var& w2 = params[2].var;
  const Var& b2 = params[3].var;
  auto body = [&](const Var& x) {
    Var h = depthwise ? depthwise_conv2d(x, w1, b1) : conv2d(x, w1, b1);
    h = relu(h);
    return depthwise ? depthwise_conv2d(h, w2, b2) : conv2d(h, w2, b2);
  };
  Var cur = input;
  for (int k = 0; k < topology.stages; ++k) {
    Var h = body(cur);
    Var next = topology.carried[k] ? add(h, cur) : h;
    if (k >= 1) {
      const double c = topology.coefficients[k - 1];
      if (c != 0.0) next = scaled_add(next, input, c);
    }
    cur = next;
  }
  return cur;
}

std::int64_t BlockInstance::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& p : params) n += static_cast<std::int64_t>(p.var->value.size());
  return n;
}

LinearChain make_linear_chain(const CrbTopology& topology, std::vector<Mat> stage_maps) {
  if (stage_maps.size() != static_cast<std::size_t>(topology.stages))
    throw std::invalid_argument("make_linear_chain: one stage map per stage required");
  LinearChain c;
  c.dim = stage_maps.empty() ? 0 : stage_maps[0].rows;
  for (const Mat& m : stage_maps)
    if (m.rows != c.dim || m.cols != c.dim)
      throw std::invalid_argument("make_linear_chain: stage maps must be square and same size");
  c.topology = topology;
  c.stage_maps = std::move(stage_maps);
  return c;
}

std::vector<double> LinearChain::forward(const std::vector<double>& x) const {
  if (x.size() != dim) throw std::invalid_argument("linear chain forward: dimension mismatch");
  std::vector<double> cur = x;
  for (int k = 0; k < topology.stages; ++k) {
    std::vector<double> next = matvec(stage_maps[k], cur);
    if (topology.carried[k])
      for (std::size_t i = 0; i < dim; ++i) next[i] += cur[i];
    if (k >= 1) {
      const double c = topology.coefficients[k - 1];
      if (c != 0.0)
        for (std::size_t i = 0; i < dim; ++i) next[i] += c * x[i];
    }
    cur = std::move(next);
  }
  return cur;
}

Mat block_jacobian_closed_form(const LinearChain& chain) {
  const std::size_t d = chain.dim;
  Mat D = Mat::identity(d);
  for (int k = 0; k < chain.topology.stages; ++k) {
    Mat step = chain.topology.carried[k]
                   ? add(chain.stage_maps[k], Mat::identity(d))
                   : chain.stage_maps[k];
    Mat next = matmul(step, D);
    if (k >= 1) {
      const double c = chain.topology.coefficients[k - 1];
      if (c != 0.0) next = add_scaled(next, Mat::identity(d), c);
    }
    D = std::move(next);
  }
  return D;
}

Mat block_jacobian_closed_form(const BlockInstance&) {
  throw std::logic_error(
      "block_jacobian_closed_form: defined for linear stage maps only; conv blocks are nonlinear");
}

}  // namespace uaelab
