#include "uaelab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace uaelab {

namespace {

void normalize_to(Tensor& t, double lo, double hi) {
  double mn = t.data[0], mx = t.data[0];
  for (double v : t.data) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  if (mx - mn < 1e-12) {
    t.fill(0.5 * (lo + hi));
    return;
  }
  const double s = (hi - lo) / (mx - mn);
  for (double& v : t.data) v = lo + (v - mn) * s;
}

Tensor gradient_image(std::size_t size, std::mt19937_64& rng) {
  Tensor t({1, 1, size, size});
  const double ang = 2.0 * M_PI * uniform01(rng);
  const double gx = std::cos(ang), gy = std::sin(ang);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x)
      t.at4(0, 0, y, x) = gx * static_cast<double>(x) + gy * static_cast<double>(y);
  const double lo = 0.1 * uniform01(rng);
  normalize_to(t, lo, lo + 0.8);
  return t;
}

Tensor checkerboard_image(std::size_t size, std::mt19937_64& rng) {
  Tensor t({1, 1, size, size});
  const std::size_t cell = 1 + static_cast<std::size_t>(uniform01(rng) * 4.0);
  const std::size_t px = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(cell));
  const std::size_t py = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(cell));
  const double v0 = 0.05 + 0.35 * uniform01(rng);
  const double v1 = 0.6 + 0.35 * uniform01(rng);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const bool on = (((x + px) / cell) + ((y + py) / cell)) % 2 == 1;
      t.at4(0, 0, y, x) = on ? v1 : v0;
    }
  return t;
}

Tensor sinusoid_image(std::size_t size, std::mt19937_64& rng) {
  Tensor t({1, 1, size, size});
  // Three low-frequency components keep the texture band limited.
  double fx[3], fy[3], ph[3], amp[3];
  for (int j = 0; j < 3; ++j) {
    fx[j] = 1.0 + std::floor(uniform01(rng) * 4.0);
    fy[j] = 1.0 + std::floor(uniform01(rng) * 4.0);
    ph[j] = 2.0 * M_PI * uniform01(rng);
    amp[j] = 0.3 + 0.7 * uniform01(rng);
  }
  const double inv = 1.0 / static_cast<double>(size);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      double v = 0.0;
      for (int j = 0; j < 3; ++j)
        v += amp[j] * std::sin(2.0 * M_PI *
                                   (fx[j] * static_cast<double>(x) +
                                    fy[j] * static_cast<double>(y)) *
                                   inv +
                               ph[j]);
      t.at4(0, 0, y, x) = v;
    }
  normalize_to(t, 0.05, 0.95);
  return t;
}

}  // namespace

Tensor downsample_box(const Tensor& hr, std::size_t scale) {
  if (hr.ndim() != 4) throw std::invalid_argument("downsample_box: 4-axis tensor required");
  if (scale == 0) throw std::invalid_argument("downsample_box: scale must be positive");
  const std::size_t B = hr.shape[0], C = hr.shape[1], H = hr.shape[2], W = hr.shape[3];
  if (H % scale != 0 || W % scale != 0)
    throw std::invalid_argument("downsample_box: size not divisible by scale");
  Tensor lr({B, C, H / scale, W / scale});
  const double inv = 1.0 / static_cast<double>(scale * scale);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t y = 0; y < H / scale; ++y)
        for (std::size_t x = 0; x < W / scale; ++x) {
          double acc = 0.0;
          for (std::size_t dy = 0; dy < scale; ++dy)
            for (std::size_t dx = 0; dx < scale; ++dx)
              acc += hr.at4(b, c, y * scale + dy, x * scale + dx);
          lr.at4(b, c, y, x) = acc * inv;
        }
  return lr;
}

Tensor upsample_nearest(const Tensor& lr, std::size_t scale) {
  if (lr.ndim() != 4) throw std::invalid_argument("upsample_nearest: 4-axis tensor required");
  if (scale == 0) throw std::invalid_argument("upsample_nearest: scale must be positive");
  const std::size_t B = lr.shape[0], C = lr.shape[1], H = lr.shape[2], W = lr.shape[3];
  Tensor hr({B, C, H * scale, W * scale});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t y = 0; y < H * scale; ++y)
        for (std::size_t x = 0; x < W * scale; ++x)
          hr.at4(b, c, y, x) = lr.at4(b, c, y / scale, x / scale);
  return hr;
}

std::vector<SrSample> make_toy_dataset(std::size_t count, std::size_t size,
                                       std::size_t scale, std::uint64_t seed) {
  if (scale == 0 || size % scale != 0)
    throw std::invalid_argument("make_toy_dataset: size must be divisible by scale");
  std::mt19937_64 rng(seed);
  std::vector<SrSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Tensor hr;
    switch (i % 3) {
      case 0: hr = gradient_image(size, rng); break;
      case 1: hr = checkerboard_image(size, rng); break;
      default: hr = sinusoid_image(size, rng); break;
    }
    SrSample s;
    s.lr = downsample_box(hr, scale);
    s.hr = std::move(hr);
    out.push_back(std::move(s));
  }
  return out;
}

Var CascadeModel::forward(const Var& input) const {
  Var h = conv2d(input, head[0].var, head[1].var);
  for (const auto& b : blocks) h = b.forward(h);
  return conv2d(h, tail[0].var, tail[1].var);
}

std::vector<Parameter> CascadeModel::all_params() const {
  std::vector<Parameter> ps = head;
  for (const auto& b : blocks) ps.insert(ps.end(), b.params.begin(), b.params.end());
  ps.insert(ps.end(), tail.begin(), tail.end());
  return ps;
}

std::int64_t CascadeModel::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& p : all_params()) n += static_cast<std::int64_t>(p.var->value.size());
  return n;
}

CascadeModel make_cascade(const BlockConfig& block_config, std::size_t block_count,
                          std::uint64_t seed) {
  if (block_count == 0) throw std::invalid_argument("make_cascade: at least one block");
  CascadeModel m;
  m.channels = block_config.channels;
  const std::size_t C = m.channels;
  std::mt19937_64 rng(seed);

  Tensor hw({C, 1, 3, 3});
  fill_xavier_uniform(hw, 9, 9 * C, rng);
  m.head.push_back({make_leaf(std::move(hw), true), "head"});
  m.head.push_back({make_leaf(Tensor({C}), true), "head_bias"});

  for (std::size_t i = 0; i < block_count; ++i)
    m.blocks.push_back(build_block(block_config, seed + 1000003ull * (i + 1)));

  Tensor tw({1, C, 3, 3});
  fill_xavier_uniform(tw, 9 * C, 9, rng);
  m.tail.push_back({make_leaf(std::move(tw), true), "tail"});
  m.tail.push_back({make_leaf(Tensor({1}), true), "tail_bias"});
  return m;
}

namespace {

struct AdamState {
  std::vector<Tensor> m, v;
  std::size_t t = 0;
};

void adam_step(AdamState& st, std::vector<Parameter>& params, const TrainConfig& cfg) {
  if (st.m.empty()) {
    for (auto& p : params) {
      st.m.emplace_back(p.var->value.shape);
      st.v.emplace_back(p.var->value.shape);
    }
  }
  ++st.t;
  const double b1t = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double b2t = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& m = st.m[i];
    Tensor& v = st.v[i];
    Tensor& w = params[i].var->value;
    const Tensor& g = params[i].var->grad;
    for (std::size_t j = 0; j < w.data.size(); ++j) {
      m.data[j] = cfg.beta1 * m.data[j] + (1.0 - cfg.beta1) * g.data[j];
      v.data[j] = cfg.beta2 * v.data[j] + (1.0 - cfg.beta2) * g.data[j] * g.data[j];
      const double mh = m.data[j] / b1t;
      const double vh = v.data[j] / b2t;
      w.data[j] -= cfg.lr * mh / (std::sqrt(vh) + cfg.adam_eps);
    }
  }
}

double frob(const Tensor& t) {
  double acc = 0.0;
  for (double v : t.data) acc += v * v;
  return std::sqrt(acc);
}

Tensor stack_batch(const std::vector<Tensor>& imgs, const std::vector<std::size_t>& idx,
                   std::size_t from, std::size_t to) {
  const auto& s0 = imgs[idx[from]].shape;
  Tensor out({to - from, s0[1], s0[2], s0[3]});
  const std::size_t per = s0[1] * s0[2] * s0[3];
  for (std::size_t b = from; b < to; ++b)
    std::copy(imgs[idx[b]].data.begin(), imgs[idx[b]].data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>((b - from) * per));
  return out;
}

}  // namespace

TrainResult train(CascadeModel& model, const std::vector<SrSample>& dataset,
                  const TrainConfig& config) {
  if (dataset.size() < 2) throw std::invalid_argument("train: at least two samples required");
  if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (config.batch < 1) throw std::invalid_argument("train: batch must be >= 1");
  if (config.lr < 0.0) throw std::invalid_argument("train: learning rate must be >= 0");
  if (config.beta1 <= 0.0 || config.beta1 >= 1.0 || config.beta2 <= 0.0 || config.beta2 >= 1.0)
    throw std::invalid_argument("train: moment coefficients must lie in (0, 1)");

  const std::size_t n = dataset.size();
  const std::size_t H = dataset[0].hr.shape[2];
  const std::size_t scale = H / dataset[0].lr.shape[2];

  // Model inputs: nearest-neighbor upsampled low-resolution images.
  std::vector<Tensor> inputs, targets;
  inputs.reserve(n);
  targets.reserve(n);
  for (const auto& s : dataset) {
    inputs.push_back(scale == 1 ? s.lr : upsample_nearest(s.lr, scale));
    targets.push_back(s.hr);
  }

  // Seeded shuffle; the batch partition stays fixed for every epoch.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(config.seed ^ 0x5eedull);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
  std::size_t train_n = std::max<std::size_t>(1, std::min(n - 1, (4 * n) / 5));
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_n));
  std::vector<std::size_t> eval_idx(order.begin() + static_cast<std::ptrdiff_t>(train_n), order.end());

  auto params = model.all_params();
  AdamState adam;
  TrainResult res;
  res.min_loss = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < config.epochs && !res.diverged; ++epoch) {
    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::vector<double> grad_sum(model.blocks.size(), 0.0);
    std::size_t batches = 0;
    for (std::size_t from = 0; from < train_idx.size(); from += config.batch) {
      const std::size_t to = std::min(train_idx.size(), from + config.batch);
      Var x = make_constant(stack_batch(inputs, train_idx, from, to));
      Var t = make_constant(stack_batch(targets, train_idx, from, to));
      zero_grad(params);
      Var loss = l1_loss(model.forward(x), t);
      const double lv = loss->value.data[0];
      if (!std::isfinite(lv)) {
        res.diverged = true;
        res.diverged_epoch = epoch;
        break;
      }
      backward(loss);
      bool grads_finite = true;
      for (std::size_t bi = 0; bi < model.blocks.size(); ++bi) {
        const double gn = frob(model.blocks[bi].first_conv().var->grad);
        grad_sum[bi] += gn;
        if (!std::isfinite(gn)) grads_finite = false;
      }
      if (!grads_finite) {
        res.diverged = true;
        res.diverged_epoch = epoch;
        break;
      }
      adam_step(adam, params, config);
      loss_sum += lv * static_cast<double>(to - from);
      seen += to - from;
      ++batches;
    }
    if (res.diverged) break;
    const double mean_loss = loss_sum / static_cast<double>(seen);
    res.epoch_loss.push_back(mean_loss);
    res.min_loss = std::min(res.min_loss, mean_loss);
    std::vector<double> row(grad_sum.size());
    for (std::size_t bi = 0; bi < grad_sum.size(); ++bi)
      row[bi] = grad_sum[bi] / static_cast<double>(batches);
    res.grad_norms.push_back(std::move(row));
  }

  // Held-out metrics on whatever state training reached.
  double psnr_sum = 0.0, ssim_sum = 0.0;
  bool psnr_inf = false;
  for (std::size_t i : eval_idx) {
    Var x = make_constant(inputs[i]);
    Var y = model.forward(x);
    const double p = psnr(y->value, targets[i], 1.0);
    if (std::isinf(p))
      psnr_inf = true;
    else
      psnr_sum += p;
    ssim_sum += ssim(y->value, targets[i], 1.0);
  }
  const double ecount = static_cast<double>(eval_idx.size());
  res.metrics.psnr_infinite = psnr_inf;
  res.metrics.psnr = psnr_inf ? std::numeric_limits<double>::infinity() : psnr_sum / ecount;
  res.metrics.ssim = ssim_sum / ecount;
  res.metrics.params = model.parameter_count();
  res.metrics.flops = flops_estimate(cascade_layer_graph(model), H, dataset[0].hr.shape[3]);
  res.metrics.cpu_ms = median_forward_ms(model, inputs[eval_idx[0]]);
  res.metrics.param_eff =
      res.metrics.psnr / (static_cast<double>(res.metrics.params) / 1e6);
  res.metrics.module = model.blocks.empty() ? "cascade" : block_kind_name(model.blocks[0].kind);
  return res;
}

double psnr(const Tensor& x, const Tensor& y, double max_value) {
  if (!x.same_shape(y)) throw std::invalid_argument("psnr: shape mismatch");
  if (max_value <= 0.0) throw std::invalid_argument("psnr: max must be positive");
  double mse = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double d = x.data[i] - y.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(x.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_value * max_value / mse);
}

double ssim(const Tensor& x, const Tensor& y, double max_value) {
  if (!x.same_shape(y)) throw std::invalid_argument("ssim: shape mismatch");
  if (x.ndim() != 4) throw std::invalid_argument("ssim: 4-axis tensor required");
  const std::size_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  constexpr std::size_t win = 8;
  if (H < win || W < win) throw std::invalid_argument("ssim: image smaller than 8x8 window");
  const double c1 = (0.01 * max_value) * (0.01 * max_value);
  const double c2 = (0.03 * max_value) * (0.03 * max_value);
  const double invn = 1.0 / static_cast<double>(win * win);
  double acc = 0.0;
  std::size_t windows = 0;
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t y0 = 0; y0 + win <= H; ++y0)
        for (std::size_t x0 = 0; x0 + win <= W; ++x0) {
          double mx = 0.0, my = 0.0;
          for (std::size_t dy = 0; dy < win; ++dy)
            for (std::size_t dx = 0; dx < win; ++dx) {
              mx += x.at4(b, c, y0 + dy, x0 + dx);
              my += y.at4(b, c, y0 + dy, x0 + dx);
            }
          mx *= invn;
          my *= invn;
          double vx = 0.0, vy = 0.0, cov = 0.0;
          for (std::size_t dy = 0; dy < win; ++dy)
            for (std::size_t dx = 0; dx < win; ++dx) {
              const double ax = x.at4(b, c, y0 + dy, x0 + dx) - mx;
              const double ay = y.at4(b, c, y0 + dy, x0 + dx) - my;
              vx += ax * ax;
              vy += ay * ay;
              cov += ax * ay;
            }
          vx *= invn;
          vy *= invn;
          cov *= invn;
          acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                 ((mx * mx + my * my + c1) * (vx + vy + c2));
          ++windows;
        }
  return acc / static_cast<double>(windows);
}

std::int64_t flops_estimate(const LayerGraph& graph, std::size_t h, std::size_t w) {
  const auto hw = static_cast<std::int64_t>(h * w);
  std::int64_t total = 0;
  std::int64_t cur = 0;  // running channel count for bare relu/add entries
  for (const auto& layer : graph.layers) {
    switch (layer.kind) {
      case LayerKind::conv2d: {
        const std::int64_t cin = layer.in_channels, cout = layer.out_channels;
        const std::int64_t k = static_cast<std::int64_t>(layer.kernel_h) * layer.kernel_w;
        total += 2 * k * cin * cout * hw + (layer.has_bias ? cout * hw : 0);
        cur = cout;
        break;
      }
      case LayerKind::depthwise_conv2d: {
        const std::int64_t c = layer.in_channels > 0 ? layer.in_channels : cur;
        const std::int64_t k = static_cast<std::int64_t>(layer.kernel_h) * layer.kernel_w;
        total += 2 * k * c * hw;
        cur = c;
        break;
      }
      case LayerKind::relu:
      case LayerKind::elementwise_add: {
        const std::int64_t c = layer.in_channels > 0 ? layer.in_channels : cur;
        total += hw * c;
        break;
      }
      default:
        break;  // attention/norm markers carry no counted arithmetic
    }
  }
  return total;
}

LayerGraph cascade_layer_graph(const CascadeModel& model) {
  LayerGraph g;
  const int C = static_cast<int>(model.channels);
  auto conv = [](int cin, int cout, int k) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.in_channels = cin;
    s.out_channels = cout;
    s.kernel_h = k;
    s.kernel_w = k;
    s.has_bias = true;
    return s;
  };
  auto dwconv = [](int c, int k) {
    LayerSpec s;
    s.kind = LayerKind::depthwise_conv2d;
    s.in_channels = c;
    s.out_channels = c;
    s.kernel_h = k;
    s.kernel_w = k;
    s.has_bias = true;
    return s;
  };
  auto unary = [](LayerKind kind, int c) {
    LayerSpec s;
    s.kind = kind;
    s.in_channels = c;
    s.out_channels = c;
    return s;
  };
  g.layers.push_back(conv(1, C, 3));
  for (const auto& b : model.blocks) {
    const int k = static_cast<int>(b.kernel);
    for (int st = 0; st < b.topology.stages; ++st) {
      g.layers.push_back(b.depthwise ? dwconv(C, k) : conv(C, C, k));
      g.layers.push_back(unary(LayerKind::relu, C));
      g.layers.push_back(b.depthwise ? dwconv(C, k) : conv(C, C, k));
      if (b.topology.carried[st]) g.layers.push_back(unary(LayerKind::elementwise_add, C));
      if (st >= 1 && b.topology.coefficients[st - 1] != 0.0)
        g.layers.push_back(unary(LayerKind::elementwise_add, C));
    }
  }
  g.layers.push_back(conv(C, 1, 3));
  return g;
}

double median_forward_ms(const CascadeModel& model, const Tensor& input) {
  std::vector<double> times;
  times.reserve(5);
  for (int i = 0; i < 5; ++i) {
    Var x = make_constant(input);
    const auto t0 = std::chrono::steady_clock::now();
    Var y = model.forward(x);
    const auto t1 = std::chrono::steady_clock::now();
    (void)y;
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[2];
}

}  // namespace uaelab
