#include "uaelab/autograd.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace uaelab {

namespace {

Var make_node(Tensor value, std::vector<Var> parents) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->grad = Tensor(n->value.shape);
  n->parents = std::move(parents);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  return n;
}

void check4(const Var& v, const char* what) {
  if (v->value.ndim() != 4)
    throw std::invalid_argument(std::string(what) + ": 4-axis tensor required");
}

}  // namespace

Var make_leaf(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->grad = Tensor(n->value.shape);
  n->requires_grad = requires_grad;
  return n;
}

Var make_constant(Tensor value) { return make_leaf(std::move(value), false); }

Var conv2d(const Var& input, const Var& weight, const Var& bias) {
  check4(input, "conv2d input");
  check4(weight, "conv2d weight");
  const auto& is = input->value.shape;
  const auto& ws = weight->value.shape;
  if (bias->value.ndim() != 1 || bias->value.shape[0] != ws[0])
    throw std::invalid_argument("conv2d: bias must have one axis of size out-channels");
  if (ws[1] != is[1]) throw std::invalid_argument("conv2d: channel mismatch");
  const std::size_t B = is[0], Cin = is[1], H = is[2], W = is[3];
  const std::size_t Cout = ws[0], kh = ws[2], kw = ws[3];
  const long ph = static_cast<long>((kh - 1) / 2), pw = static_cast<long>((kw - 1) / 2);

  Tensor out({B, Cout, H, W});
  const double* in = input->value.data.data();
  const double* w = weight->value.data.data();
  const double* bi = bias->value.data.data();
  double* o = out.data.data();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t co = 0; co < Cout; ++co)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
          double acc = bi[co];
          for (std::size_t ci = 0; ci < Cin; ++ci)
            for (std::size_t dy = 0; dy < kh; ++dy) {
              const long iy = static_cast<long>(y) + static_cast<long>(dy) - ph;
              if (iy < 0 || iy >= static_cast<long>(H)) continue;
              for (std::size_t dx = 0; dx < kw; ++dx) {
                const long ix = static_cast<long>(x) + static_cast<long>(dx) - pw;
                if (ix < 0 || ix >= static_cast<long>(W)) continue;
                acc += in[((b * Cin + ci) * H + iy) * W + ix] *
                       w[((co * Cin + ci) * kh + dy) * kw + dx];
              }
            }
          o[((b * Cout + co) * H + y) * W + x] = acc;
        }

  Var node = make_node(std::move(out), {input, weight, bias});
  if (node->requires_grad) {
    Node* np = node.get();
    Node* ip = input.get();
    Node* wp = weight.get();
    Node* bp = bias.get();
    node->backprop = [np, ip, wp, bp, B, Cin, H, W, Cout, kh, kw, ph, pw]() {
      const double* g = np->grad.data.data();
      const double* in = ip->value.data.data();
      const double* w = wp->value.data.data();
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t co = 0; co < Cout; ++co)
          for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x) {
              const double gv = g[((b * Cout + co) * H + y) * W + x];
              if (gv == 0.0) continue;
              if (bp->requires_grad) bp->grad.data[co] += gv;
              for (std::size_t ci = 0; ci < Cin; ++ci)
                for (std::size_t dy = 0; dy < kh; ++dy) {
                  const long iy = static_cast<long>(y) + static_cast<long>(dy) - ph;
                  if (iy < 0 || iy >= static_cast<long>(H)) continue;
                  for (std::size_t dx = 0; dx < kw; ++dx) {
                    const long ix = static_cast<long>(x) + static_cast<long>(dx) - pw;
                    if (ix < 0 || ix >= static_cast<long>(W)) continue;
                    const std::size_t ii = ((b * Cin + ci) * H + iy) * W + ix;
                    const std::size_t wi = ((co * Cin + ci) * kh + dy) * kw + dx;
                    if (wp->requires_grad) wp->grad.data[wi] += gv * in[ii];
                    if (ip->requires_grad) ip->grad.data[ii] += gv * w[wi];
                  }
                }
            }
    };
  }
  return node;
}

Var depthwise_conv2d(const Var& input, const Var& weight, const Var& bias) {
  check4(input, "depthwise_conv2d input");
  check4(weight, "depthwise_conv2d weight");
  const auto& is = input->value.shape;
  const auto& ws = weight->value.shape;
  if (ws[1] != 1) throw std::invalid_argument("depthwise_conv2d: weight second axis must be 1");
  if (ws[0] != is[1]) throw std::invalid_argument("depthwise_conv2d: channel mismatch");
  if (bias->value.ndim() != 1 || bias->value.shape[0] != ws[0])
    throw std::invalid_argument("depthwise_conv2d: bias must have one axis of size channels");
  const std::size_t B = is[0], C = is[1], H = is[2], W = is[3];
  const std::size_t kh = ws[2], kw = ws[3];
  const long ph = static_cast<long>((kh - 1) / 2), pw = static_cast<long>((kw - 1) / 2);

  Tensor out({B, C, H, W});
  const double* in = input->value.data.data();
  const double* w = weight->value.data.data();
  const double* bi = bias->value.data.data();
  double* o = out.data.data();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
          double acc = bi[c];
          for (std::size_t dy = 0; dy < kh; ++dy) {
            const long iy = static_cast<long>(y) + static_cast<long>(dy) - ph;
            if (iy < 0 || iy >= static_cast<long>(H)) continue;
            for (std::size_t dx = 0; dx < kw; ++dx) {
              const long ix = static_cast<long>(x) + static_cast<long>(dx) - pw;
              if (ix < 0 || ix >= static_cast<long>(W)) continue;
              acc += in[((b * C + c) * H + iy) * W + ix] * w[(c * kh + dy) * kw + dx];
            }
          }
          o[((b * C + c) * H + y) * W + x] = acc;
        }

  Var node = make_node(std::move(out), {input, weight, bias});
  if (node->requires_grad) {
    Node* np = node.get();
    Node* ip = input.get();
    Node* wp = weight.get();
    Node* bp = bias.get();
    node->backprop = [np, ip, wp, bp, B, C, H, W, kh, kw, ph, pw]() {
      const double* g = np->grad.data.data();
      const double* in = ip->value.data.data();
      const double* w = wp->value.data.data();
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x) {
              const double gv = g[((b * C + c) * H + y) * W + x];
              if (gv == 0.0) continue;
              if (bp->requires_grad) bp->grad.data[c] += gv;
              for (std::size_t dy = 0; dy < kh; ++dy) {
                const long iy = static_cast<long>(y) + static_cast<long>(dy) - ph;
                if (iy < 0 || iy >= static_cast<long>(H)) continue;
                for (std::size_t dx = 0; dx < kw; ++dx) {
                  const long ix = static_cast<long>(x) + static_cast<long>(dx) - pw;
                  if (ix < 0 || ix >= static_cast<long>(W)) continue;
                  const std::size_t ii = ((b * C + c) * H + iy) * W + ix;
                  const std::size_t wi = (c * kh + dy) * kw + dx;
                  if (wp->requires_grad) wp->grad.data[wi] += gv * in[ii];
                  if (ip->requires_grad) ip->grad.data[ii] += gv * w[wi];
                }
              }
            }
    };
  }
  return node;
}

Var relu(const Var& x) {
  Tensor out(x->value.shape);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = x->value.data[i] > 0.0 ? x->value.data[i] : 0.0;
  Var node = make_node(std::move(out), {x});
  if (node->requires_grad) {
    Node* np = node.get();
    Node* xp = x.get();
    node->backprop = [np, xp]() {
      if (!xp->requires_grad) return;
      for (std::size_t i = 0; i < np->grad.data.size(); ++i)
        if (xp->value.data[i] > 0.0) xp->grad.data[i] += np->grad.data[i];
    };
  }
  return node;
}

Var add(const Var& a, const Var& b) {
  if (!a->value.same_shape(b->value)) throw std::invalid_argument("add: shape mismatch");
  Tensor out(a->value.shape);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = a->value.data[i] + b->value.data[i];
  Var node = make_node(std::move(out), {a, b});
  if (node->requires_grad) {
    Node* np = node.get();
    Node* ap = a.get();
    Node* bp = b.get();
    node->backprop = [np, ap, bp]() {
      for (std::size_t i = 0; i < np->grad.data.size(); ++i) {
        const double g = np->grad.data[i];
        if (ap->requires_grad) ap->grad.data[i] += g;
        if (bp->requires_grad) bp->grad.data[i] += g;
      }
    };
  }
  return node;
}

Var scaled_add(const Var& x, const Var& y, double c) {
  if (!x->value.same_shape(y->value)) throw std::invalid_argument("scaled_add: shape mismatch");
  Tensor out(x->value.shape);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = x->value.data[i] + c * y->value.data[i];
  Var node = make_node(std::move(out), {x, y});
  if (node->requires_grad) {
    Node* np = node.get();
    Node* xp = x.get();
    Node* yp = y.get();
    node->backprop = [np, xp, yp, c]() {
      for (std::size_t i = 0; i < np->grad.data.size(); ++i) {
        const double g = np->grad.data[i];
        if (xp->requires_grad) xp->grad.data[i] += g;
        if (yp->requires_grad) yp->grad.data[i] += c * g;
      }
    };
  }
  return node;
}

Var l1_loss(const Var& pred, const Var& target) {
  if (!pred->value.same_shape(target->value))
    throw std::invalid_argument("l1_loss: shape mismatch");
  const std::size_t n = pred->value.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += std::abs(pred->value.data[i] - target->value.data[i]);
  Tensor out({1});
  out.data[0] = acc / static_cast<double>(n);
  Var node = make_node(std::move(out), {pred, target});
  if (node->requires_grad) {
    Node* np = node.get();
    Node* pp = pred.get();
    Node* tp = target.get();
    node->backprop = [np, pp, tp, n]() {
      const double g = np->grad.data[0] / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = pp->value.data[i] - tp->value.data[i];
        const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        if (pp->requires_grad) pp->grad.data[i] += g * s;
        if (tp->requires_grad) tp->grad.data[i] -= g * s;
      }
    };
  }
  return node;
}

void backward(const Var& out) {
  if (out->value.size() != 1)
    throw std::invalid_argument("backward: output must be a single element");
  if (!out->requires_grad) return;

  // Iterative post-order DFS to get a reverse topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(out.get(), 0);
  seen.insert(out.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next].get();
      ++next;
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  out->grad.data[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backprop) (*it)->backprop();
}

void zero_grad(std::vector<Parameter>& params) {
  for (auto& p : params) p.var->grad.fill(0.0);
}

void zero_grad(const Var& v) { v->grad.fill(0.0); }

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double xavier_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void fill_xavier_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out,
                         std::mt19937_64& rng) {
  const double limit = xavier_limit(fan_in, fan_out);
  for (double& v : t.data) v = (2.0 * uniform01(rng) - 1.0) * limit;
}

}  // namespace uaelab
