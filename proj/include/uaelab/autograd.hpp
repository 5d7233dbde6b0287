#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "uaelab/tensor.hpp"

// Reverse-mode automatic differentiation over double tensors. Each forward
// op records a closure that scatters this node's gradient into its parents;
// backward() walks the tape in reverse topological order. Leaves persist
// across iterations (parameters), interior nodes are rebuilt every forward
// pass, and gradients accumulate until explicitly zeroed, which makes
// weight sharing work with no extra machinery: a leaf referenced by several
// ops simply receives several accumulations.

namespace uaelab {

struct Node {
  Tensor value;
  Tensor grad;  // same shape as value, zero until backward runs
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backprop;  // adds into parents' grads
};

using Var = std::shared_ptr<Node>;

Var make_leaf(Tensor value, bool requires_grad);
Var make_constant(Tensor value);

// 2-d convolution (cross-correlation), stride 1, zero "same" padding.
// input (B, Cin, H, W), weight (Cout, Cin, kh, kw), bias (Cout).
Var conv2d(const Var& input, const Var& weight, const Var& bias);

// Per-channel convolution: weight (C, 1, kh, kw), bias (C).
Var depthwise_conv2d(const Var& input, const Var& weight, const Var& bias);

// max(0, x); the subgradient at exactly zero is taken as zero.
Var relu(const Var& x);

// Elementwise sum of same-shape tensors.
Var add(const Var& a, const Var& b);

// x + c * y for a plain scalar coefficient c.
Var scaled_add(const Var& x, const Var& y, double c);

// Mean absolute error over all elements; returns a 1-element tensor.
// The subgradient of |u| at u = 0 is taken as zero.
Var l1_loss(const Var& pred, const Var& target);

// Seeds the (single-element) output gradient with 1 and propagates through
// the recorded tape. Gradients accumulate across calls until zeroed.
void backward(const Var& out);

struct Parameter {
  Var var;
  std::string label;
};

void zero_grad(std::vector<Parameter>& params);
void zero_grad(const Var& v);

// Uniform draw in [0, 1) built directly from the top 53 bits of the
// engine output, identical across platforms for a fixed seed.
double uniform01(std::mt19937_64& rng);

double xavier_limit(std::size_t fan_in, std::size_t fan_out);
void fill_xavier_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out,
                         std::mt19937_64& rng);

}  // namespace uaelab
