#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uaelab/blocks.hpp"
#include "uaelab/descriptor.hpp"
#include "uaelab/tensor.hpp"

// Toy-scale restoration bench: procedural image pairs, a small residual
// cascade, Adam training with L1 loss, and the metric kit (PSNR, SSIM,
// FLOPs, parameter efficiency, rank correlation).

namespace uaelab {

struct SrSample {
  Tensor hr;  // (1, 1, H, W), values in [0, 1]
  Tensor lr;  // (1, 1, H/s, W/s)
};

// Procedural mixture of oriented gradients, checkerboards, and band-limited
// sinusoid textures; low-resolution side is an s x s box average.
std::vector<SrSample> make_toy_dataset(std::size_t count, std::size_t size,
                                       std::size_t scale, std::uint64_t seed);

Tensor downsample_box(const Tensor& hr, std::size_t scale);
Tensor upsample_nearest(const Tensor& lr, std::size_t scale);

struct CascadeModel {
  std::size_t channels = 0;
  std::vector<Parameter> head;  // conv 1 -> C weight/bias
  std::vector<BlockInstance> blocks;
  std::vector<Parameter> tail;  // conv C -> 1 weight/bias

  Var forward(const Var& input) const;
  std::vector<Parameter> all_params() const;
  std::int64_t parameter_count() const;
};

CascadeModel make_cascade(const BlockConfig& block_config, std::size_t block_count,
                          std::uint64_t seed);

struct TrainConfig {
  double lr = 1e-3;
  int epochs = 40;
  std::size_t batch = 4;
  std::uint64_t seed = 42;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct MetricRecord {
  std::string module;
  double psnr = 0.0;
  bool psnr_infinite = false;
  double ssim = 0.0;
  std::int64_t params = 0;
  std::int64_t flops = 0;
  double cpu_ms = 0.0;
  double param_eff = 0.0;  // psnr per million parameters
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean L1 per epoch, finite entries only
  double min_loss = 0.0;
  bool diverged = false;
  int diverged_epoch = -1;  // first epoch with a non-finite loss or gradient
  // grad_norms[epoch][block]: mean over the epoch's batches of the
  // Frobenius norm of each block's first-conv weight gradient.
  std::vector<std::vector<double>> grad_norms;
  MetricRecord metrics;
};

// Adam on L1 loss over nearest-neighbor pre-upsampled inputs. The sample
// order and batch partition are fixed by the config seed once, before the
// first epoch, so runs are bitwise reproducible and zero-rate training is
// exactly frozen. Training halts at the first non-finite loss or gradient;
// metrics come from the held-out 20% split.
TrainResult train(CascadeModel& model, const std::vector<SrSample>& dataset,
                  const TrainConfig& config);

// 10 log10(max^2 / mse); equal tensors give +infinity.
double psnr(const Tensor& x, const Tensor& y, double max_value);

// Mean over all 8x8 stride-1 windows and channels, uniform weighting,
// C1 = (0.01 max)^2, C2 = (0.03 max)^2. Throws when an image side is
// smaller than the window.
double ssim(const Tensor& x, const Tensor& y, double max_value = 1.0);

// Forward-pass cost of a layer graph at the given spatial size:
// conv 2 kh kw Cin Cout H W plus Cout H W bias adds, depthwise
// 2 kh kw C H W, relu and add H W C. Layers with unspecified channels
// inherit the running channel count; bare markers contribute nothing.
std::int64_t flops_estimate(const LayerGraph& graph, std::size_t h, std::size_t w);

LayerGraph cascade_layer_graph(const CascadeModel& model);

// Median of five timed forward passes, milliseconds.
double median_forward_ms(const CascadeModel& model, const Tensor& input);

struct SpearmanResult {
  double rho = 0.0;
  bool defined = false;  // false when either side has zero rank variance
};

// Rank correlation with average ranks on ties.
SpearmanResult spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys);

struct CorrelationEntry {
  std::string variant;  // score column name
  std::string metric;   // measured column name
  double rho = 0.0;
  bool defined = false;
  bool low_power = false;  // fewer than 3 records
};

// Spearman rho between every score column and every measured metric
// column (params, flops, psnr, cpu_ms, param_eff).
std::vector<CorrelationEntry> correlate_metrics(
    const std::vector<MetricRecord>& records,
    const std::vector<std::pair<std::string, std::vector<double>>>& score_columns);

}  // namespace uaelab
