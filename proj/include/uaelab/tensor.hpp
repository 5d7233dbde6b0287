#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

// Dense double-precision tensors with up to four axes, used both for
// activations (batch, channels, height, width) and for weights
// (out-channels, in-channels, kernel-h, kernel-w).

namespace uaelab {

struct Tensor {
  std::vector<std::size_t> shape;  // 1 to 4 axes
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);

  std::size_t size() const;
  std::size_t ndim() const { return shape.size(); }

  // Flat index helpers for the common 4-axis layout.
  std::size_t index4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const;
  double& at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d);
  double at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const;

  void fill(double v);
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

bool all_finite(const Tensor& t);

// Binary tensor format: four little-endian uint32 dimensions (shorter
// shapes are left padded with ones) followed by the little-endian float64
// payload in row-major order.
void save_tensor(const Tensor& t, const std::string& path);
Tensor load_tensor(const std::string& path);

}  // namespace uaelab
