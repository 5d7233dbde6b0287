#include "uaelab/tensor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace uaelab {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& shape) {
  if (shape.empty() || shape.size() > 4)
    throw std::invalid_argument("tensor: shape must have 1 to 4 axes");
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("tensor: zero-sized axis");
    if (d > (1ull << 31)) throw std::invalid_argument("tensor: axis too large");
    n *= d;
  }
  return n;
}

void put_u32_le(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("tensor load: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64_le(std::ofstream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64_le(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("tensor load: truncated payload");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  data.assign(checked_product(shape), 0.0);
}

std::size_t Tensor::size() const { return data.size(); }

std::size_t Tensor::index4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
  if (shape.size() != 4) throw std::logic_error("tensor: index4 on non-4-axis tensor");
  return ((a * shape[1] + b) * shape[2] + c) * shape[3] + d;
}

double& Tensor::at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  return data[index4(a, b, c, d)];
}

double Tensor::at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
  return data[index4(a, b, c, d)];
}

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

bool all_finite(const Tensor& t) {
  for (double v : t.data)
    if (!std::isfinite(v)) return false;
  return true;
}

void save_tensor(const Tensor& t, const std::string& path) {
  if (t.shape.empty()) throw std::invalid_argument("save_tensor: empty tensor");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_tensor: cannot open " + path);
  // Left-pad the shape with ones so the header is always four dims.
  std::uint32_t dims[4] = {1, 1, 1, 1};
  const std::size_t off = 4 - t.shape.size();
  for (std::size_t i = 0; i < t.shape.size(); ++i)
    dims[off + i] = static_cast<std::uint32_t>(t.shape[i]);
  for (std::uint32_t d : dims) put_u32_le(out, d);
  for (double v : t.data) put_f64_le(out, v);
  if (!out) throw std::runtime_error("save_tensor: write failed for " + path);
}

Tensor load_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_tensor: cannot open " + path);
  std::vector<std::size_t> shape(4);
  for (std::size_t i = 0; i < 4; ++i) {
    const std::uint32_t d = get_u32_le(in);
    if (d == 0) throw std::runtime_error("load_tensor: zero dimension in header");
    shape[i] = d;
  }
  Tensor t(shape);
  for (double& v : t.data) v = get_f64_le(in);
  // A well-formed file ends exactly after the payload.
  char extra;
  if (in.read(&extra, 1)) throw std::runtime_error("load_tensor: trailing bytes in " + path);
  return t;
}

}  // namespace uaelab
