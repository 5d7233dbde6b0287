#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "uaelab/tensor.hpp"

using namespace uaelab;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<unsigned char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("tensor construction and shape rules") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.ndim() == 2);
  CHECK(t.data.size() == 6);

  CHECK_THROWS_AS(Tensor(std::vector<std::size_t>{}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor({2, 0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor({1, 2, 3, 4, 5}), std::invalid_argument);

  Tensor four({2, 3, 4, 5});
  four.at4(1, 2, 3, 4) = 42.0;
  CHECK(four.index4(1, 2, 3, 4) == four.size() - 1);
  CHECK(four.at4(1, 2, 3, 4) == 42.0);
  CHECK_THROWS_AS(t.index4(0, 0, 0, 0), std::logic_error);

  t.fill(2.5);
  for (double v : t.data) CHECK(v == 2.5);
  CHECK(all_finite(t));
  t.data[1] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(all_finite(t));

  Tensor u({2, 3});
  CHECK(t.same_shape(u));
  CHECK_FALSE(four.same_shape(u));
}

TEST_CASE("binary round trip preserves every bit pattern") {
  Tensor t({1, 2, 1, 3});
  t.data = {1.0 / 3.0, -0.0, 1e-300, -1e300, 3.141592653589793, 6.25};
  const std::string path = temp_path("uaelab_roundtrip.ten");
  save_tensor(t, path);
  const Tensor u = load_tensor(path);
  REQUIRE(u.shape == t.shape);
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    std::uint64_t bits_a = 0, bits_b = 0;
    std::memcpy(&bits_a, &t.data[i], 8);
    std::memcpy(&bits_b, &u.data[i], 8);
    CHECK(bits_a == bits_b);
  }

  // Shorter shapes reload in the padded four-axis layout with the same data.
  Tensor narrow({2, 3});
  narrow.data = t.data;
  save_tensor(narrow, path);
  const Tensor wide = load_tensor(path);
  CHECK(wide.shape == std::vector<std::size_t>{1, 1, 2, 3});
  CHECK(wide.data == narrow.data);
}

TEST_CASE("file header is four little-endian dims, left padded with ones") {
  Tensor t({2, 3});
  t.data = {0, 1, 2, 3, 4, 5};
  const std::string path = temp_path("uaelab_header.ten");
  save_tensor(t, path);
  const auto bytes = read_bytes(path);
  REQUIRE(bytes.size() == 16 + 6 * 8);
  auto dim_at = [&](std::size_t i) {
    return static_cast<std::uint32_t>(bytes[4 * i]) |
           (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
           (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
  };
  CHECK(dim_at(0) == 1);
  CHECK(dim_at(1) == 1);
  CHECK(dim_at(2) == 2);
  CHECK(dim_at(3) == 3);
  // Payload is little-endian float64; spot-check the value 1.0.
  double v = 0.0;
  std::memcpy(&v, bytes.data() + 16 + 8, 8);
  CHECK(v == 1.0);

  // A reloaded 2-axis tensor widens to the padded 4-axis layout.
  const Tensor u = load_tensor(path);
  CHECK(u.shape == std::vector<std::size_t>{1, 1, 2, 3});
  CHECK(u.at4(0, 0, 1, 2) == 5.0);
}

TEST_CASE("malformed tensor files are rejected") {
  const std::string path = temp_path("uaelab_malformed.ten");

  {
    std::ofstream out(path, std::ios::binary);
    out.write("\x01\x00\x00\x00", 4);  // header cut short
  }
  CHECK_THROWS_AS(load_tensor(path), std::runtime_error);

  {
    Tensor t({2});
    t.data = {1.0, 2.0};
    save_tensor(t, path);
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out.write("x", 1);  // trailing byte
  }
  CHECK_THROWS_AS(load_tensor(path), std::runtime_error);

  {
    Tensor t({2});
    t.data = {1.0, 2.0};
    save_tensor(t, path);
    std::filesystem::resize_file(path, 16 + 8);  // payload cut short
  }
  CHECK_THROWS_AS(load_tensor(path), std::runtime_error);

  {
    std::ofstream out(path, std::ios::binary);
    const std::uint32_t dims[4] = {1, 1, 0, 2};  // zero dimension
    out.write(reinterpret_cast<const char*>(dims), 16);
  }
  CHECK_THROWS_AS(load_tensor(path), std::runtime_error);

  CHECK_THROWS_AS(load_tensor("/nonexistent/file.ten"), std::runtime_error);
}
