#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace bev {

// Dense row-major float32 tensor, the payload of the on-disk format.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (const auto d : dims) n *= d;
    return dims.empty() ? 0 : n;
  }
};

struct TensorFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary layout, all little-endian:
//   magic   "BEVT"            4 bytes
//   version u16 = 1
//   dtype   u8  = 1 (float32)
//   ndim    u8
//   dims    ndim x u32
//   payload product(dims) x 4 bytes, row-major
// Reads reject wrong magic/version/dtype and truncated payloads with the
// failing byte offset in the message.
Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);

// Conversions between the double-precision working arrays and file tensors.
Tensor to_tensor(const std::vector<double>& values, std::vector<std::uint32_t> dims);
Tensor to_tensor(const std::vector<int>& values, std::vector<std::uint32_t> dims);
std::vector<double> tensor_to_doubles(const Tensor& t);
std::vector<int> tensor_to_ints(const Tensor& t);

}  // namespace bev
