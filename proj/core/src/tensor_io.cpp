#include "bev/tensor_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace bev {

namespace {

constexpr char kMagic[4] = {'B', 'E', 'V', 'T'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 1;

[[noreturn]] void fail(const std::string& what, std::size_t offset) {
  throw TensorFormatError(what + " (byte offset " + std::to_string(offset) + ")");
}

}  // namespace

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorFormatError("cannot open tensor file: " + path.string());

  char magic[4];
  if (!in.read(magic, 4)) fail("truncated header reading magic", 0);
  if (std::memcmp(magic, kMagic, 4) != 0) fail("bad magic", 0);

  std::uint16_t version = 0;
  if (!in.read(reinterpret_cast<char*>(&version), 2)) fail("truncated header reading version", 4);
  if (version != kVersion) fail("unsupported version " + std::to_string(version), 4);

  std::uint8_t dtype = 0, ndim = 0;
  if (!in.read(reinterpret_cast<char*>(&dtype), 1)) fail("truncated header reading dtype", 6);
  if (dtype != kDtypeF32) fail("unsupported dtype " + std::to_string(dtype), 6);
  if (!in.read(reinterpret_cast<char*>(&ndim), 1)) fail("truncated header reading ndim", 7);

  Tensor t;
  t.dims.resize(ndim);
  for (int i = 0; i < ndim; ++i) {
    if (!in.read(reinterpret_cast<char*>(&t.dims[i]), 4)) {
      fail("truncated header reading dims", 8 + 4 * static_cast<std::size_t>(i));
    }
  }
  const std::size_t header = 8 + 4 * static_cast<std::size_t>(ndim);
  const std::size_t count = t.element_count();
  t.data.resize(count);
  if (count > 0 &&
      !in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(count * 4))) {
    fail("truncated payload", header + static_cast<std::size_t>(in.gcount()));
  }
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  if (tensor.data.size() != tensor.element_count()) {
    throw TensorFormatError("tensor payload does not match dims");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TensorFormatError("cannot open tensor file for writing: " + path.string());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), 2);
  out.write(reinterpret_cast<const char*>(&kDtypeF32), 1);
  const std::uint8_t ndim = static_cast<std::uint8_t>(tensor.dims.size());
  out.write(reinterpret_cast<const char*>(&ndim), 1);
  for (const auto d : tensor.dims) out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(tensor.data.data()),
            static_cast<std::streamsize>(tensor.data.size() * 4));
  if (!out) throw TensorFormatError("short write: " + path.string());
}

Tensor to_tensor(const std::vector<double>& values, std::vector<std::uint32_t> dims) {
  Tensor t;
  t.dims = std::move(dims);
  t.data.reserve(values.size());
  for (const double v : values) t.data.push_back(static_cast<float>(v));
  if (t.data.size() != t.element_count()) throw TensorFormatError("to_tensor: dims mismatch");
  return t;
}

Tensor to_tensor(const std::vector<int>& values, std::vector<std::uint32_t> dims) {
  Tensor t;
  t.dims = std::move(dims);
  t.data.reserve(values.size());
  for (const int v : values) t.data.push_back(static_cast<float>(v));
  if (t.data.size() != t.element_count()) throw TensorFormatError("to_tensor: dims mismatch");
  return t;
}

std::vector<double> tensor_to_doubles(const Tensor& t) {
  return {t.data.begin(), t.data.end()};
}

std::vector<int> tensor_to_ints(const Tensor& t) {
  std::vector<int> out;
  out.reserve(t.data.size());
  for (const float v : t.data) out.push_back(static_cast<int>(std::lround(v)));
  return out;
}

}  // namespace bev
