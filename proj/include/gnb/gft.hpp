#pragma once

#include <array>
#include <cmath>
#include <iterator>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "gnb/error.hpp"
#include "gnb/tensor.hpp"

namespace gnb {

/// `.gft` dense tensor file: "GFT1", u32 version (1), u32 dtype (1 = float32),
/// u64 rows, u64 cols, then rows*cols float32 values in row-major order.
/// Every field is little-endian.
namespace gft {

inline constexpr std::array<char, 4> kMagic{'G', 'F', 'T', '1'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint32_t kFloat32 = 1;
inline constexpr std::size_t kHeaderBytes = 28;

namespace detail {
template <typename T>
void put_le(std::vector<unsigned char>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
template <typename T>
T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}
}  // namespace detail

inline std::vector<unsigned char> encode(const Matrix& m) {
  std::vector<unsigned char> out;
  out.reserve(kHeaderBytes + static_cast<std::size_t>(m.size()) * 4);
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  detail::put_le<std::uint32_t>(out, kVersion);
  detail::put_le<std::uint32_t>(out, kFloat32);
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(i, j))));
    }
  }
  return out;
}

inline Matrix decode(const std::vector<unsigned char>& bytes, const std::string& origin) {
  auto fail = [&](std::size_t offset, const std::string& what) {
    return FormatError(origin + ": offset " + std::to_string(offset) + ": " + what);
  };
  if (bytes.size() < kHeaderBytes) throw fail(bytes.size(), "truncated header");
  if (std::memcmp(bytes.data(), kMagic.data(), 4) != 0) throw fail(0, "bad magic (expected GFT1)");
  if (detail::get_le<std::uint32_t>(bytes.data() + 4) != kVersion) throw fail(4, "unsupported version");
  if (detail::get_le<std::uint32_t>(bytes.data() + 8) != kFloat32) throw fail(8, "unsupported dtype code");
  const auto rows = detail::get_le<std::uint64_t>(bytes.data() + 12);
  const auto cols = detail::get_le<std::uint64_t>(bytes.data() + 20);
  const std::uint64_t expected = kHeaderBytes + rows * cols * 4;
  if (bytes.size() != expected) {
    throw fail(bytes.size(), "payload size " + std::to_string(bytes.size()) + " != expected " +
                                 std::to_string(expected));
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const unsigned char* p = bytes.data() + kHeaderBytes;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j, p += 4) {
      const float f = std::bit_cast<float>(detail::get_le<std::uint32_t>(p));
      if (!std::isfinite(f)) {
        throw fail(static_cast<std::size_t>(p - bytes.data()), "non-finite value");
      }
      m(i, j) = f;
    }
  }
  return m;
}

inline void write(const std::string& path, const Matrix& m) {
  const auto bytes = encode(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

inline Matrix read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes, path);
}

}  // namespace gft
}  // namespace gnb
