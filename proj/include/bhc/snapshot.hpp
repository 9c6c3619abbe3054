#pragma once
// Binary field snapshots: "BCH4", u32 version = 1, u32 N, f64 L, then N^4
// f64 samples, all little-endian, fourth axis fastest.

#include "bhc/grid.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bhc {

inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  std::array<unsigned char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  os.write(reinterpret_cast<const char*>(b.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is, const std::string& path) {
  std::array<unsigned char, sizeof(T)> b;
  if (!is.read(reinterpret_cast<char*>(b.data()), sizeof(T)))
    throw std::runtime_error("snapshot " + path + ": truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

}  // namespace detail

inline void write_snapshot(const std::string& path, const Field& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("snapshot " + path + ": cannot open for writing");
  os.write("BCH4", 4);
  detail::put_le<std::uint32_t>(os, kSnapshotVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(u.grid().n()));
  detail::put_le<double>(os, u.grid().length());
  for (double v : u.values()) detail::put_le<double>(os, v);
  if (!os) throw std::runtime_error("snapshot " + path + ": write failed");
}

inline Field read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("snapshot " + path + ": cannot open for reading");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "BCH4", 4) != 0)
    throw std::runtime_error("snapshot " + path + ": bad magic");
  const auto version = detail::get_le<std::uint32_t>(is, path);
  if (version != kSnapshotVersion)
    throw std::runtime_error("snapshot " + path + ": unsupported version " + std::to_string(version));
  const auto n = detail::get_le<std::uint32_t>(is, path);
  const auto L = detail::get_le<double>(is, path);
  if (n < 2 || n > 1024) throw std::runtime_error("snapshot " + path + ": implausible N " + std::to_string(n));
  Grid g(static_cast<int>(n), L);
  std::vector<double> data(g.size());
  for (auto& v : data) v = detail::get_le<double>(is, path);
  Field u(g, std::move(data));
  if (!u.all_finite()) throw std::runtime_error("snapshot " + path + ": non-finite samples");
  return u;
}

}  // namespace bhc
