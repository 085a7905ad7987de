#pragma once

// Field snapshots: a 24-byte header of three little-endian uint64 (N, N, N)
// followed by N^3 little-endian float64 values, x fastest. A CSV variant
// (x,y,z,value) exists for quick inspection.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <span>
#include <vector>

#include "lqc/lattice.hpp"

namespace lqc {

namespace detail {

template <class T> T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T> void put(std::ostream &os, T v) {
  v = to_little_endian(v);
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <class T> T get(std::istream &is) {
  T v{};
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is)
    throw DomainError("truncated field file");
  return to_little_endian(v);
}

} // namespace detail

inline void write_field_binary(const std::filesystem::path &path, const LatticeSpec &lattice,
                               std::span<const double> values) {
  if (values.size() != lattice.sites())
    throw DomainError("field size does not match lattice");
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw Error("cannot open " + path.string() + " for writing");
  const auto n = static_cast<std::uint64_t>(lattice.n());
  for (int k = 0; k < 3; ++k)
    detail::put(os, n);
  for (double v : values)
    detail::put(os, v);
}

struct FieldSnapshot {
  LatticeSpec lattice;
  std::vector<double> values;
};

inline FieldSnapshot read_field_binary(const std::filesystem::path &path,
                                       Boundary boundary = Boundary::open) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw Error("cannot open " + path.string());
  const auto nx = detail::get<std::uint64_t>(is);
  const auto ny = detail::get<std::uint64_t>(is);
  const auto nz = detail::get<std::uint64_t>(is);
  if (nx != ny || ny != nz)
    throw DomainError("field header is not cubic");
  FieldSnapshot snap{LatticeSpec(static_cast<std::size_t>(nx), boundary), {}};
  snap.values.resize(snap.lattice.sites());
  for (auto &v : snap.values)
    v = detail::get<double>(is);
  return snap;
}

inline void write_field_csv(const std::filesystem::path &path, const LatticeSpec &lattice,
                            std::span<const double> values) {
  if (values.size() != lattice.sites())
    throw DomainError("field size does not match lattice");
  std::ofstream os(path);
  if (!os)
    throw Error("cannot open " + path.string() + " for writing");
  os << "x,y,z,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto s = lattice.unflatten(i);
    os << s[0] << ',' << s[1] << ',' << s[2] << ',' << values[i] << '\n';
  }
}

} // namespace lqc
