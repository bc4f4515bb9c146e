#pragma once

// On-disk OLA buffer format:
//
//   "OLAB"  u32 version=1  u64 n  u64 b  u32 N  u32 beta  (⌊n/b⌋+1) x f64
//
// Everything little-endian.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "olabuf/error.hpp"
#include "olabuf/ola.hpp"
#include "olabuf/storage.hpp"

namespace olabuf {

inline constexpr char ola_file_magic[4] = {'O', 'L', 'A', 'B'};
inline constexpr std::uint32_t ola_file_version = 1;
inline constexpr std::size_t ola_header_bytes = 4 + 4 + 8 + 8 + 4 + 4;

namespace detail {

template <class T>
void put_le(std::vector<unsigned char> &out, T v) {
  const T le = to_little_endian(v);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &le, sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <class T>
T get_le(const std::vector<unsigned char> &in, std::size_t &pos) {
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return from_little_endian(v);
}

} // namespace detail

inline std::vector<unsigned char> encode_ola_buffer(const OlaBuffer &buf) {
  std::vector<unsigned char> out;
  out.reserve(ola_header_bytes + buf.components().size() * 8);
  out.insert(out.end(), std::begin(ola_file_magic), std::end(ola_file_magic));
  detail::put_le<std::uint32_t>(out, ola_file_version);
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(buf.size()));
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(buf.bin_size()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(buf.moments()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(buf.beta()));
  for (double v : buf.components()) {
    detail::put_le<double>(out, v);
  }
  return out;
}

inline OlaBuffer decode_ola_buffer(const std::vector<unsigned char> &in) {
  if (in.size() < ola_header_bytes) {
    throw io_error("OLA buffer file truncated: " + std::to_string(in.size()) + " bytes");
  }
  if (std::memcmp(in.data(), ola_file_magic, 4) != 0) {
    throw io_error("not an OLA buffer file (bad magic)");
  }
  std::size_t pos = 4;
  const auto version = detail::get_le<std::uint32_t>(in, pos);
  if (version != ola_file_version) {
    throw io_error("unsupported OLA buffer file version " + std::to_string(version));
  }
  const auto n = detail::get_le<std::uint64_t>(in, pos);
  const auto b = detail::get_le<std::uint64_t>(in, pos);
  const auto moments = detail::get_le<std::uint32_t>(in, pos);
  const auto beta = detail::get_le<std::uint32_t>(in, pos);
  if (b < 2 || b > (std::uint64_t{1} << 40) || n > (std::uint64_t{1} << 56) || moments < 2 ||
      moments % 2 != 0 || moments > 64) {
    throw io_error("OLA buffer file header has invalid parameters");
  }
  const auto ni = static_cast<index_t>(n);
  const auto bi = static_cast<index_t>(b);
  if (ola_beta(ni, bi, static_cast<int>(moments)) != static_cast<int>(beta)) {
    throw io_error("OLA buffer file header: beta " + std::to_string(beta) +
                   " inconsistent with n, b, N");
  }
  const auto count = static_cast<std::size_t>(OlaBuffer::component_count(ni, bi));
  if (in.size() != ola_header_bytes + count * 8) {
    throw io_error("OLA buffer file payload is " + std::to_string(in.size() - ola_header_bytes) +
                   " bytes, header implies " + std::to_string(count * 8));
  }
  std::vector<double> comps(count);
  for (auto &v : comps) {
    v = detail::get_le<double>(in, pos);
  }
  try {
    return OlaBuffer(ni, bi, static_cast<int>(moments), std::move(comps));
  } catch (const parameter_error &e) {
    throw io_error(std::string("OLA buffer file header: ") + e.what());
  }
}

inline void write_ola_buffer(const std::filesystem::path &path, const OlaBuffer &buf) {
  const auto bytes = encode_ola_buffer(buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("cannot create buffer file " + path.string());
  }
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw io_error("write failed for " + path.string());
  }
}

inline OlaBuffer read_ola_buffer(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot open buffer file " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_ola_buffer(bytes);
}

} // namespace olabuf
