#pragma once

// Little-endian binary helpers shared by the feature, model and gain-trace
// file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string_view>

#include "hanr/error.hpp"

namespace hanr::binio {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f32(std::ostream& os, float v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f32s(std::ostream& os, std::span<const float> v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size_bytes()));
}

inline void write_magic(std::ostream& os, std::string_view magic) {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw DataError("unexpected end of file");
  return v;
}

inline void read_f32s(std::istream& is, std::span<float> v) {
  if (!is.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(v.size_bytes())))
    throw DataError("unexpected end of file");
}

inline void expect_magic(std::istream& is, std::string_view magic) {
  char buf[4] = {};
  if (magic.size() != 4 || !is.read(buf, 4) ||
      std::memcmp(buf, magic.data(), 4) != 0)
    throw DataError("bad magic, expected '" + std::string(magic) + "'");
}

// 64-bit FNV-1a, used to fingerprint models and configs in result tables.
inline std::uint64_t fnv1a(std::span<const unsigned char> bytes,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s) {
  return fnv1a(std::span(reinterpret_cast<const unsigned char*>(s.data()),
                         s.size()));
}

}  // namespace hanr::binio
