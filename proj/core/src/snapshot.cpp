#include "torusflow/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace torusflow {

namespace {

constexpr char kMagic[17] = "TORUSFLOWFIELD01";

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void write_snapshot(const SpectralField& f, const std::string& path) {
  std::vector<unsigned char> bytes;
  const int n = f.resolution();
  bytes.reserve(16 + 9 + 16 * f.mode_count() * f.components());
  bytes.insert(bytes.end(), kMagic, kMagic + 16);
  put_u32(bytes, static_cast<std::uint32_t>(n));
  put_u32(bytes, static_cast<std::uint32_t>(f.components()));
  bytes.push_back(f.divergence_free_flag() ? 1 : 0);
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2)
      for (int c = 0; c < f.components(); ++c) {
        const auto& v = f.at(k1, k2, c);
        put_f64(bytes, v.real());
        put_f64(bytes, v.imag());
      }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_snapshot: cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write_snapshot: write failed for " + path);
}

SpectralField read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_snapshot: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 25 || std::memcmp(bytes.data(), kMagic, 16) != 0)
    throw std::runtime_error("read_snapshot: bad header in " + path);

  const auto n = static_cast<int>(get_u32(bytes.data() + 16));
  const auto components = static_cast<int>(get_u32(bytes.data() + 20));
  const unsigned char flags = bytes[24];

  SpectralField f(n, components);
  f.set_divergence_free_flag(flags & 1);
  const std::size_t expected = 25 + 16 * f.mode_count() * static_cast<std::size_t>(components);
  if (bytes.size() != expected) throw std::runtime_error("read_snapshot: truncated " + path);

  const unsigned char* p = bytes.data() + 25;
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2)
      for (int c = 0; c < components; ++c) {
        const double re = get_f64(p);
        const double im = get_f64(p + 8);
        p += 16;
        f.at(k1, k2, c) = {re, im};
      }
  return f;
}

}  // namespace torusflow
