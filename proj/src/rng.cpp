#include "sve/rng.hpp"

#include <cmath>
#include <numbers>

namespace sve::rng {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

namespace {

std::array<std::uint32_t, 2> stream_key(const StreamKey& k) {
  std::uint64_t h = splitmix64(k.master_seed);
  h = splitmix64(h ^ k.replication);
  h = splitmix64(h ^ (k.component * 0xD1B54A32D192ED03ull));
  return {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
}

// 53-bit uniform strictly inside (0, 1).
double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

template <class Emit>
void generate(const StreamKey& key, std::size_t count, Emit&& emit) {
  const auto pk = stream_key(key);
  const auto step_lo = static_cast<std::uint32_t>(key.step);
  const auto step_hi = static_cast<std::uint32_t>(key.step >> 32);
  const std::size_t blocks = (count + 1) / 2;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto r = philox4x32({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                               step_lo, step_hi},
                              pk);
    emit(b, to_unit(r[0], r[1]), to_unit(r[2], r[3]));
  }
}

}  // namespace

void fill_normals(const StreamKey& key, std::span<double> out) {
  const std::size_t n = out.size();
  generate(key, n, [&](std::size_t b, double u1, double u2) {
    // Box-Muller
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[2 * b] = radius * std::cos(angle);
    if (2 * b + 1 < n) out[2 * b + 1] = radius * std::sin(angle);
  });
}

void fill_uniforms(const StreamKey& key, std::span<double> out) {
  const std::size_t n = out.size();
  generate(key, n, [&](std::size_t b, double u1, double u2) {
    out[2 * b] = u1;
    if (2 * b + 1 < n) out[2 * b + 1] = u2;
  });
}

}  // namespace sve::rng
