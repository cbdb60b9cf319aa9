#pragma once

// Counter-based normal variates. Every draw is a pure function of
// (master_seed, replication, component, step, index): no generator state is
// carried between calls, so replications can run on any thread in any order.

#include <array>
#include <cstdint>
#include <span>

namespace sve {

struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t component = 0;
  std::uint64_t step = 0;

  StreamKey with_component(std::uint64_t c) const {
    StreamKey k = *this;
    k.component = c;
    return k;
  }
  StreamKey with_step(std::uint64_t s) const {
    StreamKey k = *this;
    k.step = s;
    return k;
  }
  StreamKey with_replication(std::uint64_t r) const {
    StreamKey k = *this;
    k.replication = r;
    return k;
  }
};

/// Component tags. W^j uses j; the m^2 components of the independent
/// limit noise B^{l,j} use kLimitNoiseBase + m*j + l.
inline constexpr std::uint64_t kLimitNoiseBase = 1u << 20;

namespace rng {

std::uint64_t splitmix64(std::uint64_t x);

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Fills `out` with independent standard normals for the given key.
/// out[i] is the same for every call with the same key and index i.
void fill_normals(const StreamKey& key, std::span<double> out);

/// Open-interval uniforms (0, 1), same determinism contract.
void fill_uniforms(const StreamKey& key, std::span<double> out);

}  // namespace rng
}  // namespace sve
