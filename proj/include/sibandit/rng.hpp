#pragma once

#include <cstdint>
#include <random>

namespace sibandit {

//! Deterministic random state. All stochastic code takes one of these
//! explicitly; replaying with the same (seed, stream) reproduces the draw
//! sequence bit for bit. Streams are cheap: substreams for trials, time
//! steps, and per-(epoch, arm) refits are derived by counter mixing rather
//! than by splitting generator state.
class RandomState {
public:
  explicit RandomState(std::uint64_t seed)
    : gen_(mix(seed))
  {}

  RandomState(std::uint64_t seed, std::uint64_t stream)
    : gen_(mix(mix(seed) ^ (0x9e3779b97f4a7c15ULL + mix(stream))))
  {}

  //! substream derived from this state's seed without advancing it
  static RandomState substream(std::uint64_t seed, std::uint64_t tag,
                               std::uint64_t payload)
  {
    return RandomState(seed, (tag << 48) ^ payload);
  }

  std::uint64_t next_u64() { return gen_(); }

  //! uniform on [0, 1)
  double uniform01()
  {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  //! uniform integer in {0, ..., n-1}, n >= 1
  std::uint64_t uniform_int(std::uint64_t n)
  {
    // rejection to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  //! standard normal via Box-Muller (one draw per pair of uniforms)
  double normal()
  {
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

private:
  // splitmix64 finalizer; decorrelates nearby seeds and streams
  static std::uint64_t mix(std::uint64_t z)
  {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
};

} // namespace sibandit
