#pragma once

// Deterministic random sub-streams.
//
// All randomness in an experiment derives from one master seed. A named
// sub-stream ("sampler", "split", "solver", ...) is addressed by the master
// seed, the stream name and an integer index, so any piece of work can
// reconstruct its generator without touching shared state. Bounded draws are
// implemented here instead of using <random> distributions, whose output is
// implementation-defined, so results are identical across standard libraries.

#include <cstdint>
#include <random>
#include <string_view>

namespace rse {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view bytes,
                                     std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                           std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(master ^ fnv1a(stream)) + splitmix64(index + 0x632be59bd9b4e019ULL));
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::string_view stream, std::uint64_t index = 0)
      : engine_(derive_seed(master, stream, index)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform integer in [lo, hi], inclusive.
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rse
