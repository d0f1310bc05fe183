#pragma once

#include <cstdint>
#include <random>

namespace crp {

// Seeded random source. Every stochastic result is a pure function of
// (seed, stream); child streams are derived with split() so concurrent
// tasks never share a generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits. Avoids
  // std::uniform_real_distribution so sequences match across standard
  // libraries.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const unsigned __int128 product =
        static_cast<unsigned __int128>(engine_()) * bound;
    return static_cast<std::uint64_t>(product >> 64);
  }

  // Independent child stream; does not advance this generator.
  Rng split(std::uint64_t child) const {
    return Rng(seed_, stream_ * 0x9E3779B97F4A7C15ULL + child + 1);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace crp
