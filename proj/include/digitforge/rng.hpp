#ifndef DIGITFORGE_RNG_HPP
#define DIGITFORGE_RNG_HPP

#include <cstdint>
#include <random>

namespace digitforge {

/// Seeded stream of Unif(0,1) variates, consumed strictly left to right.
///
/// Streams are identified by (seed, stream id); distinct ids give independent
/// mt19937_64 states via std::seed_seq, which is how parallel workers and
/// chunked runs obtain reproducible, non-overlapping randomness.
class UniformStream {
 public:
  using engine_type = std::mt19937_64;

  explicit UniformStream(std::uint64_t seed, std::uint64_t stream_id = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                      0x64667267u};
    engine_.seed(seq);
  }

  /// Open-interval uniform: (k + 1/2) 2^-52 for a 52-bit integer k, never 0 or 1.
  double next() {
    ++consumed_;
    return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
  }

  double operator()() { return next(); }

  /// Raw engine, for distributions that need one (Beta draws).
  engine_type& engine() { return engine_; }

  std::uint64_t consumed() const { return consumed_; }

 private:
  engine_type engine_;
  std::uint64_t consumed_ = 0;
};

}  // namespace digitforge

#endif  // DIGITFORGE_RNG_HPP
