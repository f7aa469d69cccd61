#ifndef TONGUEAGE_RNG_HPP
#define TONGUEAGE_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tongueage {

/// Seeded random stream with platform-independent draws.
///
/// The engine is std::mt19937_64, whose output sequence the standard fixes.
/// Distribution transforms are written out here rather than taken from
/// <random>, whose distributions differ between standard libraries:
///   uniform() : top 53 bits of one engine output scaled by 2^-53, in [0, 1)
///   normal()  : Box-Muller cosine branch: sqrt(-2 ln(1 - u1)) * cos(2 pi u2),
///                two uniform draws per normal, no cached second value
///   below(n)  : multiply-shift reduction of one 64-bit output
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  double uniform();
  double uniform(double lo, double hi);
  double normal();
  /// Uniform integer in [0, n); n must be >= 1.
  std::uint64_t below(std::uint64_t n);

  /// Independent stream keyed by (this stream's seed, keys...). Does not
  /// advance this stream.
  Rng derive(std::initializer_list<std::uint64_t> keys) const;

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

/// SplitMix64 finalizer, used to mix stream keys into seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace tongueage

#endif  // TONGUEAGE_RNG_HPP
