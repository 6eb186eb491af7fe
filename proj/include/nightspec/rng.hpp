#pragma once

#include <cstdint>

namespace nightspec {

// Finalizer of splitmix64. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Derives an independent stream key from a root seed, a purpose tag and up
// to three coordinates. Every random draw in the library flows through this,
// so results never depend on evaluation order.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag,
                                      std::uint64_t a = 0, std::uint64_t b = 0,
                                      std::uint64_t c = 0) {
  constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h ^ (tag + kGolden));
  h = mix64(h ^ (a + 2 * kGolden));
  h = mix64(h ^ (b + 3 * kGolden));
  h = mix64(h ^ (c + 4 * kGolden));
  return h;
}

// Stream purpose tags.
inline constexpr std::uint64_t kTagPoisson = 0x706F6973736F6Eull;  // per-element shot noise
inline constexpr std::uint64_t kTagPattern = 0x7061747465726Eull;  // per-element pattern field
inline constexpr std::uint64_t kTagScene = 0x7363656E65ull;        // scene layout shuffles
inline constexpr std::uint64_t kTagBatch = 0x6261746368ull;        // batch sampling
inline constexpr std::uint64_t kTagIterNoise = 0x6974657274ull;    // per-iteration noise seeds

// splitmix64 sequence. Cheap, splittable via derive_stream, and stable
// across platforms (unlike std:: distributions).
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Poisson sample with the given mean. Inversion by multiplication below
// mean 10, Hormann's PTRS transformed rejection above. mean <= 0 yields 0.
std::int64_t poisson_sample(double mean, Stream& stream);

// Standard normal via Box-Muller.
double gaussian_sample(Stream& stream);

}  // namespace nightspec
