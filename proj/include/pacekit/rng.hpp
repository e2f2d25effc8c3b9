#pragma once

#include <array>
#include <cstdint>

namespace pacekit {

// xoshiro256++ seeded through splitmix64. Hand-rolled so every stream is
// bit-reproducible across platforms and standard-library versions; std::
// distributions are implementation-defined and would break byte-identical
// artifacts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_unit() < p; }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> state_;
};

// One independent engine per stochastic concern, so changing one mechanism
// does not perturb the draws of another (keeps common-random-number
// comparisons honest).
enum class RngStream : std::uint64_t {
  kCtr = 0x6b43,
  kParticipation = 0x9d11,
  kWin = 0x51f7,
  kClick = 0xe2a9,
  kGeneric = 0x0777,
};

struct RngSpec {
  std::uint64_t seed = 0;

  Rng stream(RngStream which) const;
};

}  // namespace pacekit
