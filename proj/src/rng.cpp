#include "pacekit/rng.hpp"

namespace pacekit {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& word : state_) word = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  // Rejection sampling keeps the distribution exact.
  std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v >= threshold) return v % n;
  }
}

Rng RngSpec::stream(RngStream which) const {
  std::uint64_t x = seed ^ (static_cast<std::uint64_t>(which) * 0xd1342543de82ef95ULL);
  // Decorrelate streams sharing a seed.
  splitmix64(x);
  return Rng(splitmix64(x));
}

}  // namespace pacekit
