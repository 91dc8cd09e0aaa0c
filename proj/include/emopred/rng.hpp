#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace emopred {

// Seeded splittable random stream (splitmix64 core). All randomness in a run
// flows from one seed; independent substreams are derived by name so the
// init / OOV-coin / shuffle streams never interleave.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent substream derived from this stream's seed and a label.
  Rng split(std::string_view label) const {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    return Rng(mix(state_ ^ h));
  }

  Rng split(std::uint64_t n) const { return Rng(mix(state_ ^ mix(n))); }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % n);
  }

  bool coin(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace emopred
