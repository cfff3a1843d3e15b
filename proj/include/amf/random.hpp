#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace amf {

/// Derives an independent seed for a named sub-stream ("init", "shuffle",
/// "synth", ...) so that consumers never share or perturb each other's draws.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

/// Seeded generator with platform-independent uniform/normal draws.
/// std::normal_distribution is implementation-defined, which would make
/// generated datasets differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// Draws an index with probability proportional to `weights`.
  std::size_t categorical(const std::vector<double>& weights);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0;
};

}  // namespace amf
