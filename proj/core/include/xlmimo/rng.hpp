#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "xlmimo/common.hpp"

namespace xlmimo {

// Stream labels used when splitting a realization seed into independent
// substreams. Values are part of the reproducibility contract: changing them
// changes every generated scenario.
enum class Stream : std::uint64_t {
  kScenario = 1,
  kChannel = 2,
  kTrainingNoise0 = 3,
  kInnovation = 4,
  kTrainingNoise1 = 5,
  kValidation = 6,
};

// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Counter-based seed derivation: folds each counter into the parent seed with
// mix64. derive_seed(s, {a, b}) == derive_seed(derive_seed(s, {a}), {b}).
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept;

inline std::uint64_t derive_seed(std::uint64_t parent, Stream stream, std::uint64_t index) noexcept {
  return derive_seed(parent, {static_cast<std::uint64_t>(stream), index});
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }
  // Circularly-symmetric complex Gaussian with unit variance: CN(0, 1).
  cplx complex_normal();
  // Vector of i.i.d. CN(0, 1) entries.
  CVector complex_normal(Eigen::Index n);
  // Matrix of i.i.d. CN(0, 1) entries.
  CMatrix complex_normal(Eigen::Index rows, Eigen::Index cols);
  // Uniform phase on [0, 2*pi).
  double phase() { return uniform(0.0, 2.0 * kPi); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace xlmimo
