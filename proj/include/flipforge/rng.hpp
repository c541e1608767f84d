#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace flipforge {

/// Portable random source used everywhere a seed appears.
///
/// The engine is xoshiro256** seeded from a single u64 through SplitMix64, and
/// the distribution helpers below are written out explicitly instead of going
/// through <random>'s distributions, whose output differs between standard
/// library implementations. Given a seed, every draw is therefore identical on
/// every platform, which is what makes generated datasets byte-reproducible.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();

  /// Uniform real in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in the closed range [lo, hi]. Unbiased (rejection).
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

  /// A pair of independent standard normals (Box-Muller). Always consumes
  /// exactly two uniforms.
  std::array<double, 2> normal_pair();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }
  result_type operator()() { return next(); }

private:
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a over the bytes of `label`.
std::uint64_t fnv1a64(std::string_view label);

/// Derives an independent stream seed from a parent seed, a stage label and an
/// index. Used for per-cell, per-pair and per-stage substreams so that adding
/// one consumer never perturbs another.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index = 0);

} // namespace flipforge
