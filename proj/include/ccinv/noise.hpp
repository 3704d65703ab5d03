#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ccinv/types.hpp"

namespace ccinv {

enum class NoiseFamily { z2, gaussian };

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::z2;
  std::uint64_t seed = 0;
  index_t dimension = 0;
};

std::string to_string(NoiseFamily family);
/// Accepts "z2" or "gaussian".
NoiseFamily parse_noise_family(const std::string& name);

/// SplitMix64 stream; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Starting state of the stream that produces the noise vector of cycle k.
std::uint64_t cycle_key(std::uint64_t seed, std::uint64_t k);

/// Fill out with the noise vector Phi^(k): i.i.d. components with mean 0 and unit
/// variance, exactly +-1 for Z2. A pure function of (spec.seed, k), so every chain that
/// needs Phi^(k) can regenerate it.
void draw(const NoiseSpec& spec, std::uint64_t k, std::span<double> out);
std::vector<double> draw(const NoiseSpec& spec, std::uint64_t k);

}  // namespace ccinv
