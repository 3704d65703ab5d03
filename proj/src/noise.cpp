#include "ccinv/noise.hpp"

#include <random>

#include "ccinv/errors.hpp"

namespace ccinv {

std::string to_string(NoiseFamily family) {
  return family == NoiseFamily::z2 ? "z2" : "gaussian";
}

NoiseFamily parse_noise_family(const std::string& name) {
  if (name == "z2") {
    return NoiseFamily::z2;
  }
  if (name == "gaussian") {
    return NoiseFamily::gaussian;
  }
  throw InvalidArgument("unknown noise family '" + name + "' (expected z2 or gaussian)");
}

std::uint64_t cycle_key(std::uint64_t seed, std::uint64_t k) {
  SplitMix64 a(seed);
  const std::uint64_t s = a();
  SplitMix64 b(s ^ (k * 0xD1B54A32D192ED03ULL));
  return b();
}

void draw(const NoiseSpec& spec, std::uint64_t k, std::span<double> out) {
  SplitMix64 gen(cycle_key(spec.seed, k));
  if (spec.family == NoiseFamily::z2) {
    std::size_t i = 0;
    while (i < out.size()) {
      std::uint64_t bits = gen();
      for (int b = 0; b < 64 && i < out.size(); ++b, ++i) {
        out[i] = (bits & 1U) ? 1.0 : -1.0;
        bits >>= 1;
      }
    }
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : out) {
      v = normal(gen);
    }
  }
}

std::vector<double> draw(const NoiseSpec& spec, std::uint64_t k) {
  if (spec.dimension < 1) {
    throw InvalidArgument("noise dimension must be positive");
  }
  std::vector<double> out(static_cast<std::size_t>(spec.dimension));
  draw(spec, k, out);
  return out;
}

}  // namespace ccinv
