#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ccinv/diagnostics.hpp"
#include "ccinv/errors.hpp"

using namespace ccinv;

namespace {

std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  double prev = g(rng) / std::sqrt(1.0 - phi * phi);
  for (auto& v : x) {
    prev = phi * prev + g(rng);
    v = prev;
  }
  return x;
}

std::vector<double> white(std::size_t n, std::uint64_t seed) { return ar1(n, 0.0, seed); }

}  // namespace

TEST_CASE("ESS of white noise is close to its length") {
  // The truncated pair sum is itself noisy: at 10^4 samples a few percent of series
  // land just outside 10%, so the check is on the distribution over seeds.
  std::vector<double> ratios;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    ratios.push_back(effective_length(white(10000, seed)) / 10000.0);
  }
  const auto inside = std::count_if(ratios.begin(), ratios.end(),
                                    [](double r) { return std::abs(r - 1.0) <= 0.1; });
  CHECK(inside >= 45);
  std::nth_element(ratios.begin(), ratios.begin() + 25, ratios.end());
  CHECK(ratios[25] == doctest::Approx(1.0).epsilon(0.03));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    CHECK(effective_length(white(100000, seed)) == doctest::Approx(100000).epsilon(0.1));
  }
}

TEST_CASE("ESS of AR(1) with phi = 0.5") {
  const double analytic = 1e5 * (1 - 0.5) / (1 + 0.5);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto x = ar1(100000, 0.5, seed);
    CHECK(effective_length(x) == doctest::Approx(analytic).epsilon(0.1));
  }
}

TEST_CASE("ESS may exceed the sample count for anti-correlated series") {
  const auto x = ar1(20000, -0.3, 4);
  const double ess = effective_length(x);
  CHECK(ess > 20000);
  CHECK(ess <= 1.5 * 20000);
}

TEST_CASE("constant series") {
  const std::vector<double> x(50, 3.5);
  CHECK(effective_length(x) == 50.0);
  CHECK(sample_variance(x) == 0.0);
  CHECK(mc_std_error(x) == 0.0);
}

TEST_CASE("too few samples") {
  const std::vector<double> x(9, 1.0);
  CHECK_THROWS_AS(effective_length(x), InsufficientSamples);
  CHECK_THROWS_AS(sample_variance(std::vector<double>{1.0}), InsufficientSamples);
  CHECK_THROWS_AS(empirical_std_error(std::vector<double>{1.0}), InsufficientSamples);
}

TEST_CASE("standard error of white noise") {
  const auto x = white(10000, 9);
  CHECK(mc_std_error(x) == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("standard error is sqrt(variance / ESS) exactly") {
  const auto x = ar1(5000, 0.7, 3);
  CHECK(mc_std_error(x) == std::sqrt(sample_variance(x) / effective_length(x)));
  // The arithmetic of the reference table row: variance 3932 over 15788 effective samples.
  CHECK(std::sqrt(3932.0 / 15788.0) == doctest::Approx(0.499).epsilon(1e-3));
}

TEST_CASE("complex standard error combines the parts") {
  const auto re = ar1(5000, 0.4, 1);
  const auto im = ar1(5000, -0.2, 2);
  std::vector<cdouble> z(re.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = {re[i], im[i]};
  }
  CHECK(mc_std_error(z) == doctest::Approx(std::hypot(mc_std_error(re), mc_std_error(im))));
}

TEST_CASE("empirical standard error") {
  CHECK(empirical_std_error(std::vector<double>{2.0, 2.0, 2.0}) == 0.0);
  CHECK(empirical_std_error(std::vector<double>{1.0, 3.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(empirical_std_error(std::vector<cdouble>{{1, 1}, {3, 1}}) ==
        doctest::Approx(std::sqrt(2.0)));
  // Reference table cross-check: 0.502 empirical against 0.499 batch is within 10%.
  CHECK(std::abs(0.502 / 0.499 - 1.0) < 0.1);
}

TEST_CASE("shuffling destroys autocorrelation and raises ESS") {
  auto x = ar1(20000, 0.8, 5);
  const double ordered = effective_length(x);
  std::mt19937_64 rng(1);
  std::shuffle(x.begin(), x.end(), rng);
  CHECK(effective_length(x) > ordered);
}

TEST_CASE("streaming accumulator matches the batch estimate") {
  for (double phi : {0.0, 0.5, 0.9, -0.4}) {
    const auto x = ar1(30000, phi, 12);
    GeyerAccumulator acc(512);
    for (double v : x) {
      acc.push(v + 1e4);
    }
    std::vector<double> shifted(x.size());
    std::transform(x.begin(), x.end(), shifted.begin(), [](double v) { return v + 1e4; });
    CHECK(acc.count() == x.size());
    CHECK(acc.mean() == doctest::Approx(1e4 + [&] {
            double s = 0.0;
            for (double v : x) {
              s += v;
            }
            return s / static_cast<double>(x.size());
          }()));
    CHECK(acc.variance() == doctest::Approx(sample_variance(shifted)).epsilon(1e-9));
    CHECK(acc.effective_length() == doctest::Approx(effective_length(shifted)).epsilon(1e-6));
    CHECK_FALSE(acc.saturated());
    CHECK(acc.mc_std_error() == doctest::Approx(mc_std_error(shifted)).epsilon(1e-6));
  }
}

TEST_CASE("accumulator reports saturation when the lag window is too short") {
  const auto x = ar1(20000, 0.99, 3);
  GeyerAccumulator acc(8);
  for (double v : x) {
    acc.push(v);
  }
  acc.effective_length();
  CHECK(acc.saturated());
}
