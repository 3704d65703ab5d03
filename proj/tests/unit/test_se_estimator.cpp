#include <doctest.h>

#include "ccinv/errors.hpp"
#include "ccinv/iter_solvers.hpp"
#include "ccinv/se_estimator.hpp"
#include "test_util.hpp"

using namespace ccinv;

namespace {

SeConfig config(double rel, double abs = 0.0, InnerSolver inner = InnerSolver::bicg) {
  SeConfig cfg;
  cfg.inner = inner;
  cfg.inner_tolerance = 1e-10;
  cfg.stop.relative_tolerance = rel;
  cfg.stop.absolute_tolerance = abs;
  cfg.stop.max_cycles = 2'000'000;
  return cfg;
}

}  // namespace

TEST_CASE("identity with Z2 noise is exact") {
  const auto est = se_estimate_trace(RealMatrix::identity(7), TraceQuery::identity(),
                                     NoiseSpec{NoiseFamily::z2, 1, 7}, config(1e-3));
  CHECK(est.value == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(est.mc_std_error == 0.0);
  CHECK(est.sample_variance == 0.0);
  CHECK(est.converged);
  CHECK(est.burn_in_cycles == 0);
}

TEST_CASE("diag(2, 4) with either inner solver") {
  const auto c = RealMatrix::build(2, {{0, 0, 2.0}, {1, 1, 4.0}});
  for (InnerSolver inner : {InnerSolver::bicg, InnerSolver::gauss_seidel}) {
    const auto est = se_estimate_trace(c, TraceQuery::identity(),
                                       NoiseSpec{NoiseFamily::gaussian, 2, 2}, config(2e-3, 0, inner));
    CHECK(est.converged);
    CHECK(std::abs(est.value - 0.75) < 3 * est.mc_std_error);
    CHECK(est.total_rounds >= est.sampling_cycles());
  }
}

TEST_CASE("agrees with the correlated-chain sampler and the dense oracle") {
  const auto c = test::random_dominant<cdouble>(16, 0.3, 5);
  const auto q = TraceQuery::diagonal_indicator({0, 3, 7, 11});
  const cdouble want = dense_trace(q, dense_lu_inverse(c));
  const auto se = se_estimate_trace(c, q, NoiseSpec{NoiseFamily::z2, 3, 16}, config(2e-3));
  StoppingRule stop;
  stop.relative_tolerance = 2e-3;
  const auto cc = estimate_trace(c, q, NoiseSpec{NoiseFamily::z2, 4, 16}, BurnInConfig<cdouble>{},
                                 stop);
  CHECK(std::abs(se.value - want) < 3 * se.mc_std_error);
  CHECK(std::abs(cc.value - want) < 3 * cc.mc_std_error);
  CHECK(std::abs(se.value - cc.value) < 3 * std::hypot(se.mc_std_error, cc.mc_std_error));
}

TEST_CASE("inverse elements") {
  const auto c = test::random_dominant<double>(10, 0.4, 6);
  const auto inv = dense_lu_inverse(c);
  const EntryList entries{{0, 0}, {4, 4}, {2, 5}, {9, 1}};
  const auto m = se_estimate_inverse_elements(c, entries, NoiseSpec{NoiseFamily::z2, 8, 10},
                                              config(0.0, 2e-3));
  REQUIRE(m.size() == entries.size());
  for (const auto& [ij, e] : m) {
    CHECK(e.converged);
    CHECK(std::abs(e.value - inv(ij.first, ij.second)) < 3 * e.mc_std_error + 1e-12);
  }
}

TEST_CASE("sample variance matches the quadratic-form variance of each noise family") {
  // For symmetric B = C^-1: Var(phi^T B phi) is 2 sum_ij B_ij^2 for Gaussian noise and
  // 2 sum_{i != j} B_ij^2 for Z2 noise.
  const auto c = test::random_hermitian<double>(8, 0.6, 9);
  const auto b = dense_lu_inverse(c);
  const double off = b.squaredNorm() - b.diagonal().squaredNorm();
  const double want_gauss = 2.0 * b.squaredNorm();
  const double want_z2 = 2.0 * off;
  auto cfg = config(1e-9);
  cfg.stop.max_cycles = 40000;
  const auto g = se_estimate_trace(c, TraceQuery::identity(), NoiseSpec{NoiseFamily::gaussian, 1, 8},
                                   cfg);
  const auto z = se_estimate_trace(c, TraceQuery::identity(), NoiseSpec{NoiseFamily::z2, 1, 8}, cfg);
  CHECK(g.sample_variance == doctest::Approx(want_gauss).epsilon(0.05));
  CHECK(z.sample_variance == doctest::Approx(want_z2).epsilon(0.05));
  CHECK(z.sample_variance < g.sample_variance);
}

TEST_CASE("samples are independent") {
  const auto c = test::random_dominant<double>(12, 0.3, 10);
  auto cfg = config(1e-9);
  cfg.stop.max_cycles = 10000;
  const auto est = se_estimate_trace(c, TraceQuery::identity(), NoiseSpec{NoiseFamily::gaussian, 2, 12},
                                     cfg);
  CHECK_FALSE(est.converged);
  REQUIRE(est.series.size() == 10000);
  const double n = static_cast<double>(est.series.size());
  double mean = 0.0;
  for (double v : est.series) {
    mean += v / n;
  }
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t k = 0; k < est.series.size(); ++k) {
    c0 += (est.series[k] - mean) * (est.series[k] - mean);
    if (k > 0) {
      c1 += (est.series[k] - mean) * (est.series[k - 1] - mean);
    }
  }
  CHECK(std::abs(c1 / c0) < 4.0 / std::sqrt(n));
  CHECK(est.effective_length == n);
  CHECK(est.mc_std_error == doctest::Approx(std::sqrt(est.sample_variance / n)));
}

TEST_CASE("inner solver failure is reported") {
  // sp(T) > 1: Gauss-Seidel cannot converge.
  const auto bad = RealMatrix::build(2, {{0, 0, 1}, {0, 1, 3}, {1, 0, 3}, {1, 1, 1}});
  auto cfg = config(1e-3, 0.0, InnerSolver::gauss_seidel);
  cfg.inner_max_iterations = 100;
  CHECK_THROWS_AS(se_estimate_trace(bad, TraceQuery::identity(), NoiseSpec{}, cfg),
                  ConvergenceError);
  cfg.inner_tolerance = 0.0;
  CHECK_THROWS_AS(se_estimate_trace(bad, TraceQuery::identity(), NoiseSpec{}, cfg),
                  InvalidArgument);
}

TEST_CASE("inner solver names") {
  CHECK(parse_inner_solver("bicg") == InnerSolver::bicg);
  CHECK(parse_inner_solver("gs") == InnerSolver::gauss_seidel);
  CHECK(to_string(InnerSolver::gauss_seidel) == "gs");
  CHECK_THROWS_AS(parse_inner_solver("cg"), InvalidArgument);
}

TEST_CASE("identical runs are bit-identical") {
  const auto c = test::random_dominant<cdouble>(9, 0.4, 12);
  auto run = [&] {
    return se_estimate_trace(c, TraceQuery::identity(), NoiseSpec{NoiseFamily::z2, 5, 9},
                             config(5e-3));
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.value == b.value);
  CHECK(a.total_rounds == b.total_rounds);
}
