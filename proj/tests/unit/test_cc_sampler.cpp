#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "ccinv/cc_sampler.hpp"
#include "ccinv/errors.hpp"
#include "test_util.hpp"

using namespace ccinv;

namespace {

template <Scalar T>
BurnInConfig<T> default_burn() {
  return BurnInConfig<T>{};
}

StoppingRule rule(double rel, double abs = 0.0, std::uint64_t cap = 5'000'000) {
  StoppingRule s;
  s.relative_tolerance = rel;
  s.absolute_tolerance = abs;
  s.max_cycles = cap;
  return s;
}

template <Scalar T>
std::vector<T> real_vec(std::initializer_list<double> v) {
  std::vector<T> out;
  for (double x : v) {
    out.push_back(T(x));
  }
  return out;
}

}  // namespace

TEST_CASE("diagonal sweeps reduce to the scaled noise") {
  const auto c = RealMatrix::build(3, {{0, 0, 2.0}, {1, 1, 9.0}, {2, 2, 0.25}});
  const std::vector<double> phi{1.0, -1.0, 1.0};
  std::vector<double> z{5.0, 6.0, 7.0};
  std::vector<double> w{-1.0, 0.0, 3.0};
  sweep_z<double>(c, z, phi);
  sweep_w<double>(c, w, phi);
  const std::vector<double> want{1.0 / std::sqrt(2.0), -1.0 / 3.0, 2.0};
  CHECK(z == want);
  CHECK(w == want);
}

TEST_CASE("identity with unit noise") {
  const auto c = ComplexMatrix::identity(4);
  const std::vector<double> phi(4, 1.0);
  std::vector<cdouble> z(4, cdouble(3, 3));
  sweep_z<cdouble>(c, z, phi);
  CHECK(z == std::vector<cdouble>(4, cdouble(1, 0)));
}

TEST_CASE("3x3 sweeps match the hand-unrolled recurrences") {
  SUBCASE("real lower triangle plus diagonal") {
    const auto c = RealMatrix::build(3, {{0, 0, 2}, {1, 0, 1}, {1, 1, 3}, {2, 0, -1}, {2, 1, 0.5},
                                         {2, 2, 4}});
    const std::vector<double> phi{1, -1, 1};
    std::vector<double> z{0.3, 0.2, 0.1};
    sweep_z<double>(c, z, phi);
    const double z0 = 1 / std::sqrt(2.0);
    const double z1 = -1 / std::sqrt(3.0) - (1 * z0) / 3;
    const double z2 = 1 / 2.0 - (-1 * z0 + 0.5 * z1) / 4;
    CHECK(z[0] == doctest::Approx(z0).epsilon(1e-15));
    CHECK(z[1] == doctest::Approx(z1).epsilon(1e-15));
    CHECK(z[2] == doctest::Approx(z2).epsilon(1e-15));
  }
  SUBCASE("complex general") {
    const cdouble i(0, 1);
    DenseMatrix<cdouble> a(3, 3);
    a << 3.0 + 1.0 * i, 0.5 - i, 0.2, -1.0 + 0.5 * i, -4.0 + 0.1 * i, 1.0 * i, 0.3, 0.7 + 0.2 * i,
        2.0 - 2.0 * i;
    std::vector<Triplet<cdouble>> t;
    for (int r = 0; r < 3; ++r) {
      for (int s = 0; s < 3; ++s) {
        t.push_back({r, s, a(r, s)});
      }
    }
    const auto c = ComplexMatrix::build(3, t);
    const std::vector<double> phi{-1, 1, 1};
    const std::vector<cdouble> z0{0.1 + 0.2 * i, -0.3, 0.4 * i};
    const std::vector<cdouble> w0{0.5, 0.1 - 0.1 * i, -0.2};

    std::vector<cdouble> z = z0;
    sweep_z<cdouble>(c, z, phi);
    const cdouble e0 = phi[0] / std::sqrt(a(0, 0)) - (a(0, 1) * z0[1] + a(0, 2) * z0[2]) / a(0, 0);
    const cdouble e1 = phi[1] / std::sqrt(a(1, 1)) - (a(1, 0) * e0 + a(1, 2) * z0[2]) / a(1, 1);
    const cdouble e2 = phi[2] / std::sqrt(a(2, 2)) - (a(2, 0) * e0 + a(2, 1) * e1) / a(2, 2);
    CHECK(std::abs(z[0] - e0) < 1e-15);
    CHECK(std::abs(z[1] - e1) < 1e-15);
    CHECK(std::abs(z[2] - e2) < 1e-15);

    std::vector<cdouble> w = w0;
    sweep_w<cdouble>(c, w, phi);
    auto cj = [](cdouble v) { return std::conj(v); };
    const cdouble f0 = phi[0] / cj(std::sqrt(a(0, 0))) -
                       (cj(a(1, 0)) * w0[1] + cj(a(2, 0)) * w0[2]) / cj(a(0, 0));
    const cdouble f1 = phi[1] / cj(std::sqrt(a(1, 1))) -
                       (cj(a(0, 1)) * f0 + cj(a(2, 1)) * w0[2]) / cj(a(1, 1));
    const cdouble f2 =
        phi[2] / cj(std::sqrt(a(2, 2))) - (cj(a(0, 2)) * f0 + cj(a(1, 2)) * f1) / cj(a(2, 2));
    CHECK(std::abs(w[0] - f0) < 1e-15);
    CHECK(std::abs(w[1] - f1) < 1e-15);
    CHECK(std::abs(w[2] - f2) < 1e-15);
  }
}

TEST_CASE("hermitian matrices: the w sweep equals the z sweep") {
  const auto h = test::random_hermitian<cdouble>(20, 0.3, 8);
  const NoiseSpec noise{NoiseFamily::gaussian, 3, 20};
  std::vector<cdouble> z(20, cdouble(0.5, -0.25));
  std::vector<cdouble> w = z;
  for (std::uint64_t k = 1; k <= 10; ++k) {
    const auto phi = draw(noise, k);
    sweep_z<cdouble>(h, z, phi);
    sweep_w<cdouble>(h, w, phi);
    CHECK(test::max_abs_diff(z, w) <= 1e-15);
  }
}

TEST_CASE("sweep preconditions") {
  const auto z = RealMatrix::build(3, {{0, 0, 1.0}, {1, 0, 1.0}, {2, 2, 1.0}});
  std::vector<double> v(3, 0.0);
  const std::vector<double> phi(3, 1.0);
  try {
    sweep_z<double>(z, v, phi);
    FAIL("expected a zero diagonal error");
  } catch (const ZeroDiagonalError& e) {
    CHECK(e.index() == 1);
  }
  const auto neg = RealMatrix::build(2, {{0, 0, 1.0}, {1, 1, -2.0}});
  CHECK_THROWS_AS(sweep_z<double>(neg, std::span<double>(v.data(), 2),
                                  std::span<const double>(phi.data(), 2)),
                  NegativeDiagonalError);
  CHECK_THROWS_AS(sweep_z<double>(RealMatrix::identity(3), std::span<double>(v.data(), 2),
                                  std::span<const double>(phi.data(), 2)),
                  InvalidArgument);
}

TEST_CASE("burn-in on the identity couples after one cycle") {
  const auto r = run_burn_in(RealMatrix::identity(6), NoiseSpec{NoiseFamily::z2, 1, 6},
                             default_burn<double>());
  CHECK(r.cycles == 1);
  CHECK(r.state.cycle == 1);
  CHECK(r.z_gap.size() == 1);
}

TEST_CASE("burn-in uses the documented starts and tolerance") {
  const auto c = test::random_dominant<double>(30, 0.2, 4);
  BurnInConfig<double> cfg;
  cfg.tolerance = 1e-8;
  const auto r = run_burn_in(c, NoiseSpec{NoiseFamily::z2, 2, 30}, cfg);
  CHECK(r.cycles > 1);
  CHECK(r.z_gap.back() < 1e-8);
  CHECK(r.w_gap.back() < 1e-8);
  CHECK(std::max(r.z_gap[r.z_gap.size() - 2], r.w_gap[r.w_gap.size() - 2]) >= 1e-8);

  BurnInConfig<double> bad;
  bad.z_start_b = {1.0, 2.0};
  CHECK_THROWS_AS(run_burn_in(c, NoiseSpec{NoiseFamily::z2, 2, 30}, bad), InvalidArgument);
  bad = {};
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(run_burn_in(c, NoiseSpec{NoiseFamily::z2, 2, 30}, bad), InvalidArgument);
}

TEST_CASE("burn-in diverges when sp(T) > 1") {
  // Off-diagonal dominance: the dense T = (D + L)^-1 U has radius well above 1.
  const auto c = RealMatrix::build(4, {{0, 0, 1}, {0, 1, 3}, {0, 3, 2}, {1, 0, 2}, {1, 1, 1},
                                       {1, 2, 3}, {2, 1, 2}, {2, 2, 1}, {2, 3, 3}, {3, 0, 2},
                                       {3, 2, 2}, {3, 3, 1}});
  const DenseMatrix<double> a = to_dense(c);
  const DenseMatrix<double> u = a.triangularView<Eigen::StrictlyUpper>();
  const DenseMatrix<double> dl = a.triangularView<Eigen::Lower>();
  const DenseMatrix<double> t = dl.inverse() * u;
  Eigen::EigenSolver<DenseMatrix<double>> es(t);
  REQUIRE(es.eigenvalues().cwiseAbs().maxCoeff() > 1.0);
  try {
    run_burn_in(c, NoiseSpec{NoiseFamily::z2, 1, 4}, default_burn<double>());
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.cycle() >= 1);
    CHECK(e.cycle() < 1000);
    CHECK(e.trajectory().size() == e.cycle());
    CHECK(e.trajectory().back() > kDivergenceBound);
  }
}

TEST_CASE("trace of diag(2, 4)") {
  const auto c = RealMatrix::build(2, {{0, 0, 2.0}, {1, 1, 4.0}});
  // Z2 noise makes every sample exactly sum phi_i^2 / d_i = 0.75.
  const auto z2 = estimate_trace(c, TraceQuery::identity(), NoiseSpec{NoiseFamily::z2, 1, 2},
                                 default_burn<double>(), rule(1e-3));
  CHECK(z2.value == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(z2.mc_std_error == 0.0);
  CHECK(z2.converged);

  const auto g = estimate_trace(c, TraceQuery::identity(), NoiseSpec{NoiseFamily::gaussian, 1, 2},
                                default_burn<double>(), rule(2e-3));
  CHECK(g.converged);
  CHECK(g.mc_std_error > 0.0);
  CHECK(std::abs(g.value - 0.75) < 3 * g.mc_std_error);
  CHECK(g.total_cycles > g.burn_in_cycles);
  CHECK(g.series.size() == g.sampling_cycles());
}

TEST_CASE("partial trace of a complex 16x16 matrix against dense LU") {
  const auto c = test::random_dominant<cdouble>(16, 0.3, 21);
  const auto q = TraceQuery::diagonal_indicator({0, 1, 2});
  const cdouble want = dense_trace(q, dense_lu_inverse(c));
  const auto est = estimate_trace(c, q, NoiseSpec{NoiseFamily::z2, 5, 16},
                                  default_burn<cdouble>(), rule(2e-3));
  CHECK(est.converged);
  CHECK(std::abs(est.value.real() - want.real()) < 3 * est.mc_std_error_real);
  CHECK(std::abs(est.value.imag() - want.imag()) < 3 * est.mc_std_error_imag + 1e-12);
  CHECK(est.mc_std_error == doctest::Approx(std::hypot(est.mc_std_error_real,
                                                       est.mc_std_error_imag)));
}

TEST_CASE("general Q weighting") {
  const auto c = test::random_dominant<double>(10, 0.4, 31);
  const auto qm = test::random_dominant<double>(10, 0.2, 32);
  const auto q = TraceQuery::general(qm);
  const double want = dense_trace(q, dense_lu_inverse(c));
  const auto est = estimate_trace(c, q, NoiseSpec{NoiseFamily::z2, 6, 10}, default_burn<double>(),
                                  rule(2e-3));
  CHECK(std::abs(est.value - want) < 3 * est.mc_std_error);
}

TEST_CASE("inverse elements") {
  SUBCASE("identity") {
    const auto c = RealMatrix::identity(3);
    const auto m = estimate_inverse_elements(c, {{0, 0}, {1, 1}, {0, 1}, {2, 0}},
                                             NoiseSpec{NoiseFamily::z2, 1, 3},
                                             default_burn<double>(), rule(1e-2, 1e-2));
    CHECK(m.at({0, 0}).value == 1.0);
    CHECK(m.at({1, 1}).value == 1.0);
    for (auto ij : {std::pair<index_t, index_t>{0, 1}, {2, 0}}) {
      const auto& e = m.at(ij);
      CHECK(std::abs(e.value) < 3 * e.mc_std_error);
    }
  }
  SUBCASE("diag(2, 4)") {
    const auto c = RealMatrix::build(2, {{0, 0, 2.0}, {1, 1, 4.0}});
    const auto m = estimate_inverse_elements(c, {{0, 0}, {1, 1}},
                                             NoiseSpec{NoiseFamily::gaussian, 1, 2},
                                             default_burn<double>(), rule(5e-3));
    CHECK(std::abs(m.at({0, 0}).value - 0.5) < 3 * m.at({0, 0}).mc_std_error);
    CHECK(std::abs(m.at({1, 1}).value - 0.25) < 3 * m.at({1, 1}).mc_std_error);
  }
  SUBCASE("12x12 real, all diagonal entries") {
    const auto c = test::random_dominant<double>(12, 0.3, 13);
    const auto inv = dense_lu_inverse(c);
    EntryList diag;
    for (index_t i = 0; i < 12; ++i) {
      diag.emplace_back(i, i);
    }
    const auto m = estimate_inverse_elements(c, diag, NoiseSpec{NoiseFamily::z2, 9, 12},
                                             default_burn<double>(), rule(5e-3));
    int outside = 0;
    for (index_t i = 0; i < 12; ++i) {
      const auto& e = m.at({i, i});
      CHECK(e.converged);
      outside += std::abs(e.value - inv(i, i)) < 3 * e.mc_std_error ? 0 : 1;
    }
    // Twelve 3-sigma checks: allow no miss with a fixed seed.
    CHECK(outside == 0);
  }
  CHECK_THROWS_AS(estimate_inverse_elements(RealMatrix::identity(2), {}, NoiseSpec{},
                                            default_burn<double>(), rule(1e-2)),
                  InvalidArgument);
  CHECK_THROWS_AS(estimate_inverse_elements(RealMatrix::identity(2), {{0, 2}}, NoiseSpec{},
                                            default_burn<double>(), rule(1e-2)),
                  InvalidArgument);
}

TEST_CASE("negative real diagonal is handled through the complex square root") {
  // Real-valued entries stored as complex with c_11 < 0 sit on the branch cut.
  const auto c = ComplexMatrix::build(3, {{0, 0, 3.0}, {0, 1, 0.5}, {1, 0, -0.4}, {1, 1, -2.5},
                                          {1, 2, 0.3}, {2, 1, 0.6}, {2, 2, 2.0}, {2, 0, 0.2}});
  const auto inv = dense_lu_inverse(c);
  EntryList all;
  for (index_t i = 0; i < 3; ++i) {
    for (index_t j = 0; j < 3; ++j) {
      all.emplace_back(i, j);
    }
  }
  const auto m = estimate_inverse_elements(c, all, NoiseSpec{NoiseFamily::z2, 4, 3},
                                           default_burn<cdouble>(), rule(0.0, 2e-3));
  for (const auto& [ij, e] : m) {
    CHECK(std::abs(e.value - inv(ij.first, ij.second)) < 3 * e.mc_std_error + 1e-12);
  }
}

TEST_CASE("hermitian collapse: identical starts and noise keep w equal to z") {
  SUBCASE("real symmetric: bit-level equality") {
    const auto h = test::random_hermitian<double>(50, 0.2, 1);
    const CorrelatedChains<double> chains(h);
    std::vector<double> z(50, 0.0), w(50, 0.0);
    const NoiseSpec noise{NoiseFamily::gaussian, 17, 50};
    for (std::uint64_t k = 1; k <= 100; ++k) {
      const auto phi = draw(noise, k);
      chains.sweep_z(z, phi);
      chains.sweep_w(w, phi);
      REQUIRE(z == w);
    }
  }
  SUBCASE("complex hermitian: within 1e-15") {
    const auto h = test::random_hermitian<cdouble>(50, 0.2, 2);
    const CorrelatedChains<cdouble> chains(h);
    std::vector<cdouble> z(50), w(50);
    const NoiseSpec noise{NoiseFamily::z2, 18, 50};
    for (std::uint64_t k = 1; k <= 100; ++k) {
      const auto phi = draw(noise, k);
      chains.sweep_z(z, phi);
      chains.sweep_w(w, phi);
      REQUIRE(test::max_abs_diff(z, w) <= 1e-15);
    }
  }
}

TEST_CASE("coupled chains differ by a deterministic Gauss-Seidel trajectory") {
  for (bool complex_case : {false, true}) {
    auto check = [&](const auto& c) {
      using T = typename std::decay_t<decltype(c)>::value_type;
      const index_t n = c.order();
      const CorrelatedChains<T> chains(c);
      std::vector<T> za(n), zb(n), wa(n), wb(n);
      for (index_t i = 0; i < n; ++i) {
        zb[i] = wb[i] = T(static_cast<double>(i + 1));
      }
      std::vector<T> dz = zb, dw = wb;
      const std::vector<T> zero(n);
      const NoiseSpec noise{NoiseFamily::z2, 5, n};
      for (std::uint64_t k = 1; k <= 40; ++k) {
        const auto phi = draw(noise, k);
        chains.sweep_z(za, phi);
        chains.sweep_z(zb, phi);
        chains.sweep_w(wa, phi);
        chains.sweep_w(wb, phi);
        gauss_seidel_sweep<T>(c, zero, dz);
        gauss_seidel_adjoint_sweep<T>(c, zero, dw);
        for (index_t i = 0; i < n; ++i) {
          REQUIRE(std::abs((zb[i] - za[i]) - dz[i]) <= 1e-12);
          REQUIRE(std::abs((wb[i] - wa[i]) - dw[i]) <= 1e-12);
        }
      }
    };
    if (complex_case) {
      check(test::random_dominant<cdouble>(50, 0.1, 3));
    } else {
      check(test::random_dominant<double>(50, 0.1, 3));
    }
  }
}

TEST_CASE("stationary identity of the inverse") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto c = test::random_dominant<cdouble>(10, 0.4, seed);
    const DenseMatrix<cdouble> a = to_dense(c);
    const DenseMatrix<cdouble> l = a.triangularView<Eigen::StrictlyLower>();
    const DenseMatrix<cdouble> u = a.triangularView<Eigen::StrictlyUpper>();
    const DenseMatrix<cdouble> d = a.diagonal().asDiagonal();
    const DenseMatrix<cdouble> dl_inv = (d + l).inverse();
    const DenseMatrix<cdouble> du_inv = (d + u).inverse();
    const DenseMatrix<cdouble> t = dl_inv * u;
    const DenseMatrix<cdouble> s = l * du_inv;
    const DenseMatrix<cdouble> inv = dense_lu_inverse(c);
    const DenseMatrix<cdouble> rhs = dl_inv * d * du_inv + t * inv * s;
    CHECK((inv - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("sample mean of z w^dagger converges at the Monte Carlo rate") {
  const auto c = test::random_dominant<double>(4, 0.8, 44, 1.2);
  const DenseMatrix<double> inv = dense_lu_inverse(c);
  const std::vector<std::uint64_t> checkpoints{1000, 10000, 100000, 1000000};
  const int runs = 8;
  std::vector<double> mse(checkpoints.size(), 0.0);
  const CorrelatedChains<double> chains(c);
  for (int r = 0; r < runs; ++r) {
    const NoiseSpec noise{NoiseFamily::z2, static_cast<std::uint64_t>(100 + r), 4};
    auto burn = run_burn_in(c, noise, default_burn<double>());
    auto z = burn.state.z;
    auto w = burn.state.w;
    DenseMatrix<double> sum = DenseMatrix<double>::Zero(4, 4);
    std::size_t next = 0;
    std::vector<double> phi(4);
    for (std::uint64_t m = 1; m <= checkpoints.back(); ++m) {
      draw(noise, burn.cycles + m, phi);
      chains.sweep_z(z, phi);
      chains.sweep_w(w, phi);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          sum(i, j) += z[i] * w[j];
        }
      }
      if (m == checkpoints[next]) {
        const double err = (sum / static_cast<double>(m) - inv).norm();
        mse[next] += err * err / runs;
        ++next;
      }
    }
  }
  // Least-squares slope of log RMS error against log cycles.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(checkpoints.size());
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const double x = std::log(static_cast<double>(checkpoints[k]));
    const double y = 0.5 * std::log(mse[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.2));
  CHECK(std::sqrt(mse.back()) < 0.01 * inv.norm());
}

TEST_CASE("identical runs are bit-identical") {
  const auto c = test::random_dominant<cdouble>(12, 0.3, 50);
  auto run = [&] {
    return estimate_trace(c, TraceQuery::identity(), NoiseSpec{NoiseFamily::z2, 77, 12},
                          default_burn<cdouble>(), rule(5e-3));
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.value == b.value);
  CHECK(a.mc_std_error == b.mc_std_error);
  CHECK(a.total_cycles == b.total_cycles);
  CHECK(a.series == b.series);
}

TEST_CASE("cycle cap returns an unconverged estimate") {
  const auto c = test::random_dominant<double>(8, 0.3, 60);
  const auto est = estimate_trace(c, TraceQuery::identity(), NoiseSpec{NoiseFamily::gaussian, 1, 8},
                                  default_burn<double>(), rule(1e-9, 0.0, 1000));
  CHECK_FALSE(est.converged);
  CHECK(est.sampling_cycles() == 1000);
}

TEST_CASE("gibbs sampler on hermitian matrices") {
  const auto h = test::random_hermitian<cdouble>(12, 0.4, 70);
  const cdouble want = dense_lu_inverse(h).trace();
  const auto est = estimate_trace_gibbs(h, TraceQuery::identity(),
                                        NoiseSpec{NoiseFamily::gaussian, 3, 12},
                                        default_burn<cdouble>(), rule(2e-3));
  CHECK(est.converged);
  CHECK(std::abs(est.value.real() - want.real()) < 3 * est.mc_std_error_real);
  // z^dagger z is real.
  CHECK(est.value.imag() == 0.0);
  CHECK_THROWS_AS(estimate_trace_gibbs(test::random_dominant<cdouble>(12, 0.4, 71),
                                       TraceQuery::identity(), NoiseSpec{},
                                       default_burn<cdouble>(), rule(1e-2)),
                  InvalidArgument);
}
