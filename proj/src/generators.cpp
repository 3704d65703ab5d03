#include "ccinv/generators.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "ccinv/errors.hpp"
#include "ccinv/iter_solvers.hpp"

namespace ccinv {

void Pedigree::validate() const {
  const index_t n = n_animals();
  if (static_cast<index_t>(dam.size()) != n || static_cast<index_t>(herd.size()) != n) {
    throw InvalidArgument("pedigree arrays have different lengths");
  }
  if (n_herds < 1) {
    throw InvalidArgument("pedigree needs at least one herd");
  }
  for (index_t i = 0; i < n; ++i) {
    for (index_t p : {sire[i], dam[i]}) {
      if (p != kUnknown && (p < 0 || p >= i)) {
        throw InvalidArgument("animal " + std::to_string(i) + " has parent " + std::to_string(p) +
                              " that does not precede it");
      }
    }
    if (herd[i] < 0 || herd[i] >= n_herds) {
      throw InvalidArgument("animal " + std::to_string(i) + " has herd " +
                            std::to_string(herd[i]) + " outside [0, " + std::to_string(n_herds) +
                            ")");
    }
  }
}

Pedigree simulate_pedigree(const PedigreeOptions& opts) {
  const index_t n = opts.n_animals;
  const index_t g = opts.generations;
  if (opts.n_herds < 1 || n < opts.n_herds) {
    throw InvalidArgument("simulate_pedigree needs n_animals >= n_herds >= 1");
  }
  if (g < 1 || g > n) {
    throw InvalidArgument("generations must be in [1, n_animals]");
  }
  if (!(opts.unknown_parent_fraction >= 0.0 && opts.unknown_parent_fraction <= 1.0)) {
    throw InvalidArgument("unknown parent fraction must be in [0, 1]");
  }
  std::vector<index_t> start(static_cast<std::size_t>(g + 1), 0);
  for (index_t k = 0; k < g; ++k) {
    start[k + 1] = start[k] + n / g + (k < n % g ? 1 : 0);
  }
  for (index_t k = 0; k + 1 < g; ++k) {
    if (start[k + 1] - start[k] < 2) {
      throw InvalidArgument("generation " + std::to_string(k) +
                            " has fewer than two animals to act as parents");
    }
  }

  std::mt19937_64 rng(opts.seed);
  std::bernoulli_distribution unknown(opts.unknown_parent_fraction);
  Pedigree ped;
  ped.n_herds = opts.n_herds;
  ped.sire.assign(n, Pedigree::kUnknown);
  ped.dam.assign(n, Pedigree::kUnknown);
  for (index_t k = 1; k < g; ++k) {
    const index_t p0 = start[k - 1];
    const index_t size = start[k] - p0;
    const index_t n_sires = (size + 1) / 2;
    const index_t n_dams = size / 2;
    std::uniform_int_distribution<index_t> pick_sire(0, n_sires - 1);
    std::uniform_int_distribution<index_t> pick_dam(0, n_dams - 1);
    for (index_t i = start[k]; i < start[k + 1]; ++i) {
      const index_t s = p0 + 2 * pick_sire(rng);
      const index_t d = p0 + 2 * pick_dam(rng) + 1;
      ped.sire[i] = unknown(rng) ? Pedigree::kUnknown : s;
      ped.dam[i] = unknown(rng) ? Pedigree::kUnknown : d;
    }
  }

  std::vector<index_t> first(static_cast<std::size_t>(opts.n_herds));
  std::iota(first.begin(), first.end(), index_t{0});
  std::shuffle(first.begin(), first.end(), rng);
  std::vector<index_t> slots(static_cast<std::size_t>(n));
  std::iota(slots.begin(), slots.end(), index_t{0});
  std::shuffle(slots.begin(), slots.end(), rng);
  std::uniform_int_distribution<index_t> pick_herd(0, opts.n_herds - 1);
  ped.herd.assign(n, 0);
  for (index_t k = 0; k < n; ++k) {
    ped.herd[slots[k]] = k < opts.n_herds ? first[k] : pick_herd(rng);
  }
  return ped;
}

Pedigree simulate_pedigree(index_t n_animals, index_t n_herds, index_t generations,
                           std::uint64_t seed) {
  PedigreeOptions opts;
  opts.n_animals = n_animals;
  opts.n_herds = n_herds;
  opts.generations = generations;
  opts.seed = seed;
  return simulate_pedigree(opts);
}

double mendelian_weight(const Pedigree& ped, index_t animal) {
  const int known = (ped.sire[animal] != Pedigree::kUnknown ? 1 : 0) +
                    (ped.dam[animal] != Pedigree::kUnknown ? 1 : 0);
  return known == 2 ? 2.0 : known == 1 ? 4.0 / 3.0 : 1.0;
}

namespace {

void add_atilde_inverse(const Pedigree& ped, double lambda, double scale, index_t offset,
                        std::vector<Triplet<double>>& out) {
  for (index_t i = 0; i < ped.n_animals(); ++i) {
    const double delta = mendelian_weight(ped, i);
    auto add = [&](index_t r, index_t c, double v) {
      out.push_back({offset + r, offset + c, scale * v});
    };
    add(i, i, (1.0 - lambda) * delta + lambda);
    std::vector<index_t> parents;
    for (index_t p : {ped.sire[i], ped.dam[i]}) {
      if (p != Pedigree::kUnknown) {
        parents.push_back(p);
      }
    }
    for (index_t p : parents) {
      add(i, p, -(1.0 - lambda) * delta / 2.0);
      add(p, i, -delta / 2.0);
    }
    for (index_t p : parents) {
      for (index_t q : parents) {
        add(p, q, delta / 4.0);
      }
    }
  }
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidArgument("lambda must be in [0, 1]");
  }
}

}  // namespace

RealMatrix build_atilde_inverse(const Pedigree& ped, double lambda) {
  ped.validate();
  check_lambda(lambda);
  std::vector<Triplet<double>> t;
  add_atilde_inverse(ped, lambda, 1.0, 0, t);
  return RealMatrix::build(ped.n_animals(), t);
}

RealMatrix build_mixed_model_matrix(const Pedigree& ped, const MixedModelSpec& spec) {
  ped.validate();
  check_lambda(spec.lambda);
  if (!(spec.variance_ratio > 0.0)) {
    throw InvalidArgument("variance ratio must be positive");
  }
  const index_t nh = ped.n_herds;
  const index_t na = ped.n_animals();
  std::vector<index_t> counts(static_cast<std::size_t>(nh), 0);
  for (index_t h : ped.herd) {
    ++counts[h];
  }
  for (index_t h = 0; h < nh; ++h) {
    if (counts[h] == 0) {
      throw InvalidArgument("herd " + std::to_string(h) +
                            " has no animals; regenerate the pedigree");
    }
  }
  std::vector<Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(nh + 12 * na));
  for (index_t h = 0; h < nh; ++h) {
    t.push_back({h, h, static_cast<double>(counts[h])});
  }
  for (index_t i = 0; i < na; ++i) {
    t.push_back({ped.herd[i], nh + i, 1.0});
    t.push_back({nh + i, ped.herd[i], 1.0});
    t.push_back({nh + i, nh + i, 1.0});
  }
  add_atilde_inverse(ped, spec.lambda, spec.variance_ratio, nh, t);
  return RealMatrix::build(nh + na, t);
}

index_t LatticeSpec::volume() const {
  return extents[0] * extents[1] * extents[2] * extents[3];
}

void LatticeSpec::validate() const {
  for (index_t e : extents) {
    if (e < 2) {
      throw InvalidArgument("lattice extents must be at least 2 for periodic wraparound");
    }
  }
}

std::array<Gamma, 4> gamma_matrices() {
  using M2 = Eigen::Matrix2cd;
  const cdouble i1(0.0, 1.0);
  M2 s1, s2, s3;
  s1 << 0, 1, 1, 0;
  s2 << 0, -i1, i1, 0;
  s3 << 1, 0, 0, -1;
  std::array<Gamma, 4> g;
  for (int k = 0; k < 3; ++k) {
    const M2& s = k == 0 ? s1 : k == 1 ? s2 : s3;
    g[k].setZero();
    g[k].topRightCorner<2, 2>() = s;
    g[k].bottomLeftCorner<2, 2>() = s;
  }
  g[3] = Gamma::Zero();
  g[3].diagonal() << 1, 1, -1, -1;
  return g;
}

index_t dirac_index(const LatticeSpec& spec, index_t a, index_t b, index_t c, index_t d,
                    index_t mu) {
  const auto& n = spec.extents;
  return a + n[1] * (b + n[2] * (c + n[3] * (d + n[0] * mu)));
}

namespace {

/// Calls emit(row, col, value) for every merged nonzero of one spinor row at a time.
template <typename Emit>
void for_each_dirac_row(const LatticeSpec& spec, Emit emit) {
  spec.validate();
  const auto gammas = gamma_matrices();
  const auto& n = spec.extents;
  const double k = spec.hopping;
  // gamma^mu (mu = 0..2 spatial, 3 time) steps along coordinate axis[mu] of (a,b,c,d).
  const std::array<index_t, 4> len{n[1], n[2], n[3], n[0]};
  std::map<index_t, cdouble> row;
  for (index_t mu = 0; mu < 4; ++mu) {
    for (index_t d = 0; d < n[0]; ++d) {
      for (index_t c = 0; c < n[3]; ++c) {
        for (index_t b = 0; b < n[2]; ++b) {
          for (index_t a = 0; a < n[1]; ++a) {
            row.clear();
            const std::array<index_t, 4> x{a, b, c, d};
            row[dirac_index(spec, a, b, c, d, mu)] += 1.0;
            for (int dir = 0; dir < 4; ++dir) {
              for (int sign : {+1, -1}) {
                auto y = x;
                y[dir] = (y[dir] + sign + len[dir]) % len[dir];
                for (index_t nu = 0; nu < 4; ++nu) {
                  const cdouble g = gammas[dir](mu, nu);
                  const cdouble v = k * ((mu == nu ? 1.0 : 0.0) + static_cast<double>(sign) * g);
                  if (v != cdouble{}) {
                    row[dirac_index(spec, y[0], y[1], y[2], y[3], nu)] += v;
                  }
                }
              }
            }
            const index_t r = dirac_index(spec, a, b, c, d, mu);
            for (const auto& [col, v] : row) {
              if (v != cdouble{}) {
                emit(r, col, v);
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

ComplexMatrix build_dirac_matrix(const LatticeSpec& spec) {
  std::vector<Triplet<cdouble>> t;
  spec.validate();
  t.reserve(static_cast<std::size_t>(14 * spec.order()));
  for_each_dirac_row(spec, [&](index_t r, index_t c, cdouble v) { t.push_back({r, c, v}); });
  return ComplexMatrix::build(spec.order(), t);
}

DiracStructure dirac_structure(const LatticeSpec& spec) {
  DiracStructure s;
  spec.validate();
  s.order = spec.order();
  s.min_row_nnz = std::numeric_limits<index_t>::max();
  index_t current = -1;
  index_t count = 0;
  auto close_row = [&] {
    if (current >= 0) {
      s.min_row_nnz = std::min(s.min_row_nnz, count);
      s.max_row_nnz = std::max(s.max_row_nnz, count);
    }
  };
  for_each_dirac_row(spec, [&](index_t r, index_t, cdouble) {
    if (r != current) {
      close_row();
      current = r;
      count = 0;
    }
    ++count;
    ++s.nnz;
  });
  close_row();
  return s;
}

cdouble dirac_exact_trace(const LatticeSpec& spec) {
  spec.validate();
  if (spec.order() > kDenseOracleCap) {
    throw InvalidArgument("dirac_exact_trace limited to order " + std::to_string(kDenseOracleCap));
  }
  return dense_lu_inverse(build_dirac_matrix(spec)).trace();
}

}  // namespace ccinv
