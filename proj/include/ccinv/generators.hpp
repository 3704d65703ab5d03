#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ccinv/sparse_matrix.hpp"

namespace ccinv {

/// Animals are numbered so that parents precede offspring.
struct Pedigree {
  static constexpr index_t kUnknown = -1;

  std::vector<index_t> sire;
  std::vector<index_t> dam;
  std::vector<index_t> herd;
  index_t n_herds = 0;

  index_t n_animals() const noexcept { return static_cast<index_t>(sire.size()); }
  /// Throws InvalidArgument unless parents precede offspring and herds are in range.
  void validate() const;
};

struct PedigreeOptions {
  index_t n_animals = 1;
  index_t n_herds = 1;
  /// Discrete generations; generation 0 are founders with unknown parents.
  index_t generations = 1;
  /// Probability that each parent of a non-founder is recorded as unknown.
  double unknown_parent_fraction = 0.1;
  std::uint64_t seed = 0;
};

/// Random-mating population. Generation sizes differ by at most one, larger ones first.
/// Within a generation even positions are sires and odd are dams; each non-founder
/// draws its sire and dam from the previous generation. Herds are a random
/// permutation for the first n_herds animals (no herd is empty) and uniform after.
/// Throws InvalidArgument when a parent generation has fewer than two animals.
Pedigree simulate_pedigree(const PedigreeOptions& opts);
Pedigree simulate_pedigree(index_t n_animals, index_t n_herds, index_t generations,
                           std::uint64_t seed);

/// delta_i: 2 with both parents known, 4/3 with one, 1 with none.
double mendelian_weight(const Pedigree& ped, index_t animal);

/// Asymmetric relationship inverse A~^-1 accumulated per animal i with parents s, d:
///   (i,i) += (1 - lambda) delta + lambda
///   (i,s), (i,d) += -(1 - lambda) delta / 2
///   (s,i), (d,i) += -delta / 2
///   (s,s), (d,d), (s,d), (d,s) += delta / 4
/// At lambda = 0 this is Henderson's A^-1 for a non-inbred population.
RealMatrix build_atilde_inverse(const Pedigree& ped, double lambda);

struct MixedModelSpec {
  /// sigma_e^2 / sigma_a^2, multiplies A~^-1.
  double variance_ratio = 3.0;
  double lambda = 0.2;
};

/// [[X^T X, X^T], [X, I + ratio A~^-1]] with herds first (rows 0..n_h-1) and animal i
/// at row n_h + i; X is the animal-by-herd incidence. Throws InvalidArgument for an
/// empty herd, which would leave a zero diagonal.
RealMatrix build_mixed_model_matrix(const Pedigree& ped, const MixedModelSpec& spec);

/// Extents (N0, N1, N2, N3) and hopping constant K. N0 is the time extent.
struct LatticeSpec {
  std::array<index_t, 4> extents{4, 4, 4, 4};
  double hopping = 0.1;

  index_t volume() const;
  index_t order() const { return 4 * volume(); }
  void validate() const;
};

using Gamma = Eigen::Matrix4cd;

/// gamma^1..3 = [[0, sigma^i], [sigma^i, 0]] with the standard Pauli matrices and
/// gamma^4 = diag(1, 1, -1, -1); they satisfy {gamma^mu, gamma^nu} = 2 delta_mu_nu.
std::array<Gamma, 4> gamma_matrices();

/// Row of spinor mu at site (a, b, c, d): a + N1 (b + N2 (c + N3 (d + N0 mu))).
/// gamma^1..3 step along a, b, c and gamma^4 along the time coordinate d.
index_t dirac_index(const LatticeSpec& spec, index_t a, index_t b, index_t c, index_t d,
                    index_t mu);

/// L = 1 + K sum_mu [(1 + gamma^mu) to the forward neighbour + (1 - gamma^mu) to the
/// backward one], periodic in every direction. Entries that cancel are dropped, so
/// extent-2 directions (forward == backward) merge to 2K on the spinor diagonal.
ComplexMatrix build_dirac_matrix(const LatticeSpec& spec);

struct DiracStructure {
  index_t order = 0;
  index_t nnz = 0;
  index_t min_row_nnz = 0;
  index_t max_row_nnz = 0;
};

/// Order and nonzero count of build_dirac_matrix(spec) from the index structure alone,
/// for lattices too large to assemble.
DiracStructure dirac_structure(const LatticeSpec& spec);

/// tr L^-1 by dense LU; order capped at kDenseOracleCap.
cdouble dirac_exact_trace(const LatticeSpec& spec);

}  // namespace ccinv
