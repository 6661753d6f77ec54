#pragma once

#include "blvm/moments.hpp"

#include <cstdint>
#include <optional>

namespace blvm {

// columns i.i.d. uniform on the unit sphere; redrawn until full rank
Matrix gen_W(int d, int m, std::uint64_t seed);

// h = 1{ r >= 0.5 } with r ~ N(a, R) per column; R must be PSD
Matrix gen_H_gaussian_round(int d, std::int64_t n, const Vector& a, const Matrix& R,
                            std::uint64_t seed);

// Deterministic rigid prefix (all e_i followed by all e_i + e_j, i < j) padded
// by thresholded-Gaussian columns. The prefix certifies rigidity by
// construction. pad_a / pad_R default to N(0.5 * 1, I).
Matrix gen_H_rigid_block(int d, std::int64_t n, std::uint64_t seed,
                         const std::optional<Vector>& pad_a = std::nullopt,
                         const std::optional<Matrix>& pad_R = std::nullopt);

// X = W^T H + sigma E with i.i.d. standard normal E
Matrix gen_X(const Matrix& W, const Matrix& H, double sigma, std::uint64_t seed);

// column-stochastic admixture proportions, columns i.i.d. Dirichlet(alpha * 1)
Matrix gen_dirichlet_W(int d, int m, double alpha, std::uint64_t seed);

// allele frequencies in [0,1], entries i.i.d. Beta(a, b); small symmetric
// parameters give the near-fixation regime (mass at 0 and 1)
Matrix gen_H_beta_freq(int d, std::int64_t n, double beta_a, double beta_b, std::uint64_t seed);

// X_ij = Binomial(2, F_ij) / 2 with F = W^T H; all F entries must be in [0,1]
Matrix gen_binomial_X(const Matrix& W, const Matrix& H_freq, std::uint64_t seed);

// draw columns of H i.i.d. from an explicit atom distribution
Matrix gen_H_atoms(const AtomDistribution& dist, std::int64_t n, std::uint64_t seed);

struct HiddenLaw {
  enum class Kind { gaussian_round, atoms, rigid_block, dirichlet_admixture };
  Kind kind = Kind::gaussian_round;
  // gaussian_round / rigid_block padding
  std::optional<Vector> a;
  std::optional<Matrix> R;
  // atoms
  std::optional<AtomDistribution> dist;
  // dirichlet_admixture
  double alpha = 1.0;
  double beta_a = 0.1;
  double beta_b = 0.1;
};

struct InstanceSpec {
  int d = 0;
  int m = 0;
  std::int64_t n = 0;
  double sigma = 0.0;
  HiddenLaw law;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Instance {
  Matrix W;  // d x m
  Matrix H;  // d x n (binary, or frequencies for the admixture law)
  Matrix X;  // m x n
};

// Pure function of (spec, seed). The dirichlet_admixture law produces the
// binomial observation model (W column-stochastic, H allele frequencies);
// every other law produces X = W^T H + sigma E.
Instance make_instance(const InstanceSpec& spec);

}  // namespace blvm
