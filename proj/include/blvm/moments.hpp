#pragma once

#include "blvm/tensor.hpp"

#include <cstdint>

namespace blvm {

struct MomentSet {
  Vector mu;      // mean of the samples
  Matrix M;       // E_hat[x (x) x]
  SymTensor3 T;   // E_hat[x (x) x (x) x]
  std::int64_t n = 0;
};

struct CorrectedMoments {
  Matrix M_sigma;
  SymTensor3 T_sigma;
  double sigma2 = 0.0;
};

struct WhitenedModel {
  Matrix K;           // m x d, K^T M_sigma K = I_d
  SymTensor3 T_white; // d x d x d
  int d = 0;
};

struct LatentMoments {
  Vector phi;       // E[h]
  Matrix Sigma;     // E[h (x) h]
  SymTensor3 Omega; // E[h (x) h (x) h]
};

// explicit distribution over {0,1}^d: binary atom columns with probabilities
struct AtomDistribution {
  Matrix atoms;  // d x k, entries in {0,1}
  Vector probs;  // k, nonnegative, sums to 1

  void validate() const;
  Index dim() const { return atoms.rows(); }
};

struct DSigmaEstimate {
  int d = 0;
  double sigma2 = 0.0;
};

// One streaming pass over the samples (columns of X). The m^3 tensor
// accumulation dominates at O(n m^3); blocks of samples are accumulated in
// extended precision and folded in fixed block order, so results are
// bit-identical for any thread count.
MomentSet empirical_moments(const Matrix& X);

// M_sigma = M - sigma^2 I; T_sigma subtracts sigma^2 (mu,e_i,e_i) symmetrized
CorrectedMoments noise_correct(const MomentSet& moments, double sigma2);

// top-d eigendecomposition whitening K = V_d Lambda_d^{-1/2}; columns lie in
// span(M_sigma) and carry a deterministic sign (largest-|entry| coordinate
// positive)
Matrix whiten(const Matrix& M_sigma, int d);

SymTensor3 whitened_tensor(const SymTensor3& T_sigma, const Matrix& K);

// Spectral-gap estimate: d = count of eigenvalues above the largest gap,
// where each gap is measured relative to the spread of the trailing
// eigenvalues below it; sigma^2 = mean of the trailing block. Exact when
// M = W^T Sigma W + sigma^2 I.
DSigmaEstimate estimate_d_sigma(const Matrix& M_hat);

LatentMoments latent_population_moments(const AtomDistribution& dist);

// count of eigenvalues above rel_tol * max(|lambda|_max, 1) for a symmetric matrix
int numerical_rank_sym(const Matrix& M, double rel_tol = 1e-8);

}  // namespace blvm
