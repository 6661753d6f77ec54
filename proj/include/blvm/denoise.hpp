#pragma once

#include "blvm/tensor.hpp"

namespace blvm {

struct DiagonalCompletion {
  Matrix R;
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = false;
};

// Treat the diagonal of M as missing: alternate a top-d eigendecomposition
// with replacing the diagonal by that of the rank-d reconstruction. Off
// diagonal entries are never modified.
DiagonalCompletion complete_diagonal(const Matrix& M, int d, int max_iter = 500,
                                     double tol = 1e-10);

// keep entries with pairwise-distinct indices, zero the rest; idempotent
SymTensor3 mask_offdiag(const SymTensor3& t);

// Least-squares fit of the d x d x d whitened tensor from the off-diagonal
// entries of the m-space tensor: argmin || P_off(T(K+,K+,K+)) - P_off(T_hat) ||_F^2
// over symmetric T, parameterized by its d(d+1)(d+2)/6 independent entries.
SymTensor3 fit_whitened_tensor_masked(const SymTensor3& T_hat, const Matrix& K);

}  // namespace blvm
