#pragma once

#include "blvm/moments.hpp"
#include "blvm/tensor.hpp"

namespace blvm::reference {

// Naive single-threaded implementations kept as independent oracles for the
// optimized kernels. They follow the defining summations literally and share
// no code with the library paths they check.

Vector mode_apply(const SymTensor3& t, const Vector& u);

double cubic(const SymTensor3& t, const Vector& u);

Tensor3 multilinear(const SymTensor3& t, const Matrix& A, const Matrix& B, const Matrix& C);

Vector residual_g(const SymTensor3& t, const Vector& u);

// central finite differences of g projected onto the tangent basis
Matrix projected_jacobian_fd(const SymTensor3& t, const Vector& u, const Matrix& basis,
                             double step = 1e-5);

// per-sample outer-product loops, no blocking, no symmetry tricks
MomentSet empirical_moments(const Matrix& X);

// full-posterior weighted least squares (every binary state, no top-k cut)
Matrix wls_full_posterior(const Matrix& X, const Matrix& W_hat, double sigma);

}  // namespace blvm::reference
