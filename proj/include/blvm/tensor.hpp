#pragma once

#include "blvm/types.hpp"

#include <vector>

namespace blvm {

// dense order-3 tensor, row-major layout: entry (i,j,k) at (i*n2 + j)*n3 + k
class Tensor3 {
 public:
  Tensor3() : n1_(0), n2_(0), n3_(0) {}
  Tensor3(Index n1, Index n2, Index n3)
      : n1_(n1), n2_(n2), n3_(n3), data_(static_cast<std::size_t>(n1 * n2 * n3), 0.0) {}

  Index dim1() const { return n1_; }
  Index dim2() const { return n2_; }
  Index dim3() const { return n3_; }

  double& operator()(Index i, Index j, Index k) {
    return data_[static_cast<std::size_t>((i * n2_ + j) * n3_ + k)];
  }
  double operator()(Index i, Index j, Index k) const {
    return data_[static_cast<std::size_t>((i * n2_ + j) * n3_ + k)];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  Index n1_, n2_, n3_;
  std::vector<double> data_;
};

// Symmetric d x d x d tensor. Entries are stored dense and symmetry is
// enforced on construction/write, so T(i,j,k) == T(pi(i,j,k)) holds exactly.
class SymTensor3 {
 public:
  SymTensor3() : d_(0) {}
  explicit SymTensor3(Index d) : d_(d), data_(static_cast<std::size_t>(d * d * d), 0.0) {}

  // symmetrize arbitrary cubic data by averaging over the 6 index permutations
  static SymTensor3 symmetrized(const Tensor3& t);

  Index dim() const { return d_; }

  double operator()(Index i, Index j, Index k) const {
    return data_[static_cast<std::size_t>((i * d_ + j) * d_ + k)];
  }

  // write one canonical entry into every index permutation
  void set_sym(Index i, Index j, Index k, double v);

  const std::vector<double>& raw() const { return data_; }
  std::vector<double>& raw_mutable() { return data_; }

  bool all_finite() const;

  // T(I,u,u)
  Vector apply(const Vector& u) const;
  // T(u,u,u)
  double cubic(const Vector& u) const;
  // T(I,I,u), a symmetric d x d matrix
  Matrix contract_last(const Vector& u) const;
  // general tensor-mode product T(A,B,C); rows of A,B,C must equal dim()
  Tensor3 multilinear(const Matrix& A, const Matrix& B, const Matrix& C) const;
  // T(K,K,K) re-symmetrized, for contracting with a single matrix
  SymTensor3 contract_sym(const Matrix& K) const;

  double abs_sum() const;
  double norm() const;  // Frobenius

 private:
  Index d_;
  std::vector<double> data_;
};

SymTensor3 operator-(const SymTensor3& a, const SymTensor3& b);
SymTensor3 operator+(const SymTensor3& a, const SymTensor3& b);

// rank-one update helper: T + c * v (x) v (x) v
SymTensor3 add_rank_one(const SymTensor3& t, double c, const Vector& v);

// g(u) = T(I,u,u) - T(u,u,u) u; zero exactly at eigenvectors
Vector residual_g(const SymTensor3& t, const Vector& u);

// gradient of g: 2 T(I,I,u) - 3 u T(I,u,u)^T - T(u,u,u) I
Matrix grad_g(const SymTensor3& t, const Vector& u);

// deterministic orthonormal basis of u^perp (Householder reflector columns)
Matrix tangent_basis(const Vector& u);

// (d-1)x(d-1) restriction of grad_g to the tangent space at u
Matrix projected_jacobian(const SymTensor3& t, const Vector& u);

enum class Stability { newton_stable, power_stable_negative, power_stable_positive, unstable };

const char* stability_name(Stability s);

struct Eigenpair {
  Vector u;
  double lambda = 0.0;
  Stability stability = Stability::unstable;
  double residual = 0.0;
};

// flip (u, lambda) -> (-u, -lambda) so that lambda >= 0; a lambda of exactly
// zero is resolved by making the first nonzero coordinate of u positive
void canonicalize_sign(Vector& u, double& lambda);

// Classification against the projected Jacobian: full rank => newton_stable,
// and additionally definite (after symmetrizing) => power stable with the
// matching sign. rank_tol = 1e-8 * max(sigma_max, 1).
Stability classify(const SymTensor3& t, const Eigenpair& pair);

}  // namespace blvm
