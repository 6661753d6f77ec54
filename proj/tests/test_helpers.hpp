#pragma once

#include "blvm/rng.hpp"
#include "blvm/tensor.hpp"

#include <doctest.h>

namespace blvm::testing {

inline SymTensor3 random_sym_tensor(Index d, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Tensor3 raw(d, d, d);
  for (Index i = 0; i < d * d * d; ++i) raw.data()[i] = scale * rng.normal();
  return SymTensor3::symmetrized(raw);
}

inline SymTensor3 diagonal_tensor(const Vector& a) {
  SymTensor3 t(a.size());
  for (Index i = 0; i < a.size(); ++i) t.set_sym(i, i, i, a[i]);
  return t;
}

// orthogonally decomposable tensor sum_i w_i q_i (x) q_i (x) q_i with the
// q_i an orthonormal set derived from a seeded QR factorization
inline SymTensor3 odeco_tensor(const Vector& weights, std::uint64_t seed, Matrix* q_out = nullptr) {
  const Index d = weights.size();
  Rng rng(seed);
  Matrix A(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) A(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ();
  SymTensor3 t(d);
  for (Index c = 0; c < d; ++c) t = add_rank_one(t, weights[c], Q.col(c));
  if (q_out) *q_out = Q;
  return t;
}

inline double direction_distance(const Vector& a, const Vector& b) {
  return std::min((a - b).norm(), (a + b).norm());
}

}  // namespace blvm::testing
