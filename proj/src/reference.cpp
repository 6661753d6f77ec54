#include "blvm/reference.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace blvm::reference {

Vector mode_apply(const SymTensor3& t, const Vector& u) {
  const Index d = t.dim();
  Vector w = Vector::Zero(d);
  for (Index j = 0; j < d; ++j)
    for (Index k = 0; k < d; ++k)
      for (Index l = 0; l < d; ++l) w[j] += t(j, k, l) * u[k] * u[l];
  return w;
}

double cubic(const SymTensor3& t, const Vector& u) {
  const Index d = t.dim();
  double s = 0.0;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index k = 0; k < d; ++k) s += t(i, j, k) * u[i] * u[j] * u[k];
  return s;
}

Tensor3 multilinear(const SymTensor3& t, const Matrix& A, const Matrix& B, const Matrix& C) {
  const Index d = t.dim();
  Tensor3 out(A.cols(), B.cols(), C.cols());
  for (Index a = 0; a < A.cols(); ++a)
    for (Index b = 0; b < B.cols(); ++b)
      for (Index c = 0; c < C.cols(); ++c) {
        double s = 0.0;
        for (Index i = 0; i < d; ++i)
          for (Index j = 0; j < d; ++j)
            for (Index k = 0; k < d; ++k) s += A(i, a) * B(j, b) * C(k, c) * t(i, j, k);
        out(a, b, c) = s;
      }
  return out;
}

Vector residual_g(const SymTensor3& t, const Vector& u) {
  return mode_apply(t, u) - cubic(t, u) * u;
}

Matrix projected_jacobian_fd(const SymTensor3& t, const Vector& u, const Matrix& basis,
                             double step) {
  const Index d = u.size();
  Matrix jac(d, d);  // full Jacobian of g by central differences
  for (Index c = 0; c < d; ++c) {
    Vector up = u, um = u;
    up[c] += step;
    um[c] -= step;
    Vector gp = mode_apply(t, up) - cubic(t, up) * up;
    Vector gm = mode_apply(t, um) - cubic(t, um) * um;
    jac.col(c) = (gp - gm) / (2.0 * step);
  }
  return basis.transpose() * jac * basis;
}

MomentSet empirical_moments(const Matrix& X) {
  const Index m = X.rows();
  const Index n = X.cols();
  MomentSet out;
  out.n = n;
  out.mu = Vector::Zero(m);
  out.M = Matrix::Zero(m, m);
  Tensor3 acc(m, m, m);
  for (Index s = 0; s < n; ++s) {
    Vector x = X.col(s);
    out.mu += x;
    out.M += x * x.transpose();
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j)
        for (Index k = 0; k < m; ++k) acc(i, j, k) += x[i] * x[j] * x[k];
  }
  out.mu /= static_cast<double>(n);
  out.M /= static_cast<double>(n);
  for (Index i = 0; i < m * m * m; ++i) acc.data()[i] /= static_cast<double>(n);
  out.T = SymTensor3::symmetrized(acc);
  return out;
}

Matrix wls_full_posterior(const Matrix& X, const Matrix& W_hat, double sigma) {
  const Index d = W_hat.rows();
  const std::int64_t n_states = std::int64_t{1} << d;
  Matrix A = Matrix::Zero(d, d);
  Matrix B = Matrix::Zero(d, W_hat.cols());
  for (Index col = 0; col < X.cols(); ++col) {
    Vector x = X.col(col);
    std::vector<double> lik(static_cast<std::size_t>(n_states));
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(n_states));
    for (std::int64_t mask = 0; mask < n_states; ++mask) {
      Vector h(d);
      for (Index i = 0; i < d; ++i) h[i] = (mask >> i & 1) ? 1.0 : 0.0;
      dist[static_cast<std::size_t>(mask)] = (x - W_hat.transpose() * h).squaredNorm();
      best = std::min(best, dist[static_cast<std::size_t>(mask)]);
    }
    double wsum = 0.0;
    for (std::int64_t mask = 0; mask < n_states; ++mask) {
      lik[static_cast<std::size_t>(mask)] =
          std::exp(-(dist[static_cast<std::size_t>(mask)] - best) / (2.0 * sigma * sigma));
      wsum += lik[static_cast<std::size_t>(mask)];
    }
    for (std::int64_t mask = 0; mask < n_states; ++mask) {
      double w = lik[static_cast<std::size_t>(mask)] / wsum;
      Vector h(d);
      for (Index i = 0; i < d; ++i) h[i] = (mask >> i & 1) ? 1.0 : 0.0;
      A += w * h * h.transpose();
      B += w * h * x.transpose();
    }
  }
  return A.ldlt().solve(B);
}

}  // namespace blvm::reference
