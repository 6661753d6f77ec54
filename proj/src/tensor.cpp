#include "blvm/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace blvm {

SymTensor3 SymTensor3::symmetrized(const Tensor3& t) {
  require(t.dim1() == t.dim2() && t.dim2() == t.dim3(), ErrorCode::data,
          "symmetrized: tensor must be cubic");
  Index d = t.dim1();
  SymTensor3 out(d);
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j)
      for (Index k = j; k < d; ++k) {
        double v = (t(i, j, k) + t(i, k, j) + t(j, i, k) + t(j, k, i) + t(k, i, j) + t(k, j, i)) / 6.0;
        out.set_sym(i, j, k, v);
      }
  return out;
}

void SymTensor3::set_sym(Index i, Index j, Index k, double v) {
  auto at = [this](Index a, Index b, Index c) -> double& {
    return data_[static_cast<std::size_t>((a * d_ + b) * d_ + c)];
  };
  at(i, j, k) = v;
  at(i, k, j) = v;
  at(j, i, k) = v;
  at(j, k, i) = v;
  at(k, i, j) = v;
  at(k, j, i) = v;
}

bool SymTensor3::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Vector SymTensor3::apply(const Vector& u) const {
  require(u.size() == d_, ErrorCode::data, "apply: dimension mismatch");
  Vector w(d_);
  using RowMat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  for (Index j = 0; j < d_; ++j) {
    RowMat slice(data_.data() + j * d_ * d_, d_, d_);
    w[j] = u.dot(slice * u);
  }
  return w;
}

double SymTensor3::cubic(const Vector& u) const { return u.dot(apply(u)); }

Matrix SymTensor3::contract_last(const Vector& u) const {
  require(u.size() == d_, ErrorCode::data, "contract_last: dimension mismatch");
  Matrix out(d_, d_);
  for (Index i = 0; i < d_; ++i)
    for (Index j = 0; j < d_; ++j) {
      const double* fiber = data_.data() + (i * d_ + j) * d_;
      double s = 0.0;
      for (Index l = 0; l < d_; ++l) s += fiber[l] * u[l];
      out(i, j) = s;
    }
  return out;
}

Tensor3 SymTensor3::multilinear(const Matrix& A, const Matrix& B, const Matrix& C) const {
  require(A.rows() == d_ && B.rows() == d_ && C.rows() == d_, ErrorCode::data,
          "multilinear: row dimensions must equal tensor dimension");
  Index d1 = A.cols(), d2 = B.cols(), d3 = C.cols();
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using RowMap = Eigen::Map<const RowMat>;

  // contract modes one at a time: T_{ijk} -> S1_{ajk} -> S2_{abk} -> out_{abc}
  RowMap t_flat(data_.data(), d_, d_ * d_);
  RowMat s1 = A.transpose() * t_flat;  // d1 x (d*d)
  Tensor3 out(d1, d2, d3);
  for (Index a = 0; a < d1; ++a) {
    RowMap s1_a(s1.data() + a * d_ * d_, d_, d_);
    RowMat s2 = B.transpose() * s1_a;  // d2 x d
    RowMat s3 = s2 * C;                // d2 x d3
    for (Index b = 0; b < d2; ++b)
      for (Index c = 0; c < d3; ++c) out(a, b, c) = s3(b, c);
  }
  return out;
}

SymTensor3 SymTensor3::contract_sym(const Matrix& K) const {
  return SymTensor3::symmetrized(multilinear(K, K, K));
}

double SymTensor3::abs_sum() const {
  double s = 0.0;
  for (double v : data_) s += std::abs(v);
  return s;
}

double SymTensor3::norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

SymTensor3 operator-(const SymTensor3& a, const SymTensor3& b) {
  require(a.dim() == b.dim(), ErrorCode::data, "tensor subtraction: dimension mismatch");
  SymTensor3 out = a;
  auto& raw = out.raw_mutable();
  const auto& rb = b.raw();
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] -= rb[i];
  return out;
}

SymTensor3 operator+(const SymTensor3& a, const SymTensor3& b) {
  require(a.dim() == b.dim(), ErrorCode::data, "tensor addition: dimension mismatch");
  SymTensor3 out = a;
  auto& raw = out.raw_mutable();
  const auto& rb = b.raw();
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] += rb[i];
  return out;
}

SymTensor3 add_rank_one(const SymTensor3& t, double c, const Vector& v) {
  require(v.size() == t.dim(), ErrorCode::data, "add_rank_one: dimension mismatch");
  Index d = t.dim();
  SymTensor3 out = t;
  auto& raw = out.raw_mutable();
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index k = 0; k < d; ++k) raw[static_cast<std::size_t>((i * d + j) * d + k)] += c * v[i] * v[j] * v[k];
  return out;
}

Vector residual_g(const SymTensor3& t, const Vector& u) {
  require(std::abs(u.norm() - 1.0) <= 1e-8, ErrorCode::data, "residual_g: input must be unit norm");
  Vector w = t.apply(u);
  return w - w.dot(u) * u;
}

Matrix grad_g(const SymTensor3& t, const Vector& u) {
  Vector w = t.apply(u);
  double lambda = w.dot(u);
  Matrix g = 2.0 * t.contract_last(u);
  g.noalias() -= 3.0 * u * w.transpose();
  g.diagonal().array() -= lambda;
  return g;
}

Matrix tangent_basis(const Vector& u) {
  Index d = u.size();
  Matrix p(d, d - 1);
  if (d <= 1) return p;
  // Householder H = I - 2 vv^T/(v^T v) with v = u + sign(u_0) e_0 maps
  // e_0 to -sign(u_0) u; its remaining columns are an orthonormal basis of u^perp
  double s = u[0] >= 0.0 ? 1.0 : -1.0;
  Vector v = u;
  v[0] += s;
  double scale = 2.0 / v.squaredNorm();
  for (Index c = 1; c < d; ++c) {
    for (Index r = 0; r < d; ++r) {
      double h = (r == c ? 1.0 : 0.0) - scale * v[r] * v[c];
      p(r, c - 1) = h;
    }
  }
  return p;
}

Matrix projected_jacobian(const SymTensor3& t, const Vector& u) {
  require(std::abs(u.norm() - 1.0) <= 1e-8, ErrorCode::data, "projected_jacobian: input must be unit norm");
  Matrix p = tangent_basis(u);
  return p.transpose() * grad_g(t, u) * p;
}

const char* stability_name(Stability s) {
  switch (s) {
    case Stability::newton_stable: return "newton_stable";
    case Stability::power_stable_negative: return "power_stable_negative";
    case Stability::power_stable_positive: return "power_stable_positive";
    case Stability::unstable: return "unstable";
  }
  return "unknown";
}

void canonicalize_sign(Vector& u, double& lambda) {
  if (lambda < 0.0) {
    lambda = -lambda;
    u = -u;
    return;
  }
  if (lambda > 1e-12) return;
  // lambda == 0 (numerically): orient by the first significant coordinate
  for (Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > 1e-12) {
      if (u[i] < 0.0) u = -u;
      return;
    }
  }
}

Stability classify(const SymTensor3& t, const Eigenpair& pair) {
  Index d = t.dim();
  if (d == 1) return Stability::power_stable_negative;  // empty Jacobian, degenerate case

  Matrix jp = projected_jacobian(t, pair.u);
  Eigen::JacobiSVD<Matrix> svd(jp);
  double smax = svd.singularValues()[0];
  double rank_tol = 1e-8 * std::max(smax, 1.0);
  if (svd.singularValues().minCoeff() <= rank_tol) return Stability::unstable;

  Matrix sym = 0.5 * (jp + jp.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Vector& ev = es.eigenvalues();
  if (ev.maxCoeff() < -rank_tol) return Stability::power_stable_negative;
  if (ev.minCoeff() > rank_tol) return Stability::power_stable_positive;
  return Stability::newton_stable;
}

}  // namespace blvm
