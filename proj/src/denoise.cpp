#include "blvm/denoise.hpp"

#include "blvm/parallel.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

namespace blvm {

DiagonalCompletion complete_diagonal(const Matrix& M, int d, int max_iter, double tol) {
  const Index m = M.rows();
  require(M.cols() == m, ErrorCode::data, "complete_diagonal: matrix must be square");
  require(d >= 1 && d < m, ErrorCode::data, "complete_diagonal: need m > d >= 1");

  DiagonalCompletion out;
  out.R = M;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(out.R);
    require(es.info() == Eigen::Success, ErrorCode::numerical,
            "complete_diagonal: eigendecomposition failed");
    // top d eigenpairs by algebraic value
    double delta = 0.0;
    Vector new_diag = Vector::Zero(m);
    for (int c = 0; c < d; ++c) {
      double lam = es.eigenvalues()[m - 1 - c];
      Vector v = es.eigenvectors().col(m - 1 - c);
      new_diag += lam * v.cwiseProduct(v);
    }
    for (Index j = 0; j < m; ++j) delta = std::max(delta, std::abs(new_diag[j] - out.R(j, j)));
    out.R.diagonal() = new_diag;
    out.iterations = it;
    out.final_delta = delta;
    if (delta < tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

SymTensor3 mask_offdiag(const SymTensor3& t) {
  const Index m = t.dim();
  SymTensor3 out(m);
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j)
      for (Index k = j + 1; k < m; ++k) out.set_sym(i, j, k, t(i, j, k));
  return out;
}

SymTensor3 fit_whitened_tensor_masked(const SymTensor3& T_hat, const Matrix& K) {
  const Index m = T_hat.dim();
  const Index d = K.cols();
  require(K.rows() == m, ErrorCode::data, "fit_whitened_tensor_masked: dimension mismatch");

  const Index n_unknown = d * (d + 1) * (d + 2) / 6;
  const Index n_eq = m * (m - 1) * (m - 2) / 6;
  require(n_eq >= n_unknown, ErrorCode::data,
          "fit_whitened_tensor_masked: fewer off-diagonal equations than unknowns");

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
  require(cod.rank() == d, ErrorCode::numerical, "fit_whitened_tensor_masked: K is rank deficient");
  Matrix Kp = cod.pseudoInverse();  // d x m

  // canonical unknown index for sorted (a <= b <= c)
  std::vector<Index> unk_index(static_cast<std::size_t>(d * d * d));
  {
    Index next = 0;
    std::vector<Index> canon(static_cast<std::size_t>(d * d * d), -1);
    for (Index a = 0; a < d; ++a)
      for (Index b = a; b < d; ++b)
        for (Index c = b; c < d; ++c) canon[static_cast<std::size_t>((a * d + b) * d + c)] = next++;
    for (Index a = 0; a < d; ++a)
      for (Index b = 0; b < d; ++b)
        for (Index c = 0; c < d; ++c) {
          Index s[3] = {a, b, c};
          if (s[0] > s[1]) std::swap(s[0], s[1]);
          if (s[1] > s[2]) std::swap(s[1], s[2]);
          if (s[0] > s[1]) std::swap(s[0], s[1]);
          unk_index[static_cast<std::size_t>((a * d + b) * d + c)] =
              canon[static_cast<std::size_t>((s[0] * d + s[1]) * d + s[2])];
        }
  }

  // one equation per unordered pairwise-distinct triple i < j < k
  std::vector<std::array<Index, 3>> triples;
  triples.reserve(static_cast<std::size_t>(n_eq));
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j)
      for (Index k = j + 1; k < m; ++k) triples.push_back({i, j, k});

  Matrix D = Matrix::Zero(n_eq, n_unknown);
  Vector rhs(n_eq);
  parallel_for(0, static_cast<std::int64_t>(triples.size()), [&](std::int64_t e) {
    const auto [i, j, k] = triples[static_cast<std::size_t>(e)];
    rhs[e] = T_hat(i, j, k);
    for (Index a = 0; a < d; ++a)
      for (Index b = 0; b < d; ++b) {
        const double kab = Kp(a, i) * Kp(b, j);
        if (kab == 0.0) continue;
        for (Index c = 0; c < d; ++c)
          D(e, unk_index[static_cast<std::size_t>((a * d + b) * d + c)]) += kab * Kp(c, k);
      }
  });

  // rank diagnostics before the normal-equation solve
  Eigen::BDCSVD<Matrix> svd(D);
  double smin = svd.singularValues()[svd.singularValues().size() - 1];
  double smax = svd.singularValues()[0];
  if (smin <= 1e-10 * std::max(smax, 1.0)) {
    Index rank = 0;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > 1e-10 * std::max(smax, 1.0)) ++rank;
    std::ostringstream msg;
    msg << "fit_whitened_tensor_masked: rank-deficient design (rank " << rank << " of " << n_unknown
        << ", smallest singular value " << smin << ")";
    throw Error(ErrorCode::numerical, msg.str());
  }

  Matrix N = D.transpose() * D;
  Vector b = D.transpose() * rhs;
  Eigen::LDLT<Matrix> ldlt(N);
  require(ldlt.info() == Eigen::Success, ErrorCode::numerical,
          "fit_whitened_tensor_masked: normal equations not positive definite");
  Vector sol = ldlt.solve(b);

  SymTensor3 out(d);
  Index next = 0;
  for (Index a = 0; a < d; ++a)
    for (Index b2 = a; b2 < d; ++b2)
      for (Index c = b2; c < d; ++c) out.set_sym(a, b2, c, sol[next++]);
  return out;
}

}  // namespace blvm
