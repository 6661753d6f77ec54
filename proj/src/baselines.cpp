#include "blvm/baselines.hpp"

#include "blvm/rng.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace blvm {

Matrix binary_round(const Matrix& M) {
  Matrix out(M.rows(), M.cols());
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) out(i, j) = M(i, j) >= 0.5 ? 1.0 : 0.0;
  return out;
}

namespace {

// rows of H outside the pivot set of a rank-revealing QR of H^T
std::vector<Index> deficient_rows(const Matrix& H) {
  Eigen::ColPivHouseholderQR<Matrix> qr(H.transpose());
  Index rank = qr.rank();
  std::vector<char> pivoted(static_cast<std::size_t>(H.rows()), 0);
  for (Index i = 0; i < rank; ++i)
    pivoted[static_cast<std::size_t>(qr.colsPermutation().indices()[i])] = 1;
  std::vector<Index> out;
  for (Index r = 0; r < H.rows(); ++r)
    if (!pivoted[static_cast<std::size_t>(r)]) out.push_back(r);
  return out;
}

void randomize_rows(Matrix& H, const std::vector<Index>& rows, Rng& rng) {
  for (Index r : rows)
    for (Index j = 0; j < H.cols(); ++j) H(r, j) = rng.uniform() < 0.5 ? 0.0 : 1.0;
}

}  // namespace

AlsState als(const Matrix& X, int d, int max_iter, std::uint64_t seed, double tol_rel,
             const std::optional<Matrix>& H0) {
  const Index m = X.rows();
  const std::int64_t n = X.cols();
  require(d >= 1 && d <= m, ErrorCode::data, "als: need 1 <= d <= m");
  require(n >= d, ErrorCode::data, "als: need n >= d samples");

  Rng rng(Rng::derive(seed, 0xa15));
  AlsState st;
  if (H0) {
    require(H0->rows() == d && H0->cols() == n, ErrorCode::data, "als: H0 shape mismatch");
    st.H = *H0;
  } else {
    st.H = Matrix(d, n);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < n; ++j) st.H(i, j) = rng.uniform() < 0.5 ? 0.0 : 1.0;
  }

  double prev_obj = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    // W step: unconstrained LS given binary H; re-randomize deficient rows
    int guard = 0;
    for (;;) {
      std::vector<Index> bad = deficient_rows(st.H);
      if (bad.empty()) break;
      require(++guard <= 50, ErrorCode::numerical, "als: could not reach a full-rank H");
      ++st.restarts;
      randomize_rows(st.H, bad, rng);
    }
    Matrix HHt = st.H * st.H.transpose();
    st.W = HHt.ldlt().solve(st.H * X.transpose());
    double obj_w = (X - st.W.transpose() * st.H).squaredNorm();
    st.w_step_objectives.push_back(obj_w);

    // H step: unconstrained LS given W, then round
    Matrix WWt = st.W * st.W.transpose();
    Eigen::LDLT<Matrix> ldlt(WWt);
    if (ldlt.info() != Eigen::Success || ldlt.isNegative()) {
      // degenerate W: restart H entirely
      ++st.restarts;
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < n; ++j) st.H(i, j) = rng.uniform() < 0.5 ? 0.0 : 1.0;
      continue;
    }
    st.H = binary_round(ldlt.solve(st.W * X));

    double obj = (X - st.W.transpose() * st.H).squaredNorm();
    st.objective_trace.push_back(obj);
    st.objective = obj;
    st.iterations = it;
    if (std::abs(prev_obj - obj) <= tol_rel * std::max(prev_obj, 1e-300)) {
      st.converged = true;
      break;
    }
    prev_obj = obj;
  }
  return st;
}

Matrix oracle_ls(const Matrix& X, const Matrix& H_true) {
  require(H_true.cols() == X.cols(), ErrorCode::data, "oracle_ls: sample count mismatch");
  Matrix HHt = H_true * H_true.transpose();
  Eigen::FullPivLU<Matrix> lu(HHt);
  require(lu.isInvertible(), ErrorCode::numerical, "oracle_ls: H is rank deficient");
  return lu.solve(H_true * X.transpose());
}

}  // namespace blvm
