#include "blvm/moments.hpp"

#include "blvm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace blvm {

namespace {

constexpr std::int64_t kBlock = 2048;

struct MomentPartial {
  std::vector<double> mu;
  std::vector<double> pair_sums;    // i <= j, canonical order
  std::vector<double> triple_sums;  // i <= j <= k, canonical order
};

}  // namespace

MomentSet empirical_moments(const Matrix& X) {
  const Index m = X.rows();
  const std::int64_t n = X.cols();
  require(n >= 1, ErrorCode::data, "empirical_moments: empty sample");

  const std::size_t n_pairs = static_cast<std::size_t>(m * (m + 1) / 2);
  const std::size_t n_triples = static_cast<std::size_t>(m * (m + 1) * (m + 2) / 6);

  MomentPartial init;
  init.mu.assign(static_cast<std::size_t>(m), 0.0);
  init.pair_sums.assign(n_pairs, 0.0);
  init.triple_sums.assign(n_triples, 0.0);

  MomentPartial total = blocked_reduce<MomentPartial>(
      n, kBlock, init,
      [&](MomentPartial& p, std::int64_t lo, std::int64_t hi) {
        // extended-precision block accumulators
        std::vector<long double> mu(static_cast<std::size_t>(m), 0.0L);
        std::vector<long double> s2(n_pairs, 0.0L);
        std::vector<long double> s3(n_triples, 0.0L);
        for (std::int64_t col = lo; col < hi; ++col) {
          const double* x = X.col(col).data();
          std::size_t p2 = 0, p3 = 0;
          for (Index i = 0; i < m; ++i) {
            mu[static_cast<std::size_t>(i)] += x[i];
            for (Index j = i; j < m; ++j) {
              const double xij = x[i] * x[j];
              s2[p2++] += xij;
              for (Index k = j; k < m; ++k) s3[p3++] += xij * x[k];
            }
          }
        }
        for (std::size_t i = 0; i < p.mu.size(); ++i) p.mu[i] = static_cast<double>(mu[i]);
        for (std::size_t i = 0; i < n_pairs; ++i) p.pair_sums[i] = static_cast<double>(s2[i]);
        for (std::size_t i = 0; i < n_triples; ++i) p.triple_sums[i] = static_cast<double>(s3[i]);
      },
      [](MomentPartial& acc, const MomentPartial& p) {
        for (std::size_t i = 0; i < acc.mu.size(); ++i) acc.mu[i] += p.mu[i];
        for (std::size_t i = 0; i < acc.pair_sums.size(); ++i) acc.pair_sums[i] += p.pair_sums[i];
        for (std::size_t i = 0; i < acc.triple_sums.size(); ++i) acc.triple_sums[i] += p.triple_sums[i];
      });

  MomentSet out;
  out.n = n;
  out.mu = Vector(m);
  for (Index i = 0; i < m; ++i) out.mu[i] = total.mu[static_cast<std::size_t>(i)] / static_cast<double>(n);

  out.M = Matrix(m, m);
  std::size_t p2 = 0;
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j) {
      double v = total.pair_sums[p2++] / static_cast<double>(n);
      out.M(i, j) = v;
      out.M(j, i) = v;
    }

  out.T = SymTensor3(m);
  std::size_t p3 = 0;
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j)
      for (Index k = j; k < m; ++k) out.T.set_sym(i, j, k, total.triple_sums[p3++] / static_cast<double>(n));
  return out;
}

CorrectedMoments noise_correct(const MomentSet& moments, double sigma2) {
  require(sigma2 >= 0.0, ErrorCode::data, "noise_correct: sigma2 must be nonnegative");
  const Index m = moments.M.rows();
  CorrectedMoments out;
  out.sigma2 = sigma2;
  out.M_sigma = moments.M;
  out.M_sigma.diagonal().array() -= sigma2;

  out.T_sigma = moments.T;
  const Vector& mu = moments.mu;
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j)
      for (Index k = j; k < m; ++k) {
        double corr = 0.0;
        if (j == k) corr += mu[i];
        if (i == k) corr += mu[j];
        if (i == j) corr += mu[k];
        if (corr != 0.0) out.T_sigma.set_sym(i, j, k, out.T_sigma(i, j, k) - sigma2 * corr);
      }
  return out;
}

Matrix whiten(const Matrix& M_sigma, int d) {
  const Index m = M_sigma.rows();
  require(M_sigma.cols() == m, ErrorCode::data, "whiten: matrix must be square");
  require(d >= 1 && d <= m, ErrorCode::data, "whiten: d out of range");

  Eigen::SelfAdjointEigenSolver<Matrix> es(M_sigma);
  require(es.info() == Eigen::Success, ErrorCode::numerical, "whiten: eigendecomposition failed");
  const Vector& ev = es.eigenvalues();  // ascending
  double scale = std::max(std::abs(ev[m - 1]), 1.0);
  double pos_tol = 1e-12 * scale;

  double lambda_d = ev[m - d];
  if (lambda_d <= pos_tol) {
    std::ostringstream msg;
    msg << "whiten: effective rank below d=" << d << " (eigenvalue " << d << " from top is " << lambda_d;
    if (d < m) msg << ", next " << ev[m - d - 1];
    msg << ")";
    throw Error(ErrorCode::numerical, msg.str());
  }

  Matrix K(m, d);
  for (int c = 0; c < d; ++c) {
    Vector v = es.eigenvectors().col(m - 1 - c);
    // deterministic sign: largest-|entry| coordinate positive
    Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    K.col(c) = v / std::sqrt(ev[m - 1 - c]);
  }
  return K;
}

SymTensor3 whitened_tensor(const SymTensor3& T_sigma, const Matrix& K) {
  require(K.rows() == T_sigma.dim(), ErrorCode::data, "whitened_tensor: dimension mismatch");
  return T_sigma.contract_sym(K);
}

DSigmaEstimate estimate_d_sigma(const Matrix& M_hat) {
  const Index m = M_hat.rows();
  require(m >= 2, ErrorCode::data, "estimate_d_sigma: need m >= 2");
  Eigen::SelfAdjointEigenSolver<Matrix> es(M_hat, Eigen::EigenvaluesOnly);
  Vector ev = es.eigenvalues().reverse();  // descending

  double scale = std::max(std::abs(ev[0]), 1.0);
  require(ev[0] - ev[m - 1] > 1e-12 * scale, ErrorCode::numerical,
          "estimate_d_sigma: degenerate spectrum, d undeterminable");

  // gap at i is judged against the spread of everything below it, so an exact
  // constant tail (population case) always wins
  double floor = 1e-12 * scale;
  int best_i = 0;
  double best_gap = -1.0;
  for (Index i = 0; i + 1 < m; ++i) {
    double spread = ev[i + 1] - ev[m - 1];
    double gap = (ev[i] - ev[i + 1]) / (spread + floor);
    if (gap > best_gap) {
      best_gap = gap;
      best_i = static_cast<int>(i);
    }
  }
  DSigmaEstimate out;
  out.d = best_i + 1;
  out.sigma2 = std::max(0.0, ev.tail(m - out.d).mean());
  return out;
}

void AtomDistribution::validate() const {
  require(atoms.cols() == probs.size(), ErrorCode::data, "atom distribution: atom/prob count mismatch");
  require(atoms.cols() >= 1, ErrorCode::data, "atom distribution: empty support");
  for (Index c = 0; c < atoms.cols(); ++c)
    for (Index r = 0; r < atoms.rows(); ++r)
      require(atoms(r, c) == 0.0 || atoms(r, c) == 1.0, ErrorCode::data,
              "atom distribution: atoms must be binary");
  require(probs.minCoeff() >= -1e-15, ErrorCode::data, "atom distribution: negative probability");
  require(std::abs(probs.sum() - 1.0) <= 1e-12, ErrorCode::data,
          "atom distribution: probabilities must sum to 1");
}

LatentMoments latent_population_moments(const AtomDistribution& dist) {
  dist.validate();
  const Index d = dist.dim();
  LatentMoments lm;
  lm.phi = Vector::Zero(d);
  lm.Sigma = Matrix::Zero(d, d);
  lm.Omega = SymTensor3(d);
  auto& raw = lm.Omega.raw_mutable();
  for (Index c = 0; c < dist.atoms.cols(); ++c) {
    const double p = dist.probs[c];
    const Vector h = dist.atoms.col(c);
    lm.phi += p * h;
    lm.Sigma += p * h * h.transpose();
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        for (Index k = 0; k < d; ++k)
          raw[static_cast<std::size_t>((i * d + j) * d + k)] += p * h[i] * h[j] * h[k];
  }
  return lm;
}

int numerical_rank_sym(const Matrix& M, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  double tol = rel_tol * std::max(scale, 1e-300);
  int rank = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i]) > tol) ++rank;
  return rank;
}

}  // namespace blvm
