#include "blvm/learn.hpp"

#include "blvm/denoise.hpp"
#include "blvm/parallel.hpp"
#include "blvm/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace blvm {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244); }

bool lex_less_vec(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace

Gmm2Params gmm2_for(const Candidate& cand, double sigma) {
  Gmm2Params p;
  // eigenvalues just below 1 (allowed by the threshold) are truncated to the
  // boundary mixture so the weights stay in [0,1]
  double lam = std::max(cand.lambda, 1.0);
  p.weight1 = 1.0 - 1.0 / (lam * lam);
  p.var = sigma * sigma * cand.v.squaredNorm();
  return p;
}

double gmm2_cdf(double t, const Gmm2Params& params) {
  require(params.var > 0.0, ErrorCode::numerical, "gmm2_cdf: zero variance (KS path requires sigma > 0)");
  double s = std::sqrt(params.var);
  return params.weight1 * normal_cdf(t / s) + (1.0 - params.weight1) * normal_cdf((t - 1.0) / s);
}

std::vector<Candidate> build_candidates(const EigenpairSet& pairs, const Matrix& K,
                                        double lambda_thresh) {
  require(lambda_thresh >= 0.0, ErrorCode::usage, "lambda_thresh must be nonnegative");
  std::vector<Candidate> out;
  for (const Eigenpair& p : pairs.pairs) {
    // tiny absolute slack keeps exact lambda = 1 pairs from dropping to rounding
    if (p.lambda + 1e-12 < 1.0 - lambda_thresh) continue;
    if (p.lambda <= 0.0) continue;
    Candidate c;
    c.v = K * p.u / p.lambda;
    c.lambda = p.lambda;
    c.source = p;
    out.push_back(std::move(c));
  }
  return out;
}

Selection filter_exact(const std::vector<Candidate>& cands, const Matrix& X, double eps_bin) {
  require(!cands.empty(), ErrorCode::numerical, "filter_exact: empty candidate set");
  const Index d = cands.front().source.u.size();

  std::vector<Candidate> kept;
  for (const Candidate& c : cands) {
    Vector proj = X.transpose() * c.v;
    double dev = 0.0;
    for (Index j = 0; j < proj.size(); ++j) {
      double t = proj[j];
      dev = std::max(dev, std::min(std::abs(t), std::abs(t - 1.0)));
      if (dev > eps_bin) break;
    }
    if (dev <= eps_bin) kept.push_back(c);
  }
  if (static_cast<Index>(kept.size()) != d) {
    std::ostringstream msg;
    msg << "filter_exact: " << kept.size() << " survivors, expected " << d
        << " (violated rigidity or sigma > 0)";
    throw Error(ErrorCode::numerical, msg.str());
  }
  Selection sel;
  sel.chosen = std::move(kept);
  sel.W_hat = recover_W(sel.chosen);
  return sel;
}

double ks_score(const Candidate& cand, const Matrix& X2, double sigma) {
  require(X2.cols() >= 1, ErrorCode::data, "ks_score: empty hold-out");
  Gmm2Params g = gmm2_for(cand, sigma);
  Vector proj = X2.transpose() * cand.v;
  std::sort(proj.data(), proj.data() + proj.size());
  const double n = static_cast<double>(proj.size());
  double sup = 0.0;
  for (Index i = 0; i < proj.size(); ++i) {
    double gv = gmm2_cdf(proj[i], g);
    sup = std::max(sup, std::abs(static_cast<double>(i + 1) / n - gv));
    sup = std::max(sup, std::abs(static_cast<double>(i) / n - gv));
  }
  return sup;
}

void ks_score_all(std::vector<Candidate>& cands, const Matrix& X2, double sigma) {
  parallel_for(0, static_cast<std::int64_t>(cands.size()), [&](std::int64_t i) {
    cands[static_cast<std::size_t>(i)].score = ks_score(cands[static_cast<std::size_t>(i)], X2, sigma);
  });
}

double rounding_score(const Candidate& cand, const Matrix& X) {
  require(X.cols() >= 1, ErrorCode::data, "rounding_score: empty sample");
  Vector proj = X.transpose() * cand.v;
  double ss = 0.0;
  for (Index j = 0; j < proj.size(); ++j) {
    double dev = std::min(std::abs(proj[j]), std::abs(proj[j] - 1.0));
    ss += dev * dev;
  }
  return ss / (static_cast<double>(proj.size()) * cand.v.squaredNorm());
}

Selection select_by_score(const std::vector<Candidate>& cands, int d) {
  require(static_cast<int>(cands.size()) >= d, ErrorCode::numerical,
          "select_by_score: fewer candidates than d");
  for (const Candidate& c : cands)
    require(c.score.has_value(), ErrorCode::usage, "select_by_score: candidate without score");

  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (*cands[a].score != *cands[b].score) return *cands[a].score < *cands[b].score;
    if (cands[a].lambda != cands[b].lambda) return cands[a].lambda > cands[b].lambda;
    return lex_less_vec(cands[a].v, cands[b].v);
  });

  Selection sel;
  for (int i = 0; i < d; ++i) sel.chosen.push_back(cands[order[static_cast<std::size_t>(i)]]);
  try {
    sel.W_hat = recover_W(sel.chosen);
  } catch (const Error&) {
    throw Error(ErrorCode::numerical,
                "select_by_score: selected set rank-deficient (failed enumeration?)");
  }
  return sel;
}

Matrix recover_W(const std::vector<Candidate>& chosen) {
  require(!chosen.empty(), ErrorCode::numerical, "recover_W: empty selection");
  const Index m = chosen.front().v.size();
  const Index d = static_cast<Index>(chosen.size());
  Matrix V(m, d);
  for (Index i = 0; i < d; ++i) V.col(i) = chosen[static_cast<std::size_t>(i)].v;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(V);
  require(cod.rank() == d, ErrorCode::numerical, "recover_W: candidate matrix is rank deficient");
  return cod.pseudoInverse();
}

namespace {

void fill_eigen_diag(ModelEstimate& est, const EigenpairSet& pairs) {
  est.eigenpair_init_count = pairs.init_count;
  est.eigenpair_converged_count = pairs.converged_count;
  est.eigenpair_distinct_count = static_cast<int>(pairs.pairs.size());
  est.newton_stable_count = 0;
  for (const Eigenpair& p : pairs.pairs)
    if (p.stability != Stability::unstable) ++est.newton_stable_count;
}

}  // namespace

ModelEstimate algorithm1(const Matrix& X, const SolverConfig& solver) {
  MomentSet mom = empirical_moments(X);
  int d = numerical_rank_sym(mom.M, 1e-8);
  require(d >= 1, ErrorCode::numerical, "algorithm1: sample second moment is numerically zero");

  Matrix K = whiten(mom.M, d);
  SymTensor3 tw = whitened_tensor(mom.T, K);
  EigenpairSet pairs = enumerate_eigenpairs(tw, solver);
  std::vector<Candidate> cands = build_candidates(pairs, K, 0.0);

  double max_norm = 0.0;
  for (Index j = 0; j < X.cols(); ++j) max_norm = std::max(max_norm, X.col(j).norm());
  double eps_bin = 1e-6 * std::max(max_norm, 1e-300);

  ModelEstimate est;
  est.method = "algorithm1";
  est.d = d;
  est.sigma = 0.0;
  est.lambda_thresh = 0.0;
  est.n_moments = X.cols();
  est.n_holdout = 0;
  fill_eigen_diag(est, pairs);
  est.candidates = cands;
  est.selection = filter_exact(cands, X, eps_bin);
  est.W_hat = est.selection.W_hat;
  return est;
}

ModelEstimate algorithm2(const Matrix& X, int d, double sigma, double lambda_thresh,
                         const SolverConfig& solver) {
  require(d >= 1, ErrorCode::usage, "algorithm2: d must be >= 1");
  require(sigma > 0.0, ErrorCode::usage, "algorithm2: sigma must be positive (use algorithm1 otherwise)");
  const std::int64_t n_total = X.cols();
  require(n_total >= 2, ErrorCode::data, "algorithm2: need at least 2 samples to split");

  const std::int64_t n1 = n_total / 2;
  const std::int64_t n2 = n_total - n1;
  Matrix X1 = X.leftCols(n1);
  Matrix X2 = X.rightCols(n2);

  if (lambda_thresh < 0.0) lambda_thresh = 5.0 / std::sqrt(static_cast<double>(n1));

  MomentSet mom = empirical_moments(X1);
  CorrectedMoments corr = noise_correct(mom, sigma * sigma);
  Matrix K = whiten(corr.M_sigma, d);
  SymTensor3 tw = whitened_tensor(corr.T_sigma, K);
  EigenpairSet pairs = enumerate_eigenpairs(tw, solver);
  std::vector<Candidate> cands = build_candidates(pairs, K, lambda_thresh);
  require(static_cast<int>(cands.size()) >= d, ErrorCode::numerical,
          "algorithm2: fewer than d candidates passed the eigenvalue threshold");

  ks_score_all(cands, X2, sigma);

  ModelEstimate est;
  est.method = "algorithm2";
  est.d = d;
  est.sigma = sigma;
  est.lambda_thresh = lambda_thresh;
  est.n_moments = n1;
  est.n_holdout = n2;
  fill_eigen_diag(est, pairs);
  est.candidates = cands;
  est.selection = select_by_score(cands, d);
  est.W_hat = est.selection.W_hat;
  return est;
}

namespace {

constexpr std::int64_t kWlsBlock = 2048;

struct WlsPartial {
  Matrix A;  // sum w h h^T
  Matrix B;  // sum w h x^T
};

}  // namespace

Matrix wls_refine(const Matrix& X, const Matrix& W_hat, double sigma, int k_top) {
  const Index d = W_hat.rows();
  const Index m = W_hat.cols();
  require(X.rows() == m, ErrorCode::data, "wls_refine: dimension mismatch");
  require(d <= 20, ErrorCode::data, "wls_refine: 2^d enumeration capped at d <= 20");
  require(sigma > 0.0, ErrorCode::usage, "wls_refine: sigma must be positive");
  require(k_top >= 1, ErrorCode::usage, "wls_refine: k_top must be >= 1");

  const std::int64_t n_states = std::int64_t{1} << d;
  const int k = static_cast<int>(std::min<std::int64_t>(k_top, n_states));
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

  // ||x - W^T h||^2 = ||x||^2 - 2 h^T (W x) + h^T G h; the ||x||^2 term is a
  // per-sample constant and cancels after normalization
  Matrix G = W_hat * W_hat.transpose();
  std::vector<double> q(static_cast<std::size_t>(n_states), 0.0);
  for (std::int64_t mask = 1; mask < n_states; ++mask) {
    std::int64_t prev = mask & (mask - 1);
    int bit = static_cast<int>(std::countr_zero(static_cast<std::uint64_t>(mask)));
    double cross = 0.0;
    for (int i = 0; i < static_cast<int>(d); ++i)
      if (prev >> i & 1) cross += G(i, bit);
    q[static_cast<std::size_t>(mask)] = q[static_cast<std::size_t>(prev)] + G(bit, bit) + 2.0 * cross;
  }

  WlsPartial init;
  init.A = Matrix::Zero(d, d);
  init.B = Matrix::Zero(d, m);

  WlsPartial total = blocked_reduce<WlsPartial>(
      X.cols(), kWlsBlock, init,
      [&](WlsPartial& part, std::int64_t lo, std::int64_t hi) {
        std::vector<double> obj(static_cast<std::size_t>(n_states));
        std::vector<double> s(static_cast<std::size_t>(n_states));
        std::vector<std::int64_t> idx(static_cast<std::size_t>(n_states));
        Vector h(d);
        for (std::int64_t col = lo; col < hi; ++col) {
          Vector c = W_hat * X.col(col);
          s[0] = 0.0;
          obj[0] = 0.0;
          for (std::int64_t mask = 1; mask < n_states; ++mask) {
            std::int64_t prev = mask & (mask - 1);
            int bit = static_cast<int>(std::countr_zero(static_cast<std::uint64_t>(mask)));
            s[static_cast<std::size_t>(mask)] = s[static_cast<std::size_t>(prev)] + c[bit];
            obj[static_cast<std::size_t>(mask)] =
                q[static_cast<std::size_t>(mask)] - 2.0 * s[static_cast<std::size_t>(mask)];
          }
          std::iota(idx.begin(), idx.end(), std::int64_t{0});
          std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                            [&](std::int64_t a, std::int64_t b) {
                              if (obj[static_cast<std::size_t>(a)] != obj[static_cast<std::size_t>(b)])
                                return obj[static_cast<std::size_t>(a)] < obj[static_cast<std::size_t>(b)];
                              return a < b;
                            });
          double best = obj[static_cast<std::size_t>(idx[0])];
          double wsum = 0.0;
          for (int t = 0; t < k; ++t) wsum += std::exp(-(obj[static_cast<std::size_t>(idx[t])] - best) * inv2s2);
          for (int t = 0; t < k; ++t) {
            double w = std::exp(-(obj[static_cast<std::size_t>(idx[t])] - best) * inv2s2) / wsum;
            if (w == 0.0) continue;
            std::int64_t mask = idx[t];
            for (Index i = 0; i < d; ++i) h[i] = (mask >> i & 1) ? 1.0 : 0.0;
            part.A.noalias() += w * h * h.transpose();
            part.B.noalias() += w * h * X.col(col).transpose();
          }
        }
      },
      [](WlsPartial& acc, const WlsPartial& p) {
        acc.A += p.A;
        acc.B += p.B;
      });

  Eigen::LDLT<Matrix> ldlt(total.A);
  require(ldlt.info() == Eigen::Success, ErrorCode::numerical, "wls_refine: singular weighted system");
  Matrix W_new = ldlt.solve(total.B);
  require(((total.A * W_new - total.B).norm() <= 1e-6 * std::max(1.0, total.B.norm())),
          ErrorCode::numerical, "wls_refine: weighted system solve failed");
  return W_new;
}

Selection likelihood_select(const std::vector<Candidate>& cands, const Matrix& X, double sigma,
                            int d) {
  (void)sigma;  // the Gaussian surrogate argmax does not depend on sigma
  const int nc = static_cast<int>(cands.size());
  require(nc >= d, ErrorCode::numerical, "likelihood_select: fewer candidates than d");
  require(nc <= 30, ErrorCode::data, "likelihood_select: combinatorial guard exceeded (|cands| > 30)");
  require(d >= 1 && d <= 20, ErrorCode::data, "likelihood_select: d out of range");

  // enumerate all size-d subsets in lexicographic order
  std::vector<std::vector<int>> subsets;
  std::vector<int> comb(static_cast<std::size_t>(d));
  std::iota(comb.begin(), comb.end(), 0);
  for (;;) {
    subsets.push_back(comb);
    require(subsets.size() <= 200000, ErrorCode::data,
            "likelihood_select: combinatorial guard exceeded (too many subsets)");
    int i = d - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == nc - d + i) --i;
    if (i < 0) break;
    ++comb[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < d; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
  }

  const std::int64_t n_states = std::int64_t{1} << d;
  std::vector<double> objective(subsets.size(), std::numeric_limits<double>::infinity());

  parallel_for(0, static_cast<std::int64_t>(subsets.size()), [&](std::int64_t si) {
    const auto& sub = subsets[static_cast<std::size_t>(si)];
    const Index m = cands.front().v.size();
    Matrix V(m, d);
    for (int i = 0; i < d; ++i) V.col(i) = cands[static_cast<std::size_t>(sub[static_cast<std::size_t>(i)])].v;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(V);
    if (cod.rank() < d) return;  // rank-deficient subset: never selected
    Matrix W = cod.pseudoInverse();
    Matrix G = W * W.transpose();
    std::vector<double> q(static_cast<std::size_t>(n_states), 0.0);
    for (std::int64_t mask = 1; mask < n_states; ++mask) {
      std::int64_t prev = mask & (mask - 1);
      int bit = static_cast<int>(std::countr_zero(static_cast<std::uint64_t>(mask)));
      double cross = 0.0;
      for (int i = 0; i < d; ++i)
        if (prev >> i & 1) cross += G(i, bit);
      q[static_cast<std::size_t>(mask)] = q[static_cast<std::size_t>(prev)] + G(bit, bit) + 2.0 * cross;
    }
    Matrix C = W * X;  // d x n
    double total = 0.0;
    std::vector<double> s(static_cast<std::size_t>(n_states));
    for (Index col = 0; col < X.cols(); ++col) {
      s[0] = 0.0;
      double best = 0.0;
      for (std::int64_t mask = 1; mask < n_states; ++mask) {
        std::int64_t prev = mask & (mask - 1);
        int bit = static_cast<int>(std::countr_zero(static_cast<std::uint64_t>(mask)));
        s[static_cast<std::size_t>(mask)] = s[static_cast<std::size_t>(prev)] + C(bit, col);
        double obj = q[static_cast<std::size_t>(mask)] - 2.0 * s[static_cast<std::size_t>(mask)];
        if (obj < best) best = obj;
      }
      total += best;
    }
    objective[static_cast<std::size_t>(si)] = total;
  });

  std::size_t best = subsets.size();
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (std::isfinite(objective[i]) && (best == subsets.size() || objective[i] < objective[best])) best = i;
  }
  require(best < subsets.size(), ErrorCode::numerical,
          "likelihood_select: every candidate subset is rank deficient");

  Selection sel;
  for (int i : subsets[best]) sel.chosen.push_back(cands[static_cast<std::size_t>(i)]);
  sel.W_hat = recover_W(sel.chosen);
  return sel;
}

ModelEstimate binomial_pipeline(const Matrix& X, int d, const BinomialOptions& opts) {
  require(d >= 1, ErrorCode::usage, "binomial_pipeline: d must be >= 1");
  MomentSet mom = empirical_moments(X);

  ModelEstimate est;
  est.d = d;
  est.sigma = 0.0;
  est.lambda_thresh = opts.lambda_thresh;
  est.n_moments = X.cols();
  est.n_holdout = 0;

  Matrix K;
  SymTensor3 tw;
  if (opts.denoise) {
    DiagonalCompletion comp = complete_diagonal(mom.M, d);
    K = whiten(comp.R, d);
    tw = fit_whitened_tensor_masked(mom.T, K);
    est.method = "binomial+denoise";
  } else {
    K = whiten(mom.M, d);
    tw = whitened_tensor(mom.T, K);
    est.method = "binomial";
  }

  EigenpairSet pairs = enumerate_eigenpairs(tw, opts.solver);
  std::vector<Candidate> cands = build_candidates(pairs, K, opts.lambda_thresh);
  require(static_cast<int>(cands.size()) >= d, ErrorCode::numerical,
          "binomial_pipeline: fewer than d candidates");
  // the KS test assumes Gaussian noise; rank subsets by surrogate likelihood instead
  fill_eigen_diag(est, pairs);
  est.candidates = cands;
  est.selection = likelihood_select(cands, X, 1.0, d);
  est.W_hat = est.selection.W_hat;
  return est;
}

}  // namespace blvm
