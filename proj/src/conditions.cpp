#include "blvm/learn.hpp"

#include "blvm/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace blvm {

namespace {

// expected squared deviation of u^T h from its binary rounding
double expected_rigidity(const Vector& u, const AtomDistribution& dist) {
  double r = 0.0;
  for (Index c = 0; c < dist.atoms.cols(); ++c) {
    double t = u.dot(dist.atoms.col(c));
    double dev = std::min(std::abs(t), std::abs(t - 1.0));
    r += dist.probs[c] * dev * dev;
  }
  return r;
}

Definiteness definiteness_of(const Matrix& sym, double rank_tol) {
  if (sym.rows() == 0) return Definiteness::negative;  // empty matrix, d = 1 edge
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Vector& ev = es.eigenvalues();
  if (ev.cwiseAbs().minCoeff() <= rank_tol) return Definiteness::singular;
  if (ev.maxCoeff() < 0.0) return Definiteness::negative;
  if (ev.minCoeff() > 0.0) return Definiteness::positive;
  return Definiteness::indefinite;
}

}  // namespace

const char* definiteness_name(Definiteness d) {
  switch (d) {
    case Definiteness::negative: return "negative-definite";
    case Definiteness::positive: return "positive-definite";
    case Definiteness::indefinite: return "indefinite";
    case Definiteness::singular: return "singular";
  }
  return "unknown";
}

ConditionsReport check_conditions(const LatentMoments& lm, const AtomDistribution& dist,
                                  int n_probes, std::uint64_t seed) {
  const Index d = lm.Sigma.rows();
  ConditionsReport rep;
  rep.d = static_cast<int>(d);

  rep.sigma_rank = numerical_rank_sym(lm.Sigma, 1e-10);
  rep.sigma_full_rank = rep.sigma_rank == d;

  // condition (II): rank of 2 Omega(I,I,e_i) - Sigma for every i
  rep.slices_full_rank = true;
  for (Index i = 0; i < d; ++i) {
    Matrix slice(d, d);
    for (Index a = 0; a < d; ++a)
      for (Index b = 0; b < d; ++b) slice(a, b) = lm.Omega(a, b, i);
    Matrix cond = 2.0 * slice - lm.Sigma;
    int rank = numerical_rank_sym(cond, 1e-10);
    rep.slice_ranks.push_back(rank);
    if (rank < d) rep.slices_full_rank = false;
  }

  // Power condition in the whitened frame. The construction is W-independent,
  // so evaluate it with the canonical model W = I_d: K whitens Sigma, the
  // relevant eigenvector for unit i is K^{-1} e_i normalized.
  rep.power_condition = rep.sigma_full_rank;
  if (rep.sigma_full_rank) {
    Matrix K = whiten(lm.Sigma, static_cast<int>(d));  // d x d, invertible
    for (Index i = 0; i < d; ++i) {
      Vector y = K.fullPivLu().solve(Vector::Unit(d, i));
      Vector u = y / y.norm();
      Matrix p = tangent_basis(u);
      Matrix slice(d, d);
      for (Index a = 0; a < d; ++a)
        for (Index b = 0; b < d; ++b) slice(a, b) = lm.Omega(a, b, i);
      Matrix kp = K * p;
      Matrix cond = kp.transpose() * (2.0 * slice - lm.Sigma) * kp;
      cond = 0.5 * (cond + cond.transpose());
      double scale = std::max(cond.cwiseAbs().maxCoeff(), 1.0);
      Definiteness def = definiteness_of(cond, 1e-10 * scale);
      rep.power_matrices.push_back(def);
      if (def == Definiteness::indefinite || def == Definiteness::singular)
        rep.power_condition = false;
    }
  }

  for (Index i = 0; i < d; ++i) rep.rigidity_at_units.push_back(expected_rigidity(Vector::Unit(d, i), dist));

  Rng rng(Rng::derive(seed, 0x51));
  rep.probe_count = n_probes;
  rep.min_probe_rigidity = std::numeric_limits<double>::infinity();
  for (int p = 0; p < n_probes; ++p) {
    Vector u = rng.unit_sphere(d);
    // keep probes away from the unit vectors where r vanishes by construction
    bool near_unit = false;
    for (Index i = 0; i < d; ++i)
      if (std::min((u - Vector::Unit(d, i)).norm(), (u + Vector::Unit(d, i)).norm()) < 0.2)
        near_unit = true;
    if (near_unit) continue;
    rep.min_probe_rigidity = std::min(rep.min_probe_rigidity, expected_rigidity(u, dist));
  }
  if (!std::isfinite(rep.min_probe_rigidity)) rep.min_probe_rigidity = 0.0;
  return rep;
}

std::string ConditionsReport::summary() const {
  std::ostringstream os;
  os << "conditions report (d=" << d << ")\n";
  os << "  (I)  rank(Sigma) = " << sigma_rank << " / " << d << (sigma_full_rank ? "  ok" : "  FAIL")
     << "\n";
  os << "  (II) rank(2 Omega(I,I,e_i) - Sigma):";
  for (int r : slice_ranks) os << " " << r;
  os << (slices_full_rank ? "  ok" : "  FAIL") << "\n";
  os << "  power condition matrices:";
  for (Definiteness def : power_matrices) os << " " << definiteness_name(def);
  os << (power_condition ? "  ok" : "  FAIL") << "\n";
  os << "  expected rigidity at unit vectors:";
  for (double r : rigidity_at_units) os << " " << r;
  os << "\n";
  os << "  min expected rigidity over " << probe_count << " probes: " << min_probe_rigidity << "\n";
  return os.str();
}

AlignResult align_rows(const Matrix& W_hat, const Matrix& W_true) {
  require(W_hat.rows() == W_true.rows() && W_hat.cols() == W_true.cols(), ErrorCode::data,
          "align_rows: shape mismatch");
  const int n = static_cast<int>(W_hat.rows());

  Matrix cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost(i, j) = (W_hat.row(i) - W_true.row(j)).squaredNorm();

  // Hungarian algorithm with potentials, O(n^3)
  std::vector<double> pot_u(static_cast<std::size_t>(n + 1), 0.0), pot_v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<int> match(static_cast<std::size_t>(n + 1), 0);  // match[col] = row, 1-based
  std::vector<int> way(static_cast<std::size_t>(n + 1), 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      int i0 = match[static_cast<std::size_t>(j0)], j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - pot_u[static_cast<std::size_t>(i0)] - pot_v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          pot_u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          pot_v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }

  AlignResult res;
  res.perm.assign(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) res.perm[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  res.row_errors = Vector(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double sq = cost(i, res.perm[static_cast<std::size_t>(i)]);
    res.row_errors[i] = std::sqrt(sq);
    total += sq;
  }
  res.error = std::sqrt(total);
  return res;
}

}  // namespace blvm
