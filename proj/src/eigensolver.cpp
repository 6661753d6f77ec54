#include "blvm/eigensolver.hpp"

#include "blvm/parallel.hpp"
#include "blvm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace blvm {

void SolverConfig::validate() const {
  require(tol > 0.0, ErrorCode::usage, "solver tol must be positive");
  require(dedup_tol > 0.0, ErrorCode::usage, "dedup_tol must be positive");
  require(n_init >= 0, ErrorCode::usage, "n_init must be >= 0");
  require(max_iter >= 1 && power_max_iter >= 1, ErrorCode::usage, "iteration caps must be >= 1");
}

int SolverConfig::effective_n_init(Index d) const {
  if (n_init > 0) return n_init;
  double auto_n = 100.0 * std::pow(2.0, static_cast<double>(d));
  return static_cast<int>(std::min(auto_n, 1e5));
}

namespace {

void check_unit(const Vector& u0) {
  require(std::abs(u0.norm() - 1.0) <= 1e-8, ErrorCode::data, "solver start must be unit norm");
}

Eigenpair make_pair(const SymTensor3& t, const Vector& u, double lambda, double residual) {
  Eigenpair p;
  p.u = u;
  p.lambda = lambda;
  canonicalize_sign(p.u, p.lambda);
  p.residual = residual;
  p.stability = classify(t, p);
  return p;
}

}  // namespace

SolveResult oncm_solve(const SymTensor3& t, const Vector& u0, const SolverConfig& cfg) {
  cfg.validate();
  check_unit(u0);
  Index d = t.dim();
  SolveResult res;
  Vector u = u0 / u0.norm();

  for (int it = 0; it <= cfg.max_iter; ++it) {
    Vector w = t.apply(u);
    double lambda = w.dot(u);
    Vector g = w - lambda * u;
    double r = g.norm();
    res.residual_trace.push_back(r);
    if (r <= cfg.tol) {
      res.converged = true;
      res.iterations = it;
      res.pair = make_pair(t, u, lambda, r);
      return res;
    }
    if (it == cfg.max_iter) break;
    if (d == 1) break;  // g == 0 identically in 1-d, never reached

    Matrix p = tangent_basis(u);
    // the -3 u w^T term of grad_g dies under P^T ... P, so assemble directly
    Matrix jp = p.transpose() * t.contract_last(u) * p * 2.0;
    jp.diagonal().array() -= lambda;

    Eigen::ColPivHouseholderQR<Matrix> qr(jp);
    if (qr.rank() < d - 1) {
      res.failure = "singular projected Jacobian";
      res.iterations = it;
      return res;
    }
    Vector y = qr.solve(-(p.transpose() * g));
    u += p * y;
    double n = u.norm();
    if (n < 1e-14) {
      res.failure = "degenerate Newton step";
      res.iterations = it;
      return res;
    }
    u /= n;
  }
  res.failure = "max_iter exceeded";
  res.iterations = cfg.max_iter;
  return res;
}

SolveResult power_solve(const SymTensor3& t, const Vector& u0, const SolverConfig& cfg,
                        PowerTarget target) {
  cfg.validate();
  require(target != PowerTarget::both, ErrorCode::usage, "power_solve expects a single target");
  check_unit(u0);

  // positive-definite pairs are the negative-definite pairs of -T
  const bool flip = target == PowerTarget::positive_definite;
  SymTensor3 work = t;
  if (flip)
    for (double& v : work.raw_mutable()) v = -v;

  double alpha = cfg.shift > 0.0 ? cfg.shift : 1.0 + work.abs_sum();
  Vector u = u0 / u0.norm();
  SolveResult res;

  for (int it = 0; it <= cfg.power_max_iter; ++it) {
    Vector w = work.apply(u);
    double lambda = w.dot(u);
    double r = (w - lambda * u).norm();
    res.residual_trace.push_back(r);
    if (r <= cfg.tol) {
      res.iterations = it;
      double lam_orig = flip ? -lambda : lambda;
      res.pair = make_pair(t, u, lam_orig, r);
      if (res.pair.stability == Stability::power_stable_negative ||
          res.pair.stability == Stability::power_stable_positive) {
        res.converged = true;
      } else {
        res.failure = "converged pair is not power-stable";
      }
      return res;
    }
    if (it == cfg.power_max_iter) break;
    Vector f = w + alpha * u;
    double n = f.norm();
    if (n < 1e-14) {
      res.failure = "zero update vector";
      res.iterations = it;
      return res;
    }
    u = f / n;
  }
  res.failure = "max_iter exceeded";
  res.iterations = cfg.power_max_iter;
  return res;
}

namespace {

// each enumeration job = one solver run with its own derived seed
struct Job {
  SolverMode kind;  // newton or power
  PowerTarget target;
};

bool same_direction(const Vector& a, const Vector& b, double tol) {
  return std::min((a - b).norm(), (a + b).norm()) < tol;
}

bool lex_less(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace

EigenpairSet enumerate_eigenpairs(const SymTensor3& t, const SolverConfig& cfg) {
  cfg.validate();
  Index d = t.dim();
  int n_init = cfg.effective_n_init(d);

  std::vector<Job> jobs;
  if (cfg.mode == SolverMode::newton || cfg.mode == SolverMode::both) {
    for (int i = 0; i < n_init; ++i) jobs.push_back({SolverMode::newton, PowerTarget::negative_definite});
  }
  if (cfg.mode == SolverMode::power || cfg.mode == SolverMode::both) {
    bool neg = cfg.power_target != PowerTarget::positive_definite;
    bool pos = cfg.power_target != PowerTarget::negative_definite;
    for (int i = 0; i < n_init; ++i) {
      if (neg) jobs.push_back({SolverMode::power, PowerTarget::negative_definite});
      if (pos) jobs.push_back({SolverMode::power, PowerTarget::positive_definite});
    }
  }

  std::vector<std::optional<Eigenpair>> results(jobs.size());
  parallel_for(0, static_cast<std::int64_t>(jobs.size()), [&](std::int64_t k) {
    Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(k)));
    Vector u0 = rng.unit_sphere(d);
    SolveResult r = jobs[static_cast<std::size_t>(k)].kind == SolverMode::newton
                        ? oncm_solve(t, u0, cfg)
                        : power_solve(t, u0, cfg, jobs[static_cast<std::size_t>(k)].target);
    if (r.converged) results[static_cast<std::size_t>(k)] = std::move(r.pair);
  });

  EigenpairSet set;
  set.init_count = static_cast<int>(jobs.size());
  for (const auto& opt : results) {
    if (!opt) continue;
    ++set.converged_count;
    bool merged = false;
    for (Eigenpair& kept : set.pairs) {
      if (same_direction(kept.u, opt->u, cfg.dedup_tol)) {
        if (opt->residual < kept.residual) kept = *opt;
        merged = true;
        break;
      }
    }
    if (!merged) set.pairs.push_back(*opt);
  }
  std::sort(set.pairs.begin(), set.pairs.end(), [](const Eigenpair& a, const Eigenpair& b) {
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    return lex_less(a.u, b.u);
  });
  return set;
}

SymTensor3 deflate(const SymTensor3& t, const Eigenpair& pair) {
  return add_rank_one(t, -pair.lambda, pair.u);
}

std::vector<Eigenpair> power_deflation_sweep(const SymTensor3& t, int count, const SolverConfig& cfg) {
  cfg.validate();
  require(count >= 1, ErrorCode::usage, "deflation count must be >= 1");
  Index d = t.dim();
  int starts = std::max(1, cfg.effective_n_init(d) / std::max(count, 1));

  SymTensor3 work = t;
  std::vector<Eigenpair> found;
  for (int c = 0; c < count; ++c) {
    std::vector<std::optional<Eigenpair>> results(static_cast<std::size_t>(starts));
    parallel_for(0, starts, [&](std::int64_t s) {
      Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(c) * 1000003ULL + static_cast<std::uint64_t>(s)));
      Vector u0 = rng.unit_sphere(d);
      SolveResult r = power_solve(work, u0, cfg, PowerTarget::negative_definite);
      if (r.converged) results[static_cast<std::size_t>(s)] = std::move(r.pair);
    });
    std::optional<Eigenpair> best;
    for (const auto& opt : results) {
      if (!opt) continue;
      if (!best || opt->lambda > best->lambda) best = *opt;
    }
    if (!best) break;
    // classify against the original tensor, not the deflated one
    best->stability = classify(t, *best);
    found.push_back(*best);
    work = deflate(work, *best);
  }
  return found;
}

}  // namespace blvm
