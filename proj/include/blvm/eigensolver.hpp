#pragma once

#include "blvm/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace blvm {

enum class SolverMode { newton, power, both };
enum class PowerTarget { negative_definite, positive_definite, both };

struct SolverConfig {
  int n_init = 0;          // 0 -> auto: min(100 * 2^d, 100000)
  double tol = 1e-10;      // residual tolerance on ||g(u)||
  int max_iter = 100;      // Newton correction cap per start
  int power_max_iter = 5000;
  double dedup_tol = 1e-4;       // angular merge radius under the +/- identification
  double shift = 0.0;            // power shift magnitude; 0 -> auto 1 + sum|T_ijk|
  SolverMode mode = SolverMode::newton;
  PowerTarget power_target = PowerTarget::both;
  std::uint64_t seed = 0;

  void validate() const;
  int effective_n_init(Index d) const;
};

struct SolveResult {
  bool converged = false;
  Eigenpair pair;
  int iterations = 0;
  std::string failure;
  std::vector<double> residual_trace;  // ||g|| at the start of every iteration
};

struct EigenpairSet {
  std::vector<Eigenpair> pairs;
  int init_count = 0;
  int converged_count = 0;
};

// One orthogonal Newton correction run from u0: solve J_p y = -P^T g in the
// tangent space and retract u <- normalize(u + P y). Quadratically convergent
// near Newton-stable eigenpairs.
SolveResult oncm_solve(const SymTensor3& t, const Vector& u0, const SolverConfig& cfg);

// Shifted higher-order power iteration u <- normalize(T(I,u,u) + alpha u).
// A positive shift larger than the spectral norm attracts to eigenpairs with
// negative-definite projected Jacobian; the positive-definite ones are found
// by running the same iteration on -T. Converged pairs that fail the
// power-stability check are reported as failures.
SolveResult power_solve(const SymTensor3& t, const Vector& u0, const SolverConfig& cfg,
                        PowerTarget target = PowerTarget::negative_definite);

// Multi-start enumeration with per-start seeds derived from (seed, index):
// the result (ordering included) does not depend on thread scheduling.
EigenpairSet enumerate_eigenpairs(const SymTensor3& t, const SolverConfig& cfg);

// T - lambda * u (x) u (x) u
SymTensor3 deflate(const SymTensor3& t, const Eigenpair& pair);

// Repeated power iteration + deflation; returns up to `count` pairs of the
// original tensor in discovery order.
std::vector<Eigenpair> power_deflation_sweep(const SymTensor3& t, int count, const SolverConfig& cfg);

}  // namespace blvm
