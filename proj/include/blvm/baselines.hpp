#pragma once

#include "blvm/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace blvm {

struct AlsState {
  Matrix W;        // d x m
  Matrix H;        // d x n, entries in {0,1}
  double objective = 0.0;  // ||X - W^T H||_F^2 at the final state
  int iterations = 0;
  std::vector<double> w_step_objectives;  // after each unconstrained W update
  std::vector<double> objective_trace;    // after each rounding step
  int restarts = 0;                       // re-randomized rank-deficient H rows
  bool converged = false;
};

// entrywise rounding to {0,1}, threshold 0.5, half rounds up
Matrix binary_round(const Matrix& M);

// Alternating least squares with binary rounding: unconstrained LS for W
// given H, unconstrained LS for H given W, entrywise rounding. Stops when the
// relative objective change drops below tol_rel.
AlsState als(const Matrix& X, int d, int max_iter = 500, std::uint64_t seed = 0,
             double tol_rel = 1e-9, const std::optional<Matrix>& H0 = std::nullopt);

// least squares for W given the true H
Matrix oracle_ls(const Matrix& X, const Matrix& H_true);

}  // namespace blvm
