#pragma once

#include "blvm/datagen.hpp"
#include "blvm/learn.hpp"

#include <string>
#include <vector>

namespace blvm::cli {

// one estimator run on a generated instance, as used by `learn` and `sweep`
struct MethodOutcome {
  bool ok = false;
  std::string error_msg;
  Matrix W_hat;
  int eigenpair_count = 0;
  int candidate_count = 0;
  double wall_time = 0.0;
  std::string detail;  // method-specific diagnostics for the sidecar
};

struct MethodParams {
  double lambda_thresh = -1.0;  // < 0: algorithm2 default
  SolverConfig solver;
  int k_top = 6;
  int als_max_iter = 500;
};

// method is one of: spectral, spectral+wls, als, oracle
MethodOutcome run_method(const std::string& method, const Instance& inst, double sigma, int d,
                         const MethodParams& params);

// full command-line entry point; returns the process exit code
// (0 ok, 2 usage, 3 data error, 4 numerical failure)
int run(const std::vector<std::string>& args);

}  // namespace blvm::cli
