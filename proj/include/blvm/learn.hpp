#pragma once

#include "blvm/eigensolver.hpp"
#include "blvm/moments.hpp"

#include <optional>
#include <string>
#include <vector>

namespace blvm {

struct Candidate {
  Vector v;          // K u / lambda, lives in observation space
  double lambda = 0.0;
  Eigenpair source;
  std::optional<double> score;  // KS score when assigned
};

struct Selection {
  std::vector<Candidate> chosen;  // exactly d, linearly independent
  Matrix W_hat;                   // d x m with W_hat [v_1 ... v_d] = I_d
};

// two-component mixture weight1 N(0, var) + (1 - weight1) N(1, var)
struct Gmm2Params {
  double weight1 = 0.0;  // 1 - 1/lambda^2, mass of the zero component
  double var = 0.0;      // sigma^2 ||v||^2
};

Gmm2Params gmm2_for(const Candidate& cand, double sigma);
double gmm2_cdf(double t, const Gmm2Params& params);

std::vector<Candidate> build_candidates(const EigenpairSet& pairs, const Matrix& K,
                                        double lambda_thresh);

// noiseless filtering: keep v whose projections are all within eps_bin of a
// binary value; the survivor count must be exactly d
Selection filter_exact(const std::vector<Candidate>& cands, const Matrix& X, double eps_bin);

// exact sup-distance between the hold-out empirical CDF of v^T x and G_v,
// evaluated on both sides of every empirical jump
double ks_score(const Candidate& cand, const Matrix& X2, double sigma);

// assigns scores in place, parallel over candidates
void ks_score_all(std::vector<Candidate>& cands, const Matrix& X2, double sigma);

// small-sigma diagnostic alternative: min_b ||v^T X - b||^2 / (n ||v||^2)
double rounding_score(const Candidate& cand, const Matrix& X);

// d smallest scores; ties broken by larger lambda, then lexicographic v
Selection select_by_score(const std::vector<Candidate>& cands, int d);

// pseudo-inverse of [v_1 ... v_d]
Matrix recover_W(const std::vector<Candidate>& chosen);

struct ModelEstimate {
  Matrix W_hat;
  Selection selection;
  std::vector<Candidate> candidates;
  int d = 0;
  double sigma = 0.0;
  double lambda_thresh = 0.0;
  std::int64_t n_moments = 0;  // samples feeding the moment/eigenpair half
  std::int64_t n_holdout = 0;  // samples feeding the KS half (0 in noiseless mode)
  int eigenpair_init_count = 0;
  int eigenpair_converged_count = 0;
  int eigenpair_distinct_count = 0;
  int newton_stable_count = 0;
  std::string method;
};

// exact recovery pipeline for sigma = 0; d is taken as rank(M_hat)
ModelEstimate algorithm1(const Matrix& X, const SolverConfig& solver = {});

// Noisy pipeline: split the sample in half, estimate corrected moments and
// tensor eigenpairs on the first half, KS-filter candidates on the second.
// lambda_thresh < 0 selects the default 5 / sqrt(n_half).
ModelEstimate algorithm2(const Matrix& X, int d, double sigma, double lambda_thresh = -1.0,
                         const SolverConfig& solver = {});

// single weighted least squares step: per sample keep the k_top most likely
// binary states and regress against the weighted mixture
Matrix wls_refine(const Matrix& X, const Matrix& W_hat, double sigma, int k_top = 6);

// exhaustive subset search scored by the complete-data Gaussian surrogate
// likelihood; used where the KS test does not apply (non-Gaussian noise)
Selection likelihood_select(const std::vector<Candidate>& cands, const Matrix& X, double sigma,
                            int d);

struct BinomialOptions {
  bool denoise = true;
  double lambda_thresh = 0.25;
  SolverConfig solver;
};

// pipeline for the 0/0.5/1 binomial observation model: moment repair via
// diagonal completion + masked tensor fit, then likelihood-based selection
ModelEstimate binomial_pipeline(const Matrix& X, int d, const BinomialOptions& opts = {});

enum class Definiteness { negative, positive, indefinite, singular };

struct ConditionsReport {
  int d = 0;
  int sigma_rank = 0;
  bool sigma_full_rank = false;          // condition (I) consequence: rank(Sigma) = d
  std::vector<int> slice_ranks;          // rank(2 Omega(I,I,e_i) - Sigma)
  bool slices_full_rank = false;         // condition (II)
  std::vector<Definiteness> power_matrices;  // definiteness in the whitened frame
  bool power_condition = false;          // all definite (either sign)
  std::vector<double> rigidity_at_units; // r(e_i), exactly zero by construction
  double min_probe_rigidity = 0.0;       // min r(u) over random non-unit probes
  int probe_count = 0;

  std::string summary() const;
};

const char* definiteness_name(Definiteness d);

ConditionsReport check_conditions(const LatentMoments& lm, const AtomDistribution& dist,
                                  int n_probes = 200, std::uint64_t seed = 0);

struct AlignResult {
  std::vector<int> perm;  // perm[i] = row of W_true matched to row i of W_hat
  Vector row_errors;      // per matched row, Euclidean distance
  double error = 0.0;     // Frobenius norm after permutation
};

// minimum-cost bipartite matching between rows under squared distance
AlignResult align_rows(const Matrix& W_hat, const Matrix& W_true);

}  // namespace blvm
