#include "blvm/datagen.hpp"

#include "blvm/parallel.hpp"
#include "blvm/rng.hpp"

#include <cmath>

namespace blvm {

Matrix gen_W(int d, int m, std::uint64_t seed) {
  require(m >= d && d >= 1, ErrorCode::data, "gen_W: need m >= d >= 1");
  for (std::uint64_t attempt = 0;; ++attempt) {
    Matrix W(d, m);
    for (int c = 0; c < m; ++c) {
      Rng rng(Rng::derive(seed, attempt * 1000003ULL + static_cast<std::uint64_t>(c)));
      W.col(c) = rng.unit_sphere(d);
    }
    Eigen::JacobiSVD<Matrix> svd(W);
    if (svd.singularValues()[d - 1] > 1e-10) return W;
  }
}

namespace {

// symmetric PSD square root via eigendecomposition; rejects negative spectra
Matrix psd_sqrt(const Matrix& R) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(R);
  require(es.info() == Eigen::Success, ErrorCode::numerical, "psd_sqrt: eigendecomposition failed");
  double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  require(es.eigenvalues().minCoeff() >= -1e-10 * scale, ErrorCode::data,
          "gen_H_gaussian_round: covariance is not PSD");
  Vector sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Matrix gen_H_gaussian_round(int d, std::int64_t n, const Vector& a, const Matrix& R,
                            std::uint64_t seed) {
  require(a.size() == d && R.rows() == d && R.cols() == d, ErrorCode::data,
          "gen_H_gaussian_round: shape mismatch");
  require(n >= 1, ErrorCode::data, "gen_H_gaussian_round: need n >= 1");
  Matrix S = psd_sqrt(R);
  Matrix H(d, n);
  parallel_for(0, n, [&](std::int64_t j) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(j)));
    Vector r = a + S * rng.normal_vector(d);
    for (int i = 0; i < d; ++i) H(i, j) = r[i] >= 0.5 ? 1.0 : 0.0;
  });
  return H;
}

Matrix gen_H_rigid_block(int d, std::int64_t n, std::uint64_t seed, const std::optional<Vector>& pad_a,
                         const std::optional<Matrix>& pad_R) {
  const std::int64_t block = d + d * (d - 1) / 2;
  require(n >= block, ErrorCode::data, "gen_H_rigid_block: n too small for the rigid block");

  Matrix H(d, n);
  std::int64_t col = 0;
  for (int i = 0; i < d; ++i) H.col(col++) = Vector::Unit(d, i);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) H.col(col++) = Vector::Unit(d, i) + Vector::Unit(d, j);

  if (n > block) {
    Vector a = pad_a.value_or(Vector::Constant(d, 0.5));
    Matrix R = pad_R.value_or(Matrix::Identity(d, d));
    H.rightCols(n - block) = gen_H_gaussian_round(d, n - block, a, R, seed);
  }
  return H;
}

Matrix gen_X(const Matrix& W, const Matrix& H, double sigma, std::uint64_t seed) {
  require(W.rows() == H.rows(), ErrorCode::data, "gen_X: W and H disagree on d");
  const Index m = W.cols();
  const std::int64_t n = H.cols();
  Matrix X = W.transpose() * H;
  if (sigma != 0.0) {
    parallel_for(0, n, [&](std::int64_t j) {
      Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(j)));
      for (Index i = 0; i < m; ++i) X(i, j) += sigma * rng.normal();
    });
  }
  return X;
}

Matrix gen_dirichlet_W(int d, int m, double alpha, std::uint64_t seed) {
  require(alpha > 0.0, ErrorCode::data, "gen_dirichlet_W: alpha must be positive");
  require(d >= 1 && m >= 1, ErrorCode::data, "gen_dirichlet_W: bad shape");
  Matrix W(d, m);
  for (int c = 0; c < m; ++c) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(c)));
    W.col(c) = rng.dirichlet(alpha, d);
  }
  return W;
}

Matrix gen_H_beta_freq(int d, std::int64_t n, double beta_a, double beta_b, std::uint64_t seed) {
  require(beta_a > 0.0 && beta_b > 0.0, ErrorCode::data, "gen_H_beta_freq: beta parameters must be positive");
  Matrix H(d, n);
  parallel_for(0, n, [&](std::int64_t j) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(j)));
    for (int i = 0; i < d; ++i) {
      double x = rng.gamma(beta_a);
      double y = rng.gamma(beta_b);
      H(i, j) = x / (x + y);
    }
  });
  return H;
}

Matrix gen_binomial_X(const Matrix& W, const Matrix& H_freq, std::uint64_t seed) {
  require(W.rows() == H_freq.rows(), ErrorCode::data, "gen_binomial_X: W and H disagree on d");
  Matrix F = W.transpose() * H_freq;
  require(F.minCoeff() >= -1e-12 && F.maxCoeff() <= 1.0 + 1e-12, ErrorCode::data,
          "gen_binomial_X: success probabilities outside [0,1]");
  const Index m = F.rows();
  const std::int64_t n = F.cols();
  Matrix X(m, n);
  parallel_for(0, n, [&](std::int64_t j) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(j)));
    for (Index i = 0; i < m; ++i) {
      double p = std::min(std::max(F(i, j), 0.0), 1.0);
      int alleles = (rng.uniform() < p ? 1 : 0) + (rng.uniform() < p ? 1 : 0);
      X(i, j) = 0.5 * alleles;
    }
  });
  return X;
}

Matrix gen_H_atoms(const AtomDistribution& dist, std::int64_t n, std::uint64_t seed) {
  dist.validate();
  const Index d = dist.dim();
  const Index k = dist.atoms.cols();
  Vector cum(k);
  double acc = 0.0;
  for (Index c = 0; c < k; ++c) {
    acc += dist.probs[c];
    cum[c] = acc;
  }
  Matrix H(d, n);
  parallel_for(0, n, [&](std::int64_t j) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(j)));
    double u = rng.uniform() * acc;
    Index c = 0;
    while (c + 1 < k && u > cum[c]) ++c;
    H.col(j) = dist.atoms.col(c);
  });
  return H;
}

void InstanceSpec::validate() const {
  require(d >= 1, ErrorCode::data, "instance: d must be >= 1");
  require(m >= d, ErrorCode::data, "instance: need m >= d");
  require(n >= 1, ErrorCode::data, "instance: need n >= 1");
  require(sigma >= 0.0, ErrorCode::data, "instance: sigma must be nonnegative");
}

Instance make_instance(const InstanceSpec& spec) {
  spec.validate();
  Instance inst;
  const std::uint64_t seed_w = Rng::derive(spec.seed, 1);
  const std::uint64_t seed_h = Rng::derive(spec.seed, 2);
  const std::uint64_t seed_x = Rng::derive(spec.seed, 3);

  switch (spec.law.kind) {
    case HiddenLaw::Kind::gaussian_round: {
      inst.W = gen_W(spec.d, spec.m, seed_w);
      Vector a = spec.law.a.value_or(Vector::Constant(spec.d, 0.5));
      Matrix R = spec.law.R.value_or(Matrix::Identity(spec.d, spec.d));
      inst.H = gen_H_gaussian_round(spec.d, spec.n, a, R, seed_h);
      inst.X = gen_X(inst.W, inst.H, spec.sigma, seed_x);
      break;
    }
    case HiddenLaw::Kind::atoms: {
      require(spec.law.dist.has_value(), ErrorCode::data, "instance: atoms law without a distribution");
      inst.W = gen_W(spec.d, spec.m, seed_w);
      inst.H = gen_H_atoms(*spec.law.dist, spec.n, seed_h);
      inst.X = gen_X(inst.W, inst.H, spec.sigma, seed_x);
      break;
    }
    case HiddenLaw::Kind::rigid_block: {
      inst.W = gen_W(spec.d, spec.m, seed_w);
      inst.H = gen_H_rigid_block(spec.d, spec.n, seed_h, spec.law.a, spec.law.R);
      inst.X = gen_X(inst.W, inst.H, spec.sigma, seed_x);
      break;
    }
    case HiddenLaw::Kind::dirichlet_admixture: {
      inst.W = gen_dirichlet_W(spec.d, spec.m, spec.law.alpha, seed_w);
      inst.H = gen_H_beta_freq(spec.d, spec.n, spec.law.beta_a, spec.law.beta_b, seed_h);
      inst.X = gen_binomial_X(inst.W, inst.H, seed_x);
      break;
    }
  }
  return inst;
}

}  // namespace blvm
