// Timing comparison between the OpenMP kernels and their serial references.
// Prints one CSV row per kernel: name, size, serial_ms, parallel_ms, speedup,
// max relative deviation between the two results.

#include "blvm/datagen.hpp"
#include "blvm/eigensolver.hpp"
#include "blvm/learn.hpp"
#include "blvm/moments.hpp"
#include "blvm/parallel.hpp"
#include "blvm/reference.hpp"
#include "blvm/rng.hpp"

#include <chrono>
#include <iostream>
#include <sstream>

using namespace blvm;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
double timed(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  return ms_since(t0);
}

void row(const std::string& name, const std::string& size, double serial_ms, double parallel_ms,
         double deviation) {
  std::cout << name << ',' << size << ',' << serial_ms << ',' << parallel_ms << ','
            << serial_ms / std::max(parallel_ms, 1e-9) << ',' << deviation << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  int threads = max_threads();
  if (argc > 1) threads = std::atoi(argv[1]);

  std::cout << "kernel,size,serial_ms,parallel_ms,speedup,max_rel_dev\n";

  // empirical moments: optimized blocked kernel vs naive outer-product loops
  {
    const int m = 24;
    const std::int64_t n = 60000;
    Matrix W = gen_W(6, m, 7);
    Matrix H = gen_H_gaussian_round(6, n, Vector::Constant(6, 0.45), Matrix::Identity(6, 6) * 0.2, 8);
    Matrix X = gen_X(W, H, 0.4, 9);

    MomentSet ref;
    double t_ref = timed([&] { ref = reference::empirical_moments(X); });
    set_threads(threads);
    MomentSet fast;
    double t_par = timed([&] { fast = empirical_moments(X); });
    double dev = 0.0;
    for (std::size_t i = 0; i < fast.T.raw().size(); ++i)
      dev = std::max(dev, std::abs(fast.T.raw()[i] - ref.T.raw()[i]) / std::max(1.0, std::abs(ref.T.raw()[i])));
    std::ostringstream size;
    size << "m=" << m << ";n=" << n;
    row("empirical_moments", size.str(), t_ref, t_par, dev);
  }

  // eigenpair enumeration: same deterministic kernel, 1 thread vs all
  {
    const int d = 5;
    Rng rng(42);
    Tensor3 raw(d, d, d);
    for (Index i = 0; i < d * d * d; ++i) raw.data()[i] = rng.normal();
    SymTensor3 t = SymTensor3::symmetrized(raw);
    SolverConfig cfg;
    cfg.seed = 3;
    cfg.n_init = 4000;

    set_threads(1);
    EigenpairSet serial;
    double t_ser = timed([&] { serial = enumerate_eigenpairs(t, cfg); });
    set_threads(threads);
    EigenpairSet par;
    double t_par = timed([&] { par = enumerate_eigenpairs(t, cfg); });
    double dev = serial.pairs.size() == par.pairs.size() ? 0.0 : 1.0;
    for (std::size_t i = 0; dev == 0.0 && i < par.pairs.size(); ++i)
      dev = std::max(dev, (par.pairs[i].u - serial.pairs[i].u).cwiseAbs().maxCoeff());
    std::ostringstream size;
    size << "d=" << d << ";n_init=" << cfg.n_init;
    row("enumerate_eigenpairs", size.str(), t_ser, t_par, dev);
  }

  // KS scoring across candidates: 1 thread vs all
  {
    const int d = 4, m = 12;
    const std::int64_t n = 200000;
    InstanceSpec spec;
    spec.d = d;
    spec.m = m;
    spec.n = n;
    spec.sigma = 0.4;
    spec.seed = 11;
    spec.law.kind = HiddenLaw::Kind::gaussian_round;
    spec.law.a = Vector::Constant(d, 0.4);
    spec.law.R = Matrix::Identity(d, d) * 0.09;
    Instance inst = make_instance(spec);
    MomentSet mom = empirical_moments(inst.X.leftCols(n / 2));
    CorrectedMoments corr = noise_correct(mom, 0.16);
    Matrix K = whiten(corr.M_sigma, d);
    SymTensor3 tw = whitened_tensor(corr.T_sigma, K);
    SolverConfig cfg;
    cfg.seed = 5;
    EigenpairSet pairs = enumerate_eigenpairs(tw, cfg);
    std::vector<Candidate> cands = build_candidates(pairs, K, 0.3);
    Matrix X2 = inst.X.rightCols(n / 2);

    set_threads(1);
    std::vector<Candidate> c1 = cands;
    double t_ser = timed([&] { ks_score_all(c1, X2, 0.4); });
    set_threads(threads);
    std::vector<Candidate> c2 = cands;
    double t_par = timed([&] { ks_score_all(c2, X2, 0.4); });
    double dev = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) dev = std::max(dev, std::abs(*c1[i].score - *c2[i].score));
    std::ostringstream size;
    size << "cands=" << cands.size() << ";n=" << n / 2;
    row("ks_score_all", size.str(), t_ser, t_par, dev);
  }

  // WLS refinement: blocked kernel vs full-posterior serial reference
  {
    const int d = 6, m = 20;
    const std::int64_t n = 20000;
    Matrix W = gen_W(d, m, 21);
    Matrix H = gen_H_gaussian_round(d, n, Vector::Constant(d, 0.45), Matrix::Identity(d, d) * 0.2, 22);
    Matrix X = gen_X(W, H, 0.3, 23);

    Matrix ref;
    double t_ref = timed([&] { ref = reference::wls_full_posterior(X, W, 0.3); });
    set_threads(threads);
    Matrix fast;
    double t_par = timed([&] { fast = wls_refine(X, W, 0.3, 1 << d); });
    double dev = (fast - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff());
    std::ostringstream size;
    size << "d=" << d << ";m=" << m << ";n=" << n;
    row("wls_refine", size.str(), t_ref, t_par, dev);
  }

  return 0;
}
