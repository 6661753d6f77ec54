#include "blvm/cli.hpp"

#include "blvm/baselines.hpp"
#include "blvm/io.hpp"
#include "blvm/parallel.hpp"
#include "blvm/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace blvm::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

AtomDistribution read_atoms(const std::string& path) {
  // each row: d binary entries followed by the atom probability
  Matrix raw = read_matrix_csv(path);
  require(raw.cols() >= 2, ErrorCode::data, "atoms file needs h bits plus a probability column");
  AtomDistribution dist;
  Index d = raw.cols() - 1;
  dist.atoms = raw.leftCols(d).transpose();
  dist.probs = raw.col(d);
  dist.validate();
  return dist;
}

struct GenerateOptions {
  std::string out_dir;
  std::string format = "csv";
  InstanceSpec spec;
  std::string atoms_path;
};

void write_instance(const GenerateOptions& opt, const Instance& inst) {
  fs::create_directories(opt.out_dir);
  std::string x_name = opt.format == "bin" ? "X.bin" : "X.csv";
  save_matrix(opt.out_dir + "/" + x_name, inst.X);
  write_matrix_csv(opt.out_dir + "/W_true.csv", inst.W);
  write_matrix_csv(opt.out_dir + "/H_true.csv", inst.H);

  json side;
  side["d"] = opt.spec.d;
  side["m"] = opt.spec.m;
  side["n"] = opt.spec.n;
  side["sigma"] = opt.spec.sigma;
  side["seed"] = opt.spec.seed;
  side["x_file"] = x_name;
  switch (opt.spec.law.kind) {
    case HiddenLaw::Kind::gaussian_round: side["hidden"] = "gauss"; break;
    case HiddenLaw::Kind::atoms: side["hidden"] = "atoms"; break;
    case HiddenLaw::Kind::rigid_block: side["hidden"] = "rigid"; break;
    case HiddenLaw::Kind::dirichlet_admixture: side["hidden"] = "dirichlet"; break;
  }
  if (opt.spec.law.a) {
    side["hidden_mean"] = (*opt.spec.law.a)[0];
  }
  if (opt.spec.law.kind == HiddenLaw::Kind::dirichlet_admixture) {
    side["alpha"] = opt.spec.law.alpha;
    side["beta_a"] = opt.spec.law.beta_a;
    side["beta_b"] = opt.spec.law.beta_b;
  }
  if (!opt.atoms_path.empty()) side["atoms_file"] = opt.atoms_path;
  std::ofstream f(opt.out_dir + "/instance.json");
  require(f.good(), ErrorCode::data, "cannot write instance sidecar");
  f << side.dump(2) << "\n";
}

json estimate_meta(const ModelEstimate& est) {
  json meta;
  meta["method"] = est.method;
  meta["d"] = est.d;
  meta["sigma"] = est.sigma;
  meta["lambda_thresh"] = est.lambda_thresh;
  meta["n_moments"] = est.n_moments;
  meta["n_holdout"] = est.n_holdout;
  meta["eigenpairs"] = {{"init_count", est.eigenpair_init_count},
                        {"converged_count", est.eigenpair_converged_count},
                        {"distinct", est.eigenpair_distinct_count},
                        {"newton_stable", est.newton_stable_count}};
  json cands = json::array();
  for (const Candidate& c : est.candidates) {
    json jc;
    jc["lambda"] = c.lambda;
    jc["stability"] = stability_name(c.source.stability);
    jc["residual"] = c.source.residual;
    if (c.score) jc["ks_score"] = *c.score;
    cands.push_back(jc);
  }
  meta["candidates"] = cands;
  json sel = json::array();
  for (const Candidate& c : est.selection.chosen) sel.push_back(c.lambda);
  meta["selected_lambdas"] = sel;
  return meta;
}

}  // namespace

MethodOutcome run_method(const std::string& method, const Instance& inst, double sigma, int d,
                         const MethodParams& params) {
  MethodOutcome out;
  double t0 = now_seconds();
  try {
    if (method == "spectral" || method == "spectral+wls") {
      ModelEstimate est;
      if (sigma == 0.0) {
        est = algorithm1(inst.X, params.solver);
      } else {
        est = algorithm2(inst.X, d, sigma, params.lambda_thresh, params.solver);
      }
      out.W_hat = est.W_hat;
      out.eigenpair_count = est.eigenpair_distinct_count;
      out.candidate_count = static_cast<int>(est.candidates.size());
      json meta = estimate_meta(est);
      if (method == "spectral+wls") {
        out.W_hat = wls_refine(inst.X, est.W_hat, std::max(sigma, 1e-8), params.k_top);
        meta["wls_k_top"] = params.k_top;
        meta["method"] = est.method + "+wls";
      }
      out.detail = meta.dump();
    } else if (method == "als") {
      AlsState st = als(inst.X, d, params.als_max_iter, params.solver.seed);
      out.W_hat = st.W;
      json meta;
      meta["method"] = "als";
      meta["iterations"] = st.iterations;
      meta["objective"] = st.objective;
      meta["restarts"] = st.restarts;
      meta["converged"] = st.converged;
      out.detail = meta.dump();
    } else if (method == "oracle") {
      out.W_hat = oracle_ls(inst.X, inst.H);
      out.detail = R"({"method":"oracle"})";
    } else {
      throw Error(ErrorCode::usage, "unknown method '" + method + "'");
    }
    out.ok = true;
  } catch (const Error& e) {
    out.error_msg = e.what();
  }
  out.wall_time = now_seconds() - t0;
  return out;
}

namespace {

HiddenLaw law_from_config(const std::map<std::string, std::string>& cfg, int d,
                          const std::string& atoms_path) {
  HiddenLaw law;
  std::string hidden = cfg.count("hidden") ? cfg.at("hidden") : "gauss";
  auto num = [&](const std::string& key, double defv) {
    return cfg.count(key) ? std::stod(cfg.at(key)) : defv;
  };
  if (hidden == "gauss") {
    law.kind = HiddenLaw::Kind::gaussian_round;
    law.a = Vector::Constant(d, num("hidden_mean", 0.5));
    law.R = Matrix::Identity(d, d) * num("hidden_var", 1.0);
  } else if (hidden == "rigid") {
    law.kind = HiddenLaw::Kind::rigid_block;
    law.a = Vector::Constant(d, num("hidden_mean", 0.5));
    law.R = Matrix::Identity(d, d) * num("hidden_var", 1.0);
  } else if (hidden == "atoms") {
    law.kind = HiddenLaw::Kind::atoms;
    require(!atoms_path.empty(), ErrorCode::usage, "hidden=atoms requires an atoms file");
    law.dist = read_atoms(atoms_path);
  } else if (hidden == "dirichlet") {
    law.kind = HiddenLaw::Kind::dirichlet_admixture;
    law.alpha = num("alpha", 1.0);
    law.beta_a = num("beta_a", 0.1);
    law.beta_b = num("beta_b", 0.1);
  } else {
    throw Error(ErrorCode::usage, "unknown hidden law '" + hidden + "'");
  }
  return law;
}

int cmd_generate(const std::map<std::string, std::string>& cfg, const std::string& out_dir,
                 const std::string& format, const std::string& atoms_path) {
  require(!out_dir.empty(), ErrorCode::usage, "generate: --out is required");
  require(format == "csv" || format == "bin", ErrorCode::usage, "generate: format must be csv or bin");
  auto get_int = [&](const std::string& key) {
    require(cfg.count(key), ErrorCode::usage, "generate: missing " + key);
    return std::stoll(cfg.at(key));
  };
  GenerateOptions opt;
  opt.out_dir = out_dir;
  opt.format = format;
  opt.atoms_path = atoms_path;
  opt.spec.d = static_cast<int>(get_int("d"));
  opt.spec.m = static_cast<int>(get_int("m"));
  opt.spec.n = get_int("n");
  opt.spec.sigma = cfg.count("sigma") ? std::stod(cfg.at("sigma")) : 0.0;
  opt.spec.seed = cfg.count("seed") ? std::stoull(cfg.at("seed")) : 0;
  opt.spec.law = law_from_config(cfg, opt.spec.d, atoms_path);
  Instance inst = make_instance(opt.spec);
  write_instance(opt, inst);
  return 0;
}

int cmd_learn(const std::string& x_path, const std::string& method, double sigma, int d,
              const MethodParams& params, const std::string& h_true_path,
              const std::string& out_dir) {
  require(!out_dir.empty(), ErrorCode::usage, "learn: --out is required");
  Instance inst;
  inst.X = load_matrix(x_path);
  if (method == "oracle") {
    require(!h_true_path.empty(), ErrorCode::usage, "learn: oracle needs --h-true");
    inst.H = load_matrix(h_true_path);
  }
  if ((method == "spectral" || method == "spectral+wls") && sigma > 0.0)
    require(d >= 1, ErrorCode::usage, "learn: --d is required when sigma > 0");
  if (method == "als") require(d >= 1, ErrorCode::usage, "learn: --d is required for als");

  MethodOutcome out = run_method(method, inst, sigma, d, params);
  if (!out.ok) throw Error(ErrorCode::numerical, method + " failed: " + out.error_msg);

  fs::create_directories(out_dir);
  write_matrix_csv(out_dir + "/W_hat.csv", out.W_hat);
  json meta = out.detail.empty() ? json::object() : json::parse(out.detail);
  meta["x_file"] = x_path;
  meta["wall_time"] = out.wall_time;
  std::ofstream f(out_dir + "/W_hat.meta.json");
  require(f.good(), ErrorCode::data, "cannot write estimate sidecar");
  f << meta.dump(2) << "\n";
  return 0;
}

int cmd_eval(const std::string& w_hat_path, const std::string& w_true_path,
             const std::string& out_path) {
  Matrix w_hat = load_matrix(w_hat_path);
  Matrix w_true = load_matrix(w_true_path);
  AlignResult res = align_rows(w_hat, w_true);
  std::ostringstream report;
  report << "error=" << fmt_double(res.error) << "\n";
  report << "permutation=";
  for (std::size_t i = 0; i < res.perm.size(); ++i) report << (i ? "," : "") << res.perm[i];
  report << "\nrow_errors=";
  for (Index i = 0; i < res.row_errors.size(); ++i)
    report << (i ? "," : "") << fmt_double(res.row_errors[i]);
  report << "\n";
  std::cout << report.str();
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    require(f.good(), ErrorCode::data, "cannot write " + out_path);
    f << report.str();
  }
  return 0;
}

struct SweepRow {
  std::int64_t n = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string method;
  bool ok = false;
  double error = 0.0;
  double wall_time = 0.0;
  int eigenpair_count = 0;
  int candidate_count = 0;
  std::string status;
};

int cmd_sweep(const std::map<std::string, std::string>& cfg, const std::string& out_path,
              const std::string& atoms_path) {
  require(!out_path.empty(), ErrorCode::usage, "sweep: --out is required");
  auto need = [&](const std::string& key) -> const std::string& {
    require(cfg.count(key), ErrorCode::usage, "sweep: missing config key " + key);
    return cfg.at(key);
  };
  const int d = static_cast<int>(std::stoll(need("d")));
  const int m = static_cast<int>(std::stoll(need("m")));
  std::vector<std::int64_t> n_grid = parse_int_list(need("n_grid"));
  std::vector<double> sigma_grid = parse_double_list(need("sigma_grid"));
  std::vector<std::int64_t> seed_list = parse_int_list(need("seeds"));
  std::vector<std::string> methods = split(need("methods"), ',');
  require(!n_grid.empty() && !sigma_grid.empty() && !seed_list.empty() && !methods.empty(),
          ErrorCode::usage, "sweep: grids must be non-empty");
  for (std::size_t i = 0; i < seed_list.size(); ++i)
    for (std::size_t j = i + 1; j < seed_list.size(); ++j)
      require(seed_list[i] != seed_list[j], ErrorCode::usage, "sweep: seeds must be distinct");
  for (const std::string& meth : methods)
    require(meth == "spectral" || meth == "spectral+wls" || meth == "als" || meth == "oracle",
            ErrorCode::usage, "sweep: unknown method '" + meth + "'");

  MethodParams base;
  if (cfg.count("lambda_thresh")) base.lambda_thresh = std::stod(cfg.at("lambda_thresh"));
  if (cfg.count("n_init")) base.solver.n_init = static_cast<int>(std::stoll(cfg.at("n_init")));
  if (cfg.count("k_top")) base.k_top = static_cast<int>(std::stoll(cfg.at("k_top")));

  // provenance hash over the canonicalized config
  std::ostringstream canon;
  for (const auto& [k, v] : cfg) canon << k << "=" << v << ";";
  const std::string config_hash = fnv1a_hex(canon.str());

  struct Point {
    std::int64_t n;
    double sigma;
    std::uint64_t seed;
  };
  std::vector<Point> points;
  for (std::int64_t n : n_grid)
    for (double s : sigma_grid)
      for (std::int64_t seed : seed_list) points.push_back({n, s, static_cast<std::uint64_t>(seed)});

  std::vector<std::vector<SweepRow>> rows(points.size());
  parallel_for(0, static_cast<std::int64_t>(points.size()), [&](std::int64_t pi) {
    const Point& pt = points[static_cast<std::size_t>(pi)];
    InstanceSpec spec;
    spec.d = d;
    spec.m = m;
    spec.n = pt.n;
    spec.sigma = pt.sigma;
    spec.seed = pt.seed;
    spec.law = law_from_config(cfg, d, atoms_path);
    std::vector<SweepRow>& out = rows[static_cast<std::size_t>(pi)];
    Instance inst;
    bool gen_ok = true;
    std::string gen_err;
    try {
      inst = make_instance(spec);
    } catch (const Error& e) {
      gen_ok = false;
      gen_err = e.what();
    }
    for (const std::string& meth : methods) {
      SweepRow row;
      row.n = pt.n;
      row.sigma = pt.sigma;
      row.seed = pt.seed;
      row.method = meth;
      if (!gen_ok) {
        row.status = csv_safe(gen_err);
        out.push_back(row);
        continue;
      }
      MethodParams params = base;
      params.solver.seed = Rng::derive(pt.seed, 0xe16);
      MethodOutcome mo = run_method(meth, inst, pt.sigma, d, params);
      row.ok = mo.ok;
      row.wall_time = mo.wall_time;
      row.eigenpair_count = mo.eigenpair_count;
      row.candidate_count = mo.candidate_count;
      if (mo.ok) {
        row.error = align_rows(mo.W_hat, inst.W).error;
        row.status = "ok";
      } else {
        row.status = csv_safe(mo.error_msg);
      }
      out.push_back(row);
    }
  });

  std::ofstream f(out_path);
  require(f.good(), ErrorCode::data, "cannot write " + out_path);
  f << "n,sigma,seed,method,error,wall_time,eigenpair_count,candidate_count,status,config_hash\n";
  bool all_ok = true;
  for (const auto& point_rows : rows)
    for (const SweepRow& r : point_rows) {
      all_ok = all_ok && r.ok;
      f << r.n << ',' << fmt_double(r.sigma) << ',' << r.seed << ',' << r.method << ','
        << (r.ok ? fmt_double(r.error) : std::string("nan")) << ',' << fmt_double(r.wall_time) << ','
        << r.eigenpair_count << ',' << r.candidate_count << ',' << r.status << ',' << config_hash
        << '\n';
    }
  require(f.good(), ErrorCode::data, "write failed for " + out_path);
  return all_ok ? 0 : 4;
}

int cmd_conditions_check(const std::string& atoms_path, int probes, std::uint64_t seed) {
  AtomDistribution dist = read_atoms(atoms_path);
  LatentMoments lm = latent_population_moments(dist);
  ConditionsReport rep = check_conditions(lm, dist, probes, seed);
  std::cout << rep.summary();
  return 0;
}

int cmd_tensor_eig(const std::string& tensor_path, const std::string& out_path,
                   const SolverConfig& solver) {
  SymTensor3 t = read_tensor(tensor_path);
  EigenpairSet set = enumerate_eigenpairs(t, solver);
  std::ofstream f(out_path);
  require(f.good(), ErrorCode::data, "cannot write " + out_path);
  f << "lambda,residual,stability";
  for (Index i = 0; i < t.dim(); ++i) f << ",u_" << i;
  f << "\n";
  for (const Eigenpair& p : set.pairs) {
    f << fmt_double(p.lambda) << ',' << fmt_double(p.residual) << ',' << stability_name(p.stability);
    for (Index i = 0; i < t.dim(); ++i) f << ',' << fmt_double(p.u[i]);
    f << "\n";
  }
  require(f.good(), ErrorCode::data, "write failed for " + out_path);
  std::cout << "pairs=" << set.pairs.size() << " initializations=" << set.init_count
            << " converged=" << set.converged_count << "\n";
  return 0;
}

std::map<std::string, std::string> merge_config(const std::string& config_path,
                                                const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> cfg;
  if (!config_path.empty()) cfg = parse_kv_file(config_path);
  for (const std::string& kv : overrides) apply_override(cfg, kv);
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"binary latent variable model learning via tensor eigenpairs"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (default: all cores)");

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic instance (X, W, H, sidecar)");
  std::string gen_out, gen_format = "csv", gen_config, gen_atoms;
  std::vector<std::string> gen_sets;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--config", gen_config, "key=value config file");
  gen->add_option("--set", gen_sets, "config override key=value");
  gen->add_option("--format", gen_format, "matrix format: csv or bin");
  gen->add_option("--atoms", gen_atoms, "atom distribution CSV (for hidden=atoms)");

  // learn
  auto* learn = app.add_subcommand("learn", "estimate W from a sample matrix");
  std::string learn_x, learn_method = "spectral", learn_h_true, learn_out;
  double learn_sigma = 0.0, learn_lambda = -1.0, learn_tol = 1e-10;
  int learn_d = 0, learn_ninit = 0, learn_ktop = 6, learn_als_iter = 500;
  std::uint64_t learn_seed = 0;
  std::string learn_mode = "newton";
  learn->add_option("--x", learn_x, "sample matrix (.csv or .bin)")->required();
  learn->add_option("--method", learn_method, "spectral | spectral+wls | als | oracle");
  learn->add_option("--sigma", learn_sigma, "noise level (0 switches to the exact pipeline)");
  learn->add_option("--d", learn_d, "number of hidden units");
  learn->add_option("--lambda-thresh", learn_lambda, "eigenvalue threshold (default 5/sqrt(n/2))");
  learn->add_option("--n-init", learn_ninit, "solver initializations (default 100*2^d)");
  learn->add_option("--seed", learn_seed, "solver seed");
  learn->add_option("--tol", learn_tol, "solver residual tolerance");
  learn->add_option("--solver-mode", learn_mode, "newton | power | both");
  learn->add_option("--k-top", learn_ktop, "states kept per sample in the WLS step");
  learn->add_option("--als-max-iter", learn_als_iter, "ALS iteration cap");
  learn->add_option("--h-true", learn_h_true, "true H (oracle method)");
  learn->add_option("--out", learn_out, "output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "permutation-aligned error between estimates");
  std::string eval_hat, eval_true, eval_out;
  eval->add_option("--w-hat", eval_hat, "estimated W")->required();
  eval->add_option("--w-true", eval_true, "ground-truth W")->required();
  eval->add_option("--out", eval_out, "also write the report to a file");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "grid of (n, sigma, seed, method) runs to CSV");
  std::string sweep_config, sweep_out, sweep_atoms;
  std::vector<std::string> sweep_sets;
  sweep->add_option("--config", sweep_config, "key=value config file");
  sweep->add_option("--set", sweep_sets, "config override key=value");
  sweep->add_option("--out", sweep_out, "output CSV")->required();
  sweep->add_option("--atoms", sweep_atoms, "atom distribution CSV (for hidden=atoms)");

  // conditions-check
  auto* cond = app.add_subcommand("conditions-check", "non-degeneracy diagnostics for a hidden law");
  std::string cond_atoms;
  int cond_probes = 200;
  std::uint64_t cond_seed = 0;
  cond->add_option("--atoms", cond_atoms, "atom distribution CSV")->required();
  cond->add_option("--probes", cond_probes, "random rigidity probes");
  cond->add_option("--seed", cond_seed, "probe seed");

  // tensor-eig
  auto* teig = app.add_subcommand("tensor-eig", "dump eigenpairs of a tensor file as CSV");
  std::string teig_tensor, teig_out, teig_mode = "newton";
  int teig_ninit = 0;
  std::uint64_t teig_seed = 0;
  double teig_tol = 1e-10;
  teig->add_option("--tensor", teig_tensor, "tensor file (text or .bin)")->required();
  teig->add_option("--out", teig_out, "output CSV")->required();
  teig->add_option("--solver-mode", teig_mode, "newton | power | both");
  teig->add_option("--n-init", teig_ninit, "solver initializations");
  teig->add_option("--seed", teig_seed, "solver seed");
  teig->add_option("--tol", teig_tol, "residual tolerance");

  std::vector<const char*> argv;
  argv.push_back("blvm");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }
    set_threads(threads);

    auto parse_mode = [](const std::string& s) {
      if (s == "newton") return SolverMode::newton;
      if (s == "power") return SolverMode::power;
      if (s == "both") return SolverMode::both;
      throw Error(ErrorCode::usage, "unknown solver mode '" + s + "'");
    };

    if (gen->parsed()) {
      return cmd_generate(merge_config(gen_config, gen_sets), gen_out, gen_format, gen_atoms);
    }
    if (learn->parsed()) {
      MethodParams params;
      params.lambda_thresh = learn_lambda;
      params.solver.n_init = learn_ninit;
      params.solver.seed = learn_seed;
      params.solver.tol = learn_tol;
      params.solver.mode = parse_mode(learn_mode);
      params.k_top = learn_ktop;
      params.als_max_iter = learn_als_iter;
      return cmd_learn(learn_x, learn_method, learn_sigma, learn_d, params, learn_h_true, learn_out);
    }
    if (eval->parsed()) return cmd_eval(eval_hat, eval_true, eval_out);
    if (sweep->parsed()) return cmd_sweep(merge_config(sweep_config, sweep_sets), sweep_out, sweep_atoms);
    if (cond->parsed()) return cmd_conditions_check(cond_atoms, cond_probes, cond_seed);
    if (teig->parsed()) {
      SolverConfig solver;
      solver.mode = parse_mode(teig_mode);
      solver.n_init = teig_ninit;
      solver.seed = teig_seed;
      solver.tol = teig_tol;
      return cmd_tensor_eig(teig_tensor, teig_out, solver);
    }
    throw Error(ErrorCode::usage, "no subcommand given");
  } catch (const Error& e) {
    std::cerr << "{\"error\":\"" << csv_safe(e.what()) << "\",\"code\":" << static_cast<int>(e.code())
              << "}\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"" << csv_safe(e.what()) << "\",\"code\":4}\n";
    return 4;
  }
}

}  // namespace blvm::cli
