// SPDX-License-Identifier: MIT
//
// Command-line front end: `rte run|convergence|sweep|verify`.
// JSON configs, CSV/JSON outputs, on-disk factorization cache (RTE_CACHE_DIR).

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>

#include "rte/errors.hpp"
#include "rte/experiments.hpp"
#include "rte/oracle.hpp"
#include "rte/solver.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace rte;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return j;
}

MaterialField material_from(const json& m) {
  std::string name = m.value("name", "constant");
  if (name == "constant") {
    return constant_field(m.value("sigma_T", 1.0), m.value("sigma_a", 0.5),
                          m.value("epsilon", 1.0));
  }
  if (name == "bufferzone") return bufferzone_field();
  if (name == "lattice") {
    std::vector<EpsRectangle> rects;
    if (m.contains("rectangles")) {
      for (const auto& r : m.at("rectangles"))
        rects.push_back({r.at("x0"), r.at("x1"), r.at("y0"), r.at("y1"),
                         r.at("eps")});
    } else {
      rects = default_lattice_rectangles(m.value("eps_diffusive", 0.01));
    }
    return lattice_field(rects, m.value("background_eps", 1.0));
  }
  if (name == "custom") {
    MaterialField f;
    auto st = parse_expression(m.at("sigma_T").get<std::string>());
    auto sa = parse_expression(m.at("sigma_a").get<std::string>());
    auto ep = parse_expression(m.at("epsilon").get<std::string>());
    f.sigma_T = st;
    f.sigma_a = sa;
    f.epsilon = ep;
    f.description = "custom:" + m.dump();
    return f;
  }
  throw ConfigError("unknown material name: " + name);
}

TimeSteppingConfig time_from(const json& t) {
  TimeSteppingConfig cfg;
  cfg.dt = t.value("dt", 0.1);
  cfg.T = t.value("T", 1.0);
  cfg.tol = t.value("tol", 1e-8);
  cfg.max_iters = t.value("max_iters", 20000);
  std::string mode = t.value("mode", "cell_average");
  if (mode == "cell_average")
    cfg.mode = TimeSteppingConfig::kCellAverage;
  else if (mode == "cell_center")
    cfg.mode = TimeSteppingConfig::kCellCenter;
  else
    throw ConfigError("time.mode must be cell_average or cell_center");
  if (cfg.mode == TimeSteppingConfig::kCellAverage && cfg.dt >= 1.0)
    throw ConfigError(
        "time.dt >= 1 is incompatible with cell_average mode (relaxation "
        "weight 1 - dt must stay positive); use mode = cell_center");
  cfg.reconstruct = t.value("reconstruct", true);
  cfg.anderson_depth = t.value("anderson_depth", 40);
  if (cfg.anderson_depth < 0)
    throw ConfigError("time.anderson_depth must be >= 0");
  return cfg;
}

// FNV-1a over a canonical description of everything the factorization
// depends on.
std::string content_hash(const MaterialField& mat, int I, int L, int np,
                         int na, double g, double delta) {
  MeshHierarchy mesh = build_hierarchy(I, L);
  std::string s = mat.description + "|" + std::to_string(I) + "|" +
                  std::to_string(L) + "|" + std::to_string(np) + "|" +
                  std::to_string(na) + "|" + std::to_string(g) + "|" +
                  std::to_string(delta);
  char buf[96];
  for (int c = 0; c < I * I; ++c) {
    double x0 = (c % I) * mesh.h, y0 = (c / I) * mesh.h;
    CellOptics o = cell_average(mat, c, x0, y0, mesh.h);
    std::snprintf(buf, sizeof buf, "|%.17g,%.17g,%.17g", o.sigma_T_bar,
                  o.sigma_a_bar, o.epsilon_bar);
    s += buf;
  }
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : s) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

Factorization cached_factorize(const Discretization& d,
                               const std::string& hash, bool* from_cache) {
  if (from_cache) *from_cache = false;
  const char* dir = std::getenv("RTE_CACHE_DIR");
  if (!dir || !*dir) return factorize(d);
  fs::create_directories(dir);
  fs::path path = fs::path(dir) / (hash + ".rsmf");
  if (fs::exists(path)) {
    try {
      Factorization f = load_factorization(path.string());
      if (from_cache) *from_cache = true;
      return f;
    } catch (const std::exception&) {
      // fall through to a fresh build on any cache corruption
    }
  }
  Factorization f = factorize(d);
  save_factorization(f, path.string());
  return f;
}

struct ProblemFuncs {
  PointFunc initial, boundary, source;
  bool manufactured = false;
  ManufacturedCase mc;
};

ProblemFuncs problem_from(const json& p, const json& material,
                          const QuadratureSet& quad) {
  ProblemFuncs out;
  std::string type = p.value("type", "benchmark");
  const int nd = quad.n_dir;
  if (type == "benchmark") {
    out.initial = zero_func(nd);
    out.source = zero_func(nd);
    out.boundary = isotropic_func(
        nd, [](double, double, double t) { return t / (1 + t); });
    return out;
  }
  if (type == "manufactured") {
    if (material.value("name", "constant") != "constant")
      throw ConfigError("manufactured problems require a constant material");
    out.mc = make_manufactured_case(material.value("sigma_T", 1.0),
                                    material.value("sigma_a", 0.5),
                                    material.value("epsilon", 1.0), quad);
    ManufacturedCase mc = out.mc;
    out.manufactured = true;
    out.initial = out.boundary = [mc](double x, double y, double t) {
      return manufactured_reference(mc, x, y, t);
    };
    out.source = [mc](double x, double y, double t) {
      return manufactured_source(mc, x, y, t);
    };
    return out;
  }
  if (type == "custom") {
    auto b = parse_expression(p.value("boundary", "0"));
    auto s = parse_expression(p.value("source", "0"));
    auto i0 = parse_expression(p.value("initial", "0"));
    out.initial = isotropic_func(
        nd, [i0](double x, double y, double) { return i0(x, y); });
    out.boundary = isotropic_func(
        nd, [b](double x, double y, double) { return b(x, y); });
    out.source = isotropic_func(
        nd, [s](double x, double y, double) { return s(x, y); });
    return out;
  }
  throw ConfigError("unknown problem type: " + type);
}

int cmd_run(const std::string& cfg_path) {
  json cfg = load_json(cfg_path);
  const json& mesh = cfg.at("mesh");
  int I = mesh.at("I"), L = mesh.value("L", 0);
  const json& qj = cfg.value("quadrature", json::object());
  int np = qj.value("n_polar", 1), na = qj.value("n_azimuth", 1);
  double g = cfg.value("kernel", json::object()).value("g", 0.0);
  double delta = cfg.value("compression", json::object()).value("delta", 1e-3);
  MaterialField mat = material_from(cfg.value("material", json::object()));
  TimeSteppingConfig tcfg = time_from(cfg.value("time", json::object()));
  fs::path outdir = cfg.value("output", json::object())
                        .value("directory", std::string("."));
  fs::create_directories(outdir);

  QuadratureSet quad = build_quadrature(np, na);
  ProblemFuncs prob =
      problem_from(cfg.value("problem", json::object()),
                   cfg.value("material", json::object()), quad);

  double t0 = now_seconds();
  Discretization d = discretize(mat, I, L, quad, g, delta);
  double t1 = now_seconds();
  bool from_cache = false;
  Factorization fact = cached_factorize(
      d, content_hash(mat, I, L, np, na, g, delta), &from_cache);
  double t2 = now_seconds();
  TimeSeriesResult ts = run_time_series(d, fact, prob.initial, prob.boundary,
                                        prob.source, tcfg);
  double t3 = now_seconds();

  // scalar flux at cell centers, final time
  std::vector<std::vector<double>> grid;
  const SolutionField& fin = ts.fields.back();
  for (int c = 0; c < d.n_cells(); ++c) {
    double x = (c % I + 0.5) * d.mesh.h, y = (c / I + 0.5) * d.mesh.h;
    grid.push_back({x, y, d.quad.w.dot(center_value(d, fin, c))});
  }
  write_csv((outdir / "scalar_flux.csv").string(), {"x", "y", "phi"}, grid);

  json manifest;
  manifest["config"] = cfg_path;
  manifest["I"] = I;
  manifest["L"] = L;
  manifest["n_dir"] = quad.n_dir;
  manifest["delta"] = delta;
  manifest["rank_ratio"] = rank_ratio(d.basis);
  manifest["dimF"] = fact.dimF;
  manifest["storage_doubles"] = fact.storage_doubles();
  manifest["factorization_cached"] = from_cache;
  manifest["steps"] = static_cast<int>(ts.diags.size());
  json iters = json::array();
  for (const auto& dg : ts.diags) iters.push_back(dg.iterations);
  manifest["iterations_per_step"] = iters;
  manifest["timings_seconds"] = {{"discretize", t1 - t0},
                                 {"factorize", t2 - t1},
                                 {"time_series", t3 - t2}};
  if (prob.manufactured) {
    std::vector<Eigen::VectorXd> exact(d.n_cells());
    for (int c = 0; c < d.n_cells(); ++c) {
      double x = (c % I + 0.5) * d.mesh.h, y = (c / I + 0.5) * d.mesh.h;
      exact[c] = manufactured_reference(prob.mc, x, y, tcfg.T);
    }
    FieldError fe = field_error(d, fin, exact);
    manifest["error_angular"] = fe.angular;
    manifest["error_scalar"] = fe.scalar;
  }
  std::ofstream(outdir / "manifest.json") << manifest.dump(2) << "\n";
  std::cout << "run complete: " << (outdir / "manifest.json").string() << "\n";
  return 0;
}

int cmd_convergence(const std::string& cfg_path) {
  json cfg = load_json(cfg_path);
  std::vector<int> Ms = cfg.value("M", std::vector<int>{1});
  std::vector<double> epss = cfg.value("eps", std::vector<double>{0.5});
  std::vector<double> hs =
      cfg.value("h", std::vector<double>{0.25, 0.125, 0.0625});
  double delta = cfg.value("delta", 1e-3);
  double tol = cfg.value("tol", 1e-8);
  fs::path outdir = cfg.value("directory", std::string("."));
  fs::create_directories(outdir);

  auto rows = convergence_study(Ms, epss, hs, delta, tol);
  std::vector<std::vector<double>> table;
  for (const auto& r : rows)
    table.push_back({static_cast<double>(r.M), r.eps, r.h, r.err_angular,
                     r.err_scalar, r.order_angular, r.order_scalar,
                     static_cast<double>(r.total_iterations)});
  write_csv((outdir / "convergence.csv").string(),
            {"M", "eps", "h", "err_angular", "err_scalar", "order_angular",
             "order_scalar", "iterations"},
            table);
  std::cout << "convergence table: " << (outdir / "convergence.csv").string()
            << "\n";
  return 0;
}

int cmd_sweep(const std::string& cfg_path) {
  json cfg = load_json(cfg_path);
  int I = cfg.value("I", 16), L = cfg.value("L", 2);
  int np = cfg.value("n_polar", 1), na = cfg.value("n_azimuth", 3);
  double g = cfg.value("g", 0.0);
  std::vector<double> deltas =
      cfg.value("deltas", std::vector<double>{0.0, 1e-6, 1e-4, 1e-3, 1e-2});
  MaterialField mat = material_from(cfg.value("material", json::object()));
  TimeSteppingConfig tcfg = time_from(cfg.value("time", json::object()));
  fs::path outdir = cfg.value("directory", std::string("."));
  fs::create_directories(outdir);

  QuadratureSet quad = build_quadrature(np, na);
  auto rows = rank_sweep(
      mat, I, L, quad, g, deltas, zero_func(quad.n_dir),
      isotropic_func(quad.n_dir,
                     [](double, double, double t) { return t / (1 + t); }),
      zero_func(quad.n_dir), tcfg);
  std::vector<std::vector<double>> table;
  for (const auto& r : rows)
    table.push_back({r.delta, r.ratio, r.err_angular, r.err_scalar});
  write_csv((outdir / "sweep.csv").string(),
            {"delta", "rank_ratio", "err_angular", "err_scalar"}, table);
  std::cout << "sweep table: " << (outdir / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_verify(int max_I, unsigned seed) {
  if (max_I > 16) throw ConfigError("verify: --max-I capped at 16");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  bool ok = true;
  auto check = [&](const std::string& name, double residual, double tol) {
    bool pass = residual <= tol;
    ok = ok && pass;
    std::cout << (pass ? "PASS " : "FAIL ") << name << ": residual "
              << residual << " (tol " << tol << ")\n";
  };

  QuadratureSet quad = build_quadrature(1, 1);
  KernelMatrix kernel = discrete_kernel(quad, 0.0);
  MaterialField mat = constant_field(1.0, 0.5, 0.05);

  for (int I : {4, std::min(8, max_I)}) {
    for (int L : {1, 2}) {
      if (I >> L < 1) continue;
      Discretization d = discretize(mat, I, L, quad, 0.0, 0.0);
      Factorization f = factorize(d);
      DenseInverse dense = dense_oracle_inverse(f);
      Eigen::VectorXd v(f.levels[0].rows.rows);
      for (int i = 0; i < v.size(); ++i) v[i] = unif(rng);
      Eigen::VectorXd x1 = apply_inverse(f, v);
      Eigen::VectorXd x2 = dense.solve(v);
      check("apply_inverse vs dense oracle (I=" + std::to_string(I) +
                ", L=" + std::to_string(L) + ")",
            (x1 - x2).norm() / x2.norm(), 1e-9);
      // dimension identity |F^(l-1)| = |F^(l)| + |G^(l)|
      double dim_err = 0;
      for (int l = 1; l <= L; ++l)
        dim_err += std::abs(static_cast<double>(f.dimF[l - 1] - f.dimF[l] -
                                                f.dimG[l]));
      check("dimension identities (I=" + std::to_string(I) +
                ", L=" + std::to_string(L) + ")",
            dim_err, 0.0);
    }
  }

  // eigen residual + spectrum pairing on random optics
  for (int trial = 0; trial < 5; ++trial) {
    CellOptics o;
    o.sigma_T_bar = 0.5 + std::abs(unif(rng));
    o.sigma_a_bar = 0.1 + std::abs(unif(rng));
    o.epsilon_bar = 0.05 + 0.5 * std::abs(unif(rng));
    o.Sigma_t = o.sigma_T_bar / o.epsilon_bar;
    o.Sigma_s = o.Sigma_t - o.epsilon_bar * o.sigma_a_bar;
    o.rho = o.Sigma_s / o.Sigma_t;
    auto [ex, ey] = eigen_systems(o, quad, kernel);
    Eigen::MatrixXd KW = o.rho * kernel.kappa * quad.w.asDiagonal() -
                         Eigen::MatrixXd::Identity(quad.n_dir, quad.n_dir);
    Eigen::MatrixXd Mx = quad.c.cwiseInverse().asDiagonal() * KW;
    double res = 0, pair = 0;
    for (int k = 0; k < quad.n_dir; ++k) {
      res = std::max(res, (Mx * ex->xi.col(k) - ex->lambda[k] * ex->xi.col(k))
                              .cwiseAbs()
                              .maxCoeff());
      pair = std::max(pair, std::abs(ex->lambda[k] +
                                     ex->lambda[quad.n_dir - 1 - k]));
    }
    check("eigen residual trial " + std::to_string(trial), res, 1e-10);
    check("spectrum pairing trial " + std::to_string(trial), pair, 1e-10);
  }
  std::cout << (ok ? "verify: all checks passed\n"
                   : "verify: FAILURES detected\n");
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale radiative transport solver"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = auto)");

  std::string run_cfg, conv_cfg, sweep_cfg;
  auto* run = app.add_subcommand("run", "time-dependent simulation");
  run->add_option("config", run_cfg, "JSON config")->required();
  auto* conv = app.add_subcommand("convergence", "manufactured-solution study");
  conv->add_option("config", conv_cfg, "JSON config")->required();
  auto* sweep = app.add_subcommand("sweep", "rank-ratio sweep");
  sweep->add_option("config", sweep_cfg, "JSON config")->required();
  auto* verify = app.add_subcommand("verify", "desk-scale verification suite");
  int max_I = 8;
  unsigned seed = 0;
  verify->add_option("--max-I", max_I, "largest grid (<= 16)");
  verify->add_option("--seed", seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) Eigen::setNbThreads(threads);

  try {
    if (run->parsed()) return cmd_run(run_cfg);
    if (conv->parsed()) return cmd_convergence(conv_cfg);
    if (sweep->parsed()) return cmd_sweep(sweep_cfg);
    if (verify->parsed()) return cmd_verify(max_I, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
