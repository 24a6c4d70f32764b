#include "cpfjd/cli_driver.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <ostream>

#include "cpfjd/matrix_market.hpp"
#include "cpfjd/oracle.hpp"
#include "cpfjd/solver.hpp"

namespace cpfjd {

namespace {

double sin_angle(const Vector& a, const Vector& b) {
  const double bb = b.squaredNorm();
  if (bb == 0.0 || a.norm() == 0.0) return 1.0;
  const Vector w = a - b * (b.dot(a) / bb);
  return std::min(1.0, w.norm() / a.norm());
}

Vector read_vector_file(const std::string& path, Index n) {
  const SparseMatrix m = read_matrix_market(path);
  if (m.cols() != 1 || m.rows() != n) {
    throw InputError("start vector file must be " + std::to_string(n) +
                     " x 1");
  }
  return to_dense(m).col(0);
}

struct CliOptions {
  std::string matrix_a;
  std::string matrix_b;
  std::string b_gen;
  bool transpose_a = false;
  std::string x0 = "ones";
  std::string output;
  std::string vectors_dir;
  bool validate = false;
  SolverConfig config;
};

RunReport build_report(const CliOptions& opt, const MatrixPair& pair,
                       const RunResult& result) {
  const SolverConfig& cfg = opt.config;
  RunReport rep;
  rep.matrix_a = opt.matrix_a;
  rep.matrix_b = opt.b_gen.empty() ? opt.matrix_b : ("gen:" + opt.b_gen);
  rep.transpose_a = opt.transpose_a;
  rep.m = pair.m();
  rep.n = pair.n();
  rep.p = pair.p();
  rep.tau = cfg.tau;
  rep.ell = cfg.ell;
  rep.tol = cfg.tol;
  rep.k_min = cfg.k_min;
  rep.k_max = cfg.k_max;
  rep.fixtol = cfg.fixtol;
  rep.eps_tilde = cfg.eps_tilde;
  rep.max_outer = cfg.max_outer;
  rep.seed = cfg.seed;
  rep.x0 = opt.x0;
  rep.inner_tol_rule = result.stats.inner_tol_rule;
  rep.all_converged = result.stats.all_converged;
  rep.outer_total = result.stats.outer_total;
  rep.inner_total = result.stats.inner_total;
  rep.fallback_expansions = result.stats.fallback_expansions;
  rep.duplicate_warnings = result.stats.duplicate_warnings;
  rep.degenerate_columns = result.stats.degenerate_columns;
  rep.minres_cap_hits = result.stats.minres_cap_hits;
  rep.warnings = result.stats.warnings;

  const ConvergedSet& conv = result.converged;
  for (Index j = 0; j < conv.size(); ++j) {
    ComponentRecord c;
    c.alpha = conv.c[j];
    c.beta = conv.s[j];
    c.sigma = conv.s[j] == 0.0 ? std::numeric_limits<double>::infinity()
                               : conv.c[j] / conv.s[j];
    const Vector r = conv.s[j] * spmv_transpose(pair.a, conv.u_c.col(j)) -
                     conv.c[j] * spmv_transpose(pair.b, conv.v_c.col(j));
    c.residual = r.norm();
    if (j < static_cast<Index>(result.stats.outer_per_component.size())) {
      c.outer_iterations =
          result.stats.outer_per_component[static_cast<std::size_t>(j)];
      c.inner_iterations =
          result.stats.inner_per_component[static_cast<std::size_t>(j)];
    }
    c.converged = true;
    rep.components.push_back(c);
  }
  return rep;
}

void append_validation(RunReport& rep, const CliOptions& opt,
                       const MatrixPair& pair, const RunResult& result) {
  if (pair.n() > 600) {
    rep.warnings.push_back(
        "--validate skipped: n exceeds the desk-scale oracle guard (600)");
    return;
  }
  const FullGsvd oracle = dense_full_gsvd(pair);
  const ConvergedSet& conv = result.converged;
  const Index j = conv.size();
  if (j == 0) return;

  // Pair rank-by-rank in target order on both sides.
  std::vector<Index> conv_order(static_cast<std::size_t>(j));
  std::iota(conv_order.begin(), conv_order.end(), Index{0});
  auto sigma_of = [&](Index i) { return conv.c[i] / conv.s[i]; };
  std::stable_sort(conv_order.begin(), conv_order.end(), [&](Index a, Index b) {
    return std::abs(sigma_of(a) - opt.config.tau) <
           std::abs(sigma_of(b) - opt.config.tau);
  });
  const std::vector<Index> ref =
      closest_to_target(oracle, opt.config.tau,
                        std::min<Index>(j, static_cast<Index>(
                                               oracle.nontrivial_indices()
                                                   .size())));
  rep.has_validation = true;
  for (std::size_t i = 0; i < ref.size() && i < conv_order.size(); ++i) {
    const Index ci = conv_order[i];
    const Index oi = ref[i];
    ValidationRecord v;
    v.sigma_ref = oracle.sigma(oi);
    v.sigma_rel_err =
        std::abs(sigma_of(ci) - v.sigma_ref) / std::abs(v.sigma_ref);
    const double su = sin_angle(conv.u_c.col(ci), oracle.u_full.col(oi));
    const double sv = sin_angle(conv.v_c.col(ci), oracle.v_full.col(oi));
    const double sx = sin_angle(conv.x_c.col(ci), oracle.x_full.col(oi));
    v.angle_err = std::sqrt(su * su + sv * sv + sx * sx);
    rep.validation.push_back(v);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "Partial GSVD of a sparse pair (A, B): the components whose "
      "generalized singular values lie closest to a target"};
  app.name("cpfjd");

  CliOptions opt;
  SolverConfig& cfg = opt.config;
  app.add_option("--matrix-a", opt.matrix_a,
                 "Matrix Market file for A")
      ->required();
  auto* bfile = app.add_option("--matrix-b", opt.matrix_b,
                               "Matrix Market file for B");
  auto* bgen = app.add_option("--b-gen", opt.b_gen,
                              "generate B: b0 (tridiagonal Toeplitz), b1 "
                              "(first difference), b2 (second difference)")
                   ->check(CLI::IsMember({"b0", "b1", "b2"}));
  bfile->excludes(bgen);
  bgen->excludes(bfile);
  app.add_flag("--transpose-a", opt.transpose_a,
               "transpose A after loading");
  app.add_option("--tau", cfg.tau, "target generalized singular value (> 0)")
      ->required();
  app.add_option("--num", cfg.ell, "number of components to compute");
  app.add_option("--tol", cfg.tol, "outer residual tolerance");
  app.add_option("--kmin", cfg.k_min, "restart subspace dimension");
  app.add_option("--kmax", cfg.k_max, "maximum subspace dimension");
  app.add_option("--fixtol", cfg.fixtol,
                 "target-to-Ritz shift switching tolerance (0: never "
                 "switch, inf: always Ritz)");
  app.add_option("--eps-tilde", cfg.eps_tilde,
                 "expansion-vector accuracy for the inner iterations");
  app.add_option("--max-outer", cfg.max_outer,
                 "outer iteration cap per component");
  app.add_option("--seed", cfg.seed, "seed for fallback directions");
  app.add_option("--x0", opt.x0,
                 "start vector: ones, mod4, or file:PATH");
  app.add_option("--minres-max-iters", cfg.minres_max_iters,
                 "inner iteration cap (0: min(2n, 10000))");
  app.add_option("--inner-tol-override", cfg.inner_tol_override,
                 "fixed inner tolerance overriding the adaptive rule "
                 "(0: off; diagnostic use)");
  app.add_option("--output", opt.output, "report file (default: stdout)");
  app.add_option("--vectors", opt.vectors_dir,
                 "directory for converged vectors as Matrix Market arrays");
  app.add_flag("--validate", opt.validate,
               "compare against the dense oracle (n <= 600)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    SparseMatrix a = read_matrix_market(opt.matrix_a);
    if (opt.transpose_a) a = transpose(a);
    const Index n = a.cols();

    SparseMatrix b;
    if (!opt.b_gen.empty()) {
      if (opt.b_gen == "b0") {
        b = gen_b0(n);
      } else if (opt.b_gen == "b1") {
        b = gen_b1(n);
      } else {
        if (n < 3) throw InputError("--b-gen b2 needs n >= 3");
        b = gen_b2(n - 2);
      }
    } else if (!opt.matrix_b.empty()) {
      b = read_matrix_market(opt.matrix_b);
    } else {
      throw InputError("one of --matrix-b or --b-gen is required");
    }

    if (opt.x0 == "ones") {
      cfg.x0_kind = StartVector::Ones;
    } else if (opt.x0 == "mod4") {
      cfg.x0_kind = StartVector::Mod4;
    } else if (opt.x0.rfind("file:", 0) == 0) {
      cfg.x0_kind = StartVector::Custom;
      cfg.x0_custom = read_vector_file(opt.x0.substr(5), n);
    } else {
      throw InputError("--x0 must be ones, mod4, or file:PATH");
    }

    const MatrixPair pair(std::move(a), std::move(b));
    cfg.validate(pair.n());

    const auto t0 = std::chrono::steady_clock::now();
    const RunResult result = run(pair, cfg);
    const auto t1 = std::chrono::steady_clock::now();

    RunReport rep = build_report(opt, pair, result);
    rep.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    if (opt.validate) append_validation(rep, opt, pair, result);

    try {
      if (!opt.vectors_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(opt.vectors_dir);
        const fs::path dir(opt.vectors_dir);
        write_matrix_market_array(result.converged.x_c, (dir / "x.mtx").string());
        write_matrix_market_array(result.converged.u_c, (dir / "u.mtx").string());
        write_matrix_market_array(result.converged.v_c, (dir / "v.mtx").string());
      }
      if (opt.output.empty()) {
        emit_report(rep, out);
      } else {
        emit_report(rep, opt.output);
      }
    } catch (const std::exception& e) {
      err << "cpfjd: output error: " << e.what() << "\n";
      return 4;
    }
    return rep.all_converged ? 0 : 3;
  } catch (const std::exception& e) {
    err << "cpfjd: error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cpfjd
