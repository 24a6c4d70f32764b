#include "cpfjd/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace cpfjd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double residual_threshold(const RitzApproximation& ritz,
                          const MatrixPair& pair, double tol) {
  return (ritz.beta * pair.norm1_a + ritz.alpha * pair.norm1_b) * tol;
}

// Distance-to-target ordering: infinite Ritz values sort last and are
// never selected; ties go to the smaller theta, then to the original
// (nonincreasing-theta) position.
std::vector<Index> selection_order(const DenseGsvd& gsvd, double tau) {
  std::vector<Index> order(static_cast<std::size_t>(gsvd.size()));
  std::iota(order.begin(), order.end(), Index{0});
  auto distance = [&](Index i) {
    const double theta = gsvd.theta(i);
    return std::isfinite(theta) ? std::abs(theta - tau) : kInf;
  };
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double da = distance(a);
    const double db = distance(b);
    if (da != db) return da < db;
    return gsvd.theta(a) < gsvd.theta(b);
  });
  return order;
}

// Removes the components of w along two orthonormal blocks, twice.
Vector orthogonalized(Vector w, const Matrix& q1, const Matrix& q2) {
  for (int pass = 0; pass < 2; ++pass) {
    if (q1.cols() > 0) w -= q1 * (q1.transpose() * w);
    if (q2.cols() > 0) w -= q2 * (q2.transpose() * w);
  }
  return w;
}

// Rebuilds the searching subspaces from a subset of projected GSVD
// columns: X Q, U E_keep, V F_keep with the R factors Sigma R^{-1}.
SearchState compress(const SearchState& state, const DenseGsvd& gsvd,
                     const std::vector<Index>& keep) {
  const Index k_new = static_cast<Index>(keep.size());
  Matrix d_keep(gsvd.size(), k_new);
  Matrix e_keep(gsvd.size(), k_new);
  Matrix f_keep(gsvd.size(), k_new);
  Vector sg(k_new), sh(k_new);
  for (Index j = 0; j < k_new; ++j) {
    const Index src = keep[static_cast<std::size_t>(j)];
    d_keep.col(j) = gsvd.d.col(src);
    e_keep.col(j) = gsvd.e.col(src);
    f_keep.col(j) = gsvd.f.col(src);
    sg[j] = gsvd.sigma_g[src];
    sh[j] = gsvd.sigma_h[src];
  }

  const ThinQr dqr = thin_qr(d_keep);

  // Sigma * R^{-1} stays upper triangular with nonnegative diagonal;
  // solve R^T X = Sigma and transpose rather than inverting.
  Matrix rt = dqr.r.transpose();
  const Matrix g_new =
      rt.triangularView<Eigen::Lower>().solve(Matrix(sg.asDiagonal()))
          .transpose();
  const Matrix h_new =
      rt.triangularView<Eigen::Lower>().solve(Matrix(sh.asDiagonal()))
          .transpose();

  SearchState out;
  out.x_basis = state.x_basis * dqr.q;
  out.a_factors = {state.u_basis() * e_keep, g_new};
  out.b_factors = {state.v_basis() * f_keep, h_new};
  return out;
}

}  // namespace

void SolverConfig::validate(Index n) const {
  if (!(std::isfinite(tau) && tau > 0.0)) {
    throw InputError("config: tau must be finite and > 0");
  }
  if (ell < 1 || ell > n) throw InputError("config: need 1 <= ell <= n");
  if (!(std::isfinite(tol) && tol > 0.0)) {
    throw InputError("config: tol must be finite and > 0");
  }
  if (!(k_min >= 1 && k_min < k_max && k_max <= n)) {
    throw InputError("config: need 1 <= k_min < k_max <= n");
  }
  if (std::isnan(fixtol) || fixtol < 0.0) {
    throw InputError("config: fixtol must be >= 0 (or +inf)");
  }
  if (fixtol > 0.0 && std::isfinite(fixtol) && tol > fixtol) {
    throw InputError("config: tol must not exceed a finite positive fixtol");
  }
  if (!(std::isfinite(eps_tilde) && eps_tilde > 0.0)) {
    throw InputError("config: eps_tilde must be finite and > 0");
  }
  if (max_outer < 1) throw InputError("config: max_outer must be >= 1");
  if (minres_max_iters < 0 || inner_tol_override < 0.0) {
    throw InputError("config: iteration and tolerance overrides must be >= 0");
  }
  if (x0_kind == StartVector::Custom && x0_custom.size() != n) {
    throw InputError("config: custom start vector has wrong length");
  }
}

Vector SolverConfig::start_vector(Index n) const {
  Vector x0;
  switch (x0_kind) {
    case StartVector::Ones:
      x0 = Vector::Ones(n);
      break;
    case StartVector::Mod4:
      x0.resize(n);
      for (Index i = 0; i < n; ++i) x0[i] = static_cast<double>((i + 1) % 4);
      break;
    case StartVector::Custom:
      x0 = x0_custom;
      break;
  }
  const double norm = x0.norm();
  if (norm == 0.0) throw InputError("start vector must be nonzero");
  return x0 / norm;
}

Index SolverConfig::minres_iteration_cap(Index n) const {
  const Index base = minres_max_iters > 0 ? minres_max_iters : 2 * n;
  return std::min<Index>(base, 10000);
}

ConvergedSet ConvergedSet::empty(Index m, Index p, Index n) {
  ConvergedSet set;
  set.c.resize(0);
  set.s.resize(0);
  set.u_c.resize(m, 0);
  set.v_c.resize(p, 0);
  set.x_c.resize(n, 0);
  set.y_c.resize(n, 0);
  return set;
}

SearchState initialize(const MatrixPair& pair, const SolverConfig& cfg,
                       const ConvergedSet& conv, std::mt19937_64& rng,
                       RunStats* stats) {
  Vector x0 = cfg.start_vector(pair.n());
  if (conv.size() > 0) {
    const Matrix qy = orthonormal_columns(conv.y_c);
    x0 = orthogonalized(std::move(x0), qy, Matrix(pair.n(), 0));
    if (x0.norm() <= 1e-8) {
      // Start vector swallowed by the converged subspace: draw a fresh
      // direction instead.
      std::normal_distribution<double> gauss(0.0, 1.0);
      do {
        for (Index i = 0; i < x0.size(); ++i) x0[i] = gauss(rng);
        x0 = orthogonalized(std::move(x0), qy, Matrix(pair.n(), 0));
      } while (x0.norm() <= 1e-8);
      if (stats != nullptr) {
        stats->warnings.push_back(
            "start vector lies in the converged subspace; replaced by a "
            "random direction");
      }
    }
    x0.normalize();
  }

  SearchState state;
  state.x_basis = x0;
  state.a_factors = ThinQr::empty(pair.m());
  state.b_factors = ThinQr::empty(pair.p());
  const QrAppendOutcome oa = qr_append_column(state.a_factors, spmv(pair.a, x0));
  const QrAppendOutcome ob = qr_append_column(state.b_factors, spmv(pair.b, x0));
  if (oa.rank_deficient && ob.rank_deficient) {
    throw NumericalError(
        "regularity violation: A x0 and B x0 are both zero");
  }
  if (stats != nullptr && (oa.rank_deficient || ob.rank_deficient)) {
    ++stats->degenerate_columns;
  }
  return state;
}

RitzApproximation extract_ritz(const SearchState& state,
                               const MatrixPair& pair,
                               const SolverConfig& cfg) {
  const DenseGsvd gsvd = dense_gsvd(state.g(), state.h());
  const std::vector<Index> order = selection_order(gsvd, cfg.tau);
  const Index selected = order.front();

  RitzApproximation ritz;
  ritz.selected_index = selected;
  ritz.alpha = gsvd.sigma_g[selected];
  ritz.beta = gsvd.sigma_h[selected];
  ritz.theta = gsvd.theta(selected);
  ritz.thetas_by_distance.reserve(order.size());
  for (Index i : order) ritz.thetas_by_distance.push_back(gsvd.theta(i));

  // Normalize d so that ||G d||^2 + ||H d||^2 = 1, which makes y^T x = 1.
  Vector d = gsvd.d.col(selected);
  const double scale =
      std::sqrt((state.g() * d).squaredNorm() + (state.h() * d).squaredNorm());
  d /= scale;

  ritz.x = state.x_basis * d;
  ritz.u = state.u_basis() * gsvd.e.col(selected);
  ritz.v = state.v_basis() * gsvd.f.col(selected);
  const Vector atu = spmv_transpose(pair.a, ritz.u);
  const Vector btv = spmv_transpose(pair.b, ritz.v);
  ritz.r = ritz.beta * atu - ritz.alpha * btv;
  ritz.y = ritz.alpha * atu + ritz.beta * btv;
  ritz.r_norm = ritz.r.norm();
  return ritz;
}

bool check_outer_convergence(const RitzApproximation& ritz,
                             const MatrixPair& pair, double tol) {
  return ritz.r_norm <= residual_threshold(ritz, pair, tol);
}

ShiftChoice select_shift(const RitzApproximation& ritz,
                         const MatrixPair& pair, const SolverConfig& cfg) {
  if (!ritz.theta_is_finite()) return ShiftChoice::FixedTarget;
  if (cfg.fixtol == 0.0) return ShiftChoice::FixedTarget;
  if (std::isinf(cfg.fixtol)) return ShiftChoice::RitzValue;
  return ritz.r_norm <= residual_threshold(ritz, pair, cfg.fixtol)
             ? ShiftChoice::RitzValue
             : ShiftChoice::FixedTarget;
}

namespace {

// Eigenvalue of K_tau = (A^T A - tau^2 B^T B)^{-1} (A^T A + B^T B)
// associated with a (projected) generalized singular value theta; the
// trivial infinite value maps to 1, theta == tau maps to +-inf.
double ktau_eigenvalue(double theta, double tau) {
  if (std::isinf(theta)) return 1.0;
  const double t2 = theta * theta;
  return (t2 + 1.0) / (t2 - tau * tau);
}

}  // namespace

double inner_tolerance(const RitzApproximation& ritz,
                       const SolverConfig& cfg, ShiftChoice choice) {
  if (choice == ShiftChoice::RitzValue) return 2.0 * cfg.eps_tilde;

  const double tau = cfg.tau;
  const double inv_tau2 = 1.0 / (tau * tau);
  const double rho = ktau_eigenvalue(ritz.thetas_by_distance.front(), tau);

  double est_norm = std::max(inv_tau2, 1.0);
  for (double theta_i : ritz.thetas_by_distance) {
    est_norm = std::max(est_norm, std::abs(ktau_eigenvalue(theta_i, tau)));
  }

  double est_sep = std::min(std::abs(rho + inv_tau2), std::abs(rho - 1.0));
  for (std::size_t i = 1; i < ritz.thetas_by_distance.size(); ++i) {
    const double kv = ktau_eigenvalue(ritz.thetas_by_distance[i], tau);
    if (!std::isfinite(kv)) continue;  // theta_i == tau: excluded
    est_sep = std::min(est_sep, std::abs(rho - kv));
  }

  const double c_tau = est_norm / est_sep;
  const double tol = std::min(2.0 * c_tau * cfg.eps_tilde, 0.01);
  if (!(tol > 0.0) || std::isnan(tol)) return 0.01;
  return tol;
}

MinresResult solve_correction(const RitzApproximation& ritz,
                              const ConvergedSet& conv,
                              const MatrixPair& pair, double shift,
                              double tol_inner, Index max_iters) {
  Vector rhs = -ritz.r;
  if (conv.size() > 0) {
    rhs += conv.y_c * (conv.x_c.transpose() * ritz.r);
  }
  if (rhs.norm() < 1e-15 * ritz.r_norm) {
    // Projected residual vanished: nothing to solve; the caller's
    // expansion falls back to a random direction.
    MinresResult stalled;
    stalled.t = Vector::Zero(pair.n());
    return stalled;
  }

  const Index j = conv.size();
  ProjectedOperator op;
  op.inner = {&pair, shift};
  op.xp.resize(pair.n(), j + 1);
  op.yp.resize(pair.n(), j + 1);
  if (j > 0) {
    op.xp.leftCols(j) = conv.x_c;
    op.yp.leftCols(j) = conv.y_c;
  }
  op.xp.col(j) = ritz.x;
  op.yp.col(j) = ritz.y;
  return minres_solve(op, rhs, tol_inner, max_iters);
}

bool expand(SearchState& state, const MatrixPair& pair, const Vector& t,
            const ConvergedSet& conv, std::mt19937_64& rng,
            RunStats* stats) {
  // The correction is orthogonal to Y_c only up to the inner solve's
  // accuracy; normalizing a nearly dependent direction would amplify
  // that leak, so project against the converged subspace as well.
  const Matrix qy = conv.size() > 0 ? orthonormal_columns(conv.y_c)
                                    : Matrix(pair.n(), 0);
  const double t_norm = t.norm();
  Vector w;
  bool fallback = t_norm == 0.0;
  if (!fallback) {
    w = orthogonalized(t, state.x_basis, qy);
    fallback = w.norm() <= 1e-13 * t_norm;
  }
  if (fallback) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector cand(pair.n());
    do {
      for (Index i = 0; i < cand.size(); ++i) cand[i] = gauss(rng);
      w = orthogonalized(cand, state.x_basis, qy);
    } while (w.norm() <= 1e-8 * std::sqrt(static_cast<double>(pair.n())));
    if (stats != nullptr) ++stats->fallback_expansions;
  }
  const Vector x_plus = w / w.norm();

  state.x_basis.conservativeResize(Eigen::NoChange, state.k() + 1);
  state.x_basis.col(state.k() - 1) = x_plus;
  const QrAppendOutcome oa =
      qr_append_column(state.a_factors, spmv(pair.a, x_plus));
  const QrAppendOutcome ob =
      qr_append_column(state.b_factors, spmv(pair.b, x_plus));
  if (stats != nullptr && (oa.rank_deficient || ob.rank_deficient)) {
    ++stats->degenerate_columns;
  }
  return fallback;
}

void thick_restart(SearchState& state, const SolverConfig& cfg) {
  if (state.k() <= cfg.k_min) {
    throw InputError("thick_restart: subspace dimension must exceed k_min");
  }
  const DenseGsvd gsvd = dense_gsvd(state.g(), state.h());
  std::vector<Index> keep = selection_order(gsvd, cfg.tau);
  keep.resize(static_cast<std::size_t>(cfg.k_min));
  state = compress(state, gsvd, keep);
}

bool deflate(const RitzApproximation& ritz, ConvergedSet& conv) {
  bool duplicate = false;
  if (conv.size() > 0) {
    duplicate =
        (conv.y_c.transpose() * ritz.x).cwiseAbs().maxCoeff() > 1e-6;
  }
  const Index j = conv.size();
  conv.c.conservativeResize(j + 1);
  conv.s.conservativeResize(j + 1);
  conv.c[j] = ritz.alpha;
  conv.s[j] = ritz.beta;
  conv.u_c.conservativeResize(Eigen::NoChange, j + 1);
  conv.v_c.conservativeResize(Eigen::NoChange, j + 1);
  conv.x_c.conservativeResize(Eigen::NoChange, j + 1);
  conv.y_c.conservativeResize(Eigen::NoChange, j + 1);
  conv.u_c.col(j) = ritz.u;
  conv.v_c.col(j) = ritz.v;
  conv.x_c.col(j) = ritz.x;
  conv.y_c.col(j) = ritz.y;
  return duplicate;
}

SearchState purge(const SearchState& state, Index converged_index) {
  if (state.k() < 2) {
    throw InputError("purge: subspace dimension must be at least 2");
  }
  const DenseGsvd gsvd = dense_gsvd(state.g(), state.h());
  if (converged_index < 0 || converged_index >= gsvd.size()) {
    throw InputError("purge: converged index out of range");
  }
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(gsvd.size() - 1));
  for (Index i = 0; i < gsvd.size(); ++i) {
    if (i != converged_index) keep.push_back(i);
  }
  return compress(state, gsvd, keep);
}

RunResult run(const MatrixPair& pair, const SolverConfig& cfg) {
  cfg.validate(pair.n());
  std::mt19937_64 rng(cfg.seed);

  RunResult out;
  out.converged = ConvergedSet::empty(pair.m(), pair.p(), pair.n());
  RunStats& st = out.stats;
  st.outer_per_component.assign(static_cast<std::size_t>(cfg.ell), 0);
  st.inner_per_component.assign(static_cast<std::size_t>(cfg.ell), 0);

  SearchState state = initialize(pair, cfg, out.converged, rng, &st);
  const Index minres_cap = cfg.minres_iteration_cap(pair.n());
  Index component_outer = 0;

  while (true) {
    const Index comp = out.converged.size();
    const RitzApproximation ritz = extract_ritz(state, pair, cfg);
    ++st.outer_total;
    ++st.outer_per_component[static_cast<std::size_t>(comp)];
    ++component_outer;

    OuterRecord rec;
    rec.component = comp;
    rec.k = state.k();
    rec.theta = ritz.theta;
    rec.alpha = ritz.alpha;
    rec.beta = ritz.beta;
    rec.r_norm = ritz.r_norm;
    rec.x_norm = ritz.x.norm();

    if (check_outer_convergence(ritz, pair, cfg.tol)) {
      rec.converged = true;
      st.trace.push_back(rec);
      if (deflate(ritz, out.converged)) {
        ++st.duplicate_warnings;
        st.warnings.push_back(
            "converged vector overlaps an earlier component (possible "
            "repeated convergence)");
      }
      if (out.converged.size() == cfg.ell) {
        st.all_converged = true;
        break;
      }
      component_outer = 0;
      if (state.k() >= 2) {
        state = purge(state, ritz.selected_index);
      } else {
        state = initialize(pair, cfg, out.converged, rng, &st);
      }
      continue;
    }

    if (component_outer >= cfg.max_outer) {
      st.trace.push_back(rec);
      st.warnings.push_back("component " + std::to_string(comp + 1) +
                            " did not converge within max_outer = " +
                            std::to_string(cfg.max_outer));
      st.all_converged = false;
      break;
    }

    const ShiftChoice choice = select_shift(ritz, pair, cfg);
    const double shift = choice == ShiftChoice::RitzValue
                             ? ritz.theta * ritz.theta
                             : cfg.tau * cfg.tau;
    const double tol_inner = cfg.inner_tol_override > 0.0
                                 ? cfg.inner_tol_override
                                 : inner_tolerance(ritz, cfg, choice);
    const MinresResult mr = solve_correction(ritz, out.converged, pair,
                                             shift, tol_inner, minres_cap);
    st.inner_total += mr.iterations;
    st.inner_per_component[static_cast<std::size_t>(comp)] += mr.iterations;
    if (mr.hit_max_iters) ++st.minres_cap_hits;
    rec.shift = choice;
    rec.inner_tol = tol_inner;
    rec.inner_iterations = mr.iterations;
    rec.inner_rel_res = mr.rel_res;
    st.trace.push_back(rec);

    if (state.k() == cfg.k_max) thick_restart(state, cfg);
    expand(state, pair, mr.t, out.converged, rng, &st);
  }
  return out;
}

}  // namespace cpfjd
