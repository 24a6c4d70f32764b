// Thick-restart Jacobi-Davidson driver for the partial GSVD of a sparse
// regular pair (A, B): Galerkin extraction from projected pairs built by
// incremental thin QR of A*X and B*X, inexact correction-equation solves
// by projected MINRES, target/Ritz shift switching, thick restart, and
// deflation of converged components. Cross products A^T A and B^T B are
// never formed.
#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "cpfjd/dense_kernels.hpp"
#include "cpfjd/minres.hpp"
#include "cpfjd/sparse_core.hpp"
#include "cpfjd/types.hpp"

namespace cpfjd {

enum class StartVector { Ones, Mod4, Custom };

struct SolverConfig {
  double tau = 0.0;    // target generalized singular value, > 0
  Index ell = 1;       // number of GSVD components wanted
  double tol = 1e-10;  // outer residual tolerance
  Index k_min = 3;
  Index k_max = 30;
  double fixtol = 1e-4;     // 0: always tau-equation; +inf: always theta
  double eps_tilde = 1e-3;  // expansion-vector accuracy
  Index max_outer = 500;    // per component
  Index minres_max_iters = 0;       // 0: min(2n, 10000)
  double inner_tol_override = 0.0;  // > 0: fixed inner tolerance
  std::uint64_t seed = 0;
  StartVector x0_kind = StartVector::Ones;
  Vector x0_custom;

  void validate(Index n) const;
  Vector start_vector(Index n) const;  // unit length
  Index minres_iteration_cap(Index n) const;
};

/// Right searching subspace basis X and the thin QR factors of A X and
/// B X. The Q factors are the left searching bases, the R factors form
/// the projected pair (G, H).
struct SearchState {
  Matrix x_basis;     // n x k, orthonormal
  ThinQr a_factors;   // q: m x k = U, r: k x k = G
  ThinQr b_factors;   // q: p x k = V, r: k x k = H

  Index k() const { return x_basis.cols(); }
  const Matrix& u_basis() const { return a_factors.q; }
  const Matrix& v_basis() const { return b_factors.q; }
  const Matrix& g() const { return a_factors.r; }
  const Matrix& h() const { return b_factors.r; }
};

/// Extracted approximation (alpha, beta, u, v, x) with theta =
/// alpha/beta (+inf when beta = 0), residual r = beta A^T u - alpha
/// B^T v, and y = alpha A^T u + beta B^T v (so y^T x = 1).
struct RitzApproximation {
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  Vector u, v, x, y, r;
  double r_norm = 0.0;
  Index selected_index = 0;              // column of the projected GSVD
  std::vector<double> thetas_by_distance;  // all k values, selected first

  bool theta_is_finite() const { return std::isfinite(theta); }
};

/// Deflation set of converged components.
struct ConvergedSet {
  Vector c, s;              // diagonal entries, length j
  Matrix u_c, v_c, x_c, y_c;

  Index size() const { return c.size(); }
  static ConvergedSet empty(Index m, Index p, Index n);
};

enum class ShiftChoice { FixedTarget, RitzValue };

struct OuterRecord {
  Index component = 0;  // converged count at the time of extraction
  Index k = 0;
  double theta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double r_norm = 0.0;
  double x_norm = 0.0;
  bool converged = false;
  ShiftChoice shift = ShiftChoice::FixedTarget;
  double inner_tol = 0.0;
  Index inner_iterations = 0;
  double inner_rel_res = 0.0;
};

struct RunStats {
  Index outer_total = 0;
  Index inner_total = 0;
  std::vector<Index> outer_per_component;
  std::vector<Index> inner_per_component;
  std::vector<OuterRecord> trace;
  Index fallback_expansions = 0;
  Index duplicate_warnings = 0;
  Index degenerate_columns = 0;  // zero diagonals accepted in G or H
  Index minres_cap_hits = 0;
  bool all_converged = false;
  std::string inner_tol_rule = "min(2*c_tau*eps_tilde, 0.01)";
  std::vector<std::string> warnings;
};

struct RunResult {
  ConvergedSet converged;
  RunStats stats;
};

/// One-dimensional state from the configured start vector, orthogonal
/// to span(Y_c) when a deflation set is active. Throws NumericalError
/// if A x0 and B x0 both vanish (regularity violation).
SearchState initialize(const MatrixPair& pair, const SolverConfig& cfg,
                       const ConvergedSet& conv, std::mt19937_64& rng,
                       RunStats* stats = nullptr);

/// GSVD of (G, H); selects the component closest to tau (infinite
/// values never selected, ties to the smaller theta) and assembles the
/// Ritz vectors, residual, and y.
RitzApproximation extract_ritz(const SearchState& state,
                               const MatrixPair& pair,
                               const SolverConfig& cfg);

/// ||r|| <= (beta ||A||_1 + alpha ||B||_1) * tol, non-strict.
bool check_outer_convergence(const RitzApproximation& ritz,
                             const MatrixPair& pair, double tol);

/// Ritz shift once the fixtol inequality holds and theta is finite;
/// fixtol = 0 never switches, fixtol = +inf always does.
ShiftChoice select_shift(const RitzApproximation& ritz,
                         const MatrixPair& pair, const SolverConfig& cfg);

/// Inner stopping tolerance: 2 eps_tilde for the Ritz-shift equation;
/// min(2 c_tau eps_tilde, 0.01) for the fixed-target equation, with
/// c_tau built from the projected spectrum.
double inner_tolerance(const RitzApproximation& ritz,
                       const SolverConfig& cfg, ShiftChoice choice);

/// Solves the obliquely projected correction equation with right-hand
/// side -(I - Y_c X_c^T) r by MINRES; the result satisfies t ⊥ [Y_c, y].
MinresResult solve_correction(const RitzApproximation& ritz,
                              const ConvergedSet& conv,
                              const MatrixPair& pair, double shift,
                              double tol_inner, Index max_iters);

/// Orthonormalizes t against X and grows all factorizations by one
/// column. Falls back to a seeded random direction orthogonal to X and
/// Y_c when t lies in span(X); returns true when the fallback ran.
bool expand(SearchState& state, const MatrixPair& pair, const Vector& t,
            const ConvergedSet& conv, std::mt19937_64& rng,
            RunStats* stats = nullptr);

/// Compresses the subspaces to the k_min Ritz directions closest to tau.
void thick_restart(SearchState& state, const SolverConfig& cfg);

/// Appends the converged component; returns true when the new x has a
/// suspicious overlap with span(Y_c) (repeated convergence).
bool deflate(const RitzApproximation& ritz, ConvergedSet& conv);

/// Removes the converged direction (column `converged_index` of the
/// projected GSVD) from the subspaces; the result is orthogonal to the
/// converged y. k must be at least 2.
SearchState purge(const SearchState& state, Index converged_index);

/// Full driver. Returns a partial set with all_converged = false when a
/// component exhausts max_outer; never a silent success.
RunResult run(const MatrixPair& pair, const SolverConfig& cfg);

}  // namespace cpfjd
