// Matrix-free pencil operator A^T A - shift B^T B, its obliquely
// projected restriction, and a MINRES solver for the resulting
// symmetric indefinite correction equations.
#pragma once

#include <vector>

#include "cpfjd/sparse_core.hpp"
#include "cpfjd/types.hpp"

namespace cpfjd {

/// z -> A^T (A z) - shift * B^T (B z); the cross products are never
/// formed.
struct PencilOperator {
  const MatrixPair* pair = nullptr;
  double shift = 0.0;  // theta^2 or tau^2

  Vector apply(const Vector& z) const;
};

/// z -> (I - Yp Xp^T) M (I - Xp Yp^T) z with M the pencil operator and
/// Yp^T Xp = I (biorthogonal blocks). Symmetric as a whole since the two
/// projectors are transposes of each other. Each application uses
/// exactly one product with each of A, A^T, B, B^T.
struct ProjectedOperator {
  PencilOperator inner;
  Matrix xp;  // n x (j+1), columns [X_c, x~]; may be empty
  Matrix yp;  // n x (j+1), columns [Y_c, y~]

  Index dim() const { return inner.pair->n(); }
  Vector project_left(const Vector& v) const;   // (I - Yp Xp^T) v
  Vector project_right(const Vector& v) const;  // (I - Xp Yp^T) v
  Vector apply(const Vector& z) const;
};

Vector apply_projected(const ProjectedOperator& op, const Vector& z);

struct MinresResult {
  Vector t;
  double rel_res = 0.0;  // true residual recomputed from scratch at exit
  Index iterations = 0;
  bool converged = false;
  bool breakdown = false;      // Lanczos beta underflow; treated as converged
  bool hit_max_iters = false;
  std::vector<double> residual_history;  // per-iteration estimates
};

/// MINRES with zero initial guess. The right-hand side is passed through
/// (I - Yp Xp^T) once at entry; the returned solution is passed through
/// (I - Xp Yp^T) so t is orthogonal to span(Yp) on every exit path.
MinresResult minres_solve(const ProjectedOperator& op, const Vector& rhs,
                          double rel_tol, Index max_iters);

}  // namespace cpfjd
