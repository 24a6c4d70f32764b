// Desk-scale dense ground truth: the full GSVD of (A, B) through the
// same CS-decomposition route as the small projected kernel, the
// residual-based generalized-singular-value error bound, and
// target-ordered component selection. Test-only by design; guarded to
// n <= 600.
#pragma once

#include <vector>

#include "cpfjd/sparse_core.hpp"
#include "cpfjd/types.hpp"

namespace cpfjd {

/// Exact GSVD of a densified pair, all n columns including the trivial
/// zero/infinite components. Columns are ordered by descending sigma.
struct FullGsvd {
  Vector alphas;          // length n, nonincreasing
  Vector betas;           // length n
  Matrix u_full;          // m x n (zero columns where alpha = 0)
  Matrix v_full;          // p x n (zero columns where beta  = 0)
  Matrix x_full;          // n x n right vectors
  double norm_x = 0.0;    // ||X||_2 = ||[A; B]^+||_2
  std::vector<bool> trivial;  // alpha < 1e-12 or beta < 1e-12

  Index size() const { return alphas.size(); }
  double sigma(Index i) const {
    return betas[i] == 0.0 ? std::numeric_limits<double>::infinity()
                           : alphas[i] / betas[i];
  }
  std::vector<Index> nontrivial_indices() const;
};

/// Throws InputError beyond the desk-scale guard (n > 600) and
/// NumericalError when the stacked matrix is rank deficient.
FullGsvd dense_full_gsvd(const MatrixPair& pair);

enum class BoundCase { Interior, AboveSpectrum, BelowSpectrum, NotApplicable };

/// Residual bound report for an approximate value theta: the interior
/// case asserts a nontrivial sigma with
/// |sigma^2 - theta^2| / ((1 + sigma^2) theta) <= ||X||^2 ||r|| / ||x~||;
/// theta beyond the spectrum bounds 1/theta (above) or theta (below).
struct BoundReport {
  BoundCase which = BoundCase::NotApplicable;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied(double slack) const {
    return which == BoundCase::NotApplicable || lhs <= rhs + slack;
  }
};

BoundReport sigma_error_bound(double theta, double r_norm,
                              double x_tilde_norm, const FullGsvd& oracle);

/// Indices of the ell nontrivial values ordered by |sigma - tau|, ties
/// to the smaller sigma.
std::vector<Index> closest_to_target(const FullGsvd& oracle, double tau,
                                     Index ell);

}  // namespace cpfjd
