#include "cpfjd/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpfjd/dense_kernels.hpp"

namespace cpfjd {

namespace {
constexpr double kTrivialTol = 1e-12;
}

std::vector<Index> FullGsvd::nontrivial_indices() const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i) {
    if (!trivial[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

FullGsvd dense_full_gsvd(const MatrixPair& pair) {
  const Index m = pair.m();
  const Index p = pair.p();
  const Index n = pair.n();
  if (n > 600) {
    throw InputError("dense_full_gsvd: desk-scale guard, n must be <= 600");
  }
  if (m + p < n) {
    throw NumericalError(
        "dense_full_gsvd: stacked matrix cannot have full column rank");
  }

  Matrix stacked(m + p, n);
  stacked.topRows(m) = to_dense(pair.a);
  stacked.bottomRows(p) = to_dense(pair.b);
  const ThinQr qr = thin_qr(stacked);

  const Eigen::BDCSVD<Matrix> rsvd(qr.r);
  const Vector rsv = rsvd.singularValues();
  if (rsv[0] == 0.0 || rsv[n - 1] < 1e-13 * rsv[0]) {
    throw NumericalError(
        "dense_full_gsvd: regularity violation, [A; B] is rank deficient");
  }

  const Matrix q1 = qr.q.topRows(m);
  const Matrix q2 = qr.q.bottomRows(p);

  FullGsvd out;
  Matrix w;
  if (m >= n) {
    const JacobiSvdResult cs = jacobi_svd(q1);
    out.alphas = cs.s;
    out.u_full = cs.u;
    w = cs.v;
  } else {
    // Wide top block: factor its transpose and pad the spectrum with
    // the n - m exact zeros whose right vectors complete the basis.
    const JacobiSvdResult cs = jacobi_svd(q1.transpose());
    w = complete_orthonormal_basis(cs.u, n);
    out.alphas = Vector::Zero(n);
    out.alphas.head(m) = cs.s;
    out.u_full = Matrix::Zero(m, n);
    out.u_full.leftCols(m) = cs.v;
  }

  out.alphas = out.alphas.cwiseMin(1.0);
  out.betas.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double a = out.alphas[i];
    out.betas[i] = std::sqrt(std::max(0.0, (1.0 - a) * (1.0 + a)));
  }

  const Matrix q2w = q2 * w;
  out.v_full = Matrix::Zero(p, n);
  out.trivial.assign(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    if (out.betas[i] > kTrivialTol) {
      out.v_full.col(i) = q2w.col(i) / out.betas[i];
    }
    out.trivial[static_cast<std::size_t>(i)] =
        out.alphas[i] < kTrivialTol || out.betas[i] < kTrivialTol;
  }

  out.x_full = qr.r.triangularView<Eigen::Upper>().solve(w);
  out.norm_x = 1.0 / rsv[n - 1];  // ||X|| = ||R^{-1}|| = ||[A; B]^+||
  return out;
}

BoundReport sigma_error_bound(double theta, double r_norm,
                              double x_tilde_norm, const FullGsvd& oracle) {
  BoundReport report;
  const std::vector<Index> nontrivial = oracle.nontrivial_indices();
  if (nontrivial.empty()) return report;

  const double sigma_max = oracle.sigma(nontrivial.front());
  const double sigma_min = oracle.sigma(nontrivial.back());
  const double upper = std::sqrt(1.0 + 2.0 * sigma_max * sigma_max);
  const double lower = sigma_min / std::sqrt(2.0 + sigma_min * sigma_min);

  report.rhs = oracle.norm_x * oracle.norm_x * r_norm / x_tilde_norm;
  if (theta >= upper) {
    report.which = BoundCase::AboveSpectrum;
    report.lhs = 1.0 / theta;
  } else if (theta <= lower) {
    report.which = BoundCase::BelowSpectrum;
    report.lhs = theta;
  } else {
    report.which = BoundCase::Interior;
    double lhs = std::numeric_limits<double>::infinity();
    for (Index i : nontrivial) {
      const double sigma = oracle.sigma(i);
      lhs = std::min(lhs, std::abs(sigma * sigma - theta * theta) /
                              ((1.0 + sigma * sigma) * theta));
    }
    report.lhs = lhs;
  }
  return report;
}

std::vector<Index> closest_to_target(const FullGsvd& oracle, double tau,
                                     Index ell) {
  std::vector<Index> idx = oracle.nontrivial_indices();
  if (ell > static_cast<Index>(idx.size())) {
    throw InputError("closest_to_target: ell exceeds the nontrivial count");
  }
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    const double da = std::abs(oracle.sigma(a) - tau);
    const double db = std::abs(oracle.sigma(b) - tau);
    if (da != db) return da < db;
    return oracle.sigma(a) < oracle.sigma(b);
  });
  idx.resize(static_cast<std::size_t>(ell));
  return idx;
}

}  // namespace cpfjd
