#include "cpfjd/dense_kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace cpfjd {

namespace {

constexpr double kRankTol = 1e-13;

// One unit vector orthogonal to the columns of q, built from coordinate
// vectors; q must have fewer columns than rows.
Vector orthogonal_filler(const Matrix& q) {
  const Index m = q.rows();
  Vector best;
  double best_norm = -1.0;
  for (Index i = 0; i < m; ++i) {
    Vector w = Vector::Unit(m, i);
    if (q.cols() > 0) {
      w -= q * (q.transpose() * w);
      w -= q * (q.transpose() * w);
    }
    const double norm = w.norm();
    if (norm > 0.5) return w / norm;
    if (norm > best_norm) {
      best_norm = norm;
      best = w;
    }
  }
  if (best_norm <= 0.0) {
    throw NumericalError("cannot complete orthonormal basis");
  }
  return best / best_norm;
}

}  // namespace

Matrix complete_orthonormal_basis(const Matrix& q, Index target) {
  if (target > q.rows()) {
    throw InputError("complete_orthonormal_basis: target exceeds dimension");
  }
  Matrix out(q.rows(), target);
  out.leftCols(q.cols()) = q;
  for (Index k = q.cols(); k < target; ++k) {
    out.col(k) = orthogonal_filler(out.leftCols(k));
  }
  return out;
}

ThinQr thin_qr(const Matrix& m) {
  if (m.rows() < m.cols()) throw InputError("thin_qr: requires rows >= cols");
  const Index k = m.cols();
  Eigen::HouseholderQR<Matrix> qr(m);
  ThinQr out;
  out.q = qr.householderQ() * Matrix::Identity(m.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Index i = 0; i < k; ++i) {
    if (out.r(i, i) < 0.0) {
      out.r.row(i) = -out.r.row(i);
      out.q.col(i) = -out.q.col(i);
    }
  }
  return out;
}

Matrix orthonormal_columns(const Matrix& m) {
  if (m.cols() == 0) return Matrix(m.rows(), 0);
  Eigen::HouseholderQR<Matrix> qr(m);
  const Index k = std::min(m.rows(), m.cols());
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double scale = r.diagonal().cwiseAbs().maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < k; ++i) {
    if (std::abs(r(i, i)) > kRankTol * scale) keep.push_back(i);
  }
  Matrix out(m.rows(), static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Index>(i)) = q.col(keep[i]);
  return out;
}

QrAppendOutcome qr_append_column(ThinQr& qr, const Vector& new_col) {
  if (new_col.size() != qr.rows()) {
    throw InputError("qr_append_column: column length mismatch");
  }
  const Index k = qr.size();
  const double col_norm = new_col.norm();

  Vector g = Vector::Zero(k);
  Vector w = new_col;
  for (int pass = 0; pass < 2 && k > 0; ++pass) {
    const Vector proj = qr.q.transpose() * w;
    w -= qr.q * proj;
    g += proj;
  }
  double gamma = w.norm();

  QrAppendOutcome outcome;
  outcome.rank_deficient = gamma <= kRankTol * col_norm;

  qr.q.conservativeResize(Eigen::NoChange, k + 1);
  Matrix r_new = Matrix::Zero(k + 1, k + 1);
  r_new.topLeftCorner(k, k) = qr.r;
  r_new.col(k).head(k) = g;

  if (outcome.rank_deficient) {
    // The appended column already lies in span(Q): any unit vector
    // orthogonal to Q keeps Q R equal to the appended product with a
    // zero diagonal entry.
    qr.q.col(k) = orthogonal_filler(qr.q.leftCols(k));
    gamma = 0.0;
  } else {
    qr.q.col(k) = w / gamma;
  }
  r_new(k, k) = gamma;
  qr.r = std::move(r_new);
  outcome.gamma = gamma;
  return outcome;
}

JacobiSvdResult jacobi_svd(const Matrix& m) {
  const Index rows = m.rows();
  const Index cols = m.cols();
  if (rows < cols) {
    throw InputError("jacobi_svd: requires rows >= cols");
  }

  Matrix w = m;
  Matrix v = Matrix::Identity(cols, cols);
  constexpr double kSweepTol = 1e-15;
  constexpr int kMaxSweeps = 60;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Index i = 0; i + 1 < cols; ++i) {
      for (Index j = i + 1; j < cols; ++j) {
        const double aii = w.col(i).squaredNorm();
        const double ajj = w.col(j).squaredNorm();
        const double aij = w.col(i).dot(w.col(j));
        const double scale = std::sqrt(aii * ajj);
        if (scale == 0.0 || std::abs(aij) <= kSweepTol * scale) continue;
        rotated = true;
        const double zeta = (ajj - aii) / (2.0 * aij);
        const double t =
            (zeta >= 0.0 ? 1.0 : -1.0) /
            (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index row = 0; row < rows; ++row) {
          const double wi = w(row, i);
          const double wj = w(row, j);
          w(row, i) = c * wi - s * wj;
          w(row, j) = s * wi + c * wj;
        }
        for (Index row = 0; row < cols; ++row) {
          const double vi = v(row, i);
          const double vj = v(row, j);
          v(row, i) = c * vi - s * vj;
          v(row, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }

  Vector norms(cols);
  for (Index i = 0; i < cols; ++i) norms[i] = w.col(i).norm();
  std::vector<Index> order(static_cast<std::size_t>(cols));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return norms[a] > norms[b]; });

  JacobiSvdResult out;
  out.u.resize(rows, cols);
  out.s.resize(cols);
  out.v.resize(cols, cols);
  std::vector<Index> zero_cols;
  for (Index i = 0; i < cols; ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    out.s[i] = norms[src];
    out.v.col(i) = v.col(src);
    if (norms[src] > 0.0) {
      out.u.col(i) = w.col(src) / norms[src];
    } else {
      out.u.col(i).setZero();
      zero_cols.push_back(i);
    }
  }
  for (Index i : zero_cols) {
    out.u.col(i) = orthogonal_filler(out.u);
  }
  return out;
}

DenseGsvd dense_gsvd(const Matrix& g, const Matrix& h) {
  if (g.rows() != g.cols() || h.rows() != h.cols() || g.rows() != h.rows()) {
    throw InputError("dense_gsvd: G and H must be square and of equal size");
  }
  const Index k = g.cols();
  DenseGsvd out;
  if (k == 0) {
    out.sigma_g.resize(0);
    out.sigma_h.resize(0);
    out.e.resize(0, 0);
    out.f.resize(0, 0);
    out.d.resize(0, 0);
    return out;
  }

  Matrix stacked(2 * k, k);
  stacked.topRows(k) = g;
  stacked.bottomRows(k) = h;

  const ThinQr qr = thin_qr(stacked);
  const Matrix& q = qr.q;
  const Matrix& r = qr.r;

  const JacobiSvdResult rsvd = jacobi_svd(r);
  if (rsvd.s[0] == 0.0 || rsvd.s[k - 1] < kRankTol * rsvd.s[0]) {
    throw NumericalError("dense_gsvd: stacked [G; H] is rank deficient");
  }

  const JacobiSvdResult cs = jacobi_svd(q.topRows(k));
  out.sigma_g = cs.s.cwiseMin(1.0);
  out.sigma_h.resize(k);
  for (Index i = 0; i < k; ++i) {
    const double sg = out.sigma_g[i];
    out.sigma_h[i] = std::sqrt(std::max(0.0, (1.0 - sg) * (1.0 + sg)));
  }
  out.e = cs.u;

  const Matrix q2w = q.bottomRows(k) * cs.v;
  out.f.resize(k, k);
  std::vector<Index> degenerate;
  Matrix fixed(k, 0);
  for (Index i = 0; i < k; ++i) {
    if (out.sigma_h[i] > 1e-14) {
      out.f.col(i) = q2w.col(i) / out.sigma_h[i];
      fixed.conservativeResize(Eigen::NoChange, fixed.cols() + 1);
      fixed.col(fixed.cols() - 1) = out.f.col(i);
    } else {
      degenerate.push_back(i);
    }
  }
  for (Index i : degenerate) {
    out.f.col(i) = orthogonal_filler(fixed);
    fixed.conservativeResize(Eigen::NoChange, fixed.cols() + 1);
    fixed.col(fixed.cols() - 1) = out.f.col(i);
  }

  // The normalized columns of Q2 W lose orthogonality like
  // eps / (sigma_h[i] sigma_h[j]); polish with modified Gram-Schmidt
  // anchored on the best-conditioned (largest sigma_h) columns.
  std::vector<Index> polish(static_cast<std::size_t>(k));
  std::iota(polish.begin(), polish.end(), Index{0});
  std::stable_sort(polish.begin(), polish.end(), [&](Index a, Index b) {
    return out.sigma_h[a] > out.sigma_h[b];
  });
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < polish.size(); ++i) {
      auto fi = out.f.col(polish[i]);
      for (std::size_t j = 0; j < i; ++j) {
        const auto fj = out.f.col(polish[j]);
        fi -= fj.dot(fi) * fj;
      }
      fi /= fi.norm();
    }
  }

  out.d = r.triangularView<Eigen::Upper>().solve(cs.v);
  return out;
}

}  // namespace cpfjd
