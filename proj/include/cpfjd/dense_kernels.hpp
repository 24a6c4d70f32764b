// Dense factorizations on small matrices: incremental thin QR with
// twice-reorthogonalized classical Gram-Schmidt, a one-sided Jacobi SVD,
// and the CS-decomposition GSVD of a projected pair (G, H). The GSVD
// route never forms G^T G or H^T H.
#pragma once

#include "cpfjd/types.hpp"

namespace cpfjd {

/// Thin QR factorization grown one column at a time. Q has orthonormal
/// columns, R is upper triangular with nonnegative diagonal.
struct ThinQr {
  Matrix q;  // m x k
  Matrix r;  // k x k

  Index rows() const { return q.rows(); }
  Index size() const { return q.cols(); }

  static ThinQr empty(Index rows) {
    return {Matrix(rows, 0), Matrix(0, 0)};
  }
};

struct QrAppendOutcome {
  bool rank_deficient = false;  // gamma fell below 1e-13 * ||new_col||
  double gamma = 0.0;           // the new R diagonal entry as stored
};

/// Appends one column using classical Gram-Schmidt performed twice.
/// On rank deficiency the new R diagonal is set to 0 and the new Q
/// column is a unit vector completing the orthonormal basis, which
/// keeps Q R equal to the appended product.
QrAppendOutcome qr_append_column(ThinQr& qr, const Vector& new_col);

struct JacobiSvdResult {
  Matrix u;  // rows x cols, orthonormal columns
  Vector s;  // nonincreasing, nonnegative
  Matrix v;  // cols x cols, orthogonal
};

/// One-sided Jacobi SVD, m = U diag(s) V^T, rows >= cols. Sweeps run
/// until every pairwise rotation is below 1e-15.
JacobiSvdResult jacobi_svd(const Matrix& m);

/// GSVD of a k x k pair via the CS decomposition of the stacked thin-QR
/// Q factor. sigma_g[i]^2 + sigma_h[i]^2 = 1 holds exactly in the stored
/// representation; components are ordered by nonincreasing
/// theta = sigma_g/sigma_h (infinite first).
struct DenseGsvd {
  Vector sigma_g;  // alpha of the small pair
  Vector sigma_h;  // beta of the small pair
  Matrix e;        // k x k orthogonal left vectors of G
  Matrix f;        // k x k orthogonal left vectors of H
  Matrix d;        // k x k right vectors, (G^T G + H^T H)-orthonormal

  Index size() const { return sigma_g.size(); }
  double theta(Index i) const {
    return sigma_h[i] == 0.0 ? std::numeric_limits<double>::infinity()
                             : sigma_g[i] / sigma_h[i];
  }
};

/// Throws NumericalError when the stacked [G; H] is numerically rank
/// deficient (smallest singular value below 1e-13 of the largest).
DenseGsvd dense_gsvd(const Matrix& g, const Matrix& h);

/// Thin Householder QR with the R diagonal made nonnegative. Requires
/// rows >= cols.
ThinQr thin_qr(const Matrix& m);

/// Orthonormal basis of the column span (thin Householder QR); columns
/// whose projection is negligible are dropped.
Matrix orthonormal_columns(const Matrix& m);

/// Appends unit columns orthogonal to the existing ones until q has
/// `target` columns. Deterministic (coordinate-vector sweeps).
Matrix complete_orthonormal_basis(const Matrix& q, Index target);

}  // namespace cpfjd
