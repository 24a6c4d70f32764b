// Sparse CSR storage, matrix-vector products, and the structured test
// operators B0 (tridiagonal Toeplitz), B1 (first difference) and B2
// (second difference).
#pragma once

#include <Eigen/SparseCore>

#include <span>
#include <vector>

#include "cpfjd/types.hpp"

namespace cpfjd {

struct Triplet {
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

/// Immutable real sparse matrix in canonical compressed row storage:
/// row offsets nondecreasing, column indices strictly increasing within
/// each row, duplicates summed at construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Builds from (possibly unsorted, possibly duplicated) triplets.
  /// Duplicate entries are summed; explicit zeros are kept.
  static SparseMatrix from_triplets(Index rows, Index cols,
                                    std::span<const Triplet> entries);
  static SparseMatrix zero(Index rows, Index cols);
  static SparseMatrix identity(Index n);

  Index rows() const { return mat_.rows(); }
  Index cols() const { return mat_.cols(); }
  Index non_zeros() const { return mat_.nonZeros(); }

  std::span<const int> row_offsets() const {
    return {mat_.outerIndexPtr(), static_cast<std::size_t>(rows() + 1)};
  }
  std::span<const int> column_indices() const {
    return {mat_.innerIndexPtr(), static_cast<std::size_t>(non_zeros())};
  }
  std::span<const double> values() const {
    return {mat_.valuePtr(), static_cast<std::size_t>(non_zeros())};
  }

  const Eigen::SparseMatrix<double, Eigen::RowMajor>& eigen() const {
    return mat_;
  }

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> mat_;
};

/// y = M x.
Vector spmv(const SparseMatrix& m, const Vector& x);

/// x = M^T y without materializing the transpose.
Vector spmv_transpose(const SparseMatrix& m, const Vector& y);

/// Maximum absolute column sum.
double one_norm(const SparseMatrix& m);

/// Materialized transpose (used by the CLI's --transpose-a).
SparseMatrix transpose(const SparseMatrix& m);

Matrix to_dense(const SparseMatrix& m);

/// n x n tridiagonal Toeplitz matrix, 3 on the diagonal, 1 off it.
SparseMatrix gen_b0(Index n);

/// (n-1) x n first-difference operator with stencil rows (1, -1).
SparseMatrix gen_b1(Index n);

/// n x (n+2) second-difference operator with stencil rows (-1, 2, -1).
SparseMatrix gen_b2(Index n);

/// The problem instance: (A, B) with a.cols == b.cols, plus the matrix
/// 1-norms cached once at construction for the residual thresholds.
struct MatrixPair {
  MatrixPair(SparseMatrix a_in, SparseMatrix b_in);

  SparseMatrix a;
  SparseMatrix b;
  double norm1_a = 0.0;
  double norm1_b = 0.0;

  Index m() const { return a.rows(); }
  Index p() const { return b.rows(); }
  Index n() const { return a.cols(); }
};

}  // namespace cpfjd
