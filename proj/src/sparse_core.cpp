#include "cpfjd/sparse_core.hpp"

#include <Eigen/SparseCore>

#include <string>

namespace cpfjd {

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols,
                                         std::span<const Triplet> entries) {
  if (rows < 0 || cols < 0) {
    throw InputError("sparse matrix dimensions must be nonnegative");
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(entries.size());
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw InputError("triplet index (" + std::to_string(t.row) + "," +
                       std::to_string(t.col) + ") outside " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
    trips.emplace_back(static_cast<int>(t.row), static_cast<int>(t.col),
                       t.value);
  }
  SparseMatrix out;
  out.mat_.resize(rows, cols);
  // setFromTriplets sums duplicates and leaves each row sorted: exactly
  // the canonical form required here.
  out.mat_.setFromTriplets(trips.begin(), trips.end());
  out.mat_.makeCompressed();
  return out;
}

SparseMatrix SparseMatrix::zero(Index rows, Index cols) {
  return from_triplets(rows, cols, {});
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<Triplet> trips(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) trips[static_cast<std::size_t>(i)] = {i, i, 1.0};
  return from_triplets(n, n, trips);
}

Vector spmv(const SparseMatrix& m, const Vector& x) {
  if (x.size() != m.cols()) {
    throw InputError("spmv: vector length " + std::to_string(x.size()) +
                     " != cols " + std::to_string(m.cols()));
  }
  return m.eigen() * x;
}

Vector spmv_transpose(const SparseMatrix& m, const Vector& y) {
  if (y.size() != m.rows()) {
    throw InputError("spmv_transpose: vector length " +
                     std::to_string(y.size()) + " != rows " +
                     std::to_string(m.rows()));
  }
  return m.eigen().transpose() * y;
}

double one_norm(const SparseMatrix& m) {
  Vector colsum = Vector::Zero(m.cols());
  const auto offsets = m.row_offsets();
  const auto cols = m.column_indices();
  const auto vals = m.values();
  for (Index i = 0; i < m.rows(); ++i) {
    for (int k = offsets[static_cast<std::size_t>(i)];
         k < offsets[static_cast<std::size_t>(i) + 1]; ++k) {
      colsum[cols[static_cast<std::size_t>(k)]] +=
          std::abs(vals[static_cast<std::size_t>(k)]);
    }
  }
  return m.cols() == 0 ? 0.0 : colsum.maxCoeff();
}

SparseMatrix transpose(const SparseMatrix& m) {
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(m.non_zeros()));
  const auto offsets = m.row_offsets();
  const auto cols = m.column_indices();
  const auto vals = m.values();
  for (Index i = 0; i < m.rows(); ++i) {
    for (int k = offsets[static_cast<std::size_t>(i)];
         k < offsets[static_cast<std::size_t>(i) + 1]; ++k) {
      trips.push_back({cols[static_cast<std::size_t>(k)], i,
                       vals[static_cast<std::size_t>(k)]});
    }
  }
  return SparseMatrix::from_triplets(m.cols(), m.rows(), trips);
}

Matrix to_dense(const SparseMatrix& m) { return Matrix(m.eigen()); }

SparseMatrix gen_b0(Index n) {
  if (n < 1) throw InputError("gen_b0: n must be >= 1");
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(3 * n));
  for (Index i = 0; i < n; ++i) {
    if (i > 0) trips.push_back({i, i - 1, 1.0});
    trips.push_back({i, i, 3.0});
    if (i + 1 < n) trips.push_back({i, i + 1, 1.0});
  }
  return SparseMatrix::from_triplets(n, n, trips);
}

SparseMatrix gen_b1(Index n) {
  if (n < 2) throw InputError("gen_b1: n must be >= 2");
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(2 * (n - 1)));
  for (Index i = 0; i + 1 < n; ++i) {
    trips.push_back({i, i, 1.0});
    trips.push_back({i, i + 1, -1.0});
  }
  return SparseMatrix::from_triplets(n - 1, n, trips);
}

SparseMatrix gen_b2(Index n) {
  if (n < 1) throw InputError("gen_b2: n must be >= 1");
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(3 * n));
  for (Index i = 0; i < n; ++i) {
    trips.push_back({i, i, -1.0});
    trips.push_back({i, i + 1, 2.0});
    trips.push_back({i, i + 2, -1.0});
  }
  return SparseMatrix::from_triplets(n, n + 2, trips);
}

MatrixPair::MatrixPair(SparseMatrix a_in, SparseMatrix b_in)
    : a(std::move(a_in)), b(std::move(b_in)) {
  if (a.cols() != b.cols()) {
    throw InputError("matrix pair: a.cols " + std::to_string(a.cols()) +
                     " != b.cols " + std::to_string(b.cols()));
  }
  if (a.rows() < 1 || b.rows() < 1 || a.cols() < 1) {
    throw InputError("matrix pair: dimensions must be at least 1");
  }
  norm1_a = one_norm(a);
  norm1_b = one_norm(b);
}

}  // namespace cpfjd
