// Shared test utilities: deterministic random instances and independent
// brute-force oracles (dense triple-loop products, cyclic symmetric
// Jacobi eigensolver). These stay independent of the library kernels
// they are used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cpfjd/sparse_core.hpp"
#include "cpfjd/types.hpp"

namespace cpfjd::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

inline Matrix random_dense(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  }
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

// Sparse matrix with roughly `per_row` nonzeros per row plus a wrapped
// diagonal so that rows and columns are never empty.
inline SparseMatrix random_sparse(std::mt19937_64& rng, Index rows,
                                  Index cols, Index per_row = 4) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<Index> pick(0, cols - 1);
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(rows * per_row + cols));
  for (Index j = 0; j < cols; ++j) {
    trips.push_back({j % rows, j, gauss(rng)});
  }
  for (Index i = 0; i < rows; ++i) {
    trips.push_back({i, i % cols, gauss(rng)});
    for (Index k = 0; k < per_row; ++k) {
      trips.push_back({i, pick(rng), gauss(rng)});
    }
  }
  return SparseMatrix::from_triplets(rows, cols, trips);
}

// Dense product by explicit loops; the reference for spmv.
inline Vector dense_product(const Matrix& m, const Vector& x) {
  Vector y = Vector::Zero(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) y[i] += m(i, j) * x[j];
  }
  return y;
}

inline Vector dense_transpose_product(const Matrix& m, const Vector& y) {
  Vector x = Vector::Zero(m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) x[j] += m(i, j) * y[i];
  }
  return x;
}

// Eigenvalues of a symmetric matrix by the cyclic Jacobi rotation
// method; returned in decreasing order.
inline Vector jacobi_eigenvalues(Matrix a) {
  const Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (std::sqrt(off) <= 1e-15 * std::max(1.0, a.norm())) break;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double zeta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vector ev = a.diagonal();
  std::sort(ev.data(), ev.data() + n, std::greater<double>());
  return ev;
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double orthonormality_error(const Matrix& q) {
  return max_abs(q.transpose() * q - Matrix::Identity(q.cols(), q.cols()));
}

}  // namespace cpfjd::testing
