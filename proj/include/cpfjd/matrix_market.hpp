// Matrix Market exchange format: coordinate and array variants, real
// field, general or symmetric. Indices are 1-based on disk, 0-based in
// memory; symmetric storage is expanded to full on read.
#pragma once

#include <iosfwd>
#include <string>

#include "cpfjd/sparse_core.hpp"

namespace cpfjd {

SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::string& path);

/// Writes coordinate/real/general with enough digits to round-trip
/// every entry exactly.
void write_matrix_market(const SparseMatrix& m, std::ostream& out);
void write_matrix_market(const SparseMatrix& m, const std::string& path);

/// Dense column-major "array" variant, used for vector output.
void write_matrix_market_array(const Matrix& m, std::ostream& out);
void write_matrix_market_array(const Matrix& m, const std::string& path);

}  // namespace cpfjd
