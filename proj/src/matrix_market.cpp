#include "cpfjd/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace cpfjd {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Header {
  bool coordinate = true;
  bool symmetric = false;
};

// Reads the next line that is neither blank nor a % comment.
bool next_data_line(std::istream& in, std::string& line, long& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '%') continue;
    return true;
  }
  return false;
}

Header parse_banner(std::istream& in, long& lineno) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 0);
  ++lineno;
  std::istringstream ss(line);
  std::string banner, object, format, field, symmetry;
  ss >> banner >> object >> format >> field >> symmetry;
  if (lower(banner) != "%%matrixmarket") {
    throw ParseError("missing %%MatrixMarket banner", lineno);
  }
  if (lower(object) != "matrix") {
    throw ParseError("unsupported object '" + object + "'", lineno);
  }
  Header h;
  const std::string fmt = lower(format);
  if (fmt == "coordinate") {
    h.coordinate = true;
  } else if (fmt == "array") {
    h.coordinate = false;
  } else {
    throw ParseError("unsupported format '" + format + "'", lineno);
  }
  const std::string fld = lower(field);
  if (fld != "real") {
    throw ParseError("unsupported field '" + field + "' (real only)", lineno);
  }
  const std::string sym = lower(symmetry);
  if (sym == "general") {
    h.symmetric = false;
  } else if (sym == "symmetric") {
    h.symmetric = true;
  } else {
    throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);
  }
  return h;
}

long parse_long(const std::string& tok, long lineno) {
  long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw ParseError("expected integer, got '" + tok + "'", lineno);
  }
  return v;
}

double parse_real(const std::string& tok, long lineno) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty()) {
    throw ParseError("expected real value, got '" + tok + "'", lineno);
  }
  return v;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  long lineno = 0;
  const Header h = parse_banner(in, lineno);

  std::string line;
  if (!next_data_line(in, line, lineno)) {
    throw ParseError("missing size line", lineno);
  }
  std::istringstream size_ss(line);
  std::vector<std::string> toks;
  for (std::string t; size_ss >> t;) toks.push_back(t);

  if (h.coordinate) {
    if (toks.size() != 3) {
      throw ParseError("coordinate size line needs 'rows cols nnz'", lineno);
    }
    const long rows = parse_long(toks[0], lineno);
    const long cols = parse_long(toks[1], lineno);
    const long nnz = parse_long(toks[2], lineno);
    if (rows < 0 || cols < 0 || nnz < 0) {
      throw ParseError("negative size", lineno);
    }
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(h.symmetric ? 2 * nnz : nnz));
    for (long e = 0; e < nnz; ++e) {
      if (!next_data_line(in, line, lineno)) {
        throw ParseError("unexpected end of file: expected " +
                             std::to_string(nnz) + " entries, got " +
                             std::to_string(e),
                         lineno);
      }
      std::istringstream es(line);
      std::string si, sj, sv;
      es >> si >> sj >> sv;
      if (sv.empty()) throw ParseError("entry needs 'row col value'", lineno);
      const long i = parse_long(si, lineno);
      const long j = parse_long(sj, lineno);
      const double v = parse_real(sv, lineno);
      if (i < 1 || i > rows || j < 1 || j > cols) {
        throw ParseError("index (" + std::to_string(i) + "," +
                             std::to_string(j) + ") out of range",
                         lineno);
      }
      trips.push_back({i - 1, j - 1, v});
      if (h.symmetric && i != j) trips.push_back({j - 1, i - 1, v});
    }
    return SparseMatrix::from_triplets(rows, cols, trips);
  }

  // Array format: column-major dense listing; symmetric files store the
  // lower triangle (diagonal included) by columns.
  if (toks.size() != 2) {
    throw ParseError("array size line needs 'rows cols'", lineno);
  }
  const long rows = parse_long(toks[0], lineno);
  const long cols = parse_long(toks[1], lineno);
  if (rows < 0 || cols < 0) throw ParseError("negative size", lineno);
  if (h.symmetric && rows != cols) {
    throw ParseError("symmetric array matrix must be square", lineno);
  }
  std::vector<Triplet> trips;
  for (long j = 0; j < cols; ++j) {
    for (long i = h.symmetric ? j : 0; i < rows; ++i) {
      if (!next_data_line(in, line, lineno)) {
        throw ParseError("unexpected end of file in array data", lineno);
      }
      std::istringstream es(line);
      std::string sv;
      es >> sv;
      const double v = parse_real(sv, lineno);
      if (v != 0.0) {
        trips.push_back({i, j, v});
        if (h.symmetric && i != j) trips.push_back({j, i, v});
      }
    }
  }
  return SparseMatrix::from_triplets(rows, cols, trips);
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_matrix_market(in);
}

namespace {
void put_value(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}
}  // namespace

void write_matrix_market(const SparseMatrix& m, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.non_zeros() << "\n";
  const auto offsets = m.row_offsets();
  const auto cols = m.column_indices();
  const auto vals = m.values();
  for (Index i = 0; i < m.rows(); ++i) {
    for (int k = offsets[static_cast<std::size_t>(i)];
         k < offsets[static_cast<std::size_t>(i) + 1]; ++k) {
      out << (i + 1) << " " << (cols[static_cast<std::size_t>(k)] + 1) << " ";
      put_value(out, vals[static_cast<std::size_t>(k)]);
      out << "\n";
    }
  }
}

void write_matrix_market(const SparseMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_matrix_market(m, out);
}

void write_matrix_market_array(const Matrix& m, std::ostream& out) {
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << " " << m.cols() << "\n";
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      put_value(out, m(i, j));
      out << "\n";
    }
  }
}

void write_matrix_market_array(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_matrix_market_array(m, out);
}

}  // namespace cpfjd
