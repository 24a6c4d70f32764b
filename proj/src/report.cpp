#include "cpfjd/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace cpfjd {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Returns false at end of stream; skips blank lines.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("report: " + what, lineno_);
  }
  long lineno() const { return lineno_; }

 private:
  std::istream& in_;
  long lineno_ = 0;
};

// "key rest-of-line"; rest may be empty.
std::pair<std::string, std::string> split_key(const std::string& line) {
  const std::size_t sp = line.find(' ');
  if (sp == std::string::npos) return {line, ""};
  return {line.substr(0, sp), line.substr(sp + 1)};
}

double to_double(const std::string& s, const LineReader& r) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("report: bad real '" + s + "'", r.lineno());
  }
}

long long to_int(const std::string& s, const LineReader& r) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("report: bad integer '" + s + "'", r.lineno());
  }
}

}  // namespace

void emit_report(const RunReport& rep, std::ostream& out) {
  out << "cpfjd-report 1\n";
  out << "status " << (rep.all_converged ? "converged" : "partial") << "\n";
  out << "matrix_a " << rep.matrix_a << "\n";
  out << "matrix_b " << rep.matrix_b << "\n";
  out << "transpose_a " << (rep.transpose_a ? 1 : 0) << "\n";
  out << "m " << rep.m << "\n";
  out << "n " << rep.n << "\n";
  out << "p " << rep.p << "\n";
  out << "tau " << fmt(rep.tau) << "\n";
  out << "num " << rep.ell << "\n";
  out << "tol " << fmt(rep.tol) << "\n";
  out << "kmin " << rep.k_min << "\n";
  out << "kmax " << rep.k_max << "\n";
  out << "fixtol " << fmt(rep.fixtol) << "\n";
  out << "eps_tilde " << fmt(rep.eps_tilde) << "\n";
  out << "max_outer " << rep.max_outer << "\n";
  out << "seed " << rep.seed << "\n";
  out << "x0 " << rep.x0 << "\n";
  out << "inner_tol_rule " << rep.inner_tol_rule << "\n";
  out << "outer_total " << rep.outer_total << "\n";
  out << "inner_total " << rep.inner_total << "\n";
  out << "fallback_expansions " << rep.fallback_expansions << "\n";
  out << "duplicate_warnings " << rep.duplicate_warnings << "\n";
  out << "degenerate_columns " << rep.degenerate_columns << "\n";
  out << "minres_cap_hits " << rep.minres_cap_hits << "\n";
  out << "wall_seconds " << fmt(rep.wall_seconds) << "\n";
  out << "components " << rep.components.size() << "\n";
  for (std::size_t i = 0; i < rep.components.size(); ++i) {
    const ComponentRecord& c = rep.components[i];
    out << "component " << (i + 1) << " alpha " << fmt(c.alpha) << " beta "
        << fmt(c.beta) << " sigma " << fmt(c.sigma) << " residual "
        << fmt(c.residual) << " outer " << c.outer_iterations << " inner "
        << c.inner_iterations << " converged " << (c.converged ? 1 : 0)
        << "\n";
  }
  if (rep.has_validation) {
    out << "validation " << rep.validation.size() << "\n";
    for (std::size_t i = 0; i < rep.validation.size(); ++i) {
      const ValidationRecord& v = rep.validation[i];
      out << "validated " << (i + 1) << " sigma_ref " << fmt(v.sigma_ref)
          << " sigma_rel_err " << fmt(v.sigma_rel_err) << " angle_err "
          << fmt(v.angle_err) << "\n";
    }
  }
  out << "warnings " << rep.warnings.size() << "\n";
  for (const std::string& w : rep.warnings) out << "warning " << w << "\n";
  out << "end cpfjd-report\n";
}

void emit_report(const RunReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write report to '" + path + "'");
  emit_report(rep, out);
  if (!out) throw InputError("I/O failure writing report to '" + path + "'");
}

RunReport parse_report(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line) || line != "cpfjd-report 1") {
    throw ParseError("report: missing 'cpfjd-report 1' header", 1);
  }

  RunReport rep;
  long long component_count = -1;
  long long validation_count = -1;
  long long warning_count = -1;

  while (reader.next(line)) {
    auto [key, rest] = split_key(line);
    if (key == "end") break;
    if (key == "status") {
      rep.all_converged = rest == "converged";
    } else if (key == "matrix_a") {
      rep.matrix_a = rest;
    } else if (key == "matrix_b") {
      rep.matrix_b = rest;
    } else if (key == "transpose_a") {
      rep.transpose_a = to_int(rest, reader) != 0;
    } else if (key == "m") {
      rep.m = to_int(rest, reader);
    } else if (key == "n") {
      rep.n = to_int(rest, reader);
    } else if (key == "p") {
      rep.p = to_int(rest, reader);
    } else if (key == "tau") {
      rep.tau = to_double(rest, reader);
    } else if (key == "num") {
      rep.ell = to_int(rest, reader);
    } else if (key == "tol") {
      rep.tol = to_double(rest, reader);
    } else if (key == "kmin") {
      rep.k_min = to_int(rest, reader);
    } else if (key == "kmax") {
      rep.k_max = to_int(rest, reader);
    } else if (key == "fixtol") {
      rep.fixtol = to_double(rest, reader);
    } else if (key == "eps_tilde") {
      rep.eps_tilde = to_double(rest, reader);
    } else if (key == "max_outer") {
      rep.max_outer = to_int(rest, reader);
    } else if (key == "seed") {
      rep.seed = static_cast<std::uint64_t>(to_int(rest, reader));
    } else if (key == "x0") {
      rep.x0 = rest;
    } else if (key == "inner_tol_rule") {
      rep.inner_tol_rule = rest;
    } else if (key == "outer_total") {
      rep.outer_total = to_int(rest, reader);
    } else if (key == "inner_total") {
      rep.inner_total = to_int(rest, reader);
    } else if (key == "fallback_expansions") {
      rep.fallback_expansions = to_int(rest, reader);
    } else if (key == "duplicate_warnings") {
      rep.duplicate_warnings = to_int(rest, reader);
    } else if (key == "degenerate_columns") {
      rep.degenerate_columns = to_int(rest, reader);
    } else if (key == "minres_cap_hits") {
      rep.minres_cap_hits = to_int(rest, reader);
    } else if (key == "wall_seconds") {
      rep.wall_seconds = to_double(rest, reader);
    } else if (key == "components") {
      component_count = to_int(rest, reader);
    } else if (key == "component") {
      std::istringstream cs(rest);
      std::string idx, tag;
      ComponentRecord c;
      std::string a, b, s, r, o, i, conv;
      cs >> idx;
      cs >> tag >> a >> tag >> b >> tag >> s >> tag >> r >> tag >> o >> tag >>
          i >> tag >> conv;
      if (!cs) reader.fail("malformed component line");
      c.alpha = to_double(a, reader);
      c.beta = to_double(b, reader);
      c.sigma = to_double(s, reader);
      c.residual = to_double(r, reader);
      c.outer_iterations = to_int(o, reader);
      c.inner_iterations = to_int(i, reader);
      c.converged = to_int(conv, reader) != 0;
      rep.components.push_back(c);
    } else if (key == "validation") {
      validation_count = to_int(rest, reader);
      rep.has_validation = true;
    } else if (key == "validated") {
      std::istringstream vs(rest);
      std::string idx, tag, sref, serr, aerr;
      vs >> idx >> tag >> sref >> tag >> serr >> tag >> aerr;
      if (!vs) reader.fail("malformed validated line");
      ValidationRecord v;
      v.sigma_ref = to_double(sref, reader);
      v.sigma_rel_err = to_double(serr, reader);
      v.angle_err = to_double(aerr, reader);
      rep.validation.push_back(v);
    } else if (key == "warnings") {
      warning_count = to_int(rest, reader);
    } else if (key == "warning") {
      rep.warnings.push_back(rest);
    } else {
      reader.fail("unknown key '" + key + "'");
    }
  }

  if (component_count >= 0 &&
      component_count != static_cast<long long>(rep.components.size())) {
    throw ParseError("report: component count mismatch", reader.lineno());
  }
  if (validation_count >= 0 &&
      validation_count != static_cast<long long>(rep.validation.size())) {
    throw ParseError("report: validation count mismatch", reader.lineno());
  }
  if (warning_count >= 0 &&
      warning_count != static_cast<long long>(rep.warnings.size())) {
    throw ParseError("report: warning count mismatch", reader.lineno());
  }
  return rep;
}

bool same_modulo_timing(const RunReport& a, const RunReport& b) {
  auto key = [](const RunReport& r) {
    std::ostringstream os;
    RunReport copy = r;
    copy.wall_seconds = 0.0;
    emit_report(copy, os);
    return os.str();
  };
  return key(a) == key(b);
}

}  // namespace cpfjd
