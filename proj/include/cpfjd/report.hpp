// Line-oriented run report with a versioned schema header; diff-able,
// round-trippable, and byte-stable for fixed inputs apart from the
// wall_seconds field.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cpfjd/types.hpp"

namespace cpfjd {

struct ComponentRecord {
  double alpha = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
  double residual = 0.0;
  Index outer_iterations = 0;
  Index inner_iterations = 0;
  bool converged = false;
};

struct ValidationRecord {
  double sigma_ref = 0.0;
  double sigma_rel_err = 0.0;
  double angle_err = 0.0;  // sqrt of the summed squared vector angles
};

struct RunReport {
  std::string matrix_a;
  std::string matrix_b;
  bool transpose_a = false;
  Index m = 0, n = 0, p = 0;
  double tau = 0.0;
  Index ell = 0;
  double tol = 0.0;
  Index k_min = 0, k_max = 0;
  double fixtol = 0.0;
  double eps_tilde = 0.0;
  Index max_outer = 0;
  std::uint64_t seed = 0;
  std::string x0 = "ones";
  std::string inner_tol_rule;

  bool all_converged = false;
  Index outer_total = 0;
  Index inner_total = 0;
  Index fallback_expansions = 0;
  Index duplicate_warnings = 0;
  Index degenerate_columns = 0;
  Index minres_cap_hits = 0;
  double wall_seconds = 0.0;

  std::vector<ComponentRecord> components;
  bool has_validation = false;
  std::vector<ValidationRecord> validation;
  std::vector<std::string> warnings;
};

void emit_report(const RunReport& report, std::ostream& out);
void emit_report(const RunReport& report, const std::string& path);

RunReport parse_report(std::istream& in);

/// Field-wise equality ignoring wall_seconds.
bool same_modulo_timing(const RunReport& a, const RunReport& b);

}  // namespace cpfjd
