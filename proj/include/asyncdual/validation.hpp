#pragma once

#include <optional>
#include <string>
#include <vector>

#include "asyncdual/problem.hpp"

namespace asyncdual {

enum class CheckStatus { Pass, Warn, Fail };

const char* to_string(CheckStatus s);

struct Check {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<Check> checks;

  /// No Fail entries (warnings are allowed).
  bool passed() const;
  const Check* find(const std::string& name) const;
};

/// Relative threshold under which singular values count as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Checks the regularity assumptions: strong convexity, graph structure, box
/// interiors, full row rank of the stacked equality matrix and, if a candidate
/// is given, strict feasibility (Slater).
ValidationReport validate_problem(const Problem& problem, const std::optional<Vector>& slater_candidate = std::nullopt);

/// The global equality matrix [A_{i,j}] (sum r_i rows, n columns).
Matrix stacked_equality_matrix(const Problem& problem);

}  // namespace asyncdual
