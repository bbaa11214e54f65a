#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "asyncdual/types.hpp"

namespace asyncdual {

/// Metrics of the state x(k), y(k) reached after counter k-1.
struct RunRow {
  Counter k = 0;
  /// Cumulative completed updates divided by the number of agents.
  double avg_updates = 0.0;
  /// ||x(k) - x*||; nan when no reference was supplied.
  double dist = 0.0;
  /// q(y(k)).
  double dual = 0.0;
  /// ||max(0, ineq(x(k)))|| + ||eq(x(k))||.
  double feas = 0.0;
  /// ||s(k-1)||, the scaled dual step that produced y(k).
  double residual = 0.0;
};

struct RunRecord {
  std::string mode = "async";
  int q = 1;
  std::uint64_t seed = 0;
  double gamma_scale = 1.0;
  bool admissible = true;
  double initial_dist = 0.0;
  double initial_dual = 0.0;
  std::vector<RunRow> rows;
};

inline constexpr const char* kRunCsvColumns = "k,avg_updates,dist,dual,feas,residual";

/// '#'-prefixed metadata lines, the fixed header, one line per row.
void write_run_csv(std::ostream& out, const RunRecord& record);

}  // namespace asyncdual
