#include "asyncdual/run_record.hpp"

#include <ostream>

#include "asyncdual/format.hpp"

namespace asyncdual {

void write_run_csv(std::ostream& out, const RunRecord& record) {
  out << "# mode=" << record.mode << " Q=" << record.q << " seed=" << record.seed
      << " gamma_scale=" << fmt_double(record.gamma_scale) << " admissible=" << (record.admissible ? 1 : 0) << '\n';
  out << "# initial_dist=" << fmt_double(record.initial_dist) << " initial_dual=" << fmt_double(record.initial_dual)
      << '\n';
  out << kRunCsvColumns << '\n';
  for (const auto& r : record.rows) {
    out << r.k << ',' << fmt_double(r.avg_updates) << ',' << fmt_double(r.dist) << ',' << fmt_double(r.dual) << ','
        << fmt_double(r.feas) << ',' << fmt_double(r.residual) << '\n';
  }
}

}  // namespace asyncdual
