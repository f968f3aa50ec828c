#pragma once

#include <string>

#include "xdiff/config.hpp"
#include "xdiff/diagnostics.hpp"
#include "xdiff/hypotheses.hpp"
#include "xdiff/solver.hpp"

namespace xdiff {

/// "%.17g" rendering: enough digits for bit-stable round trips.
std::string format_double(double v);

/// Atomic write (temp file + rename) into dir, creating dir if needed.
void write_file_atomic(const std::string& dir, const std::string& name,
                       const std::string& content);

/// Provenance header shared by all JSON outputs. The timestamp is the only
/// field excluded from byte-level reproducibility comparisons.
Json provenance_header(const RunSettings& s);

Json report_to_json(const HypothesisReport& r);
Json ledger_to_json(const EntropyLedger& ledger, const std::vector<double>& times);
Json twin_to_json(const TwinExperimentResult& r);

/// CSV bodies (RFC-4180-style data section, LF endings, leading '#'
/// provenance comment lines).
std::string trajectory_csv(const TrajectoryField& t, const RunSettings& s);
std::string twin_csv(const TwinExperimentResult& r, const RunSettings& s);
std::string reports_csv(const std::vector<HypothesisReport>& reports, const RunSettings& s);

struct SweepRow {
  double value = 0.0;
  double H0 = 0.0;
  double max_H = 0.0;
  double C_star = 0.0;
  double entropy_slack = 0.0;
  double conv_error = 0.0;  // tau axis only, NaN otherwise
};
std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows,
                      const RunSettings& s);

}  // namespace xdiff
