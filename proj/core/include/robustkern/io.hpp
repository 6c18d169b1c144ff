#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "robustkern/harness.hpp"

namespace robustkern {

// CSV data files: comma-separated, one observation per row, decimal point
// only. A single header row is auto-detected (first row containing a
// non-numeric cell). Malformed cells and ragged rows raise DataError naming
// the row and column.
Eigen::MatrixXd parse_csv_matrix(std::istream& in, const std::string& name);
Eigen::MatrixXd load_csv_matrix(const std::string& path);

// TestReport <-> JSON text; parse(emit(report)) == report exactly,
// including every statistic array entry.
std::string report_to_json(const TestReport& report);
TestReport report_from_json(const std::string& text);

// ExperimentSpec from JSON text; schema violations raise ConfigError naming
// the offending key path (e.g. "$.tests[0].kind").
ExperimentSpec experiment_spec_from_json(const std::string& text);
ExperimentSpec load_experiment_spec(const std::string& path);

// Plot-ready curve table:
//   c,test_name,rejection_rate,wilson_lo,wilson_hi,repetitions,seed
std::string curve_to_csv(const std::vector<CurvePoint>& curve, std::uint64_t base_seed);

std::string procedure_name(Procedure procedure);
Procedure procedure_from_name(const std::string& name);

}  // namespace robustkern
