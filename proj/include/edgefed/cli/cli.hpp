#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgefed/metrics/metrics.hpp"
#include "edgefed/sim/scenario.hpp"

namespace edgefed::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigInvalid = 1,
  kIoFailure = 2,
  kNoCompleteTraces = 3,
  kMismatchedScenarios = 4,
};

class MismatchedScenarios : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OverheadRow {
  std::uint32_t n_systems = 0;
  double blockchain_mean_s = 0;
  double soa_mean_s = 0;
  double overhead_s = 0;
};

/// Per-N overhead = mean blockchain total - mean SOA total over complete rows.
/// Throws MismatchedScenarios when the two files cover different N sets or an
/// N has no complete rows on one side.
std::vector<OverheadRow> compare_rows(std::span<const metrics::TraceRow> blockchain,
                                      std::span<const metrics::TraceRow> soa);
std::string overhead_json(std::span<const OverheadRow> rows);

/// Fixed-width per-segment table.
void print_summary(std::ostream& os, const std::string& title, const metrics::AggregateStats& stats);

/// Rows for the result set of one scenario, in (run, consumer) order.
std::vector<metrics::TraceRow> rows_for(const sim::ScenarioResult& result);

/// Entry point shared by the executable and tests. Never throws; returns the
/// process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace edgefed::cli
