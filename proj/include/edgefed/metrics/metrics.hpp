#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgefed/metrics/trace.hpp"

namespace edgefed::metrics {

enum class MetricsErrc { IncompleteTrace, NoCompleteTraces, IoFailure, ParseError };
std::string_view to_string(MetricsErrc e);

class MetricsError : public std::runtime_error {
 public:
  MetricsError(MetricsErrc code, const std::string& detail);
  MetricsErrc code() const { return code_; }

 private:
  MetricsErrc code_;
};

/// Segments in integer microseconds; they sum to total exactly.
struct PhaseBreakdown {
  std::int64_t bidding_us = 0;
  std::int64_t winner_selection_us = 0;
  std::int64_t info_exchange_us = 0;  ///< winner final -> deployment start, queue wait included
  std::int64_t deployment_us = 0;
  std::int64_t confirmation_us = 0;
  std::int64_t total_us = 0;

  /// Negotiation overhead specific to the ledger path: total minus deployment.
  std::int64_t hatched_us() const { return total_us - deployment_us; }
  bool operator==(const PhaseBreakdown&) const = default;
};

inline constexpr std::size_t kSegmentCount = 6;
inline constexpr std::array<const char*, kSegmentCount> kSegmentNames = {
    "bidding_s", "winner_selection_s", "info_exchange_s", "deployment_s", "confirmation_s", "total_s"};
std::array<std::int64_t, kSegmentCount> segments(const PhaseBreakdown& b);

/// Throws MetricsError(IncompleteTrace) if the trace is incomplete or a
/// segment would be negative.
PhaseBreakdown decompose(const FederationTrace& trace);

/// One exported row: identifies the cell and carries the breakdown when the
/// trace completed.
struct TraceRow {
  std::string scenario_id;
  std::string consensus;
  std::uint32_t n_systems = 0;
  std::uint32_t run = 0;
  std::optional<std::uint64_t> ann_id;
  std::optional<PhaseBreakdown> breakdown;
  bool complete() const { return breakdown.has_value(); }
  bool operator==(const TraceRow&) const = default;
};

TraceRow make_row(const std::string& scenario_id, const std::string& consensus, std::uint32_t n_systems,
                  const FederationTrace& trace);

struct SegmentStats {
  double mean = 0;
  double variance = 0;  ///< population variance
  double min = 0;
  double max = 0;
  bool operator==(const SegmentStats&) const = default;
};

struct AggregateStats {
  std::array<SegmentStats, kSegmentCount> segments{};
  std::size_t n_samples = 0;
  std::size_t n_incomplete = 0;

  const SegmentStats& bidding() const { return segments[0]; }
  const SegmentStats& winner_selection() const { return segments[1]; }
  const SegmentStats& info_exchange() const { return segments[2]; }
  const SegmentStats& deployment() const { return segments[3]; }
  const SegmentStats& confirmation() const { return segments[4]; }
  const SegmentStats& total() const { return segments[5]; }
  bool operator==(const AggregateStats&) const = default;
};

/// Population statistics over complete rows, in seconds. Throws
/// MetricsError(NoCompleteTraces) when nothing completed.
AggregateStats aggregate(std::span<const TraceRow> rows);
AggregateStats aggregate(std::span<const FederationTrace> traces);

enum class ExportFormat { Csv, Jsonl };

/// CSV with a mandatory header, 6 fractional digits; incomplete rows leave the
/// segment columns empty.
void write_csv(std::ostream& os, std::span<const TraceRow> rows);
void write_jsonl(std::ostream& os, std::span<const TraceRow> rows);
std::vector<TraceRow> read_csv(std::istream& is);
std::vector<TraceRow> read_jsonl(std::istream& is);

/// Writes to a file; throws MetricsError(IoFailure).
void export_rows(const std::string& path, std::span<const TraceRow> rows, ExportFormat format);
std::vector<TraceRow> import_rows(const std::string& path);

/// {scenario_id}_{consensus}_{n}
std::string cell_file_stem(const std::string& scenario_id, const std::string& consensus, std::uint32_t n_systems);

}  // namespace edgefed::metrics
