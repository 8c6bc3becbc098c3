#include "edgefed/metrics/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace edgefed::metrics {

using nlohmann::json;

std::string_view to_string(MetricsErrc e) {
  switch (e) {
    case MetricsErrc::IncompleteTrace: return "IncompleteTrace";
    case MetricsErrc::NoCompleteTraces: return "NoCompleteTraces";
    case MetricsErrc::IoFailure: return "IoFailure";
    case MetricsErrc::ParseError: return "ParseError";
  }
  return "?";
}

MetricsError::MetricsError(MetricsErrc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

std::array<std::int64_t, kSegmentCount> segments(const PhaseBreakdown& b) {
  return {b.bidding_us, b.winner_selection_us, b.info_exchange_us, b.deployment_us, b.confirmation_us, b.total_us};
}

PhaseBreakdown decompose(const FederationTrace& t) {
  if (!t.complete || !t.announce_submitted || !t.second_bid_finalized || !t.winner_finalized ||
      !t.deployment_started || !t.confirm_finalized || !t.established)
    throw MetricsError(MetricsErrc::IncompleteTrace, "trace for consumer " + t.consumer.hex() + " is incomplete");
  PhaseBreakdown b;
  b.bidding_us = (*t.second_bid_finalized - *t.announce_submitted).micros();
  b.winner_selection_us = (*t.winner_finalized - *t.second_bid_finalized).micros();
  b.info_exchange_us = (*t.deployment_started - *t.winner_finalized).micros();
  b.deployment_us = (*t.confirm_finalized - *t.deployment_started).micros();
  b.confirmation_us = (*t.established - *t.confirm_finalized).micros();
  b.total_us = (*t.established - *t.announce_submitted).micros();
  for (auto s : segments(b))
    if (s < 0) throw MetricsError(MetricsErrc::IncompleteTrace, "timestamps out of order");
  return b;
}

TraceRow make_row(const std::string& scenario_id, const std::string& consensus, std::uint32_t n_systems,
                  const FederationTrace& trace) {
  TraceRow r{scenario_id, consensus, n_systems, trace.run, trace.ann_id, std::nullopt};
  if (trace.complete) r.breakdown = decompose(trace);
  return r;
}

AggregateStats aggregate(std::span<const TraceRow> rows) {
  AggregateStats out;
  std::array<std::vector<std::int64_t>, kSegmentCount> values;
  for (const auto& r : rows) {
    if (!r.breakdown) {
      ++out.n_incomplete;
      continue;
    }
    auto seg = segments(*r.breakdown);
    for (std::size_t i = 0; i < kSegmentCount; ++i) values[i].push_back(seg[i]);
  }
  out.n_samples = values[0].size();
  if (out.n_samples == 0) throw MetricsError(MetricsErrc::NoCompleteTraces, "no complete traces to aggregate");

  const double n = static_cast<double>(out.n_samples);
  for (std::size_t i = 0; i < kSegmentCount; ++i) {
    const auto& v = values[i];
    long double sum = 0;
    for (auto x : v) sum += x;
    const long double mean = sum / n;
    long double sq = 0;
    for (auto x : v) sq += (x - mean) * (x - mean);
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    out.segments[i] = SegmentStats{static_cast<double>(mean / 1e6), static_cast<double>(sq / n / 1e12),
                                   static_cast<double>(*lo) / 1e6, static_cast<double>(*hi) / 1e6};
  }
  return out;
}

AggregateStats aggregate(std::span<const FederationTrace> traces) {
  std::vector<TraceRow> rows;
  rows.reserve(traces.size());
  for (const auto& t : traces) rows.push_back(make_row("", "", 0, t));
  return aggregate(rows);
}

namespace {

constexpr const char* kHeader =
    "scenario_id,consensus,n_systems,run,ann_id,bidding_s,winner_selection_s,info_exchange_s,deployment_s,"
    "confirmation_s,total_s,complete";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::uint64_t parse_uint(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw MetricsError(MetricsErrc::ParseError, std::string("bad ") + what + ": '" + s + "'");
  }
}

std::int64_t parse_secs(const std::string& s) {
  try {
    return parse_seconds_micros(s);
  } catch (const std::exception& e) {
    throw MetricsError(MetricsErrc::ParseError, "bad seconds value '" + s + "'");
  }
}

}  // namespace

void write_csv(std::ostream& os, std::span<const TraceRow> rows) {
  os << kHeader << '\n';
  for (const auto& r : rows) {
    os << r.scenario_id << ',' << r.consensus << ',' << r.n_systems << ',' << r.run << ',';
    if (r.ann_id) os << *r.ann_id;
    for (std::size_t i = 0; i < kSegmentCount; ++i) {
      os << ',';
      if (r.breakdown) os << format_micros_as_seconds(segments(*r.breakdown)[i]);
    }
    os << ',' << (r.complete() ? "true" : "false") << '\n';
  }
}

void write_jsonl(std::ostream& os, std::span<const TraceRow> rows) {
  for (const auto& r : rows) {
    // ordered_json keeps the CSV column order.
    nlohmann::ordered_json j;
    j["scenario_id"] = r.scenario_id;
    j["consensus"] = r.consensus;
    j["n_systems"] = r.n_systems;
    j["run"] = r.run;
    j["ann_id"] = r.ann_id ? json(*r.ann_id) : json(nullptr);
    for (std::size_t i = 0; i < kSegmentCount; ++i) {
      if (r.breakdown) j[kSegmentNames[i]] = static_cast<double>(segments(*r.breakdown)[i]) / 1e6;
      else j[kSegmentNames[i]] = nullptr;
    }
    j["complete"] = r.complete();
    os << j.dump() << '\n';
  }
}

std::vector<TraceRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw MetricsError(MetricsErrc::ParseError, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw MetricsError(MetricsErrc::ParseError, "unexpected header: " + line);
  std::vector<TraceRow> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != 12) throw MetricsError(MetricsErrc::ParseError, "expected 12 columns: " + line);
    TraceRow r;
    r.scenario_id = f[0];
    r.consensus = f[1];
    r.n_systems = static_cast<std::uint32_t>(parse_uint(f[2], "n_systems"));
    r.run = static_cast<std::uint32_t>(parse_uint(f[3], "run"));
    if (!f[4].empty()) r.ann_id = parse_uint(f[4], "ann_id");
    if (f[11] == "true") {
      PhaseBreakdown b;
      b.bidding_us = parse_secs(f[5]);
      b.winner_selection_us = parse_secs(f[6]);
      b.info_exchange_us = parse_secs(f[7]);
      b.deployment_us = parse_secs(f[8]);
      b.confirmation_us = parse_secs(f[9]);
      b.total_us = parse_secs(f[10]);
      r.breakdown = b;
    } else if (f[11] != "false") {
      throw MetricsError(MetricsErrc::ParseError, "bad complete flag: " + f[11]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TraceRow> read_jsonl(std::istream& is) {
  std::vector<TraceRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      TraceRow r;
      r.scenario_id = j.at("scenario_id").get<std::string>();
      r.consensus = j.at("consensus").get<std::string>();
      r.n_systems = j.at("n_systems").get<std::uint32_t>();
      r.run = j.at("run").get<std::uint32_t>();
      if (!j.at("ann_id").is_null()) r.ann_id = j.at("ann_id").get<std::uint64_t>();
      if (j.at("complete").get<bool>()) {
        std::array<std::int64_t, kSegmentCount> v{};
        for (std::size_t i = 0; i < kSegmentCount; ++i)
          v[i] = SimTime::from_seconds(j.at(kSegmentNames[i]).get<double>()).micros();
        r.breakdown = PhaseBreakdown{v[0], v[1], v[2], v[3], v[4], v[5]};
      }
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw MetricsError(MetricsErrc::ParseError, e.what());
    }
  }
  return rows;
}

void export_rows(const std::string& path, std::span<const TraceRow> rows, ExportFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MetricsError(MetricsErrc::IoFailure, "cannot open " + path);
  if (format == ExportFormat::Csv) write_csv(os, rows);
  else write_jsonl(os, rows);
  os.flush();
  if (!os) throw MetricsError(MetricsErrc::IoFailure, "write failed: " + path);
}

std::vector<TraceRow> import_rows(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MetricsError(MetricsErrc::IoFailure, "cannot open " + path);
  const bool jsonl = path.size() >= 6 && path.ends_with(".jsonl");
  return jsonl ? read_jsonl(is) : read_csv(is);
}

std::string cell_file_stem(const std::string& scenario_id, const std::string& consensus, std::uint32_t n_systems) {
  return scenario_id + "_" + consensus + "_" + std::to_string(n_systems);
}

}  // namespace edgefed::metrics
