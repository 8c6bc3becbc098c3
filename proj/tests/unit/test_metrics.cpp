#include <sstream>

#include "doctest.h"
#include "edgefed/metrics/metrics.hpp"

using namespace edgefed;
using namespace edgefed::metrics;

namespace {

SimTime s(double seconds) { return SimTime::from_seconds(seconds); }

FederationTrace trace(double announce, double second_bid, double winner, double deploy, double confirm,
                      double established) {
  FederationTrace t;
  t.ann_id = 0;
  t.announce_submitted = s(announce);
  t.second_bid_finalized = s(second_bid);
  t.winner_finalized = s(winner);
  t.deployment_started = s(deploy);
  t.confirm_finalized = s(confirm);
  t.established = s(established);
  t.complete = true;
  return t;
}

FederationTrace with_total(double total) { return trace(0, 0, 0, 0, 0, total); }

}  // namespace

TEST_CASE("decompose subtracts consecutive timestamps") {
  const auto b = decompose(trace(0, 5, 10, 10.1, 15, 17.6));
  CHECK(b.bidding_us == 5'000'000);
  CHECK(b.winner_selection_us == 5'000'000);
  CHECK(b.info_exchange_us == 100'000);
  CHECK(b.deployment_us == 4'900'000);
  CHECK(b.confirmation_us == 2'600'000);
  CHECK(b.total_us == 17'600'000);
  CHECK(b.bidding_us + b.winner_selection_us + b.info_exchange_us + b.deployment_us + b.confirmation_us ==
        b.total_us);

  const auto zero = decompose(trace(3, 3, 3, 3, 3, 3));
  for (auto v : segments(zero)) CHECK(v == 0);
}

TEST_CASE("decompose rejects incomplete or out-of-order traces") {
  auto t = trace(0, 5, 10, 10.1, 15, 17.6);
  t.complete = false;
  CHECK_THROWS_AS(decompose(t), MetricsError);
  auto missing = trace(0, 5, 10, 10.1, 15, 17.6);
  missing.confirm_finalized.reset();
  CHECK_THROWS_AS(decompose(missing), MetricsError);
  CHECK_THROWS_AS(decompose(trace(0, 5, 4, 10.1, 15, 17.6)), MetricsError);
}

TEST_CASE("aggregate uses the population variance") {
  std::vector<FederationTrace> ts{with_total(10), with_total(20)};
  const auto a = aggregate(std::span<const FederationTrace>(ts));
  CHECK(a.total().mean == doctest::Approx(15.0));
  CHECK(a.total().variance == doctest::Approx(25.0));
  CHECK(a.total().min == 10.0);
  CHECK(a.total().max == 20.0);

  std::vector<FederationTrace> same{with_total(7), with_total(7), with_total(7)};
  CHECK(aggregate(std::span<const FederationTrace>(same)).total().variance == 0.0);

  auto inc = with_total(1);
  inc.complete = false;
  std::vector<FederationTrace> none{inc, inc};
  CHECK_THROWS_AS(aggregate(std::span<const FederationTrace>(none)), MetricsError);
  std::vector<FederationTrace> mixed{with_total(4), inc};
  const auto m = aggregate(std::span<const FederationTrace>(mixed));
  CHECK(m.n_samples == 1);
  CHECK(m.n_incomplete == 1);
}

TEST_CASE("CSV export has a header and one row per trace; round-trips exactly") {
  std::vector<TraceRow> rows;
  for (std::uint32_t r = 0; r < 20; ++r) {
    auto t = trace(0, 5, 10, 10.1 + r * 0.013, 15, 17.6 + r);
    t.run = r;
    rows.push_back(make_row("baseline", "clique", 2, t));
  }
  auto inc = with_total(1);
  inc.complete = false;
  rows.push_back(make_row("baseline", "clique", 2, inc));

  std::stringstream ss;
  write_csv(ss, rows);
  const auto text = ss.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 22);
  CHECK(text.rfind("scenario_id,consensus,n_systems,run,ann_id,bidding_s", 0) == 0);

  const auto back = read_csv(ss);
  CHECK(back == rows);
  CHECK(aggregate(back) == aggregate(rows));
}

TEST_CASE("JSONL export uses the CSV field names and round-trips") {
  std::vector<TraceRow> rows{make_row("x", "qbft", 10, trace(0, 5.25, 10.25, 12, 15.25, 15.75))};
  std::stringstream ss;
  write_jsonl(ss, rows);
  const auto line = ss.str();
  for (const char* field : {"scenario_id", "consensus", "n_systems", "run", "ann_id", "bidding_s",
                            "winner_selection_s", "info_exchange_s", "deployment_s", "confirmation_s", "total_s",
                            "complete"})
    CHECK(line.find(std::string("\"") + field + "\"") != std::string::npos);
  CHECK(read_jsonl(ss) == rows);
}

TEST_CASE("read_csv rejects malformed input") {
  std::stringstream bad_header("a,b,c\n");
  CHECK_THROWS_AS(read_csv(bad_header), MetricsError);
  std::stringstream ss;
  write_csv(ss, std::vector<TraceRow>{});
  std::stringstream short_row(ss.str() + "x,clique,2\n");
  CHECK_THROWS_AS(read_csv(short_row), MetricsError);
  CHECK_THROWS_AS(import_rows("/nonexistent/file.csv"), MetricsError);
}
