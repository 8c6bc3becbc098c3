#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edgefed/cli/cli.hpp"

using namespace edgefed;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(EDGEFED_SOURCE_DIR) + "/configs/";

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "edgefed");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("edgefed_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::size_t count_files(const fs::path& dir, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().ends_with(suffix)) ++n;
  return n;
}

metrics::TraceRow row(std::uint32_t n, double total) {
  metrics::TraceRow r{"x", "clique", n, 0, 0, metrics::PhaseBreakdown{}};
  r.breakdown->total_us = SimTime::from_seconds(total).micros();
  r.breakdown->confirmation_us = r.breakdown->total_us;
  return r;
}

}  // namespace

TEST_CASE("run writes metric files and a summary near 18 s") {
  const auto dir = scratch("run");
  const auto r = invoke({"run", "--config", kConfigs + "baseline.json", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "baseline_clique_2.csv"));
  CHECK(r.out.find("total") != std::string::npos);
  const auto rows = metrics::import_rows((dir / "baseline_clique_2.csv").string());
  CHECK(rows.size() == 20);
  const auto stats = metrics::aggregate(rows);
  CHECK(stats.total().mean == doctest::Approx(18.0).epsilon(3.0 / 18.0));
}

TEST_CASE("same seed twice gives identical files") {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  for (const auto& d : {a, b})
    REQUIRE(invoke({"run", "-c", kConfigs + "baseline.json", "-o", d.string(), "--seed", "42", "--consensus", "qbft",
                    "--runs", "3"})
                .code == 0);
  CHECK(slurp(a / "baseline_qbft_2.csv") == slurp(b / "baseline_qbft_2.csv"));
  CHECK(slurp(a / "baseline_qbft_2.jsonl") == slurp(b / "baseline_qbft_2.jsonl"));
}

TEST_CASE("config errors exit with 1") {
  CHECK(invoke({"run", "--config", "/nonexistent.json", "--out", scratch("missing").string()}).code == 1);
  CHECK(invoke({"validate-config", "--config", kConfigs + "baseline.json"}).code == 0);
  CHECK(invoke({"run", "--config", kConfigs + "baseline.json", "--consensus", "pow"}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
}

TEST_CASE("unwritable output directory exits with 2") {
  const auto file = scratch("blocker");
  std::ofstream(file) << "x";
  CHECK(invoke({"run", "-c", kConfigs + "baseline.json", "-o", (file / "sub").string()}).code == 2);
}

TEST_CASE("EDGEFED_OUT is the output fallback") {
  const auto dir = scratch("env");
  ::setenv("EDGEFED_OUT", dir.string().c_str(), 1);
  const auto r = invoke({"run", "-c", kConfigs + "baseline.json", "--runs", "1"});
  ::unsetenv("EDGEFED_OUT");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "baseline_clique_2.csv"));
}

TEST_CASE("sweep writes one file per cell and one summary row per cell") {
  const auto dir = scratch("sweep");
  const auto r = invoke({"sweep", "-c", kConfigs + "sweep.json", "-o", dir.string(), "--runs", "2", "-j", "3"});
  REQUIRE(r.code == 0);
  std::size_t cells = 0;
  for (const auto v : {"clique", "qbft", "soa"})
    for (const auto n : {2, 10, 15, 25, 30})
      if (fs::exists(dir / ("sweep_" + std::string(v) + "_" + std::to_string(n) + ".csv"))) ++cells;
  CHECK(cells == 15);
  const auto summary = slurp(dir / "sweep_summary.csv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 16);

  const auto only = scratch("sweep_clique");
  REQUIRE(invoke({"sweep", "-c", kConfigs + "sweep.json", "-o", only.string(), "--runs", "1", "--consensus",
                  "clique"})
              .code == 0);
  CHECK(count_files(only, ".csv") == 5 + 2);  // cells + combined + summary
  for (const auto n : {2, 10, 15, 25, 30})
    CHECK(fs::exists(only / ("sweep_clique_" + std::to_string(n) + ".csv")));
}

TEST_CASE("sweep output is independent of the worker count") {
  const auto a = scratch("jobs1"), b = scratch("jobs4");
  REQUIRE(invoke({"sweep", "-c", kConfigs + "sweep.json", "-o", a.string(), "--runs", "2", "-j", "1"}).code == 0);
  REQUIRE(invoke({"sweep", "-c", kConfigs + "sweep.json", "-o", b.string(), "--runs", "2", "-j", "4"}).code == 0);
  CHECK(slurp(a / "sweep_summary.csv") == slurp(b / "sweep_summary.csv"));
  CHECK(slurp(a / "sweep_clique_30.csv") == slurp(b / "sweep_clique_30.csv"));
}

TEST_CASE("compare_rows computes per-N overhead") {
  std::vector<metrics::TraceRow> bc{row(2, 18.0), row(2, 18.0)};
  std::vector<metrics::TraceRow> soa{row(2, 2.6)};
  const auto out = cli::compare_rows(bc, soa);
  REQUIRE(out.size() == 1);
  CHECK(out[0].overhead_s == doctest::Approx(15.4));
  CHECK(cli::compare_rows(bc, bc)[0].overhead_s == 0.0);
  std::vector<metrics::TraceRow> other{row(10, 2.6)};
  CHECK_THROWS_AS(cli::compare_rows(bc, other), cli::MismatchedScenarios);
}

TEST_CASE("compare subcommand reads two files and writes overhead.json") {
  const auto dir = scratch("compare");
  REQUIRE(invoke({"sweep", "-c", kConfigs + "sweep.json", "-o", dir.string(), "--runs", "1"}).code == 0);
  const auto r = invoke({"compare", (dir / "sweep_clique_all.csv").string(), (dir / "sweep_soa_all.csv").string(),
                         "-o", dir.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "overhead.json"));
  const auto mismatch = invoke({"compare", (dir / "sweep_clique_all.csv").string(),
                                (dir / "sweep_soa_2.csv").string(), "-o", dir.string()});
  CHECK(mismatch.code == 4);
  CHECK(invoke({"compare", "/nonexistent.csv", (dir / "sweep_soa_2.csv").string(), "-o", dir.string()}).code == 2);
}
