#include "edgefed/cli/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "edgefed/sim/artifacts.hpp"
#include "json.hpp"

namespace edgefed::cli {

namespace fs = std::filesystem;
using metrics::TraceRow;

namespace {

class IoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> consensus;
  std::optional<std::uint32_t> runs;
};

std::string resolve_out_dir(const CommonOptions& o, const sim::ScenarioConfig* cfg) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("EDGEFED_OUT"); env && *env) return env;
  if (cfg && cfg->output.dir) return *cfg->output.dir;
  return "edgefed-out";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoFailure("cannot create output directory " + dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open " + path.string());
  os << text;
  os.flush();
  if (!os) throw IoFailure("write failed: " + path.string());
}

sim::ScenarioConfig load_with_overrides(const CommonOptions& o) {
  auto cfg = sim::load_scenario_file(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.runs) cfg.runs = *o.runs;
  if (o.consensus) {
    const auto v = sim::parse_variant(*o.consensus);
    cfg.variant = v;
    if (cfg.sweep) cfg.sweep->variants = {v};
  }
  cfg.validate();
  return cfg;
}

std::string variant_name(sim::Variant v) { return std::string(sim::to_string(v)); }

/// Writes the per-cell result files and optional ledger artifacts.
std::vector<std::string> write_cell(const std::string& dir, const sim::ScenarioResult& result) {
  const auto& cfg = result.config;
  const auto stem = metrics::cell_file_stem(cfg.scenario_id, variant_name(cfg.variant), cfg.n_systems);
  const auto rows = rows_for(result);
  std::vector<std::string> written;
  for (const auto& f : cfg.output.formats) {
    const auto fmt = f == "jsonl" ? metrics::ExportFormat::Jsonl : metrics::ExportFormat::Csv;
    const auto path = (fs::path(dir) / (stem + (fmt == metrics::ExportFormat::Jsonl ? ".jsonl" : ".csv"))).string();
    metrics::export_rows(path, rows, fmt);
    written.push_back(path);
  }
  if (cfg.variant != sim::Variant::Soa) {
    for (const auto& run : result.runs) {
      const auto run_stem = stem + "_run" + std::to_string(run.run);
      if (cfg.output.chain_dump) write_text(fs::path(dir) / (run_stem + "_chain.json"), sim::chain_dump_json(run.chain));
      if (cfg.output.event_log) {
        std::ostringstream ss;
        sim::write_event_log(ss, run.chain);
        write_text(fs::path(dir) / (run_stem + "_events.jsonl"), ss.str());
      }
    }
  }
  return written;
}

std::optional<metrics::AggregateStats> try_aggregate(std::span<const TraceRow> rows) {
  try {
    return metrics::aggregate(rows);
  } catch (const metrics::MetricsError& e) {
    if (e.code() != metrics::MetricsErrc::NoCompleteTraces) throw;
    return std::nullopt;
  }
}

std::string summary_csv(const std::string& scenario_id, const std::vector<sim::ScenarioResult>& cells) {
  std::ostringstream os;
  os << "scenario_id,consensus,n_systems,consumers,providers,n_samples,n_incomplete";
  for (const char* name : metrics::kSegmentNames) {
    const std::string base(name, std::string_view(name).size() - 2);
    os << ',' << base << "_mean_s," << base << "_var_s2";
  }
  os << '\n';
  for (const auto& cell : cells) {
    const auto& cfg = cell.config;
    const auto split = cfg.resolved_split();
    const auto rows = rows_for(cell);
    const auto stats = try_aggregate(rows);
    os << scenario_id << ',' << variant_name(cfg.variant) << ',' << cfg.n_systems << ',' << split.consumers << ','
       << split.providers << ',' << (stats ? stats->n_samples : 0) << ','
       << (stats ? stats->n_incomplete : rows.size());
    for (std::size_t i = 0; i < metrics::kSegmentCount; ++i) {
      if (stats) {
        os << ',' << std::fixed << std::setprecision(6) << stats->segments[i].mean << ','
           << stats->segments[i].variance;
      } else {
        os << ",,";
      }
    }
    os << '\n';
  }
  return os.str();
}

int cmd_validate(const CommonOptions& o, std::ostream& out) {
  const auto cfg = load_with_overrides(o);
  const auto split = cfg.resolved_split();
  out << "config OK: " << cfg.scenario_id << " variant=" << variant_name(cfg.variant) << " n=" << cfg.n_systems
      << " (" << split.consumers << " consumers, " << split.providers << " providers) runs=" << cfg.runs
      << " seed=" << cfg.seed << '\n';
  return kOk;
}

int cmd_run(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const auto cfg = load_with_overrides(o);
  const auto dir = resolve_out_dir(o, &cfg);
  ensure_dir(dir);
  const auto result = sim::run_scenario(cfg);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  for (const auto& path : write_cell(dir, result)) out << "wrote " << path << '\n';
  const auto rows = rows_for(result);
  const auto stats = try_aggregate(rows);
  if (!stats) {
    err << "error: no complete federation traces\n";
    return kNoCompleteTraces;
  }
  print_summary(out,
                cfg.scenario_id + " " + variant_name(cfg.variant) + " N=" + std::to_string(cfg.n_systems) +
                    " runs=" + std::to_string(cfg.runs) + " seed=" + std::to_string(cfg.seed),
                *stats);
  return kOk;
}

int cmd_sweep(const CommonOptions& o, std::size_t jobs, std::ostream& out, std::ostream& err) {
  const auto base = load_with_overrides(o);
  const auto dir = resolve_out_dir(o, &base);
  ensure_dir(dir);
  const auto sweep = base.sweep.value_or(sim::SweepConfig{});

  std::vector<sim::ScenarioConfig> cells;
  for (auto v : sweep.variants) {
    for (auto n : sweep.n_values) {
      auto c = base;
      c.variant = v;
      c.n_systems = n;
      c.split.reset();
      c.sweep.reset();
      c.validate();
      cells.push_back(std::move(c));
    }
  }

  // Cells are independent; results are collected by index so file contents do
  // not depend on scheduling.
  std::vector<sim::ScenarioResult> results(cells.size());
  std::vector<std::exception_ptr> failures(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        results[i] = sim::run_scenario(cells[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  bool all_complete = true;
  std::map<sim::Variant, std::vector<TraceRow>> per_variant;
  for (const auto& r : results) {
    for (const auto& w : r.warnings) err << "warning: N=" << r.config.n_systems << ": " << w << '\n';
    for (const auto& path : write_cell(dir, r)) out << "wrote " << path << '\n';
    auto rows = rows_for(r);
    if (!try_aggregate(rows)) all_complete = false;
    auto& acc = per_variant[r.config.variant];
    acc.insert(acc.end(), rows.begin(), rows.end());
  }
  for (const auto& [v, rows] : per_variant) {
    const auto path = fs::path(dir) / (base.scenario_id + "_" + variant_name(v) + "_all.csv");
    metrics::export_rows(path.string(), rows, metrics::ExportFormat::Csv);
    out << "wrote " << path.string() << '\n';
  }
  const auto summary_path = fs::path(dir) / (base.scenario_id + "_summary.csv");
  write_text(summary_path, summary_csv(base.scenario_id, results));
  out << "wrote " << summary_path.string() << "\n\n";

  out << std::left << std::setw(8) << "variant" << std::right << std::setw(6) << "N" << std::setw(10) << "samples"
      << std::setw(12) << "total_s" << std::setw(12) << "info_ex_s" << std::setw(12) << "deploy_s" << '\n';
  for (const auto& r : results) {
    const auto stats = try_aggregate(rows_for(r));
    out << std::left << std::setw(8) << variant_name(r.config.variant) << std::right << std::setw(6)
        << r.config.n_systems;
    if (stats) {
      out << std::setw(10) << stats->n_samples << std::fixed << std::setprecision(3) << std::setw(12)
          << stats->total().mean << std::setw(12) << stats->info_exchange().mean << std::setw(12)
          << stats->deployment().mean << '\n';
    } else {
      out << std::setw(10) << 0 << std::setw(12) << "-" << std::setw(12) << "-" << std::setw(12) << "-" << '\n';
    }
  }
  if (!all_complete) {
    err << "error: at least one sweep cell produced no complete traces\n";
    return kNoCompleteTraces;
  }
  return kOk;
}

int cmd_compare(const std::string& blockchain_csv, const std::string& soa_csv, const std::string& out_dir,
                std::ostream& out) {
  std::vector<TraceRow> bc, soa;
  try {
    bc = metrics::import_rows(blockchain_csv);
    soa = metrics::import_rows(soa_csv);
  } catch (const metrics::MetricsError& e) {
    if (e.code() == metrics::MetricsErrc::IoFailure) throw IoFailure(e.what());
    throw;
  }
  const auto rows = compare_rows(bc, soa);
  out << std::right << std::setw(6) << "N" << std::setw(16) << "blockchain_s" << std::setw(12) << "soa_s"
      << std::setw(14) << "overhead_s" << '\n';
  for (const auto& r : rows) {
    out << std::setw(6) << r.n_systems << std::fixed << std::setprecision(3) << std::setw(16) << r.blockchain_mean_s
        << std::setw(12) << r.soa_mean_s << std::setw(14) << r.overhead_s << '\n';
  }
  CommonOptions o;
  o.out_dir = out_dir;
  const auto dir = resolve_out_dir(o, nullptr);
  ensure_dir(dir);
  const auto path = fs::path(dir) / "overhead.json";
  write_text(path, overhead_json(rows));
  out << "wrote " << path.string() << '\n';
  return kOk;
}

}  // namespace

std::vector<TraceRow> rows_for(const sim::ScenarioResult& result) {
  std::vector<TraceRow> rows;
  const auto& cfg = result.config;
  for (const auto& t : result.traces())
    rows.push_back(metrics::make_row(cfg.scenario_id, variant_name(cfg.variant), cfg.n_systems, t));
  return rows;
}

std::vector<OverheadRow> compare_rows(std::span<const TraceRow> blockchain, std::span<const TraceRow> soa) {
  auto by_n = [](std::span<const TraceRow> rows) {
    std::map<std::uint32_t, std::vector<TraceRow>> m;
    for (const auto& r : rows) m[r.n_systems].push_back(r);
    return m;
  };
  const auto bc = by_n(blockchain);
  const auto sa = by_n(soa);
  std::set<std::uint32_t> bn, sn;
  for (const auto& [n, _] : bc) bn.insert(n);
  for (const auto& [n, _] : sa) sn.insert(n);
  if (bn != sn || bn.empty()) throw MismatchedScenarios("blockchain and SOA files cover different system counts");
  std::vector<OverheadRow> out;
  for (const auto n : bn) {
    const auto b = try_aggregate(bc.at(n));
    const auto s = try_aggregate(sa.at(n));
    if (!b || !s) throw MismatchedScenarios("no complete traces for N=" + std::to_string(n));
    out.push_back({n, b->total().mean, s->total().mean, b->total().mean - s->total().mean});
  }
  return out;
}

std::string overhead_json(std::span<const OverheadRow> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"n_systems", r.n_systems},
                   {"blockchain_mean_s", r.blockchain_mean_s},
                   {"soa_mean_s", r.soa_mean_s},
                   {"overhead_s", r.overhead_s}});
  return nlohmann::ordered_json{{"overhead", std::move(arr)}}.dump(2) + "\n";
}

void print_summary(std::ostream& os, const std::string& title, const metrics::AggregateStats& stats) {
  os << title << '\n'
     << "complete traces: " << stats.n_samples << ", incomplete: " << stats.n_incomplete << '\n'
     << std::left << std::setw(20) << "segment" << std::right << std::setw(12) << "mean_s" << std::setw(12)
     << "var_s2" << std::setw(12) << "min_s" << std::setw(12) << "max_s" << '\n';
  for (std::size_t i = 0; i < metrics::kSegmentCount; ++i) {
    const std::string_view name = metrics::kSegmentNames[i];
    const auto& s = stats.segments[i];
    os << std::left << std::setw(20) << name.substr(0, name.size() - 2) << std::right << std::fixed
       << std::setprecision(3) << std::setw(12) << s.mean << std::setw(12) << s.variance << std::setw(12) << s.min
       << std::setw(12) << s.max << '\n';
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blockchain-driven edge federation simulator", "edgefed"};
  app.require_subcommand(1, 1);

  CommonOptions opts;
  std::size_t jobs = 1;
  auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config,-c", opts.config_path, "Scenario JSON file")->required();
    sub->add_option("--out,-o", opts.out_dir, "Output directory (default: $EDGEFED_OUT)");
    sub->add_option("--seed", opts.seed, "Override the scenario seed");
    sub->add_option("--consensus", opts.consensus, "clique | qbft | soa");
    sub->add_option("--runs", opts.runs, "Override the number of runs");
  };
  auto* run = app.add_subcommand("run", "Run one scenario and write its metric files");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "Run every (variant, N) cell of the sweep axes");
  add_common(sweep);
  sweep->add_option("--jobs,-j", jobs, "Worker threads for independent cells");
  auto* validate = app.add_subcommand("validate-config", "Parse and validate a scenario file");
  add_common(validate);

  std::string bc_csv, soa_csv, cmp_out;
  auto* compare = app.add_subcommand("compare", "Per-N overhead of a blockchain result file over an SOA one");
  compare->add_option("blockchain", bc_csv, "Blockchain-variant CSV/JSONL")->required();
  compare->add_option("soa", soa_csv, "SOA CSV/JSONL")->required();
  compare->add_option("--out,-o", cmp_out, "Output directory for overhead.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kConfigInvalid;
  }

  try {
    if (*run) return cmd_run(opts, out, err);
    if (*sweep) return cmd_sweep(opts, jobs, out, err);
    if (*validate) return cmd_validate(opts, out);
    if (*compare) return cmd_compare(bc_csv, soa_csv, cmp_out, out);
  } catch (const sim::ConfigInvalid& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const MismatchedScenarios& e) {
    err << "MismatchedScenarios: " << e.what() << '\n';
    return kMismatchedScenarios;
  } catch (const IoFailure& e) {
    err << "IoFailure: " << e.what() << '\n';
    return kIoFailure;
  } catch (const metrics::MetricsError& e) {
    err << e.what() << '\n';
    return e.code() == metrics::MetricsErrc::IoFailure ? kIoFailure : kConfigInvalid;
  }
  return kConfigInvalid;
}

}  // namespace edgefed::cli
