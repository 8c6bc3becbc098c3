#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "edgefed/sim/scenario.hpp"
#include "json.hpp"

namespace edgefed::sim {

using nlohmann::json;

Split generate_topology(std::uint32_t n) {
  if (n < 2) throw TooFewSystems("at least 2 systems are required, got " + std::to_string(n));
  switch (n) {
    case 2: return {1, 1};
    case 10: return {8, 2};
    case 15: return {12, 3};
    case 25: return {20, 5};
    case 30: return {24, 6};
    default: break;
  }
  const auto providers = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(0.2 * n)));
  return {n - providers, providers};
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Clique: return "clique";
    case Variant::Qbft: return "qbft";
    case Variant::Soa: return "soa";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  if (s == "clique" || s == "Clique") return Variant::Clique;
  if (s == "qbft" || s == "Qbft" || s == "QBFT") return Variant::Qbft;
  if (s == "soa" || s == "Soa" || s == "SOA") return Variant::Soa;
  throw ConfigInvalid("unknown consensus/variant: " + std::string(s));
}

void ScenarioConfig::validate() const {
  if (scenario_id.empty()) throw ConfigInvalid("scenario_id must not be empty");
  if (scenario_id.find_first_of("/\\,") != std::string::npos)
    throw ConfigInvalid("scenario_id must not contain path separators or commas");
  const Split s = resolved_split();
  if (s.consumers < 1) throw ConfigInvalid("at least one consumer is required");
  if (s.providers < 1) throw ConfigInvalid("at least one provider is required");
  if (s.consumers + s.providers != n_systems) throw ConfigInvalid("split must sum to n_systems");
  if (runs < 1) throw ConfigInvalid("runs must be >= 1");
  if (timeout <= SimTime{}) throw ConfigInvalid("timeout_s must be > 0");
  if (consensus.block_period <= SimTime{}) throw ConfigInvalid("block_period_s must be > 0");
  if (consensus.message_delay < SimTime{} || consensus.validation_cost < SimTime{})
    throw ConfigInvalid("consensus delays must be >= 0");
  const auto& a = agents;
  for (auto t : {a.reaction_delay, a.deployment.container_start, a.deployment.vxlan_setup,
                 a.deployment.confirm_overhead, a.attach_time, a.rtt})
    if (t < SimTime{}) throw ConfigInvalid("agent timings must be >= 0");
  if (a.tariffs.empty()) throw ConfigInvalid("tariff table must not be empty");
  for (const auto& t : a.tariffs)
    if (t.tariff <= Amount{}) throw ConfigInvalid("tariffs must be > 0");
  for (double f : a.time_factor_curve)
    if (!(f > 0.0)) throw ConfigInvalid("time factors must be > 0");
  if (a.hour_of_day < 0 || a.hour_of_day > 23) throw ConfigInvalid("hour_of_day must be in 0..23");
  if (!(a.jitter_fraction >= 0.0 && a.jitter_fraction < 1.0)) throw ConfigInvalid("jitter_fraction must be in [0,1)");
  if (!(a.abstain_probability >= 0.0 && a.abstain_probability <= 1.0))
    throw ConfigInvalid("abstain_probability must be in [0,1]");
  if (a.sla.min_availability_ppm > 1'000'000) throw ConfigInvalid("sla.min_availability must be in [0,1]");
  if (a.sla.penalty < Amount{} || a.deposit < a.sla.penalty) throw ConfigInvalid("deposit must cover sla.penalty");
  if (a.genesis_balance < a.deposit) throw ConfigInvalid("genesis_balance must cover the deposit");
  if (a.qos.min_availability > a.qos.max_availability || a.qos.min_latency_ms > a.qos.max_latency_ms)
    throw ConfigInvalid("qos ranges must be ordered");
  for (auto idx : a.crashed_providers)
    if (idx >= s.providers) throw ConfigInvalid("crashed_providers index out of range");
  for (const auto& f : output.formats)
    if (f != "csv" && f != "jsonl") throw ConfigInvalid("output format must be csv or jsonl");
  if (sweep) {
    if (sweep->n_values.empty() || sweep->variants.empty()) throw ConfigInvalid("sweep axes must not be empty");
    for (auto n : sweep->n_values) generate_topology(n);
  }
}

namespace {

/// Rejects keys outside `allowed`.
void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigInvalid(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.contains(k)) throw ConfigInvalid("unknown key '" + k + "' in " + where);
}

SimTime seconds(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigInvalid(what + " must be a number of seconds");
  return SimTime::from_seconds(v.get<double>());
}

Amount amount(const json& v, const std::string& what) {
  if (v.is_string()) {
    try {
      return Amount::parse(v.get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigInvalid(what + ": " + e.what());
    }
  }
  if (!v.is_number()) throw ConfigInvalid(what + " must be a number");
  return Amount::from_double(v.get<double>());
}

template <class T>
T number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigInvalid(what + " must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0))
      throw ConfigInvalid(what + " must be a non-negative integer");
  }
  return v.get<T>();
}

void parse_topology(const json& j, ScenarioConfig& c) {
  check_keys(j, {"n_systems", "split", "concurrency", "validators"}, "topology");
  if (j.contains("n_systems")) c.n_systems = number<std::uint32_t>(j["n_systems"], "topology.n_systems");
  if (j.contains("split")) {
    const auto& s = j["split"];
    if (!s.is_array() || s.size() != 2) throw ConfigInvalid("topology.split must be [consumers, providers]");
    c.split = Split{number<std::uint32_t>(s[0], "split[0]"), number<std::uint32_t>(s[1], "split[1]")};
  }
  if (j.contains("concurrency")) {
    const auto m = j["concurrency"].get<std::string>();
    if (m == "single") c.concurrency = ConcurrencyMode::Single;
    else if (m == "all_simultaneous") c.concurrency = ConcurrencyMode::AllConsumersSimultaneous;
    else throw ConfigInvalid("topology.concurrency must be single or all_simultaneous");
  }
  if (j.contains("validators")) {
    const auto v = j["validators"].get<std::string>();
    if (v == "providers_plus_bootstrap") c.validators = ValidatorPolicy::ProvidersPlusBootstrap;
    else if (v == "all") c.validators = ValidatorPolicy::AllSystems;
    else throw ConfigInvalid("topology.validators must be providers_plus_bootstrap or all");
  }
}

void parse_consensus(const json& j, ScenarioConfig& c) {
  check_keys(j, {"algorithm", "block_period_s", "message_delay_s", "validation_cost_s", "max_block_txs"}, "consensus");
  if (j.contains("algorithm")) c.variant = parse_variant(j["algorithm"].get<std::string>());
  if (j.contains("block_period_s")) c.consensus.block_period = seconds(j["block_period_s"], "block_period_s");
  if (j.contains("message_delay_s")) c.consensus.message_delay = seconds(j["message_delay_s"], "message_delay_s");
  if (j.contains("validation_cost_s"))
    c.consensus.validation_cost = seconds(j["validation_cost_s"], "validation_cost_s");
  if (j.contains("max_block_txs")) c.consensus.max_block_txs = number<std::size_t>(j["max_block_txs"], "max_block_txs");
}

void parse_agents(const json& j, AgentsConfig& a) {
  check_keys(j,
             {"reaction_delay_s", "deployment", "attach_time_s", "rtt_s", "tariffs", "time_factor_curve", "hour_of_day",
              "jitter_fraction", "abstain_probability", "deposit", "sla", "genesis_balance", "qos",
              "soa_shared_queues", "crashed_providers"},
             "agents");
  if (j.contains("reaction_delay_s")) a.reaction_delay = seconds(j["reaction_delay_s"], "reaction_delay_s");
  if (j.contains("deployment")) {
    const auto& d = j["deployment"];
    check_keys(d, {"container_start_s", "vxlan_setup_s", "confirm_overhead_s"}, "agents.deployment");
    if (d.contains("container_start_s")) a.deployment.container_start = seconds(d["container_start_s"], "container_start_s");
    if (d.contains("vxlan_setup_s")) a.deployment.vxlan_setup = seconds(d["vxlan_setup_s"], "vxlan_setup_s");
    if (d.contains("confirm_overhead_s"))
      a.deployment.confirm_overhead = seconds(d["confirm_overhead_s"], "confirm_overhead_s");
  }
  if (j.contains("attach_time_s")) a.attach_time = seconds(j["attach_time_s"], "attach_time_s");
  if (j.contains("rtt_s")) a.rtt = seconds(j["rtt_s"], "rtt_s");
  if (j.contains("tariffs")) {
    if (!j["tariffs"].is_array()) throw ConfigInvalid("agents.tariffs must be an array");
    a.tariffs.clear();
    for (const auto& t : j["tariffs"]) {
      check_keys(t, {"country", "base_tariff"}, "agents.tariffs[]");
      a.tariffs.push_back({t.value("country", std::string{}), amount(t.at("base_tariff"), "base_tariff")});
    }
  }
  if (j.contains("time_factor_curve")) {
    const auto& c = j["time_factor_curve"];
    if (!c.is_array() || c.size() != 24) throw ConfigInvalid("agents.time_factor_curve must have 24 entries");
    for (std::size_t h = 0; h < 24; ++h) a.time_factor_curve[h] = number<double>(c[h], "time_factor_curve");
  }
  if (j.contains("hour_of_day")) a.hour_of_day = number<int>(j["hour_of_day"], "hour_of_day");
  if (j.contains("jitter_fraction")) a.jitter_fraction = number<double>(j["jitter_fraction"], "jitter_fraction");
  if (j.contains("abstain_probability"))
    a.abstain_probability = number<double>(j["abstain_probability"], "abstain_probability");
  if (j.contains("deposit")) a.deposit = amount(j["deposit"], "deposit");
  if (j.contains("sla")) {
    const auto& s = j["sla"];
    check_keys(s, {"min_availability", "max_latency_ms", "penalty"}, "agents.sla");
    if (s.contains("min_availability")) {
      const double v = number<double>(s["min_availability"], "min_availability");
      if (v < 0.0 || v > 1.0) throw ConfigInvalid("sla.min_availability must be in [0,1]");
      a.sla.min_availability_ppm = static_cast<std::uint32_t>(std::llround(v * 1e6));
    }
    if (s.contains("max_latency_ms"))
      a.sla.max_latency_us = std::llround(number<double>(s["max_latency_ms"], "max_latency_ms") * 1e3);
    if (s.contains("penalty")) a.sla.penalty = amount(s["penalty"], "penalty");
  }
  if (j.contains("genesis_balance")) a.genesis_balance = amount(j["genesis_balance"], "genesis_balance");
  if (j.contains("qos")) {
    const auto& q = j["qos"];
    check_keys(q, {"min_availability", "max_availability", "min_latency_ms", "max_latency_ms"}, "agents.qos");
    if (q.contains("min_availability")) a.qos.min_availability = number<double>(q["min_availability"], "qos");
    if (q.contains("max_availability")) a.qos.max_availability = number<double>(q["max_availability"], "qos");
    if (q.contains("min_latency_ms")) a.qos.min_latency_ms = number<double>(q["min_latency_ms"], "qos");
    if (q.contains("max_latency_ms")) a.qos.max_latency_ms = number<double>(q["max_latency_ms"], "qos");
  }
  if (j.contains("soa_shared_queues")) a.soa_shared_queues = j["soa_shared_queues"].get<bool>();
  if (j.contains("crashed_providers"))
    a.crashed_providers = j["crashed_providers"].get<std::vector<std::uint32_t>>();
}

void parse_output(const json& j, OutputConfig& o) {
  check_keys(j, {"formats", "chain_dump", "event_log", "dir"}, "output");
  if (j.contains("formats")) o.formats = j["formats"].get<std::vector<std::string>>();
  if (j.contains("chain_dump")) o.chain_dump = j["chain_dump"].get<bool>();
  if (j.contains("event_log")) o.event_log = j["event_log"].get<bool>();
  if (j.contains("dir")) o.dir = j["dir"].get<std::string>();
}

void parse_sweep(const json& j, ScenarioConfig& c) {
  check_keys(j, {"n_values", "variants"}, "sweep");
  SweepConfig s;
  if (j.contains("n_values")) s.n_values = j["n_values"].get<std::vector<std::uint32_t>>();
  if (j.contains("variants")) {
    s.variants.clear();
    for (const auto& v : j["variants"]) s.variants.push_back(parse_variant(v.get<std::string>()));
  }
  c.sweep = s;
}

}  // namespace

ScenarioConfig parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(std::string("malformed JSON: ") + e.what());
  }
  ScenarioConfig c;
  try {
    check_keys(j, {"scenario_id", "topology", "consensus", "agents", "runs", "seed", "timeout_s", "output", "sweep"},
               "scenario");
    if (j.contains("scenario_id")) c.scenario_id = j["scenario_id"].get<std::string>();
    if (j.contains("topology")) parse_topology(j["topology"], c);
    if (j.contains("consensus")) parse_consensus(j["consensus"], c);
    if (j.contains("agents")) parse_agents(j["agents"], c.agents);
    if (j.contains("runs")) c.runs = number<std::uint32_t>(j["runs"], "runs");
    if (j.contains("seed")) c.seed = number<std::uint64_t>(j["seed"], "seed");
    if (j.contains("timeout_s")) c.timeout = seconds(j["timeout_s"], "timeout_s");
    if (j.contains("output")) parse_output(j["output"], c.output);
    if (j.contains("sweep")) parse_sweep(j["sweep"], c);
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("bad value: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigInvalid("cannot read config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario_json(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["scenario_id"] = c.scenario_id;
  auto& t = j["topology"];
  t["n_systems"] = c.n_systems;
  if (c.split) t["split"] = {c.split->consumers, c.split->providers};
  t["concurrency"] = c.concurrency == ConcurrencyMode::Single ? "single" : "all_simultaneous";
  t["validators"] = c.validators == ValidatorPolicy::AllSystems ? "all" : "providers_plus_bootstrap";
  auto& k = j["consensus"];
  k["algorithm"] = std::string(to_string(c.variant));
  k["block_period_s"] = c.consensus.block_period.seconds();
  k["message_delay_s"] = c.consensus.message_delay.seconds();
  k["validation_cost_s"] = c.consensus.validation_cost.seconds();
  k["max_block_txs"] = c.consensus.max_block_txs;
  const auto& a = c.agents;
  auto& g = j["agents"];
  g["reaction_delay_s"] = a.reaction_delay.seconds();
  g["deployment"] = {{"container_start_s", a.deployment.container_start.seconds()},
                     {"vxlan_setup_s", a.deployment.vxlan_setup.seconds()},
                     {"confirm_overhead_s", a.deployment.confirm_overhead.seconds()}};
  g["attach_time_s"] = a.attach_time.seconds();
  g["rtt_s"] = a.rtt.seconds();
  auto tariffs = nlohmann::ordered_json::array();
  for (const auto& e : a.tariffs) tariffs.push_back({{"country", e.country}, {"base_tariff", e.tariff.to_string()}});
  g["tariffs"] = tariffs;
  g["time_factor_curve"] = a.time_factor_curve;
  g["hour_of_day"] = a.hour_of_day;
  g["jitter_fraction"] = a.jitter_fraction;
  g["abstain_probability"] = a.abstain_probability;
  g["deposit"] = a.deposit.to_string();
  g["sla"] = {{"min_availability", a.sla.min_availability_ppm / 1e6},
              {"max_latency_ms", static_cast<double>(a.sla.max_latency_us) / 1e3},
              {"penalty", a.sla.penalty.to_string()}};
  g["genesis_balance"] = a.genesis_balance.to_string();
  g["qos"] = {{"min_availability", a.qos.min_availability},
              {"max_availability", a.qos.max_availability},
              {"min_latency_ms", a.qos.min_latency_ms},
              {"max_latency_ms", a.qos.max_latency_ms}};
  g["soa_shared_queues"] = a.soa_shared_queues;
  g["crashed_providers"] = a.crashed_providers;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["timeout_s"] = c.timeout.seconds();
  auto& o = j["output"];
  o["formats"] = c.output.formats;
  o["chain_dump"] = c.output.chain_dump;
  o["event_log"] = c.output.event_log;
  if (c.output.dir) o["dir"] = *c.output.dir;
  if (c.sweep) {
    auto& s = j["sweep"];
    s["n_values"] = c.sweep->n_values;
    auto vs = nlohmann::ordered_json::array();
    for (auto v : c.sweep->variants) vs.push_back(std::string(to_string(v)));
    s["variants"] = vs;
  }
  return j.dump(2);
}

}  // namespace edgefed::sim
