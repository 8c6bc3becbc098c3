#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "edgefed/agents/agents.hpp"
#include "edgefed/contract/federation_contract.hpp"
#include "edgefed/ledger/ledger.hpp"
#include "edgefed/metrics/trace.hpp"

namespace edgefed::sim {

class ConfigInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooFewSystems : public ConfigInvalid {
 public:
  using ConfigInvalid::ConfigInvalid;
};

struct Split {
  std::uint32_t consumers = 0;
  std::uint32_t providers = 0;
  bool operator==(const Split&) const = default;
};

/// Consumer/provider split following the 80:20 stub ratio. The five reference
/// sizes map to fixed splits; any other n gets max(1, round(0.2 n)) providers.
Split generate_topology(std::uint32_t n_systems);

/// Which federation path a scenario exercises.
enum class Variant { Clique, Qbft, Soa };
std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

enum class ConcurrencyMode { Single, AllConsumersSimultaneous };
enum class ValidatorPolicy { ProvidersPlusBootstrap, AllSystems };

struct AgentsConfig {
  SimTime reaction_delay = SimTime::from_micros(100'000);
  agents::DeploymentModel deployment;
  SimTime attach_time = SimTime::from_micros(500'000);
  SimTime rtt = SimTime::from_micros(50'000);
  std::vector<agents::TariffEntry> tariffs = agents::default_tariff_table();
  std::array<double, 24> time_factor_curve = agents::default_time_factor_curve();
  int hour_of_day = 12;
  double jitter_fraction = 0.05;
  double abstain_probability = 0.0;
  Amount deposit = Amount::from_micro(10'000'000);
  contract::SlaTerms sla;
  Amount genesis_balance = Amount::from_micro(1'000'000'000);
  agents::QosModel qos;
  bool soa_shared_queues = false;
  /// Provider indices (0-based among providers) that never finish deploying.
  std::vector<std::uint32_t> crashed_providers;
};

/// Ledger timing; the algorithm itself follows ScenarioConfig::variant.
struct ConsensusParams {
  SimTime block_period = SimTime::from_micros(5'000'000);
  SimTime message_delay = SimTime::from_micros(50'000);
  SimTime validation_cost = SimTime::from_micros(50'000);
  std::size_t max_block_txs = 0;
};

struct OutputConfig {
  std::vector<std::string> formats = {"csv"};
  bool chain_dump = false;
  bool event_log = false;
  std::optional<std::string> dir;
};

struct SweepConfig {
  std::vector<std::uint32_t> n_values = {2, 10, 15, 25, 30};
  std::vector<Variant> variants = {Variant::Clique, Variant::Qbft, Variant::Soa};
};

struct ScenarioConfig {
  std::string scenario_id = "scenario";
  Variant variant = Variant::Clique;
  std::uint32_t n_systems = 2;
  std::optional<Split> split;
  ConcurrencyMode concurrency = ConcurrencyMode::AllConsumersSimultaneous;
  ValidatorPolicy validators = ValidatorPolicy::ProvidersPlusBootstrap;
  ConsensusParams consensus;
  AgentsConfig agents;
  std::uint32_t runs = 20;
  std::uint64_t seed = 1;
  SimTime timeout = SimTime::from_micros(300'000'000);
  OutputConfig output;
  std::optional<SweepConfig> sweep;

  ledger::Algorithm algorithm() const {
    return variant == Variant::Qbft ? ledger::Algorithm::Qbft : ledger::Algorithm::Clique;
  }
  Split resolved_split() const { return split ? *split : generate_topology(n_systems); }
  /// Throws ConfigInvalid describing the first violated constraint.
  void validate() const;
};

/// Parses the JSON scenario document. Unknown keys are rejected.
ScenarioConfig parse_scenario_json(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& cfg);

struct SystemRoles {
  std::vector<Address> consumers;
  std::vector<Address> providers;
  Address bootstrap;
  Address oracle;
  std::vector<Address> validators;
};

/// Deterministic addresses and roles for a scenario.
SystemRoles assign_roles(const ScenarioConfig& cfg);

struct RunResult {
  std::uint32_t run = 0;
  std::vector<metrics::FederationTrace> traces;  ///< one per consumer, consumer order
  std::vector<ledger::Block> chain;              ///< empty for the SOA variant
  contract::Genesis genesis;
  std::vector<Digest> state_digests;  ///< contract digest after each block
  Amount funds_at_genesis;
  bool funds_conserved = true;  ///< checked after every block
  std::vector<std::size_t> jobs_enqueued;  ///< per provider
  std::vector<std::size_t> jobs_completed;
  std::vector<std::vector<agents::DeploymentJob>> provider_jobs;
  std::size_t settled = 0;
  SimTime end_time;
};

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<RunResult> runs;
  /// Non-fatal configuration remarks (e.g. QBFT below 4 validators).
  std::vector<std::string> warnings;

  /// Traces of every run, ordered by (run, consumer).
  std::vector<metrics::FederationTrace> traces() const;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);
RunResult run_single(const ScenarioConfig& cfg, std::uint32_t run_index);

/// Replays a recorded chain into a fresh contract; returns the digest after
/// each block.
std::vector<Digest> replay_chain(const contract::Genesis& genesis, const std::vector<ledger::Block>& chain);

}  // namespace edgefed::sim
