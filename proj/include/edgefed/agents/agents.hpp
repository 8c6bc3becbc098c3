#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgefed/contract/types.hpp"
#include "edgefed/core.hpp"
#include "edgefed/ledger/ledger.hpp"
#include "edgefed/metrics/trace.hpp"
#include "edgefed/rng.hpp"

namespace edgefed::agents {

using contract::AnnId;

struct DeploymentModel {
  SimTime container_start = SimTime::from_micros(1'500'000);
  SimTime vxlan_setup = SimTime::from_micros(500'000);
  SimTime confirm_overhead = SimTime::from_micros(100'000);

  SimTime service_time() const { return container_start + vxlan_setup; }
};

struct DeploymentJob {
  std::uint64_t tag = 0;
  SimTime ready;
  SimTime start;
  SimTime end;
};

/// Single-server FIFO queue: one deployment at a time, in arrival order.
class DeploymentQueue {
 public:
  DeploymentJob enqueue(SimTime ready, SimTime service_time, std::uint64_t tag = 0);

  std::size_t enqueued() const { return jobs_.size(); }
  std::size_t completed_by(SimTime t) const;
  std::size_t pending_at(SimTime t) const { return enqueued() - completed_by(t); }
  const std::vector<DeploymentJob>& jobs() const { return jobs_; }
  SimTime busy_until() const { return busy_until_; }

 private:
  std::vector<DeploymentJob> jobs_;
  SimTime busy_until_;
};

struct ProviderProfile {
  Address address;
  std::string country;
  Amount base_tariff = Amount::from_micro(100'000);
  DeploymentModel deploy_model;
  DeploymentQueue queue;
  /// Never bids or answers price queries.
  bool abstain = false;
  /// Per-announcement chance of not bidding (drawn only when > 0).
  double abstain_probability = 0.0;
  /// Fault injection: wins but never finishes deploying.
  bool crashed = false;
};

struct ConsumerProfile {
  Address address;
  contract::ServiceDescriptor service_requirements;
  contract::OverlayEndpoint endpoint;
  SimTime attach_time = SimTime::from_micros(500'000);
};

struct PricingContext {
  int hour_of_day = 12;
  std::array<double, 24> time_factor_curve{};
  double jitter_fraction = 0.0;

  /// Flat curve (all factors 1.0), hour 12, no jitter.
  static PricingContext flat();
};

struct TariffEntry {
  std::string country;
  Amount tariff;
};

/// Illustrative 6-entry table used when the scenario does not supply one.
const std::vector<TariffEntry>& default_tariff_table();
/// Illustrative 24-hour multiplier curve.
std::array<double, 24> default_time_factor_curve();

/// base_tariff x factor[hour] x (1 + u), u uniform in [-jitter, +jitter],
/// rounded to 6 decimals and never below one micro-unit. Always consumes
/// exactly one draw from rng.
Amount compute_bid_price(const ProviderProfile& profile, const PricingContext& ctx, SeededRng& rng);

/// Hooks an agent uses to act on the world. The scenario kernel implements it
/// over its event queue and ledger; tests can substitute a recorder.
class AgentEnv {
 public:
  virtual ~AgentEnv() = default;
  virtual SimTime now() const = 0;
  virtual void at(SimTime t, std::function<void()> fn) = 0;
  /// Submits a transaction signed by sender at now(); returns the tx id.
  virtual std::uint64_t submit(const Address& sender, contract::ContractCall call) = 0;
};

/// Receives provider-side timestamps that belong in a consumer's trace.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void deployment_started(AnnId ann_id, SimTime t) = 0;
};

class ProviderAgent {
 public:
  ProviderAgent(ProviderProfile& profile, AgentEnv& env, const PricingContext& pricing, SeededRng& rng,
                SimTime reaction_delay, TraceSink* sink = nullptr);

  void on_event(const ledger::Notification& n);
  void on_service_announced(const ledger::Notification& n, const contract::event::ServiceAnnounced& ev);
  void on_provider_chosen(const ledger::Notification& n, const contract::event::ProviderChosen& ev);

  std::size_t bids_submitted() const { return bids_submitted_; }
  std::size_t confirms_submitted() const { return confirms_submitted_; }
  const ProviderProfile& profile() const { return profile_; }

 private:
  ProviderProfile& profile_;
  AgentEnv& env_;
  PricingContext pricing_;
  SeededRng& rng_;
  SimTime reaction_delay_;
  TraceSink* sink_;
  std::size_t bids_submitted_ = 0;
  std::size_t confirms_submitted_ = 0;
};

struct ConsumerTerms {
  contract::SlaTerms sla;
  Amount deposit = Amount::from_micro(10'000'000);
  std::uint32_t min_bids = 2;
  SimTime reaction_delay = SimTime::from_micros(100'000);
};

/// Drives one federation from the consumer side and fills its trace.
class ConsumerAgent {
 public:
  ConsumerAgent(ConsumerProfile profile, AgentEnv& env, ConsumerTerms terms, metrics::FederationTrace& trace);

  /// Submits the announcement at env.now().
  void start();
  void on_event(const ledger::Notification& n);
  void on_deployment_confirmed(const ledger::Notification& n, const contract::event::DeploymentConfirmed& ev);

  std::function<void()> on_complete;
  std::optional<AnnId> ann_id() const { return ann_id_; }
  const ConsumerProfile& profile() const { return profile_; }

 private:
  ConsumerProfile profile_;
  AgentEnv& env_;
  ConsumerTerms terms_;
  metrics::FederationTrace& trace_;
  std::optional<std::uint64_t> announce_tx_;
  std::optional<AnnId> ann_id_;
  bool choose_sent_ = false;
};

struct QosModel {
  double min_availability = 0.95;
  double max_availability = 1.0;
  double min_latency_ms = 5.0;
  double max_latency_ms = 60.0;
};

/// Single authorised QoS reporter: measures each closed federation and reports
/// it so the contract can settle.
class OracleAgent {
 public:
  OracleAgent(Address address, AgentEnv& env, SeededRng& rng, QosModel model, SimTime reaction_delay);
  void on_event(const ledger::Notification& n);
  std::size_t reports() const { return reports_; }

 private:
  Address address_;
  AgentEnv& env_;
  SeededRng& rng_;
  QosModel model_;
  SimTime reaction_delay_;
  std::size_t reports_ = 0;
};

class ProviderUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SoaOutcome {
  metrics::FederationTrace trace;
  Address provider;
  Amount price;
};

/// Baseline federation without a ledger: one parallel price-query round trip,
/// a deployment request round trip, FIFO deployment on the cheapest provider,
/// an HTTP confirmation round trip and the consumer's attach.
/// Price ties go to the lower address. Throws ProviderUnavailable if no provider
/// answers.
SoaOutcome soa_federate(const ConsumerProfile& consumer, std::span<ProviderProfile> providers, SimTime rtt,
                        SimTime start, const PricingContext& pricing, SeededRng& rng);

}  // namespace edgefed::agents
