#include "edgefed/agents/agents.hpp"

#include <algorithm>
#include <cmath>

namespace edgefed::agents {

namespace ev = contract::event;
namespace call = contract::call;

DeploymentJob DeploymentQueue::enqueue(SimTime ready, SimTime service_time, std::uint64_t tag) {
  const SimTime start = std::max(ready, busy_until_);
  DeploymentJob job{tag, ready, start, start + service_time};
  busy_until_ = job.end;
  jobs_.push_back(job);
  return job;
}

std::size_t DeploymentQueue::completed_by(SimTime t) const {
  return static_cast<std::size_t>(
      std::count_if(jobs_.begin(), jobs_.end(), [&](const DeploymentJob& j) { return j.end <= t; }));
}

PricingContext PricingContext::flat() {
  PricingContext ctx;
  ctx.time_factor_curve.fill(1.0);
  return ctx;
}

const std::vector<TariffEntry>& default_tariff_table() {
  static const std::vector<TariffEntry> table = {
      {"ES", Amount::from_micro(100'000)}, {"FR", Amount::from_micro(104'000)}, {"DE", Amount::from_micro(125'000)},
      {"PT", Amount::from_micro(102'000)}, {"IT", Amount::from_micro(106'000)}, {"GR", Amount::from_micro(108'000)},
  };
  return table;
}

std::array<double, 24> default_time_factor_curve() {
  std::array<double, 24> c{};
  for (int h = 0; h < 24; ++h) {
    if (h < 7) c[h] = 0.8;
    else if (h < 10) c[h] = 1.1;
    else if (h < 18) c[h] = 1.0;
    else if (h < 22) c[h] = 1.3;
    else c[h] = 0.9;
  }
  return c;
}

Amount compute_bid_price(const ProviderProfile& profile, const PricingContext& ctx, SeededRng& rng) {
  if (ctx.hour_of_day < 0 || ctx.hour_of_day > 23) throw std::invalid_argument("hour_of_day must be in 0..23");
  if (!(ctx.jitter_fraction >= 0.0 && ctx.jitter_fraction < 1.0))
    throw std::invalid_argument("jitter_fraction must be in [0, 1)");
  const double factor = ctx.time_factor_curve[static_cast<std::size_t>(ctx.hour_of_day)];
  if (!(factor > 0.0)) throw std::invalid_argument("time factors must be > 0");

  const double u = rng.uniform(-1.0, 1.0);
  const double jitter = ctx.jitter_fraction * u;
  const double price = profile.base_tariff.to_double() * factor * (1.0 + jitter);
  return std::max(Amount::from_double(price), Amount::from_micro(1));
}

// ProviderAgent

ProviderAgent::ProviderAgent(ProviderProfile& profile, AgentEnv& env, const PricingContext& pricing, SeededRng& rng,
                             SimTime reaction_delay, TraceSink* sink)
    : profile_(profile), env_(env), pricing_(pricing), rng_(rng), reaction_delay_(reaction_delay), sink_(sink) {}

void ProviderAgent::on_event(const ledger::Notification& n) {
  if (const auto* a = std::get_if<ev::ServiceAnnounced>(&n.event)) on_service_announced(n, *a);
  else if (const auto* c = std::get_if<ev::ProviderChosen>(&n.event)) on_provider_chosen(n, *c);
}

void ProviderAgent::on_service_announced(const ledger::Notification& n, const ev::ServiceAnnounced& a) {
  if (profile_.abstain || n.sender == profile_.address) return;
  if (profile_.abstain_probability > 0.0 && rng_.uniform01() < profile_.abstain_probability) return;
  const Amount price = compute_bid_price(profile_, pricing_, rng_);
  const Address self = profile_.address;
  const AnnId ann = a.ann_id;
  env_.at(env_.now() + reaction_delay_, [this, self, ann, price] {
    env_.submit(self, call::PlaceBid{ann, price});
  });
  ++bids_submitted_;
}

void ProviderAgent::on_provider_chosen(const ledger::Notification&, const ev::ProviderChosen& c) {
  if (c.winner != profile_.address || profile_.crashed) return;
  const auto job = profile_.queue.enqueue(env_.now(), profile_.deploy_model.service_time(), c.ann_id);
  if (sink_) sink_->deployment_started(c.ann_id, job.start);

  contract::OverlayEndpoint endpoint;
  const auto& b = profile_.address.bytes();
  endpoint.ip = "10.1." + std::to_string(b[0]) + "." + std::to_string(b[1] == 0 ? 1 : b[1]);
  endpoint.udp_port = c.consumer_endpoint.udp_port;
  endpoint.vni = c.consumer_endpoint.vni;

  const Address self = profile_.address;
  const AnnId ann = c.ann_id;
  env_.at(job.end + profile_.deploy_model.confirm_overhead, [this, self, ann, endpoint] {
    env_.submit(self, call::ConfirmDeployment{ann, endpoint});
  });
  ++confirms_submitted_;
}

// ConsumerAgent

ConsumerAgent::ConsumerAgent(ConsumerProfile profile, AgentEnv& env, ConsumerTerms terms,
                             metrics::FederationTrace& trace)
    : profile_(std::move(profile)), env_(env), terms_(terms), trace_(trace) {
  trace_.consumer = profile_.address;
}

void ConsumerAgent::start() {
  trace_.announce_submitted = env_.now();
  announce_tx_ = env_.submit(profile_.address, call::AnnounceService{profile_.service_requirements, profile_.endpoint,
                                                                      terms_.sla, terms_.deposit});
}

void ConsumerAgent::on_event(const ledger::Notification& n) {
  if (const auto* a = std::get_if<ev::ServiceAnnounced>(&n.event)) {
    if (announce_tx_ && n.tx_id == *announce_tx_) {
      ann_id_ = a->ann_id;
      trace_.ann_id = a->ann_id;
      trace_.announce_finalized = n.finality_time;
    }
    return;
  }
  const auto ann = contract::ann_id_of(n.event);
  if (!ann_id_ || !ann || *ann != *ann_id_) return;

  if (const auto* b = std::get_if<ev::BidPlaced>(&n.event)) {
    // First finalized block where the bid count reaches the window size; the
    // contract then considers every bid recorded when the choice executes.
    if (!choose_sent_ && b->bid_count >= terms_.min_bids) {
      choose_sent_ = true;
      trace_.second_bid_finalized = n.finality_time;
      const Address self = profile_.address;
      const AnnId id = *ann_id_;
      env_.at(env_.now() + terms_.reaction_delay, [this, self, id] { env_.submit(self, call::ChooseProvider{id}); });
    }
  } else if (const auto* c = std::get_if<ev::ProviderChosen>(&n.event)) {
    trace_.winner = c->winner;
    trace_.winner_finalized = n.finality_time;
  } else if (const auto* d = std::get_if<ev::DeploymentConfirmed>(&n.event)) {
    on_deployment_confirmed(n, *d);
  } else if (std::holds_alternative<ev::FederationClosed>(n.event)) {
    trace_.close_finalized = n.finality_time;
    trace_.complete = true;
    if (on_complete) on_complete();
  }
}

void ConsumerAgent::on_deployment_confirmed(const ledger::Notification& n, const ev::DeploymentConfirmed&) {
  trace_.confirm_finalized = n.finality_time;
  const SimTime done = env_.now() + profile_.attach_time;
  const Address self = profile_.address;
  const AnnId id = *ann_id_;
  env_.at(done, [this, self, id] {
    trace_.established = env_.now();
    env_.submit(self, call::CloseFederation{id});
  });
}

// OracleAgent

OracleAgent::OracleAgent(Address address, AgentEnv& env, SeededRng& rng, QosModel model, SimTime reaction_delay)
    : address_(address), env_(env), rng_(rng), model_(model), reaction_delay_(reaction_delay) {}

void OracleAgent::on_event(const ledger::Notification& n) {
  const auto* closed = std::get_if<ev::FederationClosed>(&n.event);
  if (!closed) return;
  const double availability = rng_.uniform(model_.min_availability, model_.max_availability);
  const double latency_ms = rng_.uniform(model_.min_latency_ms, model_.max_latency_ms);
  call::ReportQos report{closed->ann_id,
                         static_cast<std::uint32_t>(std::clamp(std::llround(availability * 1e6), 0LL, 1'000'000LL)),
                         static_cast<std::int64_t>(std::llround(latency_ms * 1e3))};
  env_.at(env_.now() + reaction_delay_, [this, report] { env_.submit(address_, report); });
  ++reports_;
}

// SOA baseline

SoaOutcome soa_federate(const ConsumerProfile& consumer, std::span<ProviderProfile> providers, SimTime rtt,
                        SimTime start, const PricingContext& pricing, SeededRng& rng) {
  ProviderProfile* best = nullptr;
  Amount best_price;
  for (auto& p : providers) {
    if (p.abstain || p.crashed) continue;
    const Amount price = compute_bid_price(p, pricing, rng);
    if (!best || price < best_price || (price == best_price && p.address < best->address)) {
      best = &p;
      best_price = price;
    }
  }
  if (!best) throw ProviderUnavailable("no provider answered the price query");

  SoaOutcome out;
  out.provider = best->address;
  out.price = best_price;
  auto& t = out.trace;
  t.consumer = consumer.address;
  t.winner = best->address;
  t.announce_submitted = start;
  t.announce_finalized = start;
  const SimTime quoted = start + rtt;
  t.second_bid_finalized = quoted;
  t.winner_finalized = quoted;
  const auto job = best->queue.enqueue(quoted + rtt, best->deploy_model.service_time());
  t.deployment_started = job.start;
  t.confirm_finalized = job.end + rtt;
  t.established = *t.confirm_finalized + consumer.attach_time;
  t.close_finalized = t.established;
  t.complete = true;
  return out;
}

}  // namespace edgefed::agents
