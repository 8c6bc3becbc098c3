#include <map>
#include <memory>

#include "doctest.h"
#include "edgefed/agents/agents.hpp"
#include "edgefed/contract/federation_contract.hpp"

using namespace edgefed;
using namespace edgefed::agents;

namespace {

SimTime s(double seconds) { return SimTime::from_seconds(seconds); }

/// Records submissions and scheduled actions instead of running a kernel.
class RecordingEnv final : public AgentEnv {
 public:
  SimTime clock;
  std::multimap<SimTime, std::function<void()>> pending;
  std::vector<std::pair<SimTime, contract::ContractCall>> submitted;

  SimTime now() const override { return clock; }
  void at(SimTime t, std::function<void()> fn) override { pending.emplace(t, std::move(fn)); }
  std::uint64_t submit(const Address&, contract::ContractCall call) override {
    submitted.emplace_back(clock, std::move(call));
    return submitted.size() - 1;
  }
  void run() {
    while (!pending.empty()) {
      auto it = pending.begin();
      clock = it->first;
      auto fn = std::move(it->second);
      pending.erase(it);
      fn();
    }
  }
};

ProviderProfile provider(const std::string& label, const char* tariff = "0.10") {
  ProviderProfile p;
  p.address = Address::derive(label);
  p.base_tariff = Amount::parse(tariff);
  return p;
}

ledger::Notification announced(contract::AnnId id, SimTime at) {
  return {1, at, 0, Address::derive("consumer"), contract::event::ServiceAnnounced{id, {"app", 1, 1}}};
}

}  // namespace

TEST_CASE("bid price = base x factor x (1 + jitter)") {
  auto p = provider("p");
  SeededRng rng(1, "pricing");
  auto flat = PricingContext::flat();
  CHECK(compute_bid_price(p, flat, rng) == Amount::parse("0.100000"));
  flat.time_factor_curve[12] = 1.5;
  CHECK(compute_bid_price(p, flat, rng) == Amount::parse("0.150000"));

  auto jittered = PricingContext::flat();
  jittered.jitter_fraction = 0.1;
  for (int i = 0; i < 1000; ++i) {
    const auto price = compute_bid_price(p, jittered, rng);
    CHECK(price >= Amount::parse("0.09"));
    CHECK(price <= Amount::parse("0.11"));
  }
}

TEST_CASE("deployment queue is single-server FIFO") {
  DeploymentQueue q;
  const auto svc = DeploymentModel{}.service_time();
  CHECK(svc == s(2.0));
  const auto t = s(10);
  CHECK(q.enqueue(t, svc).end == s(12));
  CHECK(q.enqueue(t, svc).end == s(14));
  const auto third = q.enqueue(t, svc);
  CHECK(third.start == s(14));
  CHECK(third.end == s(16));
  CHECK(q.completed_by(s(14)) == 2);
  CHECK(q.pending_at(s(13)) == 2);
  // A job arriving after the server idles starts immediately.
  CHECK(q.enqueue(s(20), svc).start == s(20));
}

TEST_CASE("providers bid on announcements unless they abstain") {
  RecordingEnv env;
  auto pricing = PricingContext::flat();
  SeededRng rng(1, "pricing");
  auto p1 = provider("p1");
  auto p2 = provider("p2");
  p2.abstain = true;
  ProviderAgent a1(p1, env, pricing, rng, s(0.1));
  ProviderAgent a2(p2, env, pricing, rng, s(0.1));
  env.clock = s(5);
  a1.on_event(announced(0, s(5)));
  a2.on_event(announced(0, s(5)));
  env.run();
  CHECK(a1.bids_submitted() == 1);
  CHECK(a2.bids_submitted() == 0);
  REQUIRE(env.submitted.size() == 1);
  CHECK(env.submitted[0].first == s(5.1));
  CHECK(std::holds_alternative<contract::call::PlaceBid>(env.submitted[0].second));
}

TEST_CASE("six providers bid on all 24 announcements") {
  RecordingEnv env;
  auto pricing = PricingContext::flat();
  SeededRng rng(1, "pricing");
  std::vector<ProviderProfile> profiles;
  for (int i = 0; i < 6; ++i) profiles.push_back(provider("p" + std::to_string(i)));
  std::vector<std::unique_ptr<ProviderAgent>> agents;
  for (auto& p : profiles) agents.push_back(std::make_unique<ProviderAgent>(p, env, pricing, rng, s(0.1)));
  for (contract::AnnId id = 0; id < 24; ++id)
    for (auto& a : agents) a->on_event(announced(id, s(5)));
  env.run();
  CHECK(env.submitted.size() == 144);
}

TEST_CASE("a winning provider confirms after deployment plus overhead; wins stack") {
  RecordingEnv env;
  auto pricing = PricingContext::flat();
  SeededRng rng(1, "pricing");
  auto p = provider("p");
  ProviderAgent agent(p, env, pricing, rng, s(0.1));
  env.clock = s(10);
  for (contract::AnnId id = 0; id < 3; ++id) {
    agent.on_event({2, s(10), id, Address::derive("c"),
                    contract::event::ProviderChosen{id, p.address, {"10.0.0.1", 4789, 1}}});
  }
  // A win for somebody else is ignored.
  agent.on_event({2, s(10), 9, Address::derive("c"),
                  contract::event::ProviderChosen{9, Address::derive("other"), {}}});
  env.run();
  REQUIRE(env.submitted.size() == 3);
  CHECK(env.submitted[0].first == s(12.1));
  CHECK(env.submitted[1].first == s(14.1));
  CHECK(env.submitted[2].first == s(16.1));
  CHECK(p.queue.jobs().back().end == s(16));
}

TEST_CASE("crashed providers never confirm") {
  RecordingEnv env;
  auto pricing = PricingContext::flat();
  SeededRng rng(1, "pricing");
  auto p = provider("p");
  p.crashed = true;
  ProviderAgent agent(p, env, pricing, rng, s(0.1));
  agent.on_event({2, s(10), 0, Address::derive("c"), contract::event::ProviderChosen{0, p.address, {}}});
  env.run();
  CHECK(agent.confirms_submitted() == 0);
}

TEST_CASE("consumer closes attach_time after observing the confirmation") {
  RecordingEnv env;
  metrics::FederationTrace trace;
  ConsumerProfile profile;
  profile.address = Address::derive("c");
  ConsumerAgent consumer(profile, env, ConsumerTerms{}, trace);
  consumer.start();
  REQUIRE(env.submitted.size() == 1);
  consumer.on_event({1, s(5), 0, profile.address, contract::event::ServiceAnnounced{0, {}}});
  env.clock = s(10);
  consumer.on_event({2, s(10), 1, Address::derive("p1"), contract::event::BidPlaced{0, 1}});
  CHECK(env.submitted.size() == 1);
  consumer.on_event({2, s(10), 2, Address::derive("p2"), contract::event::BidPlaced{0, 2}});
  env.run();
  REQUIRE(env.submitted.size() == 2);
  CHECK(env.submitted[1].first == s(10.1));
  env.clock = s(20);
  consumer.on_event({4, s(20), 4, Address::derive("p2"), contract::event::DeploymentConfirmed{0, {}}});
  env.run();
  REQUIRE(env.submitted.size() == 3);
  CHECK(env.submitted[2].first == s(20.5));
  CHECK(std::holds_alternative<contract::call::CloseFederation>(env.submitted[2].second));
  CHECK(trace.established == s(20.5));
  CHECK(trace.second_bid_finalized == s(10));
}

TEST_CASE("SOA baseline: component sum, cheapest provider, ties to the lower address") {
  ConsumerProfile c;
  c.address = Address::derive("c");
  auto pricing = PricingContext::flat();
  SeededRng rng(1, "pricing");

  std::vector<ProviderProfile> ps{provider("a", "0.12"), provider("b", "0.10"), provider("c2", "0.11")};
  auto out = soa_federate(c, ps, s(0.05), SimTime{}, pricing, rng);
  CHECK(out.provider == ps[1].address);
  CHECK(out.trace.established == s(2.65));
  CHECK(out.trace.complete);

  std::vector<ProviderProfile> tied{provider("x", "0.10"), provider("y", "0.10")};
  const auto lower = std::min(tied[0].address, tied[1].address);
  CHECK(soa_federate(c, tied, s(0.05), SimTime{}, pricing, rng).provider == lower);

  std::vector<ProviderProfile> none;
  CHECK_THROWS_AS(soa_federate(c, none, s(0.05), SimTime{}, pricing, rng), ProviderUnavailable);
}

TEST_CASE("SOA selection equals the auction winner for the same zero-jitter prices") {
  ConsumerProfile c;
  c.address = Address::derive("c");
  auto pricing = PricingContext::flat();
  SeededRng rng(2, "pricing");
  std::vector<ProviderProfile> ps{provider("a", "0.125"), provider("b", "0.104"), provider("d", "0.108")};
  std::vector<contract::Bid> bids;
  for (std::size_t i = 0; i < ps.size(); ++i)
    bids.push_back({0, ps[i].address, compute_bid_price(ps[i], pricing, rng), 2, i});
  const auto winner = contract::select_winner(bids);
  REQUIRE(winner);
  CHECK(soa_federate(c, ps, s(0.05), SimTime{}, pricing, rng).provider == winner->provider);
}
