#include "edgefed/sim/scenario.hpp"

#include <algorithm>
#include <memory>

#include "edgefed/sim/event_queue.hpp"

namespace edgefed::sim {

namespace {

using agents::ProviderProfile;
using contract::FederationContract;
using metrics::FederationTrace;

class KernelEnv final : public agents::AgentEnv {
 public:
  KernelEnv(EventQueue& q, ledger::Ledger& l) : queue_(q), ledger_(l) {}
  SimTime now() const override { return queue_.now(); }
  void at(SimTime t, std::function<void()> fn) override { queue_.schedule(t, std::move(fn), "agent"); }
  std::uint64_t submit(const Address& sender, contract::ContractCall call) override {
    return ledger_.submit(sender, std::move(call), queue_.now());
  }

 private:
  EventQueue& queue_;
  ledger::Ledger& ledger_;
};

class ConsumerTraceSink final : public agents::TraceSink {
 public:
  explicit ConsumerTraceSink(std::vector<FederationTrace>& traces) : traces_(traces) {}
  void deployment_started(contract::AnnId ann_id, SimTime t) override {
    for (auto& tr : traces_)
      if (tr.ann_id == ann_id) tr.deployment_started = t;
  }

 private:
  std::vector<FederationTrace>& traces_;
};

std::vector<ProviderProfile> make_providers(const ScenarioConfig& cfg, const SystemRoles& roles) {
  std::vector<ProviderProfile> out;
  const auto& a = cfg.agents;
  for (std::size_t i = 0; i < roles.providers.size(); ++i) {
    ProviderProfile p;
    p.address = roles.providers[i];
    const auto& tariff = a.tariffs[i % a.tariffs.size()];
    p.country = tariff.country;
    p.base_tariff = tariff.tariff;
    p.deploy_model = a.deployment;
    p.abstain_probability = a.abstain_probability;
    p.crashed = std::find(a.crashed_providers.begin(), a.crashed_providers.end(), i) != a.crashed_providers.end();
    out.push_back(std::move(p));
  }
  return out;
}

agents::ConsumerProfile make_consumer(const ScenarioConfig& cfg, const Address& addr, std::size_t index) {
  agents::ConsumerProfile c;
  c.address = addr;
  c.service_requirements = {"app-" + std::to_string(index), 1, 100};
  c.endpoint.ip = "10.0." + std::to_string(index / 250) + "." + std::to_string(index % 250 + 1);
  c.endpoint.udp_port = 4789;
  c.endpoint.vni = static_cast<std::uint32_t>(100 + index);
  c.attach_time = cfg.agents.attach_time;
  return c;
}

agents::PricingContext pricing_context(const ScenarioConfig& cfg) {
  agents::PricingContext ctx;
  ctx.hour_of_day = cfg.agents.hour_of_day;
  ctx.time_factor_curve = cfg.agents.time_factor_curve;
  ctx.jitter_fraction = cfg.agents.jitter_fraction;
  return ctx;
}

contract::Genesis make_genesis(const ScenarioConfig& cfg, const SystemRoles& roles) {
  contract::Genesis g;
  for (const auto& a : roles.consumers) g.balances[a] = cfg.agents.genesis_balance;
  for (const auto& a : roles.providers) g.balances[a] = cfg.agents.genesis_balance;
  g.balances[roles.oracle] = cfg.agents.genesis_balance;
  g.oracles.insert(roles.oracle);
  g.min_bids = static_cast<std::uint32_t>(std::min<std::size_t>(2, roles.providers.size()));
  return g;
}

void finish_run(RunResult& r, const std::vector<ProviderProfile>& providers, SimTime end) {
  r.end_time = end;
  for (const auto& p : providers) {
    r.jobs_enqueued.push_back(p.queue.enqueued());
    r.jobs_completed.push_back(p.queue.completed_by(end));
    r.provider_jobs.push_back(p.queue.jobs());
  }
}

RunResult run_ledger(const ScenarioConfig& cfg, std::uint32_t run_index) {
  const SystemRoles roles = assign_roles(cfg);
  RunResult result;
  result.run = run_index;
  result.genesis = make_genesis(cfg, roles);

  FederationContract contract(result.genesis);
  result.funds_at_genesis = contract.total_funds();

  ledger::ConsensusConfig cc;
  cc.algorithm = cfg.algorithm();
  cc.block_period = cfg.consensus.block_period;
  cc.message_delay = cfg.consensus.message_delay;
  cc.validation_cost = cfg.consensus.validation_cost;
  cc.validators = roles.validators;
  cc.max_block_txs = cfg.consensus.max_block_txs;

  ledger::Ledger chain(cc, [&contract](const ledger::Transaction& tx, std::uint64_t height) {
    ledger::Receipt r;
    try {
      r.events = contract.execute(tx.sender, tx.payload, height);
    } catch (const contract::ContractError& e) {
      r.error = e.code();
    }
    return r;
  });

  EventQueue queue;
  KernelEnv env(queue, chain);

  SeededRng pricing_rng(cfg.seed, "pricing", run_index);
  SeededRng qos_rng(cfg.seed, "qos", run_index);
  const auto pricing = pricing_context(cfg);

  auto providers = make_providers(cfg, roles);
  std::vector<FederationTrace> traces(roles.consumers.size());
  ConsumerTraceSink sink(traces);

  agents::ConsumerTerms terms;
  terms.sla = cfg.agents.sla;
  terms.deposit = cfg.agents.deposit;
  terms.min_bids = result.genesis.min_bids;
  terms.reaction_delay = cfg.agents.reaction_delay;

  std::vector<std::unique_ptr<agents::ConsumerAgent>> consumers;
  for (std::size_t i = 0; i < roles.consumers.size(); ++i) {
    traces[i].run = run_index;
    traces[i].consumer_index = static_cast<std::uint32_t>(i);
    consumers.push_back(
        std::make_unique<agents::ConsumerAgent>(make_consumer(cfg, roles.consumers[i], i), env, terms, traces[i]));
  }
  std::vector<std::unique_ptr<agents::ProviderAgent>> provider_agents;
  for (auto& p : providers)
    provider_agents.push_back(
        std::make_unique<agents::ProviderAgent>(p, env, pricing, pricing_rng, cfg.agents.reaction_delay, &sink));
  agents::OracleAgent oracle(roles.oracle, env, qos_rng, cfg.agents.qos, cfg.agents.reaction_delay);

  for (auto& c : consumers) chain.subscribe_events(std::nullopt, [&c = *c](const auto& n) { c.on_event(n); });
  for (auto& p : provider_agents) chain.subscribe_events(std::nullopt, [&p = *p](const auto& n) { p.on_event(n); });
  chain.subscribe_events(contract::EventKind::FederationClosed, [&oracle](const auto& n) { oracle.on_event(n); });

  // Participants are registered before the workflow starts.
  std::vector<std::pair<Address, contract::ContractCall>> registrations;
  for (std::size_t i = 0; i < roles.consumers.size(); ++i)
    registrations.emplace_back(roles.consumers[i], contract::call::RegisterOperator{"mec-c" + std::to_string(i)});
  for (std::size_t i = 0; i < roles.providers.size(); ++i)
    registrations.emplace_back(roles.providers[i], contract::call::RegisterOperator{"mec-p" + std::to_string(i)});
  const auto& genesis = chain.genesis(registrations);
  result.state_digests.push_back(contract.state_digest());
  queue.schedule(genesis.finality_time, [&chain, &queue] { chain.deliver_finalized(queue.now()); }, "deliver");

  if (cfg.concurrency == ConcurrencyMode::AllConsumersSimultaneous) {
    for (auto& c : consumers) queue.schedule(SimTime{}, [&c = *c] { c.start(); }, "announce");
  } else {
    for (std::size_t i = 0; i + 1 < consumers.size(); ++i) {
      auto* next = consumers[i + 1].get();
      consumers[i]->on_complete = [&queue, next] { queue.schedule(queue.now(), [next] { next->start(); }, "announce"); };
    }
    queue.schedule(SimTime{}, [&c = *consumers.front()] { c.start(); }, "announce");
  }

  const std::size_t expected = roles.consumers.size();
  auto all_settled = [&] {
    std::size_t settled = 0;
    for (const auto& [id, rec] : contract.federations())
      if (rec.phase == contract::Phase::Settled) ++settled;
    return settled == expected && chain.mempool_size() == 0;
  };

  std::function<void(SimTime)> produce = [&](SimTime t) {
    const auto& block = chain.produce_block(t);
    result.state_digests.push_back(contract.state_digest());
    if (contract.total_funds() != result.funds_at_genesis) result.funds_conserved = false;
    queue.schedule(block.finality_time, [&chain, &queue] { chain.deliver_finalized(queue.now()); }, "deliver");
    const SimTime next = t + cfg.consensus.block_period;
    if (!all_settled() && next <= cfg.timeout) queue.schedule(next, [&produce, next] { produce(next); }, "block");
  };
  queue.schedule(cfg.consensus.block_period, [&produce, &cfg] { produce(cfg.consensus.block_period); }, "block");

  queue.run_until(cfg.timeout);

  for (const auto& [id, rec] : contract.federations())
    if (rec.phase == contract::Phase::Settled) ++result.settled;
  result.chain = chain.chain();
  result.traces = std::move(traces);
  finish_run(result, providers, queue.now());
  return result;
}

RunResult run_soa(const ScenarioConfig& cfg, std::uint32_t run_index) {
  const SystemRoles roles = assign_roles(cfg);
  RunResult result;
  result.run = run_index;
  SeededRng pricing_rng(cfg.seed, "pricing", run_index);
  const auto pricing = pricing_context(cfg);
  auto shared = make_providers(cfg, roles);

  SimTime next_start{};
  for (std::size_t i = 0; i < roles.consumers.size(); ++i) {
    const auto consumer = make_consumer(cfg, roles.consumers[i], i);
    const SimTime start = cfg.concurrency == ConcurrencyMode::Single ? next_start : SimTime{};
    FederationTrace trace;
    trace.consumer = consumer.address;
    trace.announce_submitted = start;
    try {
      if (cfg.agents.soa_shared_queues) {
        trace = agents::soa_federate(consumer, shared, cfg.agents.rtt, start, pricing, pricing_rng).trace;
      } else {
        // Same deployment model and FIFO discipline, no contention from other consumers.
        auto own = make_providers(cfg, roles);
        auto out = agents::soa_federate(consumer, own, cfg.agents.rtt, start, pricing, pricing_rng);
        for (std::size_t p = 0; p < own.size(); ++p)
          for (const auto& job : own[p].queue.jobs()) shared[p].queue.enqueue(job.start, job.end - job.start, i);
        trace = out.trace;
      }
      if (trace.established && *trace.established > cfg.timeout) trace.complete = false;
    } catch (const agents::ProviderUnavailable&) {
      trace.complete = false;
    }
    trace.run = run_index;
    trace.consumer_index = static_cast<std::uint32_t>(i);
    trace.ann_id = i;
    if (trace.established) next_start = *trace.established;
    result.traces.push_back(std::move(trace));
  }
  SimTime end{};
  for (const auto& t : result.traces)
    if (t.established) end = std::max(end, *t.established);
  finish_run(result, shared, end);
  return result;
}

}  // namespace

SystemRoles assign_roles(const ScenarioConfig& cfg) {
  const Split split = cfg.resolved_split();
  SystemRoles r;
  for (std::uint32_t i = 0; i < cfg.n_systems; ++i) {
    const auto addr = Address::derive("edgefed/mec/" + std::to_string(i));
    (i < split.consumers ? r.consumers : r.providers).push_back(addr);
  }
  r.bootstrap = Address::derive("edgefed/bootstrap");
  r.oracle = Address::derive("edgefed/oracle");
  if (cfg.validators == ValidatorPolicy::AllSystems) {
    r.validators = r.consumers;
    r.validators.insert(r.validators.end(), r.providers.begin(), r.providers.end());
  } else {
    r.validators.push_back(r.bootstrap);
    r.validators.insert(r.validators.end(), r.providers.begin(), r.providers.end());
  }
  return r;
}

std::vector<FederationTrace> ScenarioResult::traces() const {
  std::vector<FederationTrace> out;
  for (const auto& r : runs) out.insert(out.end(), r.traces.begin(), r.traces.end());
  return out;
}

RunResult run_single(const ScenarioConfig& cfg, std::uint32_t run_index) {
  return cfg.variant == Variant::Soa ? run_soa(cfg, run_index) : run_ledger(cfg, run_index);
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult result;
  result.config = cfg;
  if (cfg.variant == Variant::Qbft) {
    const auto roles = assign_roles(cfg);
    if (roles.validators.size() < 4)
      result.warnings.push_back("QBFT with " + std::to_string(roles.validators.size()) +
                                " validators cannot tolerate a Byzantine fault (needs >= 4)");
  }
  result.runs.reserve(cfg.runs);
  for (std::uint32_t r = 0; r < cfg.runs; ++r) result.runs.push_back(run_single(cfg, r));
  return result;
}

std::vector<Digest> replay_chain(const contract::Genesis& genesis, const std::vector<ledger::Block>& chain) {
  FederationContract c(genesis);
  std::vector<Digest> digests;
  digests.reserve(chain.size());
  for (const auto& block : chain) {
    for (const auto& tx : block.txs) {
      try {
        c.execute(tx.sender, tx.payload, block.height);
      } catch (const contract::ContractError&) {
      }
    }
    digests.push_back(c.state_digest());
  }
  return digests;
}

}  // namespace edgefed::sim
