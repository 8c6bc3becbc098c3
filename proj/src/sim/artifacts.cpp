#include "edgefed/sim/artifacts.hpp"

#include <ostream>
#include <variant>

#include "json.hpp"

namespace edgefed::sim {

namespace {

using nlohmann::ordered_json;
namespace ev = contract::event;

ordered_json endpoint_json(const contract::OverlayEndpoint& e) {
  return {{"ip", e.ip}, {"udp_port", e.udp_port}, {"vni", e.vni}};
}

ordered_json payload_json(const contract::ContractEvent& e) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ev::OperatorRegistered>) {
          return {{"operator", v.operator_address.hex()}, {"name", v.name}};
        } else if constexpr (std::is_same_v<T, ev::ServiceAnnounced>) {
          return {{"app_id", v.requirements.app_id},
                  {"replicas", v.requirements.replicas},
                  {"bandwidth_mbps", v.requirements.bandwidth_mbps}};
        } else if constexpr (std::is_same_v<T, ev::BidPlaced>) {
          return {{"bid_count", v.bid_count}};
        } else if constexpr (std::is_same_v<T, ev::ProviderChosen>) {
          return {{"winner", v.winner.hex()}, {"consumer_endpoint", endpoint_json(v.consumer_endpoint)}};
        } else if constexpr (std::is_same_v<T, ev::DeploymentConfirmed>) {
          return {{"provider_endpoint", endpoint_json(v.provider_endpoint)}};
        } else if constexpr (std::is_same_v<T, ev::FederationClosed>) {
          return ordered_json::object();
        } else {
          return {{"sla_violated", v.sla_violated},
                  {"consumer_refund", v.consumer_refund.to_string()},
                  {"provider_payment", v.provider_payment.to_string()}};
        }
      },
      e);
}

}  // namespace

std::string chain_dump_json(const std::vector<ledger::Block>& chain) {
  ordered_json blocks = ordered_json::array();
  for (const auto& b : chain) {
    ordered_json txs = ordered_json::array();
    for (std::size_t i = 0; i < b.txs.size(); ++i) {
      const auto& tx = b.txs[i];
      ordered_json t{{"id", tx.id},
                     {"sender", tx.sender.hex()},
                     {"nonce", tx.nonce},
                     {"submit_time", format_seconds(tx.submit_time)},
                     {"kind", contract::to_string(contract::kind_of(tx.payload))}};
      if (i < b.receipts.size() && b.receipts[i].error)
        t["error"] = contract::to_string(*b.receipts[i].error);
      txs.push_back(std::move(t));
    }
    blocks.push_back({{"height", b.height},
                      {"proposer", b.proposer.hex()},
                      {"timestamp", format_seconds(b.timestamp)},
                      {"finality_time", format_seconds(b.finality_time)},
                      {"parent_digest", to_hex(b.parent_digest)},
                      {"digest", to_hex(b.digest())},
                      {"txs", std::move(txs)}});
  }
  return ordered_json{{"blocks", std::move(blocks)}}.dump(2);
}

void write_event_log(std::ostream& os, const std::vector<ledger::Block>& chain) {
  for (const auto& b : chain) {
    for (const auto& r : b.receipts) {
      for (const auto& e : r.events) {
        const auto ann = contract::ann_id_of(e);
        ordered_json j{{"block_height", b.height},
                       {"finality_time", format_seconds(b.finality_time)},
                       {"event_kind", contract::to_string(contract::kind_of(e))},
                       {"ann_id", ann ? ordered_json(*ann) : ordered_json(nullptr)},
                       {"payload", payload_json(e)}};
        os << j.dump() << '\n';
      }
    }
  }
}

}  // namespace edgefed::sim
