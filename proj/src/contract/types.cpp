#include "edgefed/contract/types.hpp"

namespace edgefed::contract {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void encode(CanonicalWriter& w, const ServiceDescriptor& s) {
  w.str(s.app_id);
  w.u32(s.replicas);
  w.u32(s.bandwidth_mbps);
}

void encode(CanonicalWriter& w, const OverlayEndpoint& e) {
  w.str(e.ip);
  w.u32(e.udp_port);
  w.u32(e.vni);
}

void encode(CanonicalWriter& w, const SlaTerms& s) {
  w.u32(s.min_availability_ppm);
  w.i64(s.max_latency_us);
  w.amount(s.penalty);
}

}  // namespace

CallKind kind_of(const ContractCall& c) {
  return std::visit(overloaded{
                        [](const call::RegisterOperator&) { return CallKind::RegisterOperator; },
                        [](const call::AnnounceService&) { return CallKind::AnnounceService; },
                        [](const call::PlaceBid&) { return CallKind::PlaceBid; },
                        [](const call::ChooseProvider&) { return CallKind::ChooseProvider; },
                        [](const call::ConfirmDeployment&) { return CallKind::ConfirmDeployment; },
                        [](const call::CloseFederation&) { return CallKind::CloseFederation; },
                        [](const call::ReportQos&) { return CallKind::ReportQos; },
                    },
                    c);
}

std::string_view to_string(CallKind k) {
  switch (k) {
    case CallKind::RegisterOperator: return "RegisterOperator";
    case CallKind::AnnounceService: return "AnnounceService";
    case CallKind::PlaceBid: return "PlaceBid";
    case CallKind::ChooseProvider: return "ChooseProvider";
    case CallKind::ConfirmDeployment: return "ConfirmDeployment";
    case CallKind::ReportQos: return "ReportQos";
    case CallKind::CloseFederation: return "CloseFederation";
  }
  return "?";
}

void encode(CanonicalWriter& w, const ContractCall& c) {
  w.u8(static_cast<std::uint8_t>(kind_of(c)));
  std::visit(overloaded{
                 [&](const call::RegisterOperator& a) { w.str(a.name); },
                 [&](const call::AnnounceService& a) {
                   encode(w, a.requirements);
                   encode(w, a.consumer_endpoint);
                   encode(w, a.sla);
                   w.amount(a.deposit);
                 },
                 [&](const call::PlaceBid& a) {
                   w.u64(a.ann_id);
                   w.amount(a.price);
                 },
                 [&](const call::ChooseProvider& a) { w.u64(a.ann_id); },
                 [&](const call::ConfirmDeployment& a) {
                   w.u64(a.ann_id);
                   encode(w, a.provider_endpoint);
                 },
                 [&](const call::CloseFederation& a) { w.u64(a.ann_id); },
                 [&](const call::ReportQos& a) {
                   w.u64(a.ann_id);
                   w.u32(a.availability_ppm);
                   w.i64(a.latency_us);
                 },
             },
             c);
}

EventKind kind_of(const ContractEvent& e) {
  return std::visit(overloaded{
                        [](const event::OperatorRegistered&) { return EventKind::OperatorRegistered; },
                        [](const event::ServiceAnnounced&) { return EventKind::ServiceAnnounced; },
                        [](const event::BidPlaced&) { return EventKind::BidPlaced; },
                        [](const event::ProviderChosen&) { return EventKind::ProviderChosen; },
                        [](const event::DeploymentConfirmed&) { return EventKind::DeploymentConfirmed; },
                        [](const event::FederationClosed&) { return EventKind::FederationClosed; },
                        [](const event::Settled&) { return EventKind::Settled; },
                    },
                    e);
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::OperatorRegistered: return "OperatorRegistered";
    case EventKind::ServiceAnnounced: return "ServiceAnnounced";
    case EventKind::BidPlaced: return "BidPlaced";
    case EventKind::ProviderChosen: return "ProviderChosen";
    case EventKind::DeploymentConfirmed: return "DeploymentConfirmed";
    case EventKind::FederationClosed: return "FederationClosed";
    case EventKind::Settled: return "Settled";
  }
  return "?";
}

std::optional<AnnId> ann_id_of(const ContractEvent& e) {
  return std::visit(overloaded{
                        [](const event::OperatorRegistered&) -> std::optional<AnnId> { return std::nullopt; },
                        [](const auto& ev) -> std::optional<AnnId> { return ev.ann_id; },
                    },
                    e);
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Open: return "Open";
    case Phase::ProviderChosen: return "ProviderChosen";
    case Phase::DeploymentConfirmed: return "DeploymentConfirmed";
    case Phase::Closed: return "Closed";
    case Phase::Settled: return "Settled";
  }
  return "?";
}

std::string_view to_string(ContractErrc e) {
  switch (e) {
    case ContractErrc::AlreadyRegistered: return "AlreadyRegistered";
    case ContractErrc::NotRegistered: return "NotRegistered";
    case ContractErrc::InsufficientBalance: return "InsufficientBalance";
    case ContractErrc::UnknownAnnouncement: return "UnknownAnnouncement";
    case ContractErrc::SelfBid: return "SelfBid";
    case ContractErrc::WrongPhase: return "WrongPhase";
    case ContractErrc::NotConsumer: return "NotConsumer";
    case ContractErrc::NotEnoughBids: return "NotEnoughBids";
    case ContractErrc::NotWinner: return "NotWinner";
    case ContractErrc::NotOracle: return "NotOracle";
    case ContractErrc::InvalidArgument: return "InvalidArgument";
  }
  return "?";
}

ContractError::ContractError(ContractErrc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

}  // namespace edgefed::contract
