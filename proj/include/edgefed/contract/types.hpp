#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "edgefed/core.hpp"

namespace edgefed::contract {

using AnnId = std::uint64_t;

/// Demand-side description of the requested service. Carries nothing about any
/// provider's infrastructure.
struct ServiceDescriptor {
  std::string app_id;
  std::uint32_t replicas = 1;
  std::uint32_t bandwidth_mbps = 0;
  bool operator==(const ServiceDescriptor&) const = default;
};

/// VXLAN overlay attachment point.
struct OverlayEndpoint {
  std::string ip;
  std::uint16_t udp_port = 4789;
  std::uint32_t vni = 0;
  bool operator==(const OverlayEndpoint&) const = default;
};

/// Fixed-point SLA terms: availability in parts per million, latency in
/// microseconds.
struct SlaTerms {
  std::uint32_t min_availability_ppm = 990'000;
  std::int64_t max_latency_us = 50'000;
  Amount penalty = Amount::from_micro(2'000'000);
  bool operator==(const SlaTerms&) const = default;
};

namespace call {
struct RegisterOperator {
  std::string name;
};
struct AnnounceService {
  ServiceDescriptor requirements;
  OverlayEndpoint consumer_endpoint;
  SlaTerms sla;
  Amount deposit;
};
struct PlaceBid {
  AnnId ann_id = 0;
  Amount price;
};
struct ChooseProvider {
  AnnId ann_id = 0;
};
struct ConfirmDeployment {
  AnnId ann_id = 0;
  OverlayEndpoint provider_endpoint;
};
struct CloseFederation {
  AnnId ann_id = 0;
};
struct ReportQos {
  AnnId ann_id = 0;
  std::uint32_t availability_ppm = 0;
  std::int64_t latency_us = 0;
};
}  // namespace call

enum class CallKind { RegisterOperator, AnnounceService, PlaceBid, ChooseProvider, ConfirmDeployment, ReportQos, CloseFederation };

using ContractCall = std::variant<call::RegisterOperator, call::AnnounceService, call::PlaceBid, call::ChooseProvider,
                                  call::ConfirmDeployment, call::CloseFederation, call::ReportQos>;

CallKind kind_of(const ContractCall& c);
std::string_view to_string(CallKind k);
void encode(CanonicalWriter& w, const ContractCall& c);

namespace event {
struct OperatorRegistered {
  Address operator_address;
  std::string name;
};
struct ServiceAnnounced {
  AnnId ann_id = 0;
  ServiceDescriptor requirements;
};
struct BidPlaced {
  AnnId ann_id = 0;
  std::uint32_t bid_count = 0;
};
struct ProviderChosen {
  AnnId ann_id = 0;
  Address winner;
  OverlayEndpoint consumer_endpoint;
};
struct DeploymentConfirmed {
  AnnId ann_id = 0;
  OverlayEndpoint provider_endpoint;
};
struct FederationClosed {
  AnnId ann_id = 0;
};
struct Settled {
  AnnId ann_id = 0;
  bool sla_violated = false;
  Amount consumer_refund;
  Amount provider_payment;
};
}  // namespace event

using ContractEvent = std::variant<event::OperatorRegistered, event::ServiceAnnounced, event::BidPlaced,
                                   event::ProviderChosen, event::DeploymentConfirmed, event::FederationClosed,
                                   event::Settled>;

enum class EventKind { OperatorRegistered, ServiceAnnounced, BidPlaced, ProviderChosen, DeploymentConfirmed, FederationClosed, Settled };

EventKind kind_of(const ContractEvent& e);
std::string_view to_string(EventKind k);
std::optional<AnnId> ann_id_of(const ContractEvent& e);

enum class Phase { Open, ProviderChosen, DeploymentConfirmed, Closed, Settled };
std::string_view to_string(Phase p);

enum class ContractErrc {
  AlreadyRegistered,
  NotRegistered,
  InsufficientBalance,
  UnknownAnnouncement,
  SelfBid,
  WrongPhase,
  NotConsumer,
  NotEnoughBids,
  NotWinner,
  NotOracle,
  InvalidArgument,
};
std::string_view to_string(ContractErrc e);

class ContractError : public std::runtime_error {
 public:
  explicit ContractError(ContractErrc code);
  ContractErrc code() const { return code_; }

 private:
  ContractErrc code_;
};

}  // namespace edgefed::contract
