#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "edgefed/contract/types.hpp"

namespace edgefed::contract {

/// State that exists before the first block: funded accounts, the authorised
/// QoS reporters and the bid-window size.
struct Genesis {
  std::map<Address, Amount> balances;
  std::set<Address> oracles;
  /// Bids required before the consumer may pick a provider.
  std::uint32_t min_bids = 2;
};

struct ServiceAnnouncement {
  AnnId ann_id = 0;
  Address consumer;
  ServiceDescriptor requirements;
  OverlayEndpoint consumer_endpoint;
  std::uint64_t announce_block = 0;
};

struct Bid {
  AnnId ann_id = 0;
  Address provider;
  Amount price;
  std::uint64_t bid_block = 0;
  /// Monotonic arrival sequence within the announcement; a re-bid takes a new one.
  std::uint64_t order_index = 0;
};

/// Strict weak order used for winner selection: (price, bid_block, order_index,
/// provider) ascending.
bool bid_precedes(const Bid& a, const Bid& b);

/// Lowest bid under bid_precedes. Empty input yields nullopt.
std::optional<Bid> select_winner(std::span<const Bid> bids);

struct FederationRecord {
  ServiceAnnouncement announcement;
  Phase phase = Phase::Open;
  std::vector<Bid> bids;  // kept in order_index order
  std::optional<Address> winner;
  std::optional<OverlayEndpoint> provider_endpoint;
  Amount deposit;
  SlaTerms sla;
  std::uint64_t next_order_index = 0;
};

/// The federation contract: a deterministic state machine. Every node that
/// feeds the same ordered call sequence into its own instance ends up with the
/// same state_digest().
///
/// Every mutating call either applies completely or throws ContractError and
/// leaves the state untouched.
class FederationContract {
 public:
  explicit FederationContract(Genesis genesis = {});

  std::vector<ContractEvent> execute(const Address& sender, const ContractCall& call, std::uint64_t block_height);

  event::OperatorRegistered register_operator(const Address& sender, const std::string& name);
  event::ServiceAnnounced announce_service(const Address& sender, const call::AnnounceService& args,
                                           std::uint64_t block_height);
  event::BidPlaced place_bid(const Address& sender, AnnId ann_id, Amount price, std::uint64_t block_height);
  event::ProviderChosen choose_provider(const Address& sender, AnnId ann_id);
  event::DeploymentConfirmed confirm_deployment(const Address& sender, AnnId ann_id, const OverlayEndpoint& endpoint);
  event::FederationClosed close_federation(const Address& sender, AnnId ann_id);
  event::Settled report_qos(const Address& sender, AnnId ann_id, std::uint32_t availability_ppm,
                            std::int64_t latency_us);

  Digest state_digest() const;

  const std::map<Address, std::string>& operators() const { return operators_; }
  const std::map<AnnId, FederationRecord>& federations() const { return federations_; }
  const FederationRecord& federation(AnnId id) const;
  Amount balance(const Address& a) const;
  const std::map<Address, Amount>& balances() const { return balances_; }
  const std::set<Address>& oracles() const { return oracles_; }
  AnnId next_ann_id() const { return next_ann_id_; }
  std::uint32_t min_bids() const { return min_bids_; }

  /// Escrowed deposits of federations not yet settled.
  Amount escrowed() const;
  /// Balances plus escrow; constant after genesis.
  Amount total_funds() const;

 private:
  FederationRecord& record(AnnId id);
  void require_registered(const Address& a) const;

  std::map<Address, std::string> operators_;
  std::map<AnnId, FederationRecord> federations_;
  std::map<Address, Amount> balances_;
  std::set<Address> oracles_;
  AnnId next_ann_id_ = 0;
  std::uint32_t min_bids_ = 2;
};

}  // namespace edgefed::contract
