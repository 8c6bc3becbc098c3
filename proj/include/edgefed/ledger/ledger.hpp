#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgefed/contract/types.hpp"
#include "edgefed/core.hpp"

namespace edgefed::ledger {

using contract::ContractCall;
using contract::ContractEvent;

struct Transaction {
  std::uint64_t id = 0;
  Address sender;
  ContractCall payload;
  SimTime submit_time;
  std::uint64_t nonce = 0;
};

/// Outcome of executing one transaction. Failed transactions are still part of
/// the block, as on an Ethereum-style chain.
struct Receipt {
  std::uint64_t tx_id = 0;
  std::optional<contract::ContractErrc> error;
  std::vector<ContractEvent> events;
  bool ok() const { return !error.has_value(); }
};

struct Block {
  std::uint64_t height = 0;
  Address proposer;
  SimTime timestamp;
  std::vector<Transaction> txs;
  Digest parent_digest{};
  SimTime finality_time;
  /// Execution results, parallel to txs. Derived data: not part of digest().
  std::vector<Receipt> receipts;

  /// SHA-256 over the length-prefixed, field-ordered header and transactions.
  Digest digest() const;
};

enum class Algorithm { Clique, Qbft };
std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

struct ConsensusConfig {
  Algorithm algorithm = Algorithm::Clique;
  SimTime block_period = SimTime::from_micros(5'000'000);
  /// One-way validator-to-validator latency.
  SimTime message_delay = SimTime::from_micros(50'000);
  /// Per-round validation cost, scaled by ceil(log2(validators)).
  SimTime validation_cost = SimTime::from_micros(50'000);
  std::vector<Address> validators;
  /// 0 means no per-block transaction cap.
  std::size_t max_block_txs = 0;
};

/// Extra time between block production and the block becoming observable.
/// Clique: zero (forks are not modelled). QBFT: three message exchanges
/// (proposal, prepare, commit) plus log-scaled validation work.
SimTime finality_delay(const ConsensusConfig& cfg);
SimTime finality_delay(Algorithm algorithm, SimTime message_delay, SimTime validation_cost, std::size_t validators);

/// True if the configuration cannot tolerate a Byzantine fault (QBFT with
/// fewer than 4 validators). Not an error: small sets are allowed.
bool below_bft_minimum(const ConsensusConfig& cfg);

enum class LedgerErrc { NonceGap, NotAValidator, AlreadyMember, InvalidConfig, InvalidBlockTime };
std::string_view to_string(LedgerErrc e);

class LedgerError : public std::runtime_error {
 public:
  LedgerError(LedgerErrc code, const std::string& detail);
  LedgerErrc code() const { return code_; }

 private:
  LedgerErrc code_;
};

/// Clique-style validator governance: a candidate is admitted once strictly more
/// than half of the current members voted for it. Admission takes effect at the
/// next block boundary (apply_pending).
class ValidatorSet {
 public:
  explicit ValidatorSet(std::vector<Address> members);

  /// Returns true if this vote crossed the majority threshold.
  bool vote_add(const Address& voter, const Address& candidate);
  /// Promotes admitted candidates; called by the ledger before each block.
  void apply_pending();

  const std::vector<Address>& members() const { return members_; }
  const std::map<Address, std::set<Address>>& pending_votes() const { return pending_votes_; }
  const std::vector<Address>& pending_promotions() const { return promoted_; }
  bool is_member(const Address& a) const;

 private:
  std::vector<Address> members_;
  std::map<Address, std::set<Address>> pending_votes_;
  std::vector<Address> promoted_;
};

/// A contract event as seen by a subscriber: stamped with the finality time of
/// the block that carried it.
struct Notification {
  std::uint64_t block_height = 0;
  SimTime finality_time;
  std::uint64_t tx_id = 0;
  Address sender;
  ContractEvent event;
};

using Executor = std::function<Receipt(const Transaction&, std::uint64_t height)>;
using Subscriber = std::function<void(const Notification&)>;

/// Simulated permissioned chain: mempool, fixed-period block production with
/// round-robin proposers, finality stamping and event subscription.
///
/// The ledger owns no clock. The driver calls produce_block at every period
/// boundary and deliver_finalized whenever time reaches a finality instant.
class Ledger {
 public:
  Ledger(ConsensusConfig cfg, Executor executor);

  /// Builds the height-0 block at t=0 from bootstrap transactions (nonce 0 per
  /// sender). Must be called once before any other block.
  const Block& genesis(const std::vector<std::pair<Address, ContractCall>>& txs);

  /// Admits a transaction to the mempool. Fills in id and submit_time.
  /// Throws LedgerError(NonceGap) unless nonce == next_nonce(sender).
  std::uint64_t submit_transaction(const Address& sender, ContractCall payload, std::uint64_t nonce, SimTime now);
  /// Submits with the sender's next nonce.
  std::uint64_t submit(const Address& sender, ContractCall payload, SimTime now);
  std::uint64_t next_nonce(const Address& sender) const;

  /// Produces the next block; now must equal (tip height + 1) x block_period.
  /// Includes every pending transaction submitted strictly before now.
  const Block& produce_block(SimTime now);

  /// Production instant of the block a transaction submitted at t lands in,
  /// assuming no block cap.
  SimTime inclusion_time(SimTime submitted) const;
  SimTime next_block_time() const;

  std::uint64_t subscribe_events(std::optional<contract::EventKind> filter, Subscriber callback);
  void unsubscribe(std::uint64_t handle);
  /// Delivers events of every block with finality_time <= now, in block then
  /// transaction order. Returns the number of notifications delivered.
  std::size_t deliver_finalized(SimTime now);

  void vote_add_validator(const Address& voter, const Address& candidate);

  const std::vector<Block>& chain() const { return chain_; }
  const Block& tip() const { return chain_.back(); }
  std::size_t mempool_size() const { return mempool_.size(); }
  const ConsensusConfig& config() const { return cfg_; }
  const ValidatorSet& validators() const { return validators_; }
  SimTime current_finality_delay() const;

  /// Recomputes parent digests from genesis.
  bool verify_chain() const;

 private:
  Block& append_block(SimTime timestamp, std::vector<Transaction> txs);

  ConsensusConfig cfg_;
  Executor executor_;
  ValidatorSet validators_;
  std::vector<Block> chain_;
  std::vector<Transaction> mempool_;
  std::map<Address, std::uint64_t> next_nonce_;
  std::uint64_t next_tx_id_ = 0;
  std::size_t delivered_upto_ = 0;  // blocks whose events were delivered
  struct Subscription {
    std::optional<contract::EventKind> filter;
    Subscriber callback;
  };
  std::map<std::uint64_t, Subscription> subscribers_;
  std::uint64_t next_subscription_ = 0;
};

/// Orders transactions for inclusion: (submit_time, sender, nonce).
bool tx_precedes(const Transaction& a, const Transaction& b);

}  // namespace edgefed::ledger
