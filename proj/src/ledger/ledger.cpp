#include "edgefed/ledger/ledger.hpp"

#include <algorithm>
#include <bit>
#include <tuple>

namespace edgefed::ledger {

std::string_view to_string(Algorithm a) { return a == Algorithm::Clique ? "clique" : "qbft"; }

Algorithm parse_algorithm(std::string_view s) {
  if (s == "clique" || s == "Clique") return Algorithm::Clique;
  if (s == "qbft" || s == "Qbft" || s == "QBFT") return Algorithm::Qbft;
  throw LedgerError(LedgerErrc::InvalidConfig, "unknown consensus algorithm: " + std::string(s));
}

std::string_view to_string(LedgerErrc e) {
  switch (e) {
    case LedgerErrc::NonceGap: return "NonceGap";
    case LedgerErrc::NotAValidator: return "NotAValidator";
    case LedgerErrc::AlreadyMember: return "AlreadyMember";
    case LedgerErrc::InvalidConfig: return "InvalidConfig";
    case LedgerErrc::InvalidBlockTime: return "InvalidBlockTime";
  }
  return "?";
}

LedgerError::LedgerError(LedgerErrc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

SimTime finality_delay(Algorithm algorithm, SimTime message_delay, SimTime validation_cost, std::size_t validators) {
  if (algorithm == Algorithm::Clique) return SimTime{};
  // ceil(log2(v)) for v >= 1
  const std::int64_t rounds = validators <= 1 ? 0 : std::bit_width(validators - 1);
  return message_delay * 3 + validation_cost * rounds;
}

SimTime finality_delay(const ConsensusConfig& cfg) {
  return finality_delay(cfg.algorithm, cfg.message_delay, cfg.validation_cost, cfg.validators.size());
}

bool below_bft_minimum(const ConsensusConfig& cfg) {
  return cfg.algorithm == Algorithm::Qbft && cfg.validators.size() < 4;
}

Digest Block::digest() const {
  CanonicalWriter w;
  w.str("edgefed.block.v1");
  w.u64(height);
  w.address(proposer);
  w.time(timestamp);
  w.time(finality_time);
  w.bytes(parent_digest);
  w.u64(txs.size());
  for (const auto& tx : txs) {
    w.u64(tx.id);
    w.address(tx.sender);
    w.u64(tx.nonce);
    w.time(tx.submit_time);
    contract::encode(w, tx.payload);
  }
  return w.digest();
}

bool tx_precedes(const Transaction& a, const Transaction& b) {
  return std::tie(a.submit_time, a.sender, a.nonce) < std::tie(b.submit_time, b.sender, b.nonce);
}

// ValidatorSet

ValidatorSet::ValidatorSet(std::vector<Address> members) : members_(std::move(members)) {
  if (members_.empty()) throw LedgerError(LedgerErrc::InvalidConfig, "validator set must not be empty");
  auto sorted = members_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw LedgerError(LedgerErrc::InvalidConfig, "duplicate validator");
}

bool ValidatorSet::is_member(const Address& a) const {
  return std::find(members_.begin(), members_.end(), a) != members_.end();
}

bool ValidatorSet::vote_add(const Address& voter, const Address& candidate) {
  if (!is_member(voter)) throw LedgerError(LedgerErrc::NotAValidator, voter.hex());
  if (is_member(candidate) || std::find(promoted_.begin(), promoted_.end(), candidate) != promoted_.end())
    throw LedgerError(LedgerErrc::AlreadyMember, candidate.hex());
  auto& voters = pending_votes_[candidate];
  voters.insert(voter);
  // strict majority: votes > |members| / 2
  if (2 * voters.size() > members_.size()) {
    promoted_.push_back(candidate);
    pending_votes_.erase(candidate);
    return true;
  }
  return false;
}

void ValidatorSet::apply_pending() {
  for (const auto& c : promoted_) members_.push_back(c);
  promoted_.clear();
}

// Ledger

Ledger::Ledger(ConsensusConfig cfg, Executor executor)
    : cfg_(std::move(cfg)), executor_(std::move(executor)), validators_(cfg_.validators) {
  if (cfg_.block_period <= SimTime{}) throw LedgerError(LedgerErrc::InvalidConfig, "block period must be > 0");
  if (cfg_.message_delay < SimTime{} || cfg_.validation_cost < SimTime{})
    throw LedgerError(LedgerErrc::InvalidConfig, "negative delay");
}

SimTime Ledger::current_finality_delay() const {
  return finality_delay(cfg_.algorithm, cfg_.message_delay, cfg_.validation_cost, validators_.members().size());
}

Block& Ledger::append_block(SimTime timestamp, std::vector<Transaction> txs) {
  Block b;
  b.height = chain_.size();
  validators_.apply_pending();
  const auto& members = validators_.members();
  b.proposer = members[b.height % members.size()];
  b.timestamp = timestamp;
  b.finality_time = timestamp + current_finality_delay();
  b.parent_digest = chain_.empty() ? Digest{} : chain_.back().digest();
  b.txs = std::move(txs);
  b.receipts.reserve(b.txs.size());
  for (const auto& tx : b.txs) {
    Receipt r = executor_ ? executor_(tx, b.height) : Receipt{};
    r.tx_id = tx.id;
    b.receipts.push_back(std::move(r));
  }
  chain_.push_back(std::move(b));
  return chain_.back();
}

const Block& Ledger::genesis(const std::vector<std::pair<Address, ContractCall>>& txs) {
  if (!chain_.empty()) throw LedgerError(LedgerErrc::InvalidBlockTime, "genesis already produced");
  std::vector<Transaction> list;
  for (const auto& [sender, payload] : txs)
    list.push_back(Transaction{next_tx_id_++, sender, payload, SimTime{}, next_nonce_[sender]++});
  std::stable_sort(list.begin(), list.end(), tx_precedes);
  return append_block(SimTime{}, std::move(list));
}

std::uint64_t Ledger::next_nonce(const Address& sender) const {
  auto it = next_nonce_.find(sender);
  return it == next_nonce_.end() ? 0 : it->second;
}

std::uint64_t Ledger::submit_transaction(const Address& sender, ContractCall payload, std::uint64_t nonce,
                                         SimTime now) {
  if (now < SimTime{}) throw LedgerError(LedgerErrc::InvalidBlockTime, "negative submit time");
  const auto expected = next_nonce(sender);
  if (nonce != expected)
    throw LedgerError(LedgerErrc::NonceGap,
                      "sender " + sender.hex() + " nonce " + std::to_string(nonce) + ", expected " + std::to_string(expected));
  next_nonce_[sender] = expected + 1;
  const auto id = next_tx_id_++;
  mempool_.push_back(Transaction{id, sender, std::move(payload), now, nonce});
  return id;
}

std::uint64_t Ledger::submit(const Address& sender, ContractCall payload, SimTime now) {
  return submit_transaction(sender, std::move(payload), next_nonce(sender), now);
}

SimTime Ledger::next_block_time() const {
  return cfg_.block_period * static_cast<std::int64_t>(chain_.size());
}

SimTime Ledger::inclusion_time(SimTime submitted) const {
  const auto p = cfg_.block_period.micros();
  return SimTime::from_micros((submitted.micros() / p + 1) * p);
}

const Block& Ledger::produce_block(SimTime now) {
  if (chain_.empty()) genesis({});
  if (now != next_block_time())
    throw LedgerError(LedgerErrc::InvalidBlockTime,
                      "expected block at " + format_seconds(next_block_time()) + ", got " + format_seconds(now));
  std::vector<Transaction> included;
  std::vector<Transaction> remaining;
  std::stable_sort(mempool_.begin(), mempool_.end(), tx_precedes);
  for (auto& tx : mempool_) {
    const bool eligible = tx.submit_time < now;
    const bool room = cfg_.max_block_txs == 0 || included.size() < cfg_.max_block_txs;
    (eligible && room ? included : remaining).push_back(std::move(tx));
  }
  mempool_ = std::move(remaining);
  return append_block(now, std::move(included));
}

std::uint64_t Ledger::subscribe_events(std::optional<contract::EventKind> filter, Subscriber callback) {
  const auto h = next_subscription_++;
  subscribers_.emplace(h, Subscription{filter, std::move(callback)});
  return h;
}

void Ledger::unsubscribe(std::uint64_t handle) { subscribers_.erase(handle); }

std::size_t Ledger::deliver_finalized(SimTime now) {
  std::size_t delivered = 0;
  while (delivered_upto_ < chain_.size() && chain_[delivered_upto_].finality_time <= now) {
    const Block& b = chain_[delivered_upto_++];
    for (std::size_t i = 0; i < b.txs.size(); ++i) {
      for (const auto& ev : b.receipts[i].events) {
        Notification n{b.height, b.finality_time, b.txs[i].id, b.txs[i].sender, ev};
        const auto kind = contract::kind_of(ev);
        // Copy the handles first: a callback may subscribe or unsubscribe.
        std::vector<std::uint64_t> handles;
        for (const auto& [h, s] : subscribers_)
          if (!s.filter || *s.filter == kind) handles.push_back(h);
        for (auto h : handles) {
          auto it = subscribers_.find(h);
          if (it == subscribers_.end()) continue;
          it->second.callback(n);
          ++delivered;
        }
      }
    }
  }
  return delivered;
}

void Ledger::vote_add_validator(const Address& voter, const Address& candidate) {
  validators_.vote_add(voter, candidate);
}

bool Ledger::verify_chain() const {
  for (std::size_t h = 0; h < chain_.size(); ++h) {
    const auto& b = chain_[h];
    if (b.height != h) return false;
    if (b.timestamp != cfg_.block_period * static_cast<std::int64_t>(h)) return false;
    if (b.finality_time < b.timestamp) return false;
    const Digest expected = h == 0 ? Digest{} : chain_[h - 1].digest();
    if (b.parent_digest != expected) return false;
    if (!std::is_sorted(b.txs.begin(), b.txs.end(), tx_precedes)) return false;
  }
  return true;
}

}  // namespace edgefed::ledger
