#include "edgefed/contract/federation_contract.hpp"

#include <algorithm>
#include <tuple>

namespace edgefed::contract {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void fail(ContractErrc e) { throw ContractError(e); }

}  // namespace

bool bid_precedes(const Bid& a, const Bid& b) {
  return std::tie(a.price, a.bid_block, a.order_index, a.provider) <
         std::tie(b.price, b.bid_block, b.order_index, b.provider);
}

std::optional<Bid> select_winner(std::span<const Bid> bids) {
  if (bids.empty()) return std::nullopt;
  return *std::min_element(bids.begin(), bids.end(), bid_precedes);
}

FederationContract::FederationContract(Genesis genesis)
    : balances_(std::move(genesis.balances)), oracles_(std::move(genesis.oracles)), min_bids_(genesis.min_bids) {
  if (min_bids_ == 0) min_bids_ = 1;
  for (const auto& [addr, amount] : balances_)
    if (amount < Amount{}) fail(ContractErrc::InvalidArgument);
}

std::vector<ContractEvent> FederationContract::execute(const Address& sender, const ContractCall& c,
                                                       std::uint64_t block_height) {
  ContractEvent ev = std::visit(
      overloaded{
          [&](const call::RegisterOperator& a) -> ContractEvent { return register_operator(sender, a.name); },
          [&](const call::AnnounceService& a) -> ContractEvent { return announce_service(sender, a, block_height); },
          [&](const call::PlaceBid& a) -> ContractEvent { return place_bid(sender, a.ann_id, a.price, block_height); },
          [&](const call::ChooseProvider& a) -> ContractEvent { return choose_provider(sender, a.ann_id); },
          [&](const call::ConfirmDeployment& a) -> ContractEvent {
            return confirm_deployment(sender, a.ann_id, a.provider_endpoint);
          },
          [&](const call::CloseFederation& a) -> ContractEvent { return close_federation(sender, a.ann_id); },
          [&](const call::ReportQos& a) -> ContractEvent {
            return report_qos(sender, a.ann_id, a.availability_ppm, a.latency_us);
          },
      },
      c);
  return {std::move(ev)};
}

void FederationContract::require_registered(const Address& a) const {
  if (!operators_.contains(a)) fail(ContractErrc::NotRegistered);
}

FederationRecord& FederationContract::record(AnnId id) {
  auto it = federations_.find(id);
  if (it == federations_.end()) fail(ContractErrc::UnknownAnnouncement);
  return it->second;
}

const FederationRecord& FederationContract::federation(AnnId id) const {
  auto it = federations_.find(id);
  if (it == federations_.end()) fail(ContractErrc::UnknownAnnouncement);
  return it->second;
}

Amount FederationContract::balance(const Address& a) const {
  auto it = balances_.find(a);
  return it == balances_.end() ? Amount{} : it->second;
}

event::OperatorRegistered FederationContract::register_operator(const Address& sender, const std::string& name) {
  if (operators_.contains(sender)) fail(ContractErrc::AlreadyRegistered);
  operators_.emplace(sender, name);
  return {sender, name};
}

event::ServiceAnnounced FederationContract::announce_service(const Address& sender, const call::AnnounceService& a,
                                                             std::uint64_t block_height) {
  require_registered(sender);
  if (a.sla.min_availability_ppm > 1'000'000 || a.sla.penalty < Amount{} || a.deposit < Amount{} ||
      a.sla.max_latency_us < 0)
    fail(ContractErrc::InvalidArgument);
  if (a.deposit < a.sla.penalty) fail(ContractErrc::InsufficientBalance);
  if (balance(sender) < a.deposit) fail(ContractErrc::InsufficientBalance);

  const AnnId id = next_ann_id_++;
  balances_[sender] -= a.deposit;
  FederationRecord rec;
  rec.announcement = {id, sender, a.requirements, a.consumer_endpoint, block_height};
  rec.deposit = a.deposit;
  rec.sla = a.sla;
  federations_.emplace(id, std::move(rec));
  return {id, a.requirements};
}

event::BidPlaced FederationContract::place_bid(const Address& sender, AnnId ann_id, Amount price,
                                               std::uint64_t block_height) {
  require_registered(sender);
  auto& rec = record(ann_id);
  if (rec.announcement.consumer == sender) fail(ContractErrc::SelfBid);
  if (rec.phase != Phase::Open) fail(ContractErrc::WrongPhase);
  if (price < Amount{}) fail(ContractErrc::InvalidArgument);

  std::erase_if(rec.bids, [&](const Bid& b) { return b.provider == sender; });
  rec.bids.push_back(Bid{ann_id, sender, price, block_height, rec.next_order_index++});
  return {ann_id, static_cast<std::uint32_t>(rec.bids.size())};
}

event::ProviderChosen FederationContract::choose_provider(const Address& sender, AnnId ann_id) {
  auto& rec = record(ann_id);
  if (rec.announcement.consumer != sender) fail(ContractErrc::NotConsumer);
  if (rec.phase != Phase::Open) fail(ContractErrc::WrongPhase);
  if (rec.bids.size() < min_bids_) fail(ContractErrc::NotEnoughBids);

  auto best = select_winner(rec.bids);
  rec.winner = best->provider;
  rec.phase = Phase::ProviderChosen;
  return {ann_id, best->provider, rec.announcement.consumer_endpoint};
}

event::DeploymentConfirmed FederationContract::confirm_deployment(const Address& sender, AnnId ann_id,
                                                                  const OverlayEndpoint& endpoint) {
  auto& rec = record(ann_id);
  if (rec.phase != Phase::ProviderChosen) fail(ContractErrc::WrongPhase);
  if (rec.winner != sender) fail(ContractErrc::NotWinner);
  rec.provider_endpoint = endpoint;
  rec.phase = Phase::DeploymentConfirmed;
  return {ann_id, endpoint};
}

event::FederationClosed FederationContract::close_federation(const Address& sender, AnnId ann_id) {
  auto& rec = record(ann_id);
  if (rec.announcement.consumer != sender) fail(ContractErrc::NotConsumer);
  if (rec.phase != Phase::DeploymentConfirmed) fail(ContractErrc::WrongPhase);
  rec.phase = Phase::Closed;
  return {ann_id};
}

event::Settled FederationContract::report_qos(const Address& sender, AnnId ann_id, std::uint32_t availability_ppm,
                                              std::int64_t latency_us) {
  if (!oracles_.contains(sender)) fail(ContractErrc::NotOracle);
  auto& rec = record(ann_id);
  if (rec.phase != Phase::Closed) fail(ContractErrc::WrongPhase);
  if (availability_ppm > 1'000'000 || latency_us < 0) fail(ContractErrc::InvalidArgument);

  const bool violated = availability_ppm < rec.sla.min_availability_ppm || latency_us > rec.sla.max_latency_us;
  const Amount refund = violated ? rec.sla.penalty : Amount{};
  const Amount payment = rec.deposit - refund;
  balances_[rec.announcement.consumer] += refund;
  balances_[*rec.winner] += payment;
  rec.phase = Phase::Settled;
  return {ann_id, violated, refund, payment};
}

Amount FederationContract::escrowed() const {
  Amount total;
  for (const auto& [id, rec] : federations_)
    if (rec.phase != Phase::Settled) total += rec.deposit;
  return total;
}

Amount FederationContract::total_funds() const {
  Amount total = escrowed();
  for (const auto& [addr, amount] : balances_) total += amount;
  return total;
}

Digest FederationContract::state_digest() const {
  CanonicalWriter w;
  w.str("edgefed.contract.v1");
  w.u32(min_bids_);
  w.u64(next_ann_id_);
  w.u64(operators_.size());
  for (const auto& [addr, name] : operators_) {
    w.address(addr);
    w.str(name);
  }
  w.u64(oracles_.size());
  for (const auto& o : oracles_) w.address(o);
  w.u64(balances_.size());
  for (const auto& [addr, amount] : balances_) {
    w.address(addr);
    w.amount(amount);
  }
  w.u64(federations_.size());
  for (const auto& [id, rec] : federations_) {
    const auto& a = rec.announcement;
    w.u64(id);
    w.address(a.consumer);
    encode(w, ContractCall{call::AnnounceService{a.requirements, a.consumer_endpoint, rec.sla, rec.deposit}});
    w.u64(a.announce_block);
    w.u8(static_cast<std::uint8_t>(rec.phase));
    w.u64(rec.next_order_index);
    w.u64(rec.bids.size());
    for (const auto& b : rec.bids) {
      w.address(b.provider);
      w.amount(b.price);
      w.u64(b.bid_block);
      w.u64(b.order_index);
    }
    w.u8(rec.winner.has_value());
    if (rec.winner) w.address(*rec.winner);
    w.u8(rec.provider_endpoint.has_value());
    if (rec.provider_endpoint) {
      w.str(rec.provider_endpoint->ip);
      w.u32(rec.provider_endpoint->udp_port);
      w.u32(rec.provider_endpoint->vni);
    }
  }
  return w.digest();
}

}  // namespace edgefed::contract
