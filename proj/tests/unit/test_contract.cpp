#include "doctest.h"
#include "edgefed/contract/federation_contract.hpp"

using namespace edgefed;
using namespace edgefed::contract;

namespace {

const Address kConsumer = Address::derive("consumer");
const Address kP1 = Address::derive("p1");
const Address kP2 = Address::derive("p2");
const Address kOracle = Address::derive("oracle");

Genesis funded() {
  Genesis g;
  for (const auto& a : {kConsumer, kP1, kP2, kOracle}) g.balances[a] = Amount::parse("100");
  g.oracles.insert(kOracle);
  return g;
}

call::AnnounceService announcement(Amount deposit = Amount::parse("10")) {
  call::AnnounceService a;
  a.requirements = {"app", 1, 100};
  a.consumer_endpoint = {"10.0.0.1", 4789, 42};
  a.deposit = deposit;
  return a;
}

FederationContract registered() {
  FederationContract c(funded());
  c.register_operator(kConsumer, "mec-es-1");
  c.register_operator(kP1, "mec-fr-1");
  c.register_operator(kP2, "mec-de-1");
  return c;
}

ContractErrc error_of(auto&& fn) {
  try {
    fn();
  } catch (const ContractError& e) {
    return e.code();
  }
  FAIL("expected ContractError");
  return ContractErrc::InvalidArgument;
}

/// Runs a federation to the Closed phase with P2 as winner.
FederationContract closed_federation() {
  auto c = registered();
  c.announce_service(kConsumer, announcement(), 1);
  c.place_bid(kP1, 0, Amount::parse("0.20"), 2);
  c.place_bid(kP2, 0, Amount::parse("0.15"), 2);
  c.choose_provider(kConsumer, 0);
  c.confirm_deployment(kP2, 0, {"10.0.0.2", 4789, 42});
  c.close_federation(kConsumer, 0);
  return c;
}

}  // namespace

TEST_CASE("register_operator") {
  FederationContract c;
  c.register_operator(kConsumer, "mec-es-1");
  CHECK(c.operators().at(kConsumer) == "mec-es-1");
  CHECK(error_of([&] { c.register_operator(kConsumer, "again"); }) == ContractErrc::AlreadyRegistered);
  for (int i = 0; i < 30; ++i) c.register_operator(Address::derive("op" + std::to_string(i)), "x");
  CHECK(c.operators().size() == 31);
}

TEST_CASE("announce_service escrows the deposit") {
  auto c = registered();
  const auto ev = c.announce_service(kConsumer, announcement(), 1);
  CHECK(ev.ann_id == 0);
  CHECK(c.federation(0).phase == Phase::Open);
  CHECK(c.balance(kConsumer) == Amount::parse("90"));
  CHECK(c.escrowed() == Amount::parse("10"));
  CHECK(error_of([&] { c.announce_service(kConsumer, announcement(Amount::parse("1")), 1); }) ==
        ContractErrc::InsufficientBalance);
  CHECK(error_of([&] { c.announce_service(kConsumer, announcement(Amount::parse("1000")), 1); }) ==
        ContractErrc::InsufficientBalance);
  CHECK(error_of([&] { c.announce_service(Address::derive("stranger"), announcement(), 1); }) ==
        ContractErrc::NotRegistered);
  CHECK(c.announce_service(kConsumer, announcement(), 1).ann_id == 1);
}

TEST_CASE("place_bid, self bids and re-bids") {
  auto c = registered();
  c.announce_service(kConsumer, announcement(), 1);
  CHECK(c.place_bid(kP1, 0, Amount::parse("0.135"), 2).bid_count == 1);
  CHECK(error_of([&] { c.place_bid(kConsumer, 0, Amount::parse("0.1"), 2); }) == ContractErrc::SelfBid);
  CHECK(error_of([&] { c.place_bid(kP1, 7, Amount::parse("0.1"), 2); }) == ContractErrc::UnknownAnnouncement);
  CHECK(error_of([&] { c.place_bid(kP1, 0, Amount::from_micro(-1), 2); }) == ContractErrc::InvalidArgument);
  c.place_bid(kP2, 0, Amount::parse("0.130"), 2);
  CHECK(c.place_bid(kP1, 0, Amount::parse("0.120"), 3).bid_count == 2);
  const auto& bids = c.federation(0).bids;
  REQUIRE(bids.size() == 2);
  CHECK(bids.back().provider == kP1);
  CHECK(bids.back().price == Amount::parse("0.120"));
  CHECK(bids.back().order_index == 2);
}

TEST_CASE("choose_provider picks the lowest price and needs two bids") {
  auto c = registered();
  c.announce_service(kConsumer, announcement(), 1);
  c.place_bid(kP1, 0, Amount::parse("0.20"), 2);
  CHECK(error_of([&] { c.choose_provider(kConsumer, 0); }) == ContractErrc::NotEnoughBids);
  c.place_bid(kP2, 0, Amount::parse("0.15"), 2);
  CHECK(error_of([&] { c.choose_provider(kP1, 0); }) == ContractErrc::NotConsumer);
  const auto ev = c.choose_provider(kConsumer, 0);
  CHECK(ev.winner == kP2);
  CHECK(ev.consumer_endpoint.vni == 42);
  CHECK(c.federation(0).phase == Phase::ProviderChosen);
  CHECK(error_of([&] { c.place_bid(kP1, 0, Amount::parse("0.1"), 3); }) == ContractErrc::WrongPhase);
}

TEST_CASE("equal prices fall back to the earlier block") {
  auto c = registered();
  c.announce_service(kConsumer, announcement(), 1);
  c.place_bid(kP2, 0, Amount::parse("0.15"), 4);
  c.place_bid(kP1, 0, Amount::parse("0.15"), 3);
  CHECK(c.choose_provider(kConsumer, 0).winner == kP1);
}

TEST_CASE("confirm, close and phase order") {
  auto c = registered();
  c.announce_service(kConsumer, announcement(), 1);
  CHECK(error_of([&] { c.confirm_deployment(kP2, 0, {}); }) == ContractErrc::WrongPhase);
  c.place_bid(kP1, 0, Amount::parse("0.20"), 2);
  c.place_bid(kP2, 0, Amount::parse("0.15"), 2);
  c.choose_provider(kConsumer, 0);
  CHECK(error_of([&] { c.confirm_deployment(kP1, 0, {}); }) == ContractErrc::NotWinner);
  CHECK(error_of([&] { c.close_federation(kConsumer, 0); }) == ContractErrc::WrongPhase);
  c.confirm_deployment(kP2, 0, {"10.0.0.2", 4789, 42});
  CHECK(c.federation(0).phase == Phase::DeploymentConfirmed);
  CHECK(c.federation(0).provider_endpoint->ip == "10.0.0.2");
  CHECK(error_of([&] { c.close_federation(kP2, 0); }) == ContractErrc::NotConsumer);
  c.close_federation(kConsumer, 0);
  CHECK(c.federation(0).phase == Phase::Closed);
  CHECK(error_of([&] { c.close_federation(kConsumer, 0); }) == ContractErrc::WrongPhase);
}

TEST_CASE("report_qos settles: compliant pays the full deposit") {
  auto c = closed_federation();
  const auto before = c.total_funds();
  CHECK(error_of([&] { c.report_qos(kConsumer, 0, 999'000, 20'000); }) == ContractErrc::NotOracle);
  const auto ev = c.report_qos(kOracle, 0, 999'000, 20'000);
  CHECK_FALSE(ev.sla_violated);
  CHECK(ev.provider_payment == Amount::parse("10"));
  CHECK(ev.consumer_refund == Amount{});
  CHECK(c.balance(kP2) == Amount::parse("110"));
  CHECK(c.balance(kConsumer) == Amount::parse("90"));
  CHECK(c.federation(0).phase == Phase::Settled);
  CHECK(c.total_funds() == before);
  CHECK(c.escrowed() == Amount{});
}

TEST_CASE("report_qos settles: violation refunds the penalty") {
  auto c = closed_federation();
  const auto ev = c.report_qos(kOracle, 0, 950'000, 20'000);
  CHECK(ev.sla_violated);
  CHECK(ev.consumer_refund == Amount::parse("2"));
  CHECK(ev.provider_payment == Amount::parse("8"));
  CHECK(c.balance(kConsumer) == Amount::parse("92"));
  CHECK(c.balance(kP2) == Amount::parse("108"));
  CHECK(error_of([&] { c.report_qos(kOracle, 0, 950'000, 20'000); }) == ContractErrc::WrongPhase);
}

TEST_CASE("report_qos before close is rejected") {
  auto c = registered();
  c.announce_service(kConsumer, announcement(), 1);
  CHECK(error_of([&] { c.report_qos(kOracle, 0, 999'000, 1); }) == ContractErrc::WrongPhase);
}

TEST_CASE("failed calls leave the state digest unchanged") {
  auto c = registered();
  c.announce_service(kConsumer, announcement(), 1);
  const auto d = c.state_digest();
  CHECK_THROWS_AS(c.execute(kConsumer, call::PlaceBid{0, Amount::parse("0.1")}, 2), ContractError);
  CHECK_THROWS_AS(c.execute(kP1, call::ChooseProvider{0}, 2), ContractError);
  CHECK(c.state_digest() == d);
}

TEST_CASE("state digests: equal replays agree, one extra bid differs") {
  CHECK(FederationContract{}.state_digest() == FederationContract{}.state_digest());
  auto a = registered();
  auto b = registered();
  a.announce_service(kConsumer, announcement(), 1);
  b.announce_service(kConsumer, announcement(), 1);
  CHECK(a.state_digest() == b.state_digest());
  a.place_bid(kP1, 0, Amount::parse("0.1"), 2);
  CHECK(a.state_digest() != b.state_digest());
}

TEST_CASE("execute returns events for each call kind") {
  auto c = registered();
  auto ev = c.execute(kConsumer, call::AnnounceService{announcement()}, 1);
  REQUIRE(ev.size() == 1);
  CHECK(kind_of(ev[0]) == EventKind::ServiceAnnounced);
  CHECK(ann_id_of(ev[0]) == 0);
}
