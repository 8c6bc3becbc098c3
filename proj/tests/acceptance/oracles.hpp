#pragma once

// Reference models written independently of the simulator. They share only
// plain value types with the code under test.

#include <cstdint>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "edgefed/core.hpp"

namespace oracle {

using edgefed::Address;

/// Closed-form federation time for one consumer on an idle provider.
///
/// Four on-chain steps (announce, bid, choose, confirm) each cost the
/// submitter's delay, the wait to the next block boundary and the finality
/// delay. Deployment and attach add to that. Times are integer microseconds.
struct TimingInputs {
  std::int64_t block_period_us;
  std::int64_t reaction_us;
  std::int64_t finality_us;
  std::int64_t deployment_us;  ///< container start + overlay setup
  std::int64_t confirm_overhead_us;
  std::int64_t attach_us;
};

inline std::int64_t next_boundary(std::int64_t t, std::int64_t period) { return (t / period + 1) * period; }

inline std::int64_t expected_total_us(const TimingInputs& in) {
  const std::int64_t submit_delay[4] = {0, in.reaction_us, in.reaction_us,
                                        in.deployment_us + in.confirm_overhead_us};
  std::int64_t t = 0;
  for (auto d : submit_delay) t = next_boundary(t + d, in.block_period_us) + in.finality_us;
  return t + in.attach_us;
}

/// QBFT finality: three message exchanges plus validation cost per
/// ceil(log2(validators)) round.
inline std::int64_t qbft_finality_us(std::int64_t msg_us, std::int64_t val_us, std::size_t validators) {
  std::int64_t rounds = 0;
  while ((std::size_t{1} << rounds) < validators) ++rounds;
  return 3 * msg_us + val_us * rounds;
}

struct OfferedBid {
  Address provider;
  std::int64_t price_micro;
  std::uint64_t block;
  std::uint64_t arrival;  ///< position in the announcement's bid sequence
};

/// Brute force: the winner is the unique bid that no other bid beats under
/// (price, block, arrival, address) ascending.
inline std::optional<Address> brute_force_winner(std::span<const OfferedBid> bids) {
  auto key = [](const OfferedBid& b) { return std::tie(b.price_micro, b.block, b.arrival, b.provider); };
  std::optional<Address> winner;
  for (const auto& candidate : bids) {
    bool beaten = false;
    for (const auto& other : bids)
      if (&other != &candidate && key(other) < key(candidate)) beaten = true;
    if (!beaten) {
      if (winner) return std::nullopt;  // ambiguous order: cannot happen for distinct providers
      winner = candidate.provider;
    }
  }
  return winner;
}

/// Consumer / provider split of the reference topologies.
struct ReferenceSplit {
  std::uint32_t n, consumers, providers;
};
inline constexpr ReferenceSplit kReferenceSplits[] = {{2, 1, 1}, {10, 8, 2}, {15, 12, 3}, {25, 20, 5}, {30, 24, 6}};

}  // namespace oracle
