#pragma once

#include <cstdint>
#include <optional>

#include "edgefed/core.hpp"

namespace edgefed::metrics {

/// Timeline of one federation, as observed by its consumer.
///
/// `established` is when the consumer finished attaching to the overlay (the
/// federation is usable); the close transaction is submitted at that instant
/// and `close_finalized` records when it became final on chain.
struct FederationTrace {
  std::uint32_t run = 0;
  std::uint32_t consumer_index = 0;
  std::optional<std::uint64_t> ann_id;
  Address consumer;
  std::optional<Address> winner;

  std::optional<SimTime> announce_submitted;
  std::optional<SimTime> announce_finalized;
  std::optional<SimTime> second_bid_finalized;
  std::optional<SimTime> winner_finalized;
  std::optional<SimTime> deployment_started;
  std::optional<SimTime> confirm_finalized;
  std::optional<SimTime> established;
  std::optional<SimTime> close_finalized;
  bool complete = false;

  bool operator==(const FederationTrace&) const = default;
};

}  // namespace edgefed::metrics
