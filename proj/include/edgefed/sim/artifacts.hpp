#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "edgefed/ledger/ledger.hpp"

namespace edgefed::sim {

/// Pretty-printed JSON document listing every block header and its
/// transactions (id, sender, nonce, submit time, call kind).
std::string chain_dump_json(const std::vector<ledger::Block>& chain);

/// One JSON object per contract event, in block order:
/// block_height, finality_time, event_kind, ann_id, payload.
void write_event_log(std::ostream& os, const std::vector<ledger::Block>& chain);

}  // namespace edgefed::sim
