#pragma once

#include <string>

#include "riskphase/run_store.hpp"

namespace riskphase {

/// Summary card assembled only from a run's artifacts and declaration log,
/// so every number equals the artifact it came from.
json emit_card(const RunStore& store, const std::string& run_id);

/// Plain-text rendering of a card.
std::string render_card_text(const json& card);

}  // namespace riskphase
