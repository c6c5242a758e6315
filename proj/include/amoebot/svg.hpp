#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amoebot/structure.hpp"

namespace amoebot {

// Per-round circuit overlay data extracted from a trace: one color per
// circuit, drawn as arcs between member amoebots.
struct CircuitOverlay {
    // Each circuit: list of (amoebot, amoebot) adjacent member pairs.
    std::vector<std::vector<std::pair<AmoebotId, AmoebotId>>> circuits;
};

// Hexagonal-lattice drawing: amoebots as discs (sources, destinations and
// the leader distinguished), forest parent edges as arrows. Deterministic:
// identical inputs yield identical output bytes.
std::string render_svg(const AmoebotStructure& s,
                       const ParentForest* forest = nullptr,
                       const CircuitOverlay* overlay = nullptr);

}  // namespace amoebot
