#pragma once

#include "amoebot/tree_primitives.hpp"

namespace amoebot {

// ---------------------------------------------------------------------------
// Single-source shortest-path trees: root-and-prune each of the three
// implicit portal graphs at the source's portal with the destination
// portals as Q, pick parents locally from the portal parent relations, and
// prune the chosen-parent graph against D. Four prune executions total.
// ---------------------------------------------------------------------------

struct SptResult {
    ParentForest forest;
    RoundStats stats;
};

// Standalone run. Requires exactly one source; with pins >= 12 the three
// axis prunes run concurrently on disjoint lane ranges, otherwise they run
// back to back (pins >= 4).
SptResult compute_spt(const AmoebotStructure& s, int pins,
                      int64_t round_limit = 0, TraceSink trace = {});

inline constexpr int kSptConcurrentPins = 12;
inline constexpr int kSptSequentialPins = 4;

// Region-scoped variant used inside the forest algorithm. The view may
// consist of several components, each with its own source; every component
// computes parents toward its source. Parents are directions into the
// view; sources and pruned amoebots get -1. `x_block` shifts shared split-
// portal chain lanes (see tree_primitives).
std::vector<int8_t> spt_parents(CircuitEngine& engine, const Subview& view,
                                const std::vector<uint8_t>& sources,
                                const std::vector<uint8_t>& dests,
                                RoundStats& stats, const std::string& label,
                                const std::vector<uint8_t>* x_block = nullptr);

}  // namespace amoebot
