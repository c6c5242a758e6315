#pragma once

#include "amoebot/spt.hpp"

namespace amoebot {

// ---------------------------------------------------------------------------
// Multi-source shortest-path forests: split the structure at the portals
// carrying sources (plus the augmentation portals), solve each region from
// its boundary portals, and merge regions bottom-up along a centroid
// decomposition of the portal tree, finally pruning against D.
// ---------------------------------------------------------------------------

inline constexpr int kSpfPins = 8;

struct SpfResult {
    ParentForest forest;
    RoundStats stats;
};

SpfResult compute_spf(const AmoebotStructure& s, int pins = kSpfPins,
                      int64_t round_limit = 0, TraceSink trace = {});

// ------------- sub-operations, exposed for direct oracle testing ----------

// A forest over some scope: parent direction per amoebot (-1 at roots and
// outside), membership flags.
struct ForestSlice {
    std::vector<int8_t> parent;
    std::vector<uint8_t> member;

    explicit ForestSlice(int n = 0)
        : parent(size_t(n), -1), member(size_t(n), 0) {}
};

// Nearest-source forests on disjoint straight x-runs: PASC from every
// source both ways up to the next source; ties point west.
struct LineTask {
    std::vector<uint8_t> in_segment;   // a set of x-runs (per amoebot)
    std::vector<uint8_t> sources;
    std::vector<uint8_t> x_block;      // shared-chain lane shift
    ForestSlice forest;                // out
};
void line_forests(CircuitEngine& engine, std::vector<LineTask>& tasks,
                  RoundStats& stats, const std::string& label);

// Merges an S1-forest and an S2-forest on the same scope into an
// (S1 u S2)-forest: two concurrent tree-PASC runs and a bitwise distance
// comparison per amoebot; ties keep the first forest's parent.
struct MergeTask {
    Subview scope;
    std::vector<uint8_t> x_block;
    ForestSlice f1, f2;
    ForestSlice out;
};
void merge_forest_pairs(CircuitEngine& engine, std::vector<MergeTask>& tasks,
                        RoundStats& stats, const std::string& label);

// Propagates an S-forest on A u P across the x-portal (segment) P into the
// far side B: visibility classification, bitwise distance comparison of the
// two projections for doubly visible amoebots, and a shortest-path-tree run
// inside every invisible pocket.
struct PropagateTask {
    Subview scope;                // A u P u B
    std::vector<uint8_t> in_p;    // the portal segment
    std::vector<uint8_t> in_b;    // the far side
    bool b_is_south = true;
    std::vector<uint8_t> x_block;
    ForestSlice forest;           // in: forest on A u P; out: extended
};
void propagate_forests(CircuitEngine& engine, std::vector<PropagateTask>& tasks,
                       RoundStats& stats, const std::string& label);

// The source-portal set Q, its augmentation A_Q and Q' = Q u A_Q, as
// per-amoebot flags of the amoebot's x-portal, plus the prune that
// produced them (root = the leader's portal).
struct QprimeResult {
    std::vector<uint8_t> in_q, in_aq, in_qprime;
    PortalRapResult rap;
};
QprimeResult compute_qprime(CircuitEngine& engine, const AmoebotStructure& s,
                            RoundStats& stats, const std::string& label);

// Region decomposition: split at every Q' portal, then at every still-
// marked connector (the westernmost connector of each portal side is
// unmarked). Regions overlap on portal chains and marks; slots address the
// copies: 0 = north/plain, 1 = south, 2/3 = the east copies at marks.
struct RegionSet {
    struct Region {
        std::vector<std::pair<AmoebotId, uint8_t>> members;  // amoebot, slot
        int lca_portal = -1;
        int dsc_portal = -1;
    };
    std::vector<Region> regions;
    // Per amoebot: region id per slot, -1 when unused.
    std::vector<std::array<int32_t, 4>> slot_region;
    std::vector<uint8_t> mark_n, mark_s;
    std::vector<int> portal_of;        // x-portal ids
    int num_portals = 0;
};

RegionSet decompose_regions(CircuitEngine& engine, const AmoebotStructure& s,
                            const QprimeResult& qp, RoundStats& stats,
                            const std::string& label);

}  // namespace amoebot
