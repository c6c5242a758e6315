#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amoebot/structure.hpp"

namespace amoebot::oracle {

// Centralized reference computations. These deliberately do not share code
// with the distributed programs they check: they may use global views,
// unbounded memory and direct recursion.

inline constexpr int kUnreachable = -1;

struct DistanceField {
    std::vector<int> dist;  // -1 where unreachable
};

// Exact multi-source BFS on G_X.
DistanceField bfs_distances(const AmoebotStructure& s,
                            const std::vector<AmoebotId>& roots);

struct ForestViolation {
    int property;  // 1..5
    std::string detail;
};

struct ForestReport {
    std::vector<ForestViolation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Checks the five forest properties: rootedness at distinct sources,
// leaves in S u D, vertex-disjointness, destination coverage, and exact
// shortest paths to a closest source.
ForestReport validate_forest(const AmoebotStructure& s,
                             const std::vector<AmoebotId>& sources,
                             const std::vector<AmoebotId>& dests,
                             const ParentForest& forest);

// Explicit portal graph: portals as vertices, adjacency from grid edges,
// plus the canonical connector edge per adjacent pair (the connecting edge
// whose lexicographically smaller endpoint is minimal, ties by the other
// endpoint).
struct ExplicitPortalTree {
    Axis axis;
    std::vector<Portal> portals;
    std::vector<int> portal_of;                       // per amoebot
    std::vector<std::pair<int, int>> edges;           // portal id pairs
    std::vector<std::pair<AmoebotId, AmoebotId>> connectors;  // per edge
};

ExplicitPortalTree explicit_portal_tree(const AmoebotStructure& s, Axis axis);

// Trees over amoebots are given as per-amoebot bitmasks over Direction;
// every tree edge must be a grid edge of the structure.
using TreeMask = std::vector<uint8_t>;

bool tree_has_edge(const TreeMask& t, AmoebotId i, Direction d);
int tree_degree(const TreeMask& t, AmoebotId i);

// Deterministic random spanning tree (test instance hook).
TreeMask random_spanning_tree(const AmoebotStructure& s, uint64_t seed);

// The canonical Euler tour: start at the root's smallest-direction tree
// edge, successor = next counterclockwise neighbor. One entry per directed
// edge in traversal order.
struct TourStep {
    AmoebotId from;
    Direction dir;
};
std::vector<TourStep> tour_walk(const AmoebotStructure& s, const TreeMask& t,
                                AmoebotId root);

// Prefix sums along the tour for a directed-edge weight assignment.
// weight(step) in {0,1}; returns inclusive prefix per tour position.
std::vector<int64_t> brute_prefix_sums(const std::vector<int>& weights);

// The canonical marked out-edge of a Q member: toward its smallest-
// direction tree neighbor.
Direction canonical_marked_dir(const TreeMask& t, AmoebotId i);

struct PruneResult {
    std::vector<uint8_t> in_vq;   // subtree (w.r.t. root) meets Q
    std::vector<int8_t> parent;   // Direction index toward parent, -1 at root
};

// Roots the tree at r and prunes subtrees without a node in Q.
PruneResult brute_root_and_prune(const AmoebotStructure& s, const TreeMask& t,
                                 AmoebotId r, const std::vector<uint8_t>& in_q);

// First Q member along the canonical tour from r (the election result).
AmoebotId brute_election(const AmoebotStructure& s, const TreeMask& t,
                         AmoebotId r, const std::vector<uint8_t>& in_q);

// Q-centroids: members of Q whose removal leaves components with at most
// |Q|/2 members of Q each.
std::vector<AmoebotId> brute_centroids(const AmoebotStructure& s,
                                       const TreeMask& t,
                                       const std::vector<uint8_t>& in_q);

// Degree->=3 nodes of the pruned tree T_Q (rooted at r).
std::vector<AmoebotId> brute_augmentation(const AmoebotStructure& s,
                                          const TreeMask& t, AmoebotId r,
                                          const std::vector<uint8_t>& in_q);

// Recursive centroid decomposition with the module tie-break (elect the
// tour-first centroid of each zone); level per Q' member, -1 elsewhere.
std::vector<int> brute_decomposition(const AmoebotStructure& s,
                                     const TreeMask& t, AmoebotId r,
                                     const std::vector<uint8_t>& in_qprime);

}  // namespace amoebot::oracle
