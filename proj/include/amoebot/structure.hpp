#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "amoebot/geometry.hpp"

namespace amoebot {

using AmoebotId = int32_t;
inline constexpr AmoebotId kNoAmoebot = -1;

// The occupied node set X with source/destination/leader annotations.
// Amoebots are indexed by their rank in (a, b)-sorted coordinate order;
// all per-amoebot arrays in the project use that indexing.
class AmoebotStructure {
  public:
    AmoebotStructure() = default;
    explicit AmoebotStructure(std::vector<NodeCoord> nodes);

    int size() const { return int(nodes_.size()); }
    const std::vector<NodeCoord>& nodes() const { return nodes_; }
    NodeCoord coord(AmoebotId i) const { return nodes_[size_t(i)]; }
    AmoebotId index_of(NodeCoord u) const;
    bool occupied(NodeCoord u) const { return index_of(u) != kNoAmoebot; }

    AmoebotId neighbor(AmoebotId i, Direction d) const {
        return neighbors_[size_t(i)][dir_index(d)];
    }
    // Bitmask over Direction of occupied neighbors.
    uint8_t neighbor_mask(AmoebotId i) const { return nbr_mask_[size_t(i)]; }
    int degree(AmoebotId i) const;

    bool is_source(AmoebotId i) const { return flags_[size_t(i)] & kSource; }
    bool is_dest(AmoebotId i) const { return flags_[size_t(i)] & kDest; }
    bool is_leader(AmoebotId i) const { return flags_[size_t(i)] & kLeader; }
    void set_source(AmoebotId i, bool v);
    void set_dest(AmoebotId i, bool v);
    void set_leader(AmoebotId i);

    std::vector<AmoebotId> sources() const;
    std::vector<AmoebotId> destinations() const;
    AmoebotId leader() const;

    // Stable content digest over coordinates and annotations.
    uint64_t digest() const;

  private:
    static constexpr uint8_t kSource = 1, kDest = 2, kLeader = 4;
    std::vector<NodeCoord> nodes_;                 // sorted by (a, b)
    std::vector<uint8_t> flags_;
    std::vector<std::array<AmoebotId, 6>> neighbors_;
    std::vector<uint8_t> nbr_mask_;
    std::unordered_map<NodeCoord, AmoebotId, NodeCoordHash> index_;
};

struct StructureViolation {
    enum class Kind { Connectivity, Hole, Annotation };
    Kind kind;
    std::string detail;
};

struct ValidationReport {
    std::vector<StructureViolation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Checks connectedness, hole-freeness and annotation containment.
ValidationReport validate_structure(const AmoebotStructure& s);

// Maximal run of occupied nodes along one axis.
struct Portal {
    Axis axis;
    std::vector<AmoebotId> members;  // ordered along axis_positive_dir(axis)
};

// Portals of one axis; partition of the occupied set.
std::vector<Portal> portals(const AmoebotStructure& s, Axis axis);
// portal id per amoebot, aligned with portals(s, axis).
std::vector<int> portal_ids(const AmoebotStructure& s, Axis axis);

// Spanning tree of X realizing the portal graph: all edges parallel to the
// axis plus one canonical connector edge per adjacent portal pair. Each
// amoebot's incident tree edges are decidable from its 2-neighborhood
// occupancy; edge_mask is a per-amoebot bitmask over Direction.
struct ImplicitPortalGraph {
    Axis axis;
    std::vector<uint8_t> edge_mask;
    bool has_edge(AmoebotId i, Direction d) const {
        return edge_mask[size_t(i)] & (1u << dir_index(d));
    }
    int edge_count() const;
};

ImplicitPortalGraph implicit_portal_graph(const AmoebotStructure& s, Axis axis);

// The local implicit-portal-graph edge rule, parameterized over an
// occupancy predicate so it applies both to whole structures and to region
// views. Axis-parallel edges always belong; one canonical connector joins
// each adjacent portal pair.
template <typename Occ>
bool ipg_edge_rule(Occ&& occ, Direction d, Axis axis) {
    if (!occ(d)) return false;
    if (axis_of(d) == axis) return true;
    switch (axis) {
        case Axis::X:
            switch (d) {
                case Direction::NW: return !occ(Direction::W);
                case Direction::NE: return !occ(Direction::NW);
                case Direction::SW: return !occ(Direction::W);
                case Direction::SE: return !occ(Direction::SW);
                default: return false;
            }
        case Axis::Y:
            switch (d) {
                case Direction::SE: return !occ(Direction::SW);
                case Direction::E:  return !occ(Direction::SE);
                case Direction::W:  return !occ(Direction::SW);
                case Direction::NW: return !occ(Direction::W);
                default: return false;
            }
        default:  // Axis::Z
            switch (d) {
                case Direction::NE: return !occ(Direction::NW);
                case Direction::E:  return !occ(Direction::NE);
                case Direction::W:  return !occ(Direction::NW);
                case Direction::SW: return !occ(Direction::W);
                default: return false;
            }
    }
}

// Whether {u, u+d} is an implicit-portal-graph edge of the axis, from the
// local occupancy rule alone. Exposed for the amoebot programs, which must
// derive their tree edges without global knowledge.
bool ipg_edge_local_rule(const AmoebotStructure& s, AmoebotId i, Direction d,
                         Axis axis);

// Tree distance between portal(u) and portal(v) in the axis portal graph.
int portal_distance(const AmoebotStructure& s, Axis axis, NodeCoord u,
                    NodeCoord v);

struct RandomStructureOptions {
    int num_sources = 1;
    int num_dests = 1;
    // Shape bias: 0 = round blob, higher = more dendritic growth.
    double straggle = 0.35;
};

// Deterministic in (seed, n, options). Grows a connected blob and fills all
// enclosed pockets, so the result is always connected and hole-free; size
// may exceed n by the filled pockets (and is >= n).
AmoebotStructure generate_random_structure(uint64_t seed, int n,
                                           const RandomStructureOptions& opt = {});

// Text format: one `a b [flags]` record per line, flags subset of {S,D,L},
// `#` comments and blank lines ignored. Exactly one L record required.
struct ParseError {
    int line = 0;
    std::string message;
};

std::optional<AmoebotStructure> parse_structure(const std::string& text,
                                                ParseError& err);
std::string write_structure(const AmoebotStructure& s);
std::optional<AmoebotStructure> load_structure_file(const std::string& path,
                                                    ParseError& err);
bool save_structure_file(const AmoebotStructure& s, const std::string& path);

// Per-amoebot optional parent direction; the output of the shortest-path
// algorithms. Roots and non-members carry no parent.
struct ParentForest {
    std::vector<int8_t> parent;  // Direction index or kNoParent
    std::vector<uint8_t> member;
    static constexpr int8_t kNoParent = -1;

    explicit ParentForest(int n = 0)
        : parent(size_t(n), kNoParent), member(size_t(n), 0) {}
    bool has_parent(AmoebotId i) const { return parent[size_t(i)] >= 0; }
    Direction parent_dir(AmoebotId i) const {
        return static_cast<Direction>(parent[size_t(i)]);
    }
};

std::string write_forest(const AmoebotStructure& s, const ParentForest& f);
std::optional<ParentForest> parse_forest(const AmoebotStructure& s,
                                         const std::string& text,
                                         ParseError& err);

}  // namespace amoebot
