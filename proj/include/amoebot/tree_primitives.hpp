#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "amoebot/oracle.hpp"
#include "amoebot/pasc.hpp"

namespace amoebot {

// ---------------------------------------------------------------------------
// Euler-tour technique and derived tree primitives, on general amoebot trees
// and on implicit portal graphs. Everything here runs as engine programs;
// the host only sequences phases and branches on globally observable beeps.
// ---------------------------------------------------------------------------

// A tree or forest over a subset of the amoebots, as per-amoebot edge
// bitmasks plus root flags. Edges must be symmetric and connect occupied
// neighbors; each tree carries at most one root (components without a root
// stay silent and are treated as pruned).
struct TreeSpec {
    std::vector<uint8_t> edges;
    std::vector<uint8_t> roots;

    static TreeSpec single(const std::vector<uint8_t>& edges, AmoebotId root) {
        TreeSpec t;
        t.edges = edges;
        t.roots.assign(edges.size(), 0);
        t.roots[size_t(root)] = 1;
        return t;
    }
    bool has_edge(AmoebotId i, Direction d) const {
        return edges[size_t(i)] & (1u << dir_index(d));
    }
    bool is_root(AmoebotId i) const { return roots[size_t(i)] != 0; }
};

// Subset view of the structure used to run primitives inside a region: an
// amoebot participates iff active; structure edges are restricted to the
// per-amoebot mask (symmetric).
struct Subview {
    const AmoebotStructure* s = nullptr;
    std::vector<uint8_t> active;
    std::vector<uint8_t> edge_mask;

    static Subview whole(const AmoebotStructure& s);
    bool has_edge(AmoebotId i, Direction d) const {
        return edge_mask[size_t(i)] & (1u << dir_index(d));
    }
    bool is_active(AmoebotId i) const { return active[size_t(i)] != 0; }
    // Maximal-run membership along an axis within the view.
    bool run_start(AmoebotId i, Axis ax) const {
        return is_active(i) && !has_edge(i, opposite(axis_positive_dir(ax)));
    }
};

// Canonical marked out-edge of a participating node: toward its smallest-
// direction tree neighbor.
int8_t canonical_mark_dir(const TreeSpec& t, AmoebotId i);

// Comparison state of two LSB-first bit streams.
enum class StreamCmp : int8_t { EQ = 0, GT = 1, LT = -1 };

// --------------------------- Euler tour program ---------------------------

// Runs PASC over the canonical Euler tour of `tree` with weight function
// w_Q (each q in Q marks its canonical out-edge). While streaming, every
// amoebot maintains, for each incident tree direction d toward neighbor v,
// the comparison of prefix(u->v) with prefix(v->u); the root collects |Q|
// bit by bit and broadcasts it on the tree circuit when `sized` mode needs
// the per-direction component-size comparisons of the centroid primitive.
class EulerTourProgram : public PascProgram {
  public:
    struct Options {
        bool broadcast_w = false;   // roots stream |Q| on their tree circuit
        bool sized = false;         // maintain component-size comparators
        // In sized mode: per-amoebot direction bitmask of edges on whose far
        // side the rest of the tree lies (the parent edge, from a prior
        // prune); those comparisons carry |Q| on the neighbor side.
        std::vector<uint8_t> parent_edge_mask;
        // East/west links of flagged amoebots use lanes 4..7 (split-portal
        // chain edges shared between two concurrent region programs).
        std::vector<uint8_t> x_block;
    };

    EulerTourProgram(const AmoebotStructure& s, std::string name,
                     const TreeSpec& tree, const std::vector<int8_t>& mark_dir);
    EulerTourProgram(const AmoebotStructure& s, std::string name,
                     const TreeSpec& tree, const std::vector<int8_t>& mark_dir,
                     Options opt);

    // Results, valid once the run terminated.
    StreamCmp edge_cmp(AmoebotId i, Direction d) const {
        return cmp_[size_t(i)][size_t(dir_index(d))];
    }
    // Component-size verdict per direction (sized mode): true when the
    // component of the neighbor at d has at most |Q|/2 members of Q.
    bool size_ok(AmoebotId i, Direction d) const {
        return sized_pass_[size_t(i)][size_t(dir_index(d))] != 0;
    }
    // Per-root |Q| observations (only roots with tree edges collect them).
    bool root_w_nonzero(AmoebotId i) const { return w_nonzero_[size_t(i)] != 0; }
    int64_t w_value(AmoebotId i) const { return w_value_[size_t(i)]; }
    bool has_tree_edges(AmoebotId i) const {
        return tree_.edges[size_t(i)] != 0;
    }
    const TreeSpec& tree() const { return tree_; }

  protected:
    void control_setup(AmoebotId i, ActivationIo& io) override;
    void control_read(AmoebotId i, const ActivationIo& io) override;
    void on_iteration(AmoebotId i) override;
    void on_finished(AmoebotId i) override;
    int extra_state_bits(AmoebotId i) const override;

  private:
    struct SizedCmp {
        uint8_t a1 = 0, a2 = 0, b1 = 0, b2 = 0;  // buffered stream bits
        uint8_t carry = 0;
        int8_t cmp = 0;  // running comparison of the padded streams
        uint8_t w_on_b = 0;
    };

    TreeSpec tree_;
    Options opt_;
    // Per amoebot: instance index producing the out/in prefix per direction.
    std::vector<std::array<int8_t, 6>> out_inst_, in_inst_;
    std::vector<int8_t> terminal_inst_;  // per amoebot, -1 unless root
    std::vector<std::array<StreamCmp, 6>> cmp_;
    std::vector<std::array<uint8_t, 6>> sized_pass_;
    std::vector<SizedCmp> sized_state_;  // flattened [i*6 + d]
    std::vector<uint8_t> w_bit_pending_;
    std::vector<uint8_t> w_nonzero_;
    std::vector<int64_t> w_value_;
    std::vector<uint8_t> done_flush_;

    static void sized_update(SizedCmp& st, uint8_t abit, uint8_t bbit,
                             uint8_t wbit);
};

// Builds the per-amoebot PASC instances of the canonical Euler tour.
// `x_block` (optional, per amoebot) shifts the lanes of east/west links by
// 4: regions on opposite sides of a split portal share those chain edges
// and must stay on disjoint lanes.
std::vector<std::vector<PascProgram::Instance>> euler_tour_instances(
    const AmoebotStructure& s, const TreeSpec& tree,
    const std::vector<int8_t>& mark_dir, int lane_base = 0,
    const std::vector<uint8_t>* x_block = nullptr);

// ------------------------------- primitives -------------------------------

struct RapResult {
    std::vector<uint8_t> in_vq;
    std::vector<int8_t> parent;  // direction index, -1 at root and pruned
    std::vector<std::array<int8_t, 6>> edge_sign;  // per-direction diff sign
    bool q_empty = false;
};

// Roots `tree` at its root and prunes subtrees without a node in Q.
RapResult root_and_prune(CircuitEngine& engine, const TreeSpec& tree,
                         const std::vector<uint8_t>& in_q, RoundStats& stats,
                         const std::string& label,
                         const std::vector<uint8_t>* x_block = nullptr);

// Elects the first Q member along the canonical tour. Returns kNoAmoebot
// and reports a fault when Q is empty.
AmoebotId election(CircuitEngine& engine, const TreeSpec& tree,
                   const std::vector<uint8_t>& in_q, RoundStats& stats,
                   const std::string& label);

// Q-centroids: prune (for parents), then a sized Euler tour.
std::vector<uint8_t> centroids(CircuitEngine& engine, const TreeSpec& tree,
                               const std::vector<uint8_t>& in_q,
                               RoundStats& stats, const std::string& label);

// Augmentation set A_Q: nodes of degree >= 3 in the pruned tree T_Q.
std::vector<uint8_t> augmentation(CircuitEngine& engine, const TreeSpec& tree,
                                  const std::vector<uint8_t>& in_q,
                                  RoundStats& stats, const std::string& label);

// Iterative Q'-centroid decomposition; level[i] = depth at which i was the
// elected centroid of its zone, -1 for non-members.
std::vector<int> decomposition(CircuitEngine& engine, const TreeSpec& tree,
                               const std::vector<uint8_t>& in_qprime,
                               RoundStats& stats, const std::string& label);

// ---------------------------- portal variants -----------------------------

// Portal-level inputs/outputs are carried per amoebot (each amoebot knows
// the status of its own portal).
struct PortalRapResult {
    std::vector<uint8_t> in_vq;        // portal of u is in V_Q
    std::vector<uint8_t> parent_side;  // direction bitmask: neighbors in the
                                       // parent portal of portal(u)
    // Connector knowledge: sign of the portal-tree prefix difference of the
    // connector edge at direction d (0 where not a connector edge).
    std::vector<std::array<int8_t, 6>> connector_sign;
    bool q_empty = false;
};

// The implicit portal graph of the view, by the local edge rules.
TreeSpec implicit_portal_tree(const Subview& view, Axis axis,
                              AmoebotId root_member);

// Representative (lexicographically minimal member) test, local rule.
bool is_portal_rep(const Subview& view, AmoebotId i, Axis axis);

PortalRapResult portal_root_and_prune(CircuitEngine& engine, const Subview& view,
                                      Axis axis,
                                      const std::vector<uint8_t>& root_portal,
                                      const std::vector<uint8_t>& in_q,
                                      RoundStats& stats,
                                      const std::string& label,
                                      const std::vector<uint8_t>* x_block = nullptr);

// Elects a portal of Q; returns per-amoebot membership of the elected
// portal (empty Q yields an all-zero mask and q_empty).
struct PortalElectionResult {
    std::vector<uint8_t> elected;
    bool q_empty = false;
};
PortalElectionResult portal_election(CircuitEngine& engine, const Subview& view,
                                     Axis axis,
                                     const std::vector<uint8_t>& root_portal,
                                     const std::vector<uint8_t>& in_q,
                                     RoundStats& stats,
                                     const std::string& label);

// Q-centroid portals, per-amoebot membership flags.
std::vector<uint8_t> portal_centroids(CircuitEngine& engine, const Subview& view,
                                      Axis axis,
                                      const std::vector<uint8_t>& root_portal,
                                      const std::vector<uint8_t>& in_q,
                                      RoundStats& stats,
                                      const std::string& label);

// Augmentation set A_Q of the portal tree, per-amoebot membership flags.
std::vector<uint8_t> portal_augmentation(CircuitEngine& engine,
                                         const Subview& view, Axis axis,
                                         const std::vector<uint8_t>& root_portal,
                                         const std::vector<uint8_t>& in_q,
                                         RoundStats& stats,
                                         const std::string& label);

// Augmentation given an already-computed prune (saves repeating the tour).
std::vector<uint8_t> portal_augmentation_given(CircuitEngine& engine,
                                               const Subview& view, Axis axis,
                                               const PortalRapResult& rap,
                                               RoundStats& stats,
                                               const std::string& label);

// Portal-level decomposition; level per amoebot (of its portal), -1 outside.
// `on_level`, when set, observes each recursion level's elected portals
// (per-amoebot membership flags) right after they are removed.
std::vector<int> portal_decomposition(
    CircuitEngine& engine, const Subview& view, Axis axis,
    const std::vector<uint8_t>& root_portal,
    const std::vector<uint8_t>& in_qprime, RoundStats& stats,
    const std::string& label,
    const std::function<void(int, const std::vector<uint8_t>&)>& on_level = {});

// ------------------------------ beep scripts ------------------------------

// A short scripted sequence of beep rounds: each step builds circuits and
// sends, and reads the receipts of the previous step.
class BeepScript : public AmoebotProgram {
  public:
    struct Step {
        std::function<void(AmoebotId, ActivationIo&)> setup;
        std::function<void(AmoebotId, const ActivationIo&)> read;
    };

    BeepScript(const AmoebotStructure& s, std::string name, int pins,
               std::vector<Step> steps, int state_bits = 8)
        : s_(s), name_(std::move(name)), pins_(pins), steps_(std::move(steps)),
          declared_bits_(state_bits), n_(s.size()) {}

    std::string name() const override { return name_; }
    int min_pins() const override { return pins_; }
    int state_bits(AmoebotId) const override { return declared_bits_; }
    void activate(AmoebotId i, ActivationIo& io) override;

    // Places every unassigned valid pin into singleton sets.
    static void fill_singletons(const AmoebotStructure& s, int pins,
                                AmoebotId i, ActivationIo& io);

  private:
    const AmoebotStructure& s_;
    std::string name_;
    int pins_;
    std::vector<Step> steps_;
    int declared_bits_;
    int n_;
    int64_t round_ = 0;
};

// Portal circuit helper: joins the amoebot's along-axis pins of `lane` into
// one set and returns its index, or -1 when the amoebot has no axis pins in
// the view.
int8_t portal_circuit_set(const Subview& view, Axis axis, int lane, AmoebotId i,
                          ActivationIo& io);

// The dissemination step of the portal prune: portal circuits carry V_Q
// membership on lane_base, the two side-adjacency circuits carry the
// parent-portal beeps on lane_base+1/+2. Results are written into `out`
// (which must outlive the returned step). Shared with the shortest-path
// algorithms, which fuse the three axes into a single scripted round.
BeepScript::Step portal_rap_dissemination(const Subview& view, Axis axis,
                                          const TreeSpec& ipg,
                                          const EulerTourProgram& prog,
                                          const std::vector<uint8_t>& in_q,
                                          int lane_base, PortalRapResult& out,
                                          const std::vector<uint8_t>* x_block = nullptr);

// Connector-edge prefix-difference signs from a finished tour.
void extract_connector_signs(const Subview& view, Axis axis, const TreeSpec& ipg,
                             const EulerTourProgram& prog, PortalRapResult& out);

// The implicit portal tree of the view with roots at the representatives of
// all root-flagged portals.
TreeSpec portal_tree_with_roots(const Subview& view, Axis axis,
                                const std::vector<uint8_t>& root_portal);

}  // namespace amoebot
