#include "amoebot/spt.hpp"

#include <memory>
#include <stdexcept>

namespace amoebot {

namespace {

// Portal circuit on explicit per-amoebot lanes (split-chain aware).
int8_t portal_circuit_set_at(const Subview& view, Axis axis, int lane,
                             AmoebotId i, ActivationIo& io,
                             const std::vector<uint8_t>* x_block) {
    if (!view.is_active(i)) return -1;
    int eff = lane;
    if (axis == Axis::X && x_block && (*x_block)[size_t(i)]) eff = lane + 4;
    Direction pos = axis_positive_dir(axis);
    Direction neg = opposite(pos);
    if (!view.has_edge(i, pos) && !view.has_edge(i, neg)) return -1;
    int8_t set = io.config.new_set();
    if (view.has_edge(i, pos)) io.config.assign(pos, eff, set);
    if (view.has_edge(i, neg)) io.config.assign(neg, eff, set);
    return set;
}

// Flag-portal beeps per axis (destinations or sources), one lane per axis,
// in a single scripted round.
std::array<std::vector<uint8_t>, 3> flag_portals(
    CircuitEngine& engine, const Subview& view, const std::vector<uint8_t>& flags,
    RoundStats& stats, const std::string& label,
    const std::vector<uint8_t>* x_block) {
    const AmoebotStructure& s = engine.structure();
    std::array<std::vector<uint8_t>, 3> in_q;
    for (auto& v : in_q) v.assign(size_t(s.size()), 0);
    auto sets = std::make_shared<std::vector<std::array<int8_t, 3>>>(
        size_t(s.size()), std::array<int8_t, 3>{-1, -1, -1});
    std::vector<BeepScript::Step> steps(1);
    steps[0].setup = [&view, &flags, sets, x_block](AmoebotId i,
                                                    ActivationIo& io) {
        if (!view.is_active(i)) return;
        for (Axis ax : kAllAxes) {
            int8_t pc = portal_circuit_set_at(view, ax, int(ax), i, io, x_block);
            if (pc < 0) pc = io.config.new_set();
            (*sets)[size_t(i)][size_t(ax)] = pc;
            if (flags[size_t(i)]) io.beep(pc);
        }
    };
    steps[0].read = [&view, &in_q, sets](AmoebotId i, const ActivationIo& io) {
        if (!view.is_active(i)) return;
        for (Axis ax : kAllAxes) {
            int8_t pc = (*sets)[size_t(i)][size_t(ax)];
            if (pc >= 0 && io.got(pc)) in_q[size_t(ax)][size_t(i)] = 1;
        }
    };
    engine.reset_receipts();
    BeepScript script(s, label, x_block ? 8 : 3, std::move(steps));
    engine.run_until(script, 8, stats, label);
    return in_q;
}

// The three axis prunes, concurrently on lanes {0-3, 4-7, 8-11} when the
// engine has enough pins and no chain-lane blocks are in play, otherwise
// back to back.
std::array<PortalRapResult, 3> axis_prunes(
    CircuitEngine& engine, const Subview& view,
    const std::array<std::vector<uint8_t>, 3>& root_portal,
    const std::array<std::vector<uint8_t>, 3>& in_q, RoundStats& stats,
    const std::string& label, const std::vector<uint8_t>* x_block) {
    const AmoebotStructure& s = engine.structure();
    const int n = s.size();
    std::array<PortalRapResult, 3> res;

    if (engine.pins() >= kSptConcurrentPins && !x_block) {
        std::array<TreeSpec, 3> ipg;
        std::vector<std::unique_ptr<EulerTourProgram>> tours;
        for (Axis ax : kAllAxes) {
            size_t a = size_t(ax);
            ipg[a] = portal_tree_with_roots(view, ax, root_portal[a]);
            std::vector<int8_t> marks(size_t(n), -1);
            for (AmoebotId i = 0; i < n; ++i)
                if (in_q[a][size_t(i)] && view.is_active(i) &&
                    is_portal_rep(view, i, ax) && ipg[a].edges[size_t(i)])
                    marks[size_t(i)] = canonical_mark_dir(ipg[a], i);
            tours.push_back(std::make_unique<EulerTourProgram>(
                s, label + ".tour." + axis_name(ax), ipg[a], marks));
        }
        ParallelPrograms combo(label + ".tours",
                               {{tours[0].get(), 0}, {tours[1].get(), 4},
                                {tours[2].get(), 8}},
                               s);
        engine.reset_receipts();
        auto outcome =
            engine.run_until(combo, 64 + 8 * int64_t(n), stats, label + ".tours");
        if (!outcome.terminated)
            throw std::runtime_error(label + ": round limit exceeded");

        std::vector<BeepScript::Step> axis_steps;
        for (Axis ax : kAllAxes) {
            size_t a = size_t(ax);
            res[a].in_vq.assign(size_t(n), 0);
            res[a].parent_side.assign(size_t(n), 0);
            res[a].connector_sign.assign(size_t(n), {0, 0, 0, 0, 0, 0});
            extract_connector_signs(view, ax, ipg[a], *tours[a], res[a]);
            axis_steps.push_back(portal_rap_dissemination(
                view, ax, ipg[a], *tours[a], in_q[a], int(a) * 3, res[a]));
        }
        // Fuse the three dissemination steps into one scripted round.
        std::vector<BeepScript::Step> steps(1);
        steps[0].setup = [axis_steps](AmoebotId i, ActivationIo& io) {
            for (const auto& st : axis_steps) st.setup(i, io);
        };
        steps[0].read = [axis_steps](AmoebotId i, const ActivationIo& io) {
            for (const auto& st : axis_steps) st.read(i, io);
        };
        engine.reset_receipts();
        BeepScript script(s, label + ".disseminate", 9, std::move(steps));
        engine.run_until(script, 8, stats, label + ".disseminate");
    } else {
        for (Axis ax : kAllAxes)
            res[size_t(ax)] = portal_root_and_prune(
                engine, view, ax, root_portal[size_t(ax)], in_q[size_t(ax)],
                stats, label + ".rap." + axis_name(ax), x_block);
    }
    return res;
}

// Local parent rule: a neighbor is feasible iff its portal is the parent
// portal on both axes not parallel to the connecting edge.
std::vector<int8_t> choose_parents(const Subview& view,
                                   const std::vector<uint8_t>& sources,
                                   const std::array<PortalRapResult, 3>& rap) {
    std::vector<int8_t> parent(view.active.size(), -1);
    for (AmoebotId i = 0; i < AmoebotId(view.active.size()); ++i) {
        if (!view.is_active(i) || sources[size_t(i)]) continue;
        for (Direction d : kAllDirs) {
            if (!view.has_edge(i, d)) continue;
            bool ok = true;
            for (Axis ax : kAllAxes) {
                if (ax == axis_of(d)) continue;
                if (!(rap[size_t(ax)].parent_side[size_t(i)] &
                      (1u << dir_index(d))))
                    ok = false;
            }
            if (ok) {
                parent[size_t(i)] = int8_t(dir_index(d));
                break;  // smallest qualifying direction
            }
        }
    }
    return parent;
}

// One scripted round: everyone beeps toward its chosen parent so both
// endpoints know the chosen-parent edges.
TreeSpec chosen_parent_tree(CircuitEngine& engine, const Subview& view,
                            const std::vector<uint8_t>& sources,
                            const std::vector<int8_t>& parent,
                            RoundStats& stats, const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    TreeSpec tree;
    tree.edges.assign(size_t(s.size()), 0);
    tree.roots = sources;
    auto sets = std::make_shared<std::vector<std::array<int8_t, 6>>>(
        size_t(s.size()), std::array<int8_t, 6>{-1, -1, -1, -1, -1, -1});
    std::vector<BeepScript::Step> steps(1);
    steps[0].setup = [&view, &parent, sets](AmoebotId i, ActivationIo& io) {
        if (!view.is_active(i)) return;
        for (Direction d : kAllDirs) {
            if (!view.has_edge(i, d)) continue;
            int8_t set = io.config.new_set();
            io.config.assign(d, 0, set);
            (*sets)[size_t(i)][size_t(dir_index(d))] = set;
            if (parent[size_t(i)] == dir_index(d)) io.beep(set);
        }
    };
    steps[0].read = [&view, &parent, &tree, sets, &s](AmoebotId i,
                                                      const ActivationIo& io) {
        if (!view.is_active(i)) return;
        for (Direction d : kAllDirs) {
            int8_t set = (*sets)[size_t(i)][size_t(dir_index(d))];
            bool got = set >= 0 && io.got(set);
            bool mine = parent[size_t(i)] == dir_index(d);
            AmoebotId v = s.neighbor(i, d);
            bool child = got && v != kNoAmoebot &&
                         parent[size_t(v)] == dir_index(opposite(d));
            if (child || mine)
                tree.edges[size_t(i)] |= uint8_t(1u << dir_index(d));
        }
    };
    engine.reset_receipts();
    BeepScript script(s, label, 1, std::move(steps));
    engine.run_until(script, 8, stats, label);
    return tree;
}

}  // namespace

std::vector<int8_t> spt_parents(CircuitEngine& engine, const Subview& view,
                                const std::vector<uint8_t>& sources,
                                const std::vector<uint8_t>& dests,
                                RoundStats& stats, const std::string& label,
                                const std::vector<uint8_t>* x_block) {
    auto in_q = flag_portals(engine, view, dests, stats, label + ".q", x_block);
    auto root_portal =
        flag_portals(engine, view, sources, stats, label + ".roots", x_block);
    auto rap =
        axis_prunes(engine, view, root_portal, in_q, stats, label, x_block);
    auto parent = choose_parents(view, sources, rap);
    TreeSpec tree = chosen_parent_tree(engine, view, sources, parent, stats,
                                       label + ".tree");
    auto final_rap =
        root_and_prune(engine, tree, dests, stats, label + ".prune", x_block);
    std::vector<int8_t> out(view.active.size(), -1);
    for (AmoebotId i = 0; i < AmoebotId(view.active.size()); ++i)
        if (final_rap.in_vq[size_t(i)]) out[size_t(i)] = final_rap.parent[size_t(i)];
    return out;
}

SptResult compute_spt(const AmoebotStructure& s, int pins, int64_t round_limit,
                      TraceSink trace) {
    auto sources = s.sources();
    if (sources.size() != 1)
        throw std::invalid_argument(
            "compute_spt: exactly one source required (use the forest "
            "algorithm for k > 1)");
    auto dests = s.destinations();
    if (dests.empty())
        throw std::invalid_argument("compute_spt: no destinations");
    (void)round_limit;

    SptResult res;
    CircuitEngine engine(s, pins);
    if (trace.on_round) engine.set_trace(std::move(trace));
    Subview view = Subview::whole(s);
    std::vector<uint8_t> dmask(size_t(s.size()), 0);
    for (AmoebotId d : dests) dmask[size_t(d)] = 1;
    std::vector<uint8_t> smask(size_t(s.size()), 0);
    smask[size_t(sources[0])] = 1;
    auto parents = spt_parents(engine, view, smask, dmask, res.stats, "spt");

    // Recover membership: the pruned graph's survivors plus the source.
    res.forest = ParentForest(s.size());
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (parents[size_t(i)] >= 0) {
            res.forest.member[size_t(i)] = 1;
            res.forest.parent[size_t(i)] = parents[size_t(i)];
        }
    }
    res.forest.member[size_t(sources[0])] = 1;
    return res;
}

}  // namespace amoebot
