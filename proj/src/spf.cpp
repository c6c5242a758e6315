#include "amoebot/spf.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace amoebot {

namespace {

int edge_base(const std::vector<uint8_t>& x_block, AmoebotId i, Direction d,
              int pair) {
    int base = pair;
    if (!x_block.empty() && x_block[size_t(i)] && axis_of(d) == Axis::X)
        base += 4;
    return base;
}

// Tree-PASC instances over a forest, one per member, with per-edge lane
// pairs (pair 0 -> lanes {0,1}, pair 2 -> {2,3}, shifted by 4 on flagged
// chain edges).
void append_forest_instances(std::vector<std::vector<PascProgram::Instance>>& inst,
                             const AmoebotStructure& s, const Subview& scope,
                             const ForestSlice& f,
                             const std::vector<uint8_t>& x_block, int pair) {
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (!scope.is_active(i) || !f.member[size_t(i)]) continue;
        PascProgram::Instance node;
        node.head = f.parent[size_t(i)] < 0;
        node.weight1 = !node.head;
        if (!node.head) {
            Direction up = direction_from_index(f.parent[size_t(i)]);
            int base = edge_base(x_block, i, up, pair);
            node.in = PascProgram::Link{up, uint8_t(base), uint8_t(base + 1)};
        }
        for (Direction d : kAllDirs) {
            if (!scope.has_edge(i, d)) continue;
            AmoebotId c = s.neighbor(i, d);
            if (!f.member[size_t(c)] ||
                f.parent[size_t(c)] != dir_index(opposite(d)))
                continue;
            int base = edge_base(x_block, i, d, pair);
            node.outs.push_back({d, uint8_t(base), uint8_t(base + 1)});
        }
        inst[size_t(i)].push_back(node);
    }
}

// Last-differing-bit comparison of two LSB-first streams with presence
// tracking (a stream that never carried a signal counts as infinite).
struct DistCmp {
    int8_t cmp = 0;      // <0: first smaller ... by MSB-differing bit
    uint8_t got1 = 0, got2 = 0;
    void feed(uint8_t b1, bool live1, uint8_t b2, bool live2) {
        got1 |= live1;
        got2 |= live2;
        if (b1 != b2) cmp = b1 ? 1 : -1;
    }
    // true when the first stream is the (weakly) smaller finite one.
    bool first_wins() const {
        if (!got2) return true;
        if (!got1) return false;
        return cmp <= 0;
    }
};

}  // namespace

// ------------------------------ line forests ------------------------------

namespace {

class LinePascProgram : public PascProgram {
  public:
    LinePascProgram(const AmoebotStructure& s, std::vector<LineTask>& tasks)
        : PascProgram(s, "spf.line", build(s, tasks, nullptr)), s_(s),
          tasks_(tasks) {
        base_.assign(tasks.size(), std::vector<int8_t>(size_t(s.size()), -1));
        build(s, tasks, &base_);
        cmp_.assign(tasks.size(), std::vector<DistCmp>(size_t(s.size())));
    }

  protected:
    void on_iteration(AmoebotId i) override {
        auto st = inst_state(i);
        for (size_t t = 0; t < tasks_.size(); ++t) {
            int8_t b = base_[t][size_t(i)];
            if (b < 0) continue;
            cmp_[t][size_t(i)].feed(st[size_t(b)].post, st[size_t(b)].got,
                                    st[size_t(b) + 1].post, st[size_t(b) + 1].got);
        }
    }
    void on_finished(AmoebotId i) override {
        for (size_t t = 0; t < tasks_.size(); ++t) {
            if (base_[t][size_t(i)] < 0 && !tasks_[t].in_segment[size_t(i)])
                continue;
            LineTask& task = tasks_[t];
            ForestSlice& f = task.forest;
            if (task.sources[size_t(i)]) {
                f.member[size_t(i)] = 1;
                f.parent[size_t(i)] = -1;
                continue;
            }
            const DistCmp& cm = cmp_[t][size_t(i)];
            if (!cm.got1 && !cm.got2) continue;  // no source on this run
            f.member[size_t(i)] = 1;
            f.parent[size_t(i)] = int8_t(
                dir_index(cm.first_wins() ? Direction::W : Direction::E));
        }
    }
    int extra_state_bits(AmoebotId) const override { return 5; }

  private:
    static std::vector<std::vector<Instance>> build(
        const AmoebotStructure& s, std::vector<LineTask>& tasks,
        std::vector<std::vector<int8_t>>* base) {
        std::vector<std::vector<Instance>> inst(size_t(s.size()));
        for (size_t t = 0; t < tasks.size(); ++t) {
            LineTask& task = tasks[t];
            for (AmoebotId i = 0; i < s.size(); ++i) {
                if (!task.in_segment[size_t(i)]) continue;
                AmoebotId west = s.neighbor(i, Direction::W);
                AmoebotId east = s.neighbor(i, Direction::E);
                bool win = west != kNoAmoebot && task.in_segment[size_t(west)];
                bool ein = east != kNoAmoebot && task.in_segment[size_t(east)];
                bool src = task.sources[size_t(i)] != 0;
                int b = edge_base(task.x_block, i, Direction::E, 0);
                if (base) (*base)[t][size_t(i)] = int8_t(inst[size_t(i)].size());
                // Eastward chains (distance to the nearest western source).
                Instance e;
                e.head = src;
                e.weight1 = !src;
                if (!src && win)
                    e.in = Link{Direction::W, uint8_t(b), uint8_t(b + 1)};
                if (ein && !task.sources[size_t(east)])
                    e.outs.push_back({Direction::E, uint8_t(b), uint8_t(b + 1)});
                inst[size_t(i)].push_back(e);
                // Westward chains.
                Instance w;
                w.head = src;
                w.weight1 = !src;
                if (!src && ein)
                    w.in = Link{Direction::E, uint8_t(b + 2), uint8_t(b + 3)};
                if (win && !task.sources[size_t(west)])
                    w.outs.push_back(
                        {Direction::W, uint8_t(b + 2), uint8_t(b + 3)});
                inst[size_t(i)].push_back(w);
            }
        }
        return inst;
    }

    const AmoebotStructure& s_;
    std::vector<LineTask>& tasks_;
    std::vector<std::vector<int8_t>> base_;
    std::vector<std::vector<DistCmp>> cmp_;
};

}  // namespace

void line_forests(CircuitEngine& engine, std::vector<LineTask>& tasks,
                  RoundStats& stats, const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    for (auto& task : tasks) {
        task.forest = ForestSlice(s.size());
        if (task.x_block.empty()) task.x_block.assign(size_t(s.size()), 0);
    }
    engine.reset_receipts();
    LinePascProgram prog(s, tasks);
    auto outcome =
        engine.run_until(prog, 64 + 8 * int64_t(s.size()), stats, label);
    if (!outcome.terminated)
        throw std::runtime_error(label + ": round limit exceeded");
}

// ------------------------------ forest merge -------------------------------

namespace {

class MergePascProgram : public PascProgram {
  public:
    MergePascProgram(const AmoebotStructure& s, std::vector<MergeTask>& tasks)
        : PascProgram(s, "spf.merge", build(s, tasks, nullptr)), tasks_(tasks) {
        idx_.assign(tasks.size(),
                    std::vector<std::array<int8_t, 2>>(size_t(s.size()),
                                                       {-1, -1}));
        build(s, tasks, &idx_);
        cmp_.assign(tasks.size(), std::vector<DistCmp>(size_t(s.size())));
    }

  protected:
    void on_iteration(AmoebotId i) override {
        auto st = inst_state(i);
        for (size_t t = 0; t < tasks_.size(); ++t) {
            auto [i1, i2] = idx_[t][size_t(i)];
            if (i1 < 0 && i2 < 0) continue;
            uint8_t b1 = 0, b2 = 0;
            bool live1 = false, live2 = false;
            if (i1 >= 0) {
                b1 = st[size_t(i1)].post;
                live1 = st[size_t(i1)].got;
            }
            if (i2 >= 0) {
                b2 = st[size_t(i2)].post;
                live2 = st[size_t(i2)].got;
            }
            cmp_[t][size_t(i)].feed(b1, live1, b2, live2);
        }
    }
    void on_finished(AmoebotId i) override {
        for (size_t t = 0; t < tasks_.size(); ++t) {
            MergeTask& task = tasks_[t];
            if (!task.scope.is_active(i)) continue;
            bool m1 = task.f1.member[size_t(i)] != 0;
            bool m2 = task.f2.member[size_t(i)] != 0;
            if (!m1 && !m2) continue;
            task.out.member[size_t(i)] = 1;
            const DistCmp& cm = cmp_[t][size_t(i)];
            bool pick1 = m1 && (!m2 || cm.first_wins());
            if (m1 && m2) {
                bool root1 = task.f1.parent[size_t(i)] < 0;
                bool root2 = task.f2.parent[size_t(i)] < 0;
                if (root1 || root2) pick1 = root1;
            }
            task.out.parent[size_t(i)] =
                pick1 ? task.f1.parent[size_t(i)] : task.f2.parent[size_t(i)];
        }
    }
    int extra_state_bits(AmoebotId) const override { return 5; }

  private:
    static std::vector<std::vector<Instance>> build(
        const AmoebotStructure& s, std::vector<MergeTask>& tasks,
        std::vector<std::vector<std::array<int8_t, 2>>>* idx) {
        std::vector<std::vector<Instance>> inst(size_t(s.size()));
        for (size_t t = 0; t < tasks.size(); ++t) {
            auto& task = tasks[t];
            if (idx)
                for (AmoebotId i = 0; i < s.size(); ++i) {
                    if (!task.scope.is_active(i)) continue;
                    int8_t next = int8_t(inst[size_t(i)].size());
                    if (task.f1.member[size_t(i)]) (*idx)[t][size_t(i)][0] = next++;
                    if (task.f2.member[size_t(i)]) (*idx)[t][size_t(i)][1] = next;
                }
            append_forest_instances(inst, s, task.scope, task.f1, task.x_block, 0);
            append_forest_instances(inst, s, task.scope, task.f2, task.x_block, 2);
        }
        return inst;
    }

    std::vector<MergeTask>& tasks_;
    std::vector<std::vector<std::array<int8_t, 2>>> idx_;
    std::vector<std::vector<DistCmp>> cmp_;
};

}  // namespace

void merge_forest_pairs(CircuitEngine& engine, std::vector<MergeTask>& tasks,
                        RoundStats& stats, const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    for (auto& task : tasks) {
        task.out = ForestSlice(s.size());
        if (task.x_block.empty()) task.x_block.assign(size_t(s.size()), 0);
    }
    engine.reset_receipts();
    MergePascProgram prog(s, tasks);
    auto outcome =
        engine.run_until(prog, 64 + 8 * int64_t(s.size()), stats, label);
    if (!outcome.terminated)
        throw std::runtime_error(label + ": round limit exceeded");
}

// ------------------------------ propagation --------------------------------

namespace {

// Side geometry of a propagation: projections run along y and z from B
// toward the portal's row.
struct PropDirs {
    Direction ny, nz;          // neighbor toward the y-/z-projection
    Direction p_to_b_y, p_to_b_z;  // portal's pin into B along y/z
};

PropDirs prop_dirs(bool b_is_south) {
    if (b_is_south)
        return {Direction::NE, Direction::NW, Direction::SW, Direction::SE};
    return {Direction::SW, Direction::SE, Direction::NE, Direction::NW};
}

// Builds the y- or z-portal circuits of P u B within the scope: portal
// members join only their B-side pin, B members join their in-scope pins.
// Returns the set id (possibly fresh and empty) per amoebot.
int8_t vis_circuit_set(const PropagateTask& task, Axis run_axis, int lane,
                       AmoebotId i, ActivationIo& io) {
    bool in_p = task.in_p[size_t(i)] != 0;
    bool in_b = task.in_b[size_t(i)] != 0;
    if (!in_p && !in_b) return -1;
    PropDirs pd = prop_dirs(task.b_is_south);
    Direction pos = axis_positive_dir(run_axis);
    Direction neg = opposite(pos);
    int8_t set = -1;
    for (Direction d : {pos, neg}) {
        if (!task.scope.has_edge(i, d)) continue;
        if (in_p && d != (run_axis == Axis::Y ? pd.p_to_b_y : pd.p_to_b_z))
            continue;  // the portal joins only its B-side pin
        AmoebotId v = task.scope.s->neighbor(i, d);
        if (!task.in_p[size_t(v)] && !task.in_b[size_t(v)]) continue;
        if (set < 0) set = io.config.new_set();
        io.config.assign(d, lane, set);
    }
    return set;
}

// Forest PASC over A u P with per-iteration forwarding of the portal
// members' distance bits along their y- and z-runs into B.
class PropagatePascProgram : public PascProgram {
  public:
    PropagatePascProgram(const AmoebotStructure& s,
                         std::vector<PropagateTask>& tasks,
                         const std::vector<uint8_t>& live,
                         const std::vector<std::vector<std::array<uint8_t, 2>>>& vis)
        : PascProgram(s, "spf.propagate.pasc", build(s, tasks, nullptr)),
          tasks_(tasks), live_(live), vis_(vis) {
        base_.assign(tasks.size(), std::vector<int8_t>(size_t(s.size()), -1));
        build(s, tasks, &base_);
        pend_.assign(tasks.size(), std::vector<uint8_t>(size_t(s.size()), 0));
        cmp_.assign(tasks.size(), std::vector<DistCmp>(size_t(s.size())));
        ysets_.assign(tasks.size(), std::vector<int8_t>(size_t(s.size()), -1));
        zsets_.assign(tasks.size(), std::vector<int8_t>(size_t(s.size()), -1));
        require_pins(3);  // forwarding circuits on lanes 1 and 2
    }

    // dist(S, proj_y) <= dist(S, proj_z) -> the y-side neighbor is chosen.
    bool y_side_wins(size_t task, AmoebotId i) const {
        return cmp_[task][size_t(i)].first_wins();
    }

  protected:
    void on_iteration(AmoebotId i) override {
        auto st = inst_state(i);
        for (size_t t = 0; t < tasks_.size(); ++t) {
            if (!tasks_[t].in_p[size_t(i)]) continue;
            int8_t b = base_[t][size_t(i)];
            pend_[t][size_t(i)] = b < 0 ? 0 : st[size_t(b)].post;
        }
    }
    void control_setup(AmoebotId i, ActivationIo& io) override {
        for (size_t t = 0; t < tasks_.size(); ++t) {
            const PropagateTask& task = tasks_[t];
            if (!task.in_p[size_t(i)] && !task.in_b[size_t(i)]) continue;
            ysets_[t][size_t(i)] = vis_circuit_set(task, Axis::Y, 1, i, io);
            zsets_[t][size_t(i)] = vis_circuit_set(task, Axis::Z, 2, i, io);
            if (task.in_p[size_t(i)] && pend_[t][size_t(i)]) {
                if (ysets_[t][size_t(i)] >= 0) io.beep(ysets_[t][size_t(i)]);
                if (zsets_[t][size_t(i)] >= 0) io.beep(zsets_[t][size_t(i)]);
            }
        }
    }
    void control_read(AmoebotId i, const ActivationIo& io) override {
        for (size_t t = 0; t < tasks_.size(); ++t) {
            if (!live_[t]) continue;
            const PropagateTask& task = tasks_[t];
            if (!task.in_b[size_t(i)]) continue;
            if (!(vis_[t][size_t(i)][0] && vis_[t][size_t(i)][1])) continue;
            uint8_t by = ysets_[t][size_t(i)] >= 0 && io.got(ysets_[t][size_t(i)]);
            uint8_t bz = zsets_[t][size_t(i)] >= 0 && io.got(zsets_[t][size_t(i)]);
            cmp_[t][size_t(i)].feed(by, true, bz, true);
        }
    }
    int extra_state_bits(AmoebotId) const override { return 6; }

  private:
    static std::vector<std::vector<Instance>> build(
        const AmoebotStructure& s, std::vector<PropagateTask>& tasks,
        std::vector<std::vector<int8_t>>* base) {
        std::vector<std::vector<Instance>> inst(size_t(s.size()));
        for (size_t t = 0; t < tasks.size(); ++t) {
            auto& task = tasks[t];
            if (base)
                for (AmoebotId i = 0; i < s.size(); ++i)
                    if (task.scope.is_active(i) && task.forest.member[size_t(i)])
                        (*base)[t][size_t(i)] = int8_t(inst[size_t(i)].size());
            append_forest_instances(inst, s, task.scope, task.forest,
                                    task.x_block, 0);
        }
        return inst;
    }

    std::vector<PropagateTask>& tasks_;
    const std::vector<uint8_t>& live_;
    const std::vector<std::vector<std::array<uint8_t, 2>>>& vis_;
    std::vector<std::vector<int8_t>> base_;
    std::vector<std::vector<uint8_t>> pend_;
    std::vector<std::vector<DistCmp>> cmp_;
    std::vector<std::vector<int8_t>> ysets_, zsets_;
};

}  // namespace

void propagate_forests(CircuitEngine& engine, std::vector<PropagateTask>& tasks,
                       RoundStats& stats, const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    const int n = s.size();
    for (auto& task : tasks)
        if (task.x_block.empty()) task.x_block.assign(size_t(n), 0);

    // Step 1: does the forest carry any source? Roots beep on the scope
    // circuit of their task.
    std::vector<uint8_t> live(tasks.size(), 0);
    {
        auto sets = std::make_shared<std::vector<std::vector<int8_t>>>(
            tasks.size(), std::vector<int8_t>(size_t(n), -1));
        std::vector<BeepScript::Step> steps(1);
        steps[0].setup = [&, sets](AmoebotId i, ActivationIo& io) {
            for (size_t t = 0; t < tasks.size(); ++t) {
                const PropagateTask& task = tasks[t];
                if (!task.scope.is_active(i)) continue;
                int8_t set = io.config.new_set();
                for (Direction d : kAllDirs)
                    if (task.scope.has_edge(i, d))
                        io.config.assign(d, edge_base(task.x_block, i, d, 3), set);
                (*sets)[t][size_t(i)] = set;
                if (task.forest.member[size_t(i)] &&
                    task.forest.parent[size_t(i)] < 0)
                    io.beep(set);
            }
        };
        steps[0].read = [&, sets](AmoebotId i, const ActivationIo& io) {
            for (size_t t = 0; t < tasks.size(); ++t) {
                int8_t set = (*sets)[t][size_t(i)];
                if (set >= 0 && io.got(set)) live[t] = 1;
            }
        };
        engine.reset_receipts();
        BeepScript script(s, label + ".live", 8, std::move(steps));
        engine.run_until(script, 8, stats, label + ".live");
    }

    // Step 2: visibility classification. Portal members beep on their y-
    // and z-runs into B.
    std::vector<std::vector<std::array<uint8_t, 2>>> vis(
        tasks.size(), std::vector<std::array<uint8_t, 2>>(size_t(n), {0, 0}));
    {
        auto ysets = std::make_shared<std::vector<std::vector<int8_t>>>(
            tasks.size(), std::vector<int8_t>(size_t(n), -1));
        auto zsets = std::make_shared<std::vector<std::vector<int8_t>>>(
            tasks.size(), std::vector<int8_t>(size_t(n), -1));
        std::vector<BeepScript::Step> steps(1);
        steps[0].setup = [&, ysets, zsets](AmoebotId i, ActivationIo& io) {
            for (size_t t = 0; t < tasks.size(); ++t) {
                auto& task = tasks[t];
                if (!task.in_p[size_t(i)] && !task.in_b[size_t(i)]) continue;
                (*ysets)[t][size_t(i)] = vis_circuit_set(task, Axis::Y, 1, i, io);
                (*zsets)[t][size_t(i)] = vis_circuit_set(task, Axis::Z, 2, i, io);
                if (task.in_p[size_t(i)]) {
                    if ((*ysets)[t][size_t(i)] >= 0)
                        io.beep((*ysets)[t][size_t(i)]);
                    if ((*zsets)[t][size_t(i)] >= 0)
                        io.beep((*zsets)[t][size_t(i)]);
                }
            }
        };
        steps[0].read = [&, ysets, zsets](AmoebotId i, const ActivationIo& io) {
            for (size_t t = 0; t < tasks.size(); ++t) {
                if ((*ysets)[t][size_t(i)] >= 0 && io.got((*ysets)[t][size_t(i)]))
                    vis[t][size_t(i)][0] = 1;
                if ((*zsets)[t][size_t(i)] >= 0 && io.got((*zsets)[t][size_t(i)]))
                    vis[t][size_t(i)][1] = 1;
            }
        };
        engine.reset_receipts();
        BeepScript script(s, label + ".vis", 3, std::move(steps));
        engine.run_until(script, 8, stats, label + ".vis");
    }

    // Step 3: distances of the portal members stream through the forest
    // PASC and are forwarded along the runs; doubly visible amoebots
    // compare the two projections.
    engine.reset_receipts();
    PropagatePascProgram pasc(s, tasks, live, vis);
    auto outcome = engine.run_until(pasc, 64 + 8 * int64_t(n), stats,
                                    label + ".pasc");
    if (!outcome.terminated)
        throw std::runtime_error(label + ": round limit exceeded");

    // First-phase parents for everything visible.
    for (size_t t = 0; t < tasks.size(); ++t) {
        if (!live[t]) continue;
        PropagateTask& task = tasks[t];
        PropDirs pd = prop_dirs(task.b_is_south);
        for (AmoebotId i = 0; i < n; ++i) {
            if (!task.in_b[size_t(i)]) continue;
            bool vy = vis[t][size_t(i)][0], vz = vis[t][size_t(i)][1];
            if (!vy && !vz) continue;
            Direction dir;
            if (vy && vz) dir = pasc.y_side_wins(t, i) ? pd.ny : pd.nz;
            else dir = vy ? pd.ny : pd.nz;
            task.forest.member[size_t(i)] = 1;
            task.forest.parent[size_t(i)] = int8_t(dir_index(dir));
        }
    }

    // Step 4: pocket handling. B'' members discover their contacts with
    // the visible layer and elect the pocket sources. Direction masks are
    // per amoebot: every structure edge belongs to exactly one task.
    auto edge_task = [&](AmoebotId i, Direction d) -> int {
        for (size_t t = 0; t < tasks.size(); ++t)
            if (tasks[t].scope.is_active(i) && tasks[t].scope.has_edge(i, d))
                return int(t);
        return -1;
    };
    auto is_bprime = [&](int t, AmoebotId i) {
        return t >= 0 && live[size_t(t)] && tasks[size_t(t)].in_b[size_t(i)] &&
               (vis[size_t(t)][size_t(i)][0] || vis[size_t(t)][size_t(i)][1]);
    };
    auto is_pocket = [&](int t, AmoebotId i) {
        return t >= 0 && live[size_t(t)] && tasks[size_t(t)].in_b[size_t(i)] &&
               !vis[size_t(t)][size_t(i)][0] && !vis[size_t(t)][size_t(i)][1];
    };
    std::vector<std::vector<uint8_t>> near_bprime(
        tasks.size(), std::vector<uint8_t>(size_t(n), 0));
    std::vector<uint8_t> zb_nbr(size_t(n), 0);
    std::vector<uint8_t> bprime_nbr(size_t(n), 0);
    {
        auto sets = std::make_shared<std::vector<std::array<int8_t, 6>>>(
            size_t(n), std::array<int8_t, 6>{-1, -1, -1, -1, -1, -1});
        std::vector<BeepScript::Step> steps(2);
        steps[0].setup = [&, sets](AmoebotId i, ActivationIo& io) {
            for (Direction d : kAllDirs) {
                int t = edge_task(i, d);
                if (t < 0) continue;
                int8_t set = io.config.new_set();
                io.config.assign(d, 0, set);
                (*sets)[size_t(i)][size_t(dir_index(d))] = set;
                if (is_bprime(t, i)) io.beep(set);
            }
        };
        steps[0].read = [&, sets](AmoebotId i, const ActivationIo& io) {
            for (Direction d : kAllDirs) {
                int8_t set = (*sets)[size_t(i)][size_t(dir_index(d))];
                if (set < 0 || !io.got(set)) continue;
                bprime_nbr[size_t(i)] |= uint8_t(1u << dir_index(d));
                int t = edge_task(i, d);
                if (is_pocket(t, i)) near_bprime[size_t(t)][size_t(i)] = 1;
            }
        };
        // Directional per-edge beeps: each endpoint sends on the lane of
        // its own direction half and listens on the other, so senders do
        // not hear their own echo.
        steps[1].setup = [&, sets](AmoebotId i, ActivationIo& io) {
            for (Direction d : kAllDirs) {
                int t = edge_task(i, d);
                if (t < 0) continue;
                int send_lane = dir_index(d) < 3 ? 0 : 1;
                int8_t out = io.config.new_set();
                io.config.assign(d, send_lane, out);
                int8_t in = io.config.new_set();
                io.config.assign(d, 1 - send_lane, in);
                (*sets)[size_t(i)][size_t(dir_index(d))] = in;
                if (t >= 0 && near_bprime[size_t(t)][size_t(i)]) io.beep(out);
            }
        };
        steps[1].read = [&, sets](AmoebotId i, const ActivationIo& io) {
            for (Direction d : kAllDirs) {
                int8_t set = (*sets)[size_t(i)][size_t(dir_index(d))];
                if (set >= 0 && io.got(set))
                    zb_nbr[size_t(i)] |= uint8_t(1u << dir_index(d));
            }
        };
        engine.reset_receipts();
        BeepScript script(s, label + ".pocket", 2, std::move(steps));
        engine.run_until(script, 8, stats, label + ".pocket");
    }

    // Pocket sources: the contact nearest the portal row (and the western
    // end within it), attached to its most portal-ward visible neighbor.
    std::vector<std::vector<uint8_t>> z_sources(
        tasks.size(), std::vector<uint8_t>(size_t(n), 0));
    for (size_t t = 0; t < tasks.size(); ++t) {
        if (!live[t]) continue;
        PropagateTask& task = tasks[t];
        for (AmoebotId i = 0; i < n; ++i) {
            if (!is_pocket(int(t), i) || !near_bprime[t][size_t(i)]) continue;
            Direction apex1 = task.b_is_south ? Direction::NE : Direction::SE;
            Direction apex2 = task.b_is_south ? Direction::NW : Direction::SW;
            bool blocked = false;
            for (Direction d : {apex1, apex2, Direction::W}) {
                if (!((zb_nbr[size_t(i)] >> dir_index(d)) & 1)) continue;
                int et = edge_task(i, d);
                if (et == int(t)) blocked = true;
            }
            if (blocked) continue;
            z_sources[t][size_t(i)] = 1;
            std::array<Direction, 6> order =
                task.b_is_south
                    ? std::array<Direction, 6>{Direction::NE, Direction::NW,
                                               Direction::E, Direction::W,
                                               Direction::SE, Direction::SW}
                    : std::array<Direction, 6>{Direction::SE, Direction::SW,
                                               Direction::E, Direction::W,
                                               Direction::NE, Direction::NW};
            for (Direction d : order) {
                if (!task.scope.has_edge(i, d)) continue;
                if (!((bprime_nbr[size_t(i)] >> dir_index(d)) & 1)) continue;
                if (!is_bprime(int(t), s.neighbor(i, d))) continue;
                task.forest.member[size_t(i)] = 1;
                task.forest.parent[size_t(i)] = int8_t(dir_index(d));
                break;
            }
        }
    }

    // Step 5: a shortest-path-tree run inside every pocket, batched so no
    // amoebot serves two tasks in one run.
    std::vector<int> batch(tasks.size(), -1);
    int num_batches = 0;
    {
        std::vector<std::vector<uint8_t>> used;
        for (size_t t = 0; t < tasks.size(); ++t) {
            if (!live[t]) continue;
            bool has = false;
            for (AmoebotId i = 0; i < n; ++i)
                if (is_pocket(int(t), i)) has = true;
            if (!has) continue;
            int b = 0;
            for (; b < num_batches; ++b) {
                bool clash = false;
                for (AmoebotId i = 0; i < n && !clash; ++i)
                    if (tasks[t].scope.is_active(i) && used[size_t(b)][size_t(i)])
                        clash = true;
                if (!clash) break;
            }
            if (b == num_batches) {
                used.emplace_back(size_t(n), 0);
                ++num_batches;
            }
            for (AmoebotId i = 0; i < n; ++i)
                if (tasks[t].scope.is_active(i)) used[size_t(b)][size_t(i)] = 1;
            batch[t] = b;
        }
    }
    for (int b = 0; b < num_batches; ++b) {
        Subview zview;
        zview.s = &s;
        zview.active.assign(size_t(n), 0);
        zview.edge_mask.assign(size_t(n), 0);
        std::vector<uint8_t> src(size_t(n), 0);
        std::vector<uint8_t> blk(size_t(n), 0);
        for (size_t t = 0; t < tasks.size(); ++t) {
            if (batch[t] != b) continue;
            const PropagateTask& task = tasks[t];
            for (AmoebotId i = 0; i < n; ++i) {
                if (!is_pocket(int(t), i)) continue;
                zview.active[size_t(i)] = 1;
                if (z_sources[t][size_t(i)]) src[size_t(i)] = 1;
                if (task.x_block[size_t(i)]) blk[size_t(i)] = 1;
                for (Direction d : kAllDirs) {
                    AmoebotId v = s.neighbor(i, d);
                    if (v == kNoAmoebot || !task.scope.has_edge(i, d)) continue;
                    if (is_pocket(int(t), v))
                        zview.edge_mask[size_t(i)] |= uint8_t(1u << dir_index(d));
                }
            }
        }
        auto parents = spt_parents(engine, zview, src, zview.active, stats,
                                   label + ".pocket_spt", &blk);
        for (size_t t = 0; t < tasks.size(); ++t) {
            if (batch[t] != b) continue;
            PropagateTask& task = tasks[t];
            for (AmoebotId i = 0; i < n; ++i) {
                if (!is_pocket(int(t), i)) continue;
                if (parents[size_t(i)] >= 0) {
                    task.forest.member[size_t(i)] = 1;
                    task.forest.parent[size_t(i)] = parents[size_t(i)];
                }
            }
        }
    }
}

// ------------------------------- Q' portals --------------------------------

QprimeResult compute_qprime(CircuitEngine& engine, const AmoebotStructure& s,
                            RoundStats& stats, const std::string& label) {
    QprimeResult out;
    Subview view = Subview::whole(s);
    const int n = s.size();
    out.in_q.assign(size_t(n), 0);

    // Sources beep on their x-portal circuits.
    auto sets = std::make_shared<std::vector<int8_t>>(size_t(n), int8_t(-1));
    std::vector<BeepScript::Step> steps(1);
    steps[0].setup = [&s, &view, sets](AmoebotId i, ActivationIo& io) {
        int8_t pc = portal_circuit_set(view, Axis::X, 0, i, io);
        if (pc < 0) pc = io.config.new_set();
        (*sets)[size_t(i)] = pc;
        if (s.is_source(i)) io.beep(pc);
    };
    steps[0].read = [&out, sets](AmoebotId i, const ActivationIo& io) {
        if ((*sets)[size_t(i)] >= 0 && io.got((*sets)[size_t(i)]))
            out.in_q[size_t(i)] = 1;
    };
    engine.reset_receipts();
    BeepScript script(s, label + ".q", 1, std::move(steps));
    engine.run_until(script, 8, stats, label + ".q");

    // Root the portal tree at the leader's portal and prune against Q.
    std::vector<uint8_t> root_portal(size_t(n), 0);
    auto pid = portal_ids(s, Axis::X);
    int leader_pid = pid[size_t(s.leader())];
    for (AmoebotId i = 0; i < n; ++i)
        root_portal[size_t(i)] = pid[size_t(i)] == leader_pid;
    out.rap = portal_root_and_prune(engine, view, Axis::X, root_portal, out.in_q,
                                    stats, label + ".rap");
    out.in_aq = portal_augmentation_given(engine, view, Axis::X, out.rap, stats,
                                          label + ".aug");
    out.in_qprime.assign(size_t(n), 0);
    for (AmoebotId i = 0; i < n; ++i)
        out.in_qprime[size_t(i)] = out.in_q[size_t(i)] | out.in_aq[size_t(i)];
    return out;
}

// ------------------------------ region split -------------------------------

RegionSet decompose_regions(CircuitEngine& engine, const AmoebotStructure& s,
                            const QprimeResult& qp, RoundStats& stats,
                            const std::string& label) {
    const int n = s.size();
    Subview view = Subview::whole(s);
    RegionSet rs;
    rs.portal_of = portal_ids(s, Axis::X);
    rs.num_portals = *std::max_element(rs.portal_of.begin(), rs.portal_of.end()) + 1;

    // Mark candidates: connectors of pruned-tree edges at Q' portals.
    std::vector<uint8_t> cand_n(size_t(n), 0), cand_s(size_t(n), 0);
    for (AmoebotId i = 0; i < n; ++i) {
        if (!qp.in_qprime[size_t(i)]) continue;
        for (Direction d : kAllDirs) {
            if (qp.rap.connector_sign[size_t(i)][size_t(dir_index(d))] == 0)
                continue;
            if (d == Direction::NW || d == Direction::NE) cand_n[size_t(i)] = 1;
            if (d == Direction::SW || d == Direction::SE) cand_s[size_t(i)] = 1;
        }
    }

    // Unmark the westernmost candidate per portal side: a chain circuit cut
    // at candidates, the west end beeps eastward, the first candidate
    // unmarks (a candidate west end unmarks itself and stays silent).
    rs.mark_n = cand_n;
    rs.mark_s = cand_s;
    struct Scratch {
        std::vector<std::array<int8_t, 2>> watch;  // per side
    };
    auto scratch = std::make_shared<Scratch>();
    scratch->watch.assign(size_t(n), {-1, -1});
    std::vector<BeepScript::Step> steps(1);
    steps[0].setup = [&, scratch](AmoebotId i, ActivationIo& io) {
        bool w = s.neighbor(i, Direction::W) != kNoAmoebot;
        bool e = s.neighbor(i, Direction::E) != kNoAmoebot;
        const std::array<const std::vector<uint8_t>*, 2> cands{&cand_n, &cand_s};
        for (int side = 0; side < 2; ++side) {
            int lane = 1 + side;
            bool cand = (*cands[size_t(side)])[size_t(i)] != 0;
            if (cand) {
                if (w) {
                    int8_t set_w = io.config.new_set();
                    io.config.assign(Direction::W, lane, set_w);
                    scratch->watch[size_t(i)][size_t(side)] = set_w;
                } else {
                    // Westernmost of the portal: unmark locally.
                    (side == 0 ? rs.mark_n : rs.mark_s)[size_t(i)] = 0;
                }
                if (e) io.config.assign(Direction::E, lane, io.config.new_set());
            } else {
                int8_t set = io.config.new_set();
                if (w) io.config.assign(Direction::W, lane, set);
                if (e) io.config.assign(Direction::E, lane, set);
                if (!w && e) io.beep(set);  // west end starts the wave
            }
        }
    };
    steps[0].read = [&, scratch](AmoebotId i, const ActivationIo& io) {
        for (int side = 0; side < 2; ++side) {
            int8_t set = scratch->watch[size_t(i)][size_t(side)];
            if (set >= 0 && io.got(set))
                (side == 0 ? rs.mark_n : rs.mark_s)[size_t(i)] = 0;
        }
    };
    engine.reset_receipts();
    BeepScript script(s, label + ".unmark", 3, std::move(steps));
    engine.run_until(script, 8, stats, label + ".unmark");

    // Node space of the split portal graph.
    auto portals_x = portals(s, Axis::X);
    struct SideSegs {
        std::vector<int> marks;  // positions along the portal
        int node_base = -1;
    };
    std::vector<int> pos_in_portal(size_t(n), 0);
    for (const auto& p : portals_x)
        for (size_t k = 0; k < p.members.size(); ++k)
            pos_in_portal[size_t(p.members[k])] = int(k);
    std::vector<std::array<SideSegs, 2>> segs(size_t(rs.num_portals));
    std::vector<int> plain_node(size_t(rs.num_portals), -1);
    int next_node = 0;
    for (int p = 0; p < rs.num_portals; ++p) {
        AmoebotId first = portals_x[size_t(p)].members.front();
        if (!qp.in_qprime[size_t(first)]) {
            plain_node[size_t(p)] = next_node++;
            continue;
        }
        for (int side = 0; side < 2; ++side) {
            auto& ss = segs[size_t(p)][size_t(side)];
            for (AmoebotId m : portals_x[size_t(p)].members)
                if ((side == 0 ? rs.mark_n : rs.mark_s)[size_t(m)])
                    ss.marks.push_back(pos_in_portal[size_t(m)]);
            ss.node_base = next_node;
            next_node += int(ss.marks.size()) + 1;
        }
    }
    auto node_of = [&](AmoebotId u, Direction d) {
        int p = rs.portal_of[size_t(u)];
        if (plain_node[size_t(p)] >= 0) return plain_node[size_t(p)];
        int side = (d == Direction::NW || d == Direction::NE) ? 0 : 1;
        const auto& ss = segs[size_t(p)][size_t(side)];
        int pos = pos_in_portal[size_t(u)];
        int j = int(std::upper_bound(ss.marks.begin(), ss.marks.end(), pos) -
                    ss.marks.begin());
        // A marked connector's own edge belongs to its east segment.
        if (j > 0 && ss.marks[size_t(j - 1)] == pos) {
            // upper_bound already placed it east of the mark
        }
        return ss.node_base + j;
    };

    // Union components of the split portal graph.
    std::vector<int> uf(size_t(next_node), 0);
    std::iota(uf.begin(), uf.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (uf[size_t(x)] != x) x = uf[size_t(x)] = uf[size_t(uf[size_t(x)])];
        return x;
    };
    auto ipg = implicit_portal_graph(s, Axis::X);
    for (AmoebotId u = 0; u < n; ++u) {
        for (Direction d : {Direction::NE, Direction::NW}) {
            if (!ipg.has_edge(u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            int a = node_of(u, d);
            int b = node_of(v, opposite(d));
            uf[size_t(find(a))] = find(b);
        }
    }

    // Regions and slots.
    std::map<int, int> region_id;
    rs.slot_region.assign(size_t(n), {-1, -1, -1, -1});
    auto region_for = [&](int node) {
        auto [it, fresh] = region_id.try_emplace(find(node), int(rs.regions.size()));
        if (fresh) rs.regions.emplace_back();
        return it->second;
    };
    for (int p = 0; p < rs.num_portals; ++p) {
        const auto& members = portals_x[size_t(p)].members;
        if (plain_node[size_t(p)] >= 0) {
            int r = region_for(plain_node[size_t(p)]);
            for (AmoebotId m : members) {
                rs.regions[size_t(r)].members.push_back({m, 0});
                rs.slot_region[size_t(m)][0] = r;
            }
            continue;
        }
        for (int side = 0; side < 2; ++side) {
            const auto& ss = segs[size_t(p)][size_t(side)];
            int nsegs = int(ss.marks.size()) + 1;
            for (int j = 0; j < nsegs; ++j) {
                int r = region_for(ss.node_base + j);
                int lo = j == 0 ? 0 : ss.marks[size_t(j - 1)];
                int hi = j == nsegs - 1 ? int(members.size()) - 1
                                        : ss.marks[size_t(j)];
                for (int t = lo; t <= hi; ++t) {
                    AmoebotId m = members[size_t(t)];
                    bool east_copy = j > 0 && t == lo;
                    uint8_t slot = uint8_t(side + (east_copy ? 2 : 0));
                    rs.regions[size_t(r)].members.push_back({m, slot});
                    rs.slot_region[size_t(m)][size_t(slot)] = r;
                }
            }
        }
    }
    (void)view;
    return rs;
}

}  // namespace amoebot

// ------------------------------ full pipeline ------------------------------

namespace amoebot {

namespace {

// Binary counter hosted on a portal chain, one bit per amoebot with the
// least significant bit at the west end. Increment and decrement ripple a
// cut-circuit wave in one scripted round; the mirrored value drives the
// host loop. Chains shorter than the bit budget keep all bits on the west
// end member (local flips, same round charge).
class ChainCounter {
  public:
    ChainCounter(CircuitEngine& engine, RoundStats& stats,
                 std::vector<AmoebotId> chain, int bits, std::string label)
        : engine_(engine), stats_(stats), chain_(std::move(chain)), bits_(bits),
          label_(std::move(label)) {
        distributed_ = int(chain_.size()) >= bits_;
        c_.assign(size_t(bits_), 0);
        w_.assign(size_t(bits_), 0);
    }

    int64_t value(bool working) const {
        const auto& b = working ? w_ : c_;
        int64_t v = 0;
        for (int k = 0; k < bits_; ++k) v |= int64_t(b[size_t(k)]) << k;
        return v;
    }
    bool is_zero(bool working) const { return value(working) == 0; }
    void copy_to_working() { w_ = c_; }

    // Bits held per amoebot, for the memory audit.
    int counter_bits(AmoebotId i) const {
        if (chain_.empty()) return 0;
        if (distributed_)
            return 2 * (std::find(chain_.begin(), chain_.end(), i) != chain_.end());
        return i == chain_.front() ? 2 * bits_ : 0;
    }

    void increment(bool working) { wave(working, /*inc=*/true); }
    void decrement(bool working) { wave(working, /*inc=*/false); }

  private:
    void wave(bool working, bool inc) {
        auto& b = working ? w_ : c_;
        int64_t v = value(working);
        if (inc && v >= (int64_t(1) << bits_) - 1)
            throw std::runtime_error(label_ + ": counter overflow");
        if (!inc && v == 0) throw std::runtime_error(label_ + ": counter underflow");

        const AmoebotStructure& s = engine_.structure();
        // The carry/borrow wave: bridge at pass bits (1 for increment, 0
        // for decrement), cut and flip at the first absorb bit.
        std::vector<BeepScript::Step> steps(1);
        steps[0].setup = [&](AmoebotId i, ActivationIo& io) {
            if (!distributed_ || chain_.empty()) return;
            auto it = std::find(chain_.begin(), chain_.end(), i);
            if (it == chain_.end()) return;
            size_t pos = size_t(it - chain_.begin());
            if (pos >= size_t(bits_)) return;
            bool pass = b[pos] == (inc ? 1 : 0);
            bool has_w = pos > 0;
            bool has_e = pos + 1 < size_t(bits_);
            int8_t west = -1, east = -1;
            if (pass) {
                int8_t set = io.config.new_set();
                if (has_w) io.config.assign(Direction::W, 0, set);
                if (has_e) io.config.assign(Direction::E, 0, set);
                west = east = set;
            } else {
                if (has_w) {
                    west = io.config.new_set();
                    io.config.assign(Direction::W, 0, west);
                }
                if (has_e) {
                    east = io.config.new_set();
                    io.config.assign(Direction::E, 0, east);
                }
            }
            if (pos == 0 && pass && west >= 0) io.beep(west);
        };
        engine_.reset_receipts();
        BeepScript script(s, label_, 1, std::move(steps));
        engine_.run_until(script, 8, stats_, label_);

        // Mirror the flip rule: positions up to and including the first
        // absorb bit flip.
        for (int k = 0; k < bits_; ++k) {
            bool absorb = b[size_t(k)] != (inc ? 1 : 0);
            b[size_t(k)] ^= 1;
            if (absorb) break;
        }
    }

    CircuitEngine& engine_;
    RoundStats& stats_;
    std::vector<AmoebotId> chain_;
    int bits_;
    std::string label_;
    bool distributed_;
    std::vector<uint8_t> c_, w_;
};

struct Pipeline {
    const AmoebotStructure& s;
    CircuitEngine engine;
    RoundStats stats;
    int n;
    QprimeResult qp;
    RegionSet rs;
    std::array<std::vector<int8_t>, 4> fpar;
    std::array<std::vector<uint8_t>, 4> fmem;
    std::vector<uint8_t> src_mask, dst_mask;
    std::vector<uint8_t> rprime_portal;  // elected portal R'
    int64_t round_limit;

    Pipeline(const AmoebotStructure& st, int pins, int64_t limit)
        : s(st), engine(st, pins), n(st.size()), round_limit(limit) {
        for (auto& v : fpar) v.assign(size_t(n), -1);
        for (auto& v : fmem) v.assign(size_t(n), 0);
        src_mask.assign(size_t(n), 0);
        dst_mask.assign(size_t(n), 0);
        for (AmoebotId i = 0; i < n; ++i) {
            src_mask[size_t(i)] = s.is_source(i);
            dst_mask[size_t(i)] = s.is_dest(i);
        }
    }

    uint8_t slot_of(int region, AmoebotId i) const {
        for (uint8_t slot = 0; slot < 4; ++slot)
            if (rs.slot_region[size_t(i)][slot] == region) return slot;
        return 255;
    }

    Subview region_view(int region) const {
        Subview v;
        v.s = &s;
        v.active.assign(size_t(n), 0);
        v.edge_mask.assign(size_t(n), 0);
        for (auto [m, slot] : rs.regions[size_t(region)].members)
            v.active[size_t(m)] = 1;
        for (AmoebotId i = 0; i < n; ++i) {
            if (!v.active[size_t(i)]) continue;
            for (Direction d : kAllDirs) {
                AmoebotId u = s.neighbor(i, d);
                if (u != kNoAmoebot && v.active[size_t(u)])
                    v.edge_mask[size_t(i)] |= uint8_t(1u << dir_index(d));
            }
        }
        return v;
    }

    std::vector<uint8_t> region_block(int region) const {
        std::vector<uint8_t> blk(size_t(n), 0);
        for (auto [m, slot] : rs.regions[size_t(region)].members)
            if (slot == 1 || slot == 3) blk[size_t(m)] = 1;
        return blk;
    }

    ForestSlice region_forest(int region) const {
        ForestSlice f(n);
        for (auto [m, slot] : rs.regions[size_t(region)].members) {
            f.parent[size_t(m)] = fpar[slot][size_t(m)];
            f.member[size_t(m)] = fmem[slot][size_t(m)];
        }
        return f;
    }

    void store_region_forest(int region, const ForestSlice& f) {
        for (auto [m, slot] : rs.regions[size_t(region)].members) {
            fpar[slot][size_t(m)] = f.parent[size_t(m)];
            fmem[slot][size_t(m)] = f.member[size_t(m)];
        }
    }

    // Coalesces region `from` into `into`, remapping slot links.
    void merge_regions(int into, int from) {
        if (into == from) return;
        for (auto [m, slot] : rs.regions[size_t(from)].members) {
            rs.slot_region[size_t(m)][slot] = into;
            rs.regions[size_t(into)].members.push_back({m, slot});
        }
        rs.regions[size_t(from)].members.clear();
    }

    // Collapse duplicate slots of one amoebot within a region (after a
    // mark disappears or a portal unsplits): keep the smallest slot.
    void collapse_slots(int region) {
        auto& members = rs.regions[size_t(region)].members;
        std::vector<std::pair<AmoebotId, uint8_t>> keep;
        std::map<AmoebotId, uint8_t> best;
        for (auto [m, slot] : members) {
            auto [it, fresh] = best.try_emplace(m, slot);
            if (!fresh && slot < it->second) it->second = slot;
        }
        for (auto [m, slot] : members) {
            if (best[m] == slot) {
                keep.push_back({m, slot});
            } else {
                // Preserve the freshest forest data in the kept slot.
                if (fmem[slot][size_t(m)] && !fmem[best[m]][size_t(m)]) {
                    fmem[best[m]][size_t(m)] = fmem[slot][size_t(m)];
                    fpar[best[m]][size_t(m)] = fpar[slot][size_t(m)];
                }
                rs.slot_region[size_t(m)][slot] = -1;
                fmem[slot][size_t(m)] = 0;
                fpar[slot][size_t(m)] = -1;
            }
        }
        members = std::move(keep);
    }

    void base_case();
    void merge_loop();
    void merge_step(const std::vector<uint8_t>& merge_now);
    ParentForest final_prune();
};

void Pipeline::base_case() {
    Subview whole = Subview::whole(s);
    // Elect R' in Q' and root the portal tree there.
    auto pid = rs.portal_of;
    std::vector<uint8_t> leader_portal(size_t(n), 0);
    int leader_pid = pid[size_t(s.leader())];
    for (AmoebotId i = 0; i < n; ++i)
        leader_portal[size_t(i)] = pid[size_t(i)] == leader_pid;
    auto elect = portal_election(engine, whole, Axis::X, leader_portal,
                                 qp.in_qprime, stats, "spf.base.elect");
    rprime_portal = elect.elected;
    auto rap2 = portal_root_and_prune(engine, whole, Axis::X, rprime_portal,
                                      qp.in_qprime, stats, "spf.base.rap");

    // Boundary roles: for every region, the boundary portal whose parent
    // edge leaves the region is the lowest common ancestor.
    int rprime_pid = -1;
    for (AmoebotId i = 0; i < n; ++i)
        if (rprime_portal[size_t(i)]) rprime_pid = pid[size_t(i)];
    for (size_t r = 0; r < rs.regions.size(); ++r) {
        auto& region = rs.regions[r];
        std::map<int, bool> boundary;  // portal -> parent edge inside region
        for (auto [m, slot] : region.members) {
            if (!qp.in_qprime[size_t(m)]) continue;
            bool parent_inside = false;
            for (Direction d : kAllDirs) {
                if (rap2.connector_sign[size_t(m)][size_t(dir_index(d))] <= 0)
                    continue;
                // m carries the portal's parent edge; is it assigned here?
                bool north = d == Direction::NW || d == Direction::NE;
                uint8_t eslot = uint8_t(north ? 0 : 1);
                uint8_t mark = north ? rs.mark_n[size_t(m)] : rs.mark_s[size_t(m)];
                uint8_t use = eslot;
                if (mark) use = uint8_t(eslot + 2);  // east copy owns the edge
                if (rs.slot_region[size_t(m)][use] == int(r)) parent_inside = true;
            }
            auto [it, fresh] = boundary.try_emplace(pid[size_t(m)], parent_inside);
            it->second |= parent_inside;
        }
        region.lca_portal = -1;
        region.dsc_portal = -1;
        for (auto [p, inside] : boundary) {
            if (p == rprime_pid && boundary.size() == 1) {
                region.lca_portal = p;
            } else if (inside) {
                region.dsc_portal = p;
            } else {
                region.lca_portal = p;
            }
        }
        if (region.lca_portal < 0) {
            region.lca_portal = region.dsc_portal;
            region.dsc_portal = -1;
        }
    }

    // One scripted round: regions with a descendant portal hear its beep.
    {
        std::vector<BeepScript::Step> steps(1);
        steps[0].setup = [&](AmoebotId i, ActivationIo& io) {
            for (uint8_t slot = 0; slot < 4; ++slot) {
                int r = rs.slot_region[size_t(i)][slot];
                if (r < 0) continue;
                int8_t set = io.config.new_set();
                auto view = region_view(r);
                auto blk = region_block(r);
                for (Direction d : kAllDirs)
                    if (view.has_edge(i, d))
                        io.config.assign(d, edge_base(blk, i, d, 3), set);
                if (rs.regions[size_t(r)].dsc_portal == pid[size_t(i)])
                    io.beep(set);
            }
        };
        engine.reset_receipts();
        BeepScript script(s, "spf.base.dsc", 8, std::move(steps));
        engine.run_until(script, 8, stats, "spf.base.dsc");
    }

    // Line forests on every region's ancestor-portal segment, then
    // propagation into the region; two-portal regions repeat from the
    // descendant portal and merge.
    auto run_pass = [&](bool dsc_pass) {
        std::vector<LineTask> lines;
        std::vector<int> line_region;
        for (size_t r = 0; r < rs.regions.size(); ++r) {
            int p = dsc_pass ? rs.regions[r].dsc_portal : rs.regions[r].lca_portal;
            if (p < 0) continue;
            LineTask task;
            task.in_segment.assign(size_t(n), 0);
            task.sources.assign(size_t(n), 0);
            task.x_block = region_block(int(r));
            for (auto [m, slot] : rs.regions[r].members)
                if (pid[size_t(m)] == p) {
                    task.in_segment[size_t(m)] = 1;
                    task.sources[size_t(m)] = src_mask[size_t(m)];
                }
            lines.push_back(std::move(task));
            line_region.push_back(int(r));
        }
        line_forests(engine, lines, stats,
                     dsc_pass ? "spf.base.line2" : "spf.base.line1");

        std::vector<PropagateTask> props;
        for (size_t k = 0; k < lines.size(); ++k) {
            int r = line_region[k];
            int p = dsc_pass ? rs.regions[size_t(r)].dsc_portal
                             : rs.regions[size_t(r)].lca_portal;
            PropagateTask task;
            task.scope = region_view(r);
            task.x_block = region_block(r);
            task.in_p.assign(size_t(n), 0);
            task.in_b.assign(size_t(n), 0);
            bool south = false;
            for (auto [m, slot] : rs.regions[size_t(r)].members) {
                if (pid[size_t(m)] == p) {
                    task.in_p[size_t(m)] = 1;
                    south = slot == 1 || slot == 3;
                } else {
                    task.in_b[size_t(m)] = 1;
                }
            }
            task.b_is_south = south;
            task.forest = lines[k].forest;
            props.push_back(std::move(task));
        }
        propagate_forests(engine, props, stats,
                          dsc_pass ? "spf.base.prop2" : "spf.base.prop1");
        return std::pair{std::move(props), std::move(line_region)};
    };

    auto [props1, regions1] = run_pass(false);
    auto [props2, regions2] = run_pass(true);

    // Merge the two passes where both exist.
    std::vector<MergeTask> merges;
    std::vector<int> merge_region;
    std::map<int, size_t> pass1_of;
    for (size_t k = 0; k < regions1.size(); ++k) pass1_of[regions1[k]] = k;
    std::vector<uint8_t> merged_region(rs.regions.size(), 0);
    for (size_t k2 = 0; k2 < regions2.size(); ++k2) {
        int r = regions2[k2];
        MergeTask task;
        task.scope = region_view(r);
        task.x_block = region_block(r);
        task.f1 = props1[pass1_of[r]].forest;
        task.f2 = props2[k2].forest;
        merges.push_back(std::move(task));
        merge_region.push_back(r);
        merged_region[size_t(r)] = 1;
    }
    if (!merges.empty())
        merge_forest_pairs(engine, merges, stats, "spf.base.merge");

    for (size_t k = 0; k < regions1.size(); ++k)
        if (!merged_region[size_t(regions1[k])])
            store_region_forest(regions1[k], props1[k].forest);
    for (size_t k = 0; k < merges.size(); ++k)
        store_region_forest(merge_region[k], merges[k].out);
}

void Pipeline::merge_step(const std::vector<uint8_t>& merge_now) {
    auto& pid = rs.portal_of;
    std::vector<uint8_t> merging_portal(size_t(rs.num_portals), 0);
    for (AmoebotId i = 0; i < n; ++i)
        if (merge_now[size_t(i)]) merging_portal[size_t(pid[size_t(i)])] = 1;
    auto is_merging = [&](AmoebotId i) {
        return merging_portal[size_t(pid[size_t(i)])] != 0;
    };

    // Phase 1: pair same-side regions across every second mark until no
    // marks remain on the merging portals.
    for (int guard = 0; guard <= n + 2; ++guard) {
        bool any_marks = false;
        {
            std::vector<BeepScript::Step> steps(1);
            steps[0].setup = [&](AmoebotId i, ActivationIo& io) {
                int8_t g = io.config.new_set();
                for (Direction d : kAllDirs)
                    if (s.neighbor_mask(i) & (1u << dir_index(d)))
                        io.config.assign(d, 0, g);
                if (is_merging(i) && (rs.mark_n[size_t(i)] || rs.mark_s[size_t(i)]))
                    io.beep(g);
            };
            steps[0].read = [&](AmoebotId i, const ActivationIo& io) {
                if (i == 0) any_marks = io.prev_num_sets > 0 && io.got(0);
            };
            engine.reset_receipts();
            BeepScript script(s, "spf.merge.check", 1, std::move(steps));
            engine.run_until(script, 8, stats, "spf.merge.check");
        }
        if (!any_marks) break;

        // Parity selection: one PASC iteration along each merging portal
        // per side; marks cross the lanes, the west end injects the signal.
        std::vector<uint8_t> mprime_n(size_t(n), 0), mprime_s(size_t(n), 0);
        {
            auto watch = std::make_shared<std::vector<std::array<int8_t, 2>>>(
                size_t(n), std::array<int8_t, 2>{-1, -1});
            std::vector<BeepScript::Step> steps(1);
            steps[0].setup = [&, watch](AmoebotId i, ActivationIo& io) {
                if (!is_merging(i) || !qp.in_qprime[size_t(i)]) return;
                bool has_w = s.neighbor(i, Direction::W) != kNoAmoebot &&
                             pid[size_t(s.neighbor(i, Direction::W))] == pid[size_t(i)];
                bool has_e = s.neighbor(i, Direction::E) != kNoAmoebot &&
                             pid[size_t(s.neighbor(i, Direction::E))] == pid[size_t(i)];
                for (int side = 0; side < 2; ++side) {
                    int l0 = side == 0 ? 0 : 4;
                    int l1 = l0 + 1;
                    bool marked = (side == 0 ? rs.mark_n : rs.mark_s)[size_t(i)];
                    if (marked) {
                        // Crossing: arriving even parity lands on the set
                        // that continues odd.
                        int8_t a = io.config.new_set();  // {W.l0, E.l1}
                        int8_t b = io.config.new_set();  // {W.l1, E.l0}
                        if (has_w) {
                            io.config.assign(Direction::W, l0, a);
                            io.config.assign(Direction::W, l1, b);
                        }
                        if (has_e) {
                            io.config.assign(Direction::E, l1, a);
                            io.config.assign(Direction::E, l0, b);
                        }
                        (*watch)[size_t(i)][size_t(side)] = a;
                    } else {
                        int8_t a = io.config.new_set();
                        int8_t b = io.config.new_set();
                        if (has_w) {
                            io.config.assign(Direction::W, l0, a);
                            io.config.assign(Direction::W, l1, b);
                        }
                        if (has_e) {
                            io.config.assign(Direction::E, l0, a);
                            io.config.assign(Direction::E, l1, b);
                        }
                        if (!has_w && has_e) io.beep(a);  // west end injects
                    }
                }
            };
            steps[0].read = [&, watch](AmoebotId i, const ActivationIo& io) {
                for (int side = 0; side < 2; ++side) {
                    int8_t a = (*watch)[size_t(i)][size_t(side)];
                    if (a >= 0 && io.got(a))
                        (side == 0 ? mprime_n : mprime_s)[size_t(i)] = 1;
                }
            };
            engine.reset_receipts();
            BeepScript script(s, "spf.merge.parity", 6, std::move(steps));
            engine.run_until(script, 8, stats, "spf.merge.parity");
        }

        // Pair merges across the selected marks, batched so no amoebot
        // serves two pairs in one shortest-path run.
        struct Pair {
            AmoebotId mark;
            int side;  // 0 north, 1 south
            int rw, re;
        };
        std::vector<Pair> pairs;
        for (AmoebotId i = 0; i < n; ++i) {
            if (mprime_n[size_t(i)]) {
                int rw = rs.slot_region[size_t(i)][0];
                int re = rs.slot_region[size_t(i)][2];
                if (rw >= 0 && re >= 0 && rw != re) pairs.push_back({i, 0, rw, re});
            }
            if (mprime_s[size_t(i)]) {
                int rw = rs.slot_region[size_t(i)][1];
                int re = rs.slot_region[size_t(i)][3];
                if (rw >= 0 && re >= 0 && rw != re) pairs.push_back({i, 1, rw, re});
            }
        }
        std::vector<int> batch(pairs.size(), -1);
        int num_batches = 0;
        std::vector<std::vector<uint8_t>> used;
        std::vector<Subview> pair_view(pairs.size());
        std::vector<std::vector<uint8_t>> pair_block(pairs.size());
        for (size_t k = 0; k < pairs.size(); ++k) {
            Subview vw = region_view(pairs[k].rw);
            Subview ve = region_view(pairs[k].re);
            auto bw = region_block(pairs[k].rw);
            auto be = region_block(pairs[k].re);
            Subview uv;
            uv.s = &s;
            uv.active.assign(size_t(n), 0);
            uv.edge_mask.assign(size_t(n), 0);
            pair_block[k].assign(size_t(n), 0);
            for (AmoebotId i = 0; i < n; ++i) {
                uv.active[size_t(i)] = vw.active[size_t(i)] | ve.active[size_t(i)];
                uv.edge_mask[size_t(i)] =
                    vw.edge_mask[size_t(i)] | ve.edge_mask[size_t(i)];
                pair_block[k][size_t(i)] =
                    (vw.active[size_t(i)] ? bw[size_t(i)] : be[size_t(i)]);
            }
            pair_view[k] = std::move(uv);
            int b = 0;
            for (; b < num_batches; ++b) {
                bool clash = false;
                for (AmoebotId i = 0; i < n && !clash; ++i)
                    if (pair_view[k].active[size_t(i)] && used[size_t(b)][size_t(i)])
                        clash = true;
                if (!clash) break;
            }
            if (b == num_batches) {
                used.emplace_back(size_t(n), 0);
                ++num_batches;
            }
            for (AmoebotId i = 0; i < n; ++i)
                if (pair_view[k].active[size_t(i)]) used[size_t(b)][size_t(i)] = 1;
            batch[k] = b;
        }
        for (int b = 0; b < num_batches; ++b) {
            Subview bview;
            bview.s = &s;
            bview.active.assign(size_t(n), 0);
            bview.edge_mask.assign(size_t(n), 0);
            std::vector<uint8_t> sources(size_t(n), 0), blk(size_t(n), 0);
            for (size_t k = 0; k < pairs.size(); ++k) {
                if (batch[k] != b) continue;
                sources[size_t(pairs[k].mark)] = 1;
                for (AmoebotId i = 0; i < n; ++i) {
                    bview.active[size_t(i)] |= pair_view[k].active[size_t(i)];
                    bview.edge_mask[size_t(i)] |= pair_view[k].edge_mask[size_t(i)];
                    blk[size_t(i)] |= pair_block[k][size_t(i)];
                }
            }
            auto parents = spt_parents(engine, bview, sources, bview.active,
                                       stats, "spf.merge.pair_spt", &blk);
            // Extended forests and the pairwise merges of this batch.
            std::vector<MergeTask> tasks;
            std::vector<size_t> task_pair;
            for (size_t k = 0; k < pairs.size(); ++k) {
                if (batch[k] != b) continue;
                const Pair& pr = pairs[k];
                ForestSlice fw = region_forest(pr.rw);
                ForestSlice fe = region_forest(pr.re);
                MergeTask task;
                task.scope = pair_view[k];
                task.x_block = pair_block[k];
                task.f1 = fw;
                task.f2 = fe;
                bool w_live = fw.member[size_t(pr.mark)] != 0;
                bool e_live = fe.member[size_t(pr.mark)] != 0;
                for (AmoebotId i = 0; i < n; ++i) {
                    if (!pair_view[k].active[size_t(i)]) continue;
                    bool in_w = fw.member[size_t(i)] || rs.slot_region[size_t(i)]
                                        [slot_of(pr.rw, i) % 4] == pr.rw;
                    (void)in_w;
                    bool w_side = slot_of(pr.rw, i) != 255;
                    bool e_side = slot_of(pr.re, i) != 255;
                    if (!w_side && e_side && w_live && parents[size_t(i)] >= 0) {
                        task.f1.member[size_t(i)] = 1;
                        task.f1.parent[size_t(i)] = parents[size_t(i)];
                    }
                    if (!e_side && w_side && e_live && parents[size_t(i)] >= 0) {
                        task.f2.member[size_t(i)] = 1;
                        task.f2.parent[size_t(i)] = parents[size_t(i)];
                    }
                }
                tasks.push_back(std::move(task));
                task_pair.push_back(k);
            }
            merge_forest_pairs(engine, tasks, stats, "spf.merge.pair_merge");
            for (size_t j = 0; j < tasks.size(); ++j) {
                const Pair& pr = pairs[task_pair[j]];
                merge_regions(pr.rw, pr.re);
                store_region_forest(pr.rw, tasks[j].out);
                (pr.side == 0 ? rs.mark_n : rs.mark_s)[size_t(pr.mark)] = 0;
                collapse_slots(pr.rw);
            }
        }
    }

    // Phase 2: propagate across every merging portal in both directions
    // and merge the two sides.
    struct Cross {
        int portal;
        int rn, rsouth;
        Subview view;
        std::vector<uint8_t> blk, in_p, in_bs, in_bn;
    };
    std::vector<Cross> crosses;
    for (int p = 0; p < rs.num_portals; ++p) {
        if (!merging_portal[size_t(p)]) continue;
        AmoebotId member = kNoAmoebot;
        for (AmoebotId i = 0; i < n && member == kNoAmoebot; ++i)
            if (pid[size_t(i)] == p) member = i;
        Cross cr;
        cr.portal = p;
        cr.rn = rs.slot_region[size_t(member)][0];
        cr.rsouth = rs.slot_region[size_t(member)][1];
        if (cr.rn < 0 || cr.rsouth < 0 || cr.rn == cr.rsouth) {
            // One-sided portal: nothing to cross-merge; just unsplit it.
            int r = cr.rn >= 0 ? cr.rn : cr.rsouth;
            collapse_slots(r);
            continue;
        }
        Subview vn = region_view(cr.rn);
        Subview vs = region_view(cr.rsouth);
        auto bn = region_block(cr.rn);
        auto bs = region_block(cr.rsouth);
        cr.view.s = &s;
        cr.view.active.assign(size_t(n), 0);
        cr.view.edge_mask.assign(size_t(n), 0);
        cr.blk.assign(size_t(n), 0);
        cr.in_p.assign(size_t(n), 0);
        cr.in_bs.assign(size_t(n), 0);
        cr.in_bn.assign(size_t(n), 0);
        for (AmoebotId i = 0; i < n; ++i) {
            cr.view.active[size_t(i)] = vn.active[size_t(i)] | vs.active[size_t(i)];
            cr.view.edge_mask[size_t(i)] =
                vn.edge_mask[size_t(i)] | vs.edge_mask[size_t(i)];
            if (pid[size_t(i)] == p) {
                cr.in_p[size_t(i)] = 1;
            } else if (vn.active[size_t(i)]) {
                cr.in_bn[size_t(i)] = 1;
                cr.blk[size_t(i)] = bn[size_t(i)];
            } else if (vs.active[size_t(i)]) {
                cr.in_bs[size_t(i)] = 1;
                cr.blk[size_t(i)] = bs[size_t(i)];
            }
        }
        crosses.push_back(std::move(cr));
    }

    std::vector<PropagateTask> south_tasks, north_tasks;
    for (auto& cr : crosses) {
        PropagateTask t1;
        t1.scope = cr.view;
        t1.x_block = cr.blk;
        t1.in_p = cr.in_p;
        t1.in_b = cr.in_bs;
        t1.b_is_south = true;
        t1.forest = region_forest(cr.rn);
        south_tasks.push_back(std::move(t1));
        PropagateTask t2;
        t2.scope = cr.view;
        t2.x_block = cr.blk;
        t2.in_p = cr.in_p;
        t2.in_b = cr.in_bn;
        t2.b_is_south = false;
        t2.forest = region_forest(cr.rsouth);
        north_tasks.push_back(std::move(t2));
    }
    if (!crosses.empty()) {
        propagate_forests(engine, south_tasks, stats, "spf.merge.south");
        propagate_forests(engine, north_tasks, stats, "spf.merge.north");
        std::vector<MergeTask> tasks;
        for (size_t k = 0; k < crosses.size(); ++k) {
            MergeTask task;
            task.scope = crosses[k].view;
            task.x_block = crosses[k].blk;
            task.f1 = south_tasks[k].forest;
            task.f2 = north_tasks[k].forest;
            tasks.push_back(std::move(task));
        }
        merge_forest_pairs(engine, tasks, stats, "spf.merge.cross");
        for (size_t k = 0; k < crosses.size(); ++k) {
            merge_regions(crosses[k].rn, crosses[k].rsouth);
            store_region_forest(crosses[k].rn, tasks[k].out);
            collapse_slots(crosses[k].rn);
        }
    }
}

void Pipeline::merge_loop() {
    Subview whole = Subview::whole(s);
    auto& pid = rs.portal_of;
    int rprime_pid = -1;
    for (AmoebotId i = 0; i < n; ++i)
        if (rprime_portal[size_t(i)]) rprime_pid = pid[size_t(i)];
    if (rprime_pid < 0) return;

    // Counter chain: the members of R' in west-to-east order.
    std::vector<AmoebotId> chain;
    for (const auto& portal : portals(s, Axis::X))
        if (pid[size_t(portal.members.front())] == rprime_pid)
            chain = portal.members;
    int qprime_count = 0;
    {
        std::set<int> seen;
        for (AmoebotId i = 0; i < n; ++i)
            if (qp.in_qprime[size_t(i)]) seen.insert(pid[size_t(i)]);
        qprime_count = int(seen.size());
    }
    int bits = 3;
    while ((1 << bits) < qprime_count + 4) ++bits;
    ChainCounter counter(engine, stats, chain, bits, "spf.counter");
    for (AmoebotId i : chain)
        stats.max_counter_bits =
            std::max(stats.max_counter_bits, counter.counter_bits(i));

    // Iteration zero counts the decomposition levels.
    portal_decomposition(engine, whole, Axis::X, rprime_portal, qp.in_qprime,
                         stats, "spf.decomp",
                         [&](int, const std::vector<uint8_t>&) {
                             counter.increment(false);
                         });

    int guard = 0;
    while (!counter.is_zero(false)) {
        if (++guard > 4 * bits + 64)
            throw std::runtime_error("spf: merge schedule did not converge");
        counter.copy_to_working();
        std::vector<uint8_t> merge_now(size_t(n), 0);
        portal_decomposition(engine, whole, Axis::X, rprime_portal, qp.in_qprime,
                             stats, "spf.decomp",
                             [&](int, const std::vector<uint8_t>& elected) {
                                 if (!counter.is_zero(true)) {
                                     counter.decrement(true);
                                     if (counter.is_zero(true)) merge_now = elected;
                                 }
                             });
        merge_step(merge_now);
        counter.decrement(false);
    }
}

ParentForest Pipeline::final_prune() {
    // All regions are one; the forest lives in slot 0.
    TreeSpec tree;
    tree.edges.assign(size_t(n), 0);
    tree.roots = src_mask;
    for (AmoebotId i = 0; i < n; ++i) {
        if (!fmem[0][size_t(i)] || fpar[0][size_t(i)] < 0) continue;
        Direction d = direction_from_index(fpar[0][size_t(i)]);
        tree.edges[size_t(i)] |= uint8_t(1u << dir_index(d));
        AmoebotId p = s.neighbor(i, d);
        tree.edges[size_t(p)] |= uint8_t(1u << dir_index(opposite(d)));
    }
    auto rap = root_and_prune(engine, tree, dst_mask, stats, "spf.prune");
    ParentForest out(n);
    for (AmoebotId i = 0; i < n; ++i) {
        if (rap.in_vq[size_t(i)]) {
            out.member[size_t(i)] = 1;
            out.parent[size_t(i)] = rap.parent[size_t(i)];
        }
        if (src_mask[size_t(i)]) {
            out.member[size_t(i)] = 1;
            out.parent[size_t(i)] = -1;
        }
    }
    return out;
}

}  // namespace

SpfResult compute_spf(const AmoebotStructure& s, int pins, int64_t round_limit,
                      TraceSink trace) {
    auto report = validate_structure(s);
    if (!report.ok())
        throw std::invalid_argument("compute_spf: invalid structure:\n" +
                                    report.to_string());
    Pipeline pl(s, pins, round_limit);
    if (trace.on_round) pl.engine.set_trace(std::move(trace));
    pl.qp = compute_qprime(pl.engine, s, pl.stats, "spf.qprime");
    pl.rs = decompose_regions(pl.engine, s, pl.qp, pl.stats, "spf.regions");
    pl.base_case();
    pl.merge_loop();
    SpfResult res;
    res.forest = pl.final_prune();
    res.stats = std::move(pl.stats);
    return res;
}

}  // namespace amoebot
