#include "amoebot/tree_primitives.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace amoebot {

Subview Subview::whole(const AmoebotStructure& s) {
    Subview v;
    v.s = &s;
    v.active.assign(size_t(s.size()), 1);
    v.edge_mask.assign(size_t(s.size()), 0);
    for (AmoebotId i = 0; i < s.size(); ++i)
        v.edge_mask[size_t(i)] = s.neighbor_mask(i);
    return v;
}

int8_t canonical_mark_dir(const TreeSpec& t, AmoebotId i) {
    for (Direction d : kAllDirs)
        if (t.has_edge(i, d)) return int8_t(dir_index(d));
    return -1;
}

namespace {

// Previous tree direction in counterclockwise order (the direction whose
// tour successor at this amoebot is `d`).
Direction prev_tree_dir(uint8_t mask, Direction d) {
    for (int k = 1; k <= 6; ++k) {
        Direction e = direction_from_index(dir_index(d) - k);
        if (mask & (1u << dir_index(e))) return e;
    }
    return d;
}

PascProgram::Link in_link_for(Direction toward_pred, int lane_base) {
    // The edge is traveled from the predecessor to us; lanes follow the
    // travel direction, pins sit on our `toward_pred` side.
    PascProgram::Link l = PascProgram::travel_link(opposite(toward_pred), lane_base);
    l.dir = toward_pred;
    return l;
}

int link_base(int lane_base, const std::vector<uint8_t>* x_block, AmoebotId i,
              Direction d) {
    if (x_block && (*x_block)[size_t(i)] && axis_of(d) == Axis::X)
        return lane_base + 4;
    return lane_base;
}

}  // namespace

std::vector<std::vector<PascProgram::Instance>> euler_tour_instances(
    const AmoebotStructure& s, const TreeSpec& tree,
    const std::vector<int8_t>& mark_dir, int lane_base,
    const std::vector<uint8_t>* x_block) {
    std::vector<std::vector<PascProgram::Instance>> inst(size_t(s.size()));
    for (AmoebotId i = 0; i < s.size(); ++i) {
        uint8_t mask = tree.edges[size_t(i)];
        if (!mask) continue;
        int8_t first = canonical_mark_dir(tree, i);
        for (Direction d : kAllDirs) {
            if (!(mask & (1u << dir_index(d)))) continue;
            PascProgram::Instance node;
            node.outs.push_back(
                PascProgram::travel_link(d, link_base(lane_base, x_block, i, d)));
            node.weight1 = mark_dir[size_t(i)] == dir_index(d);
            if (tree.is_root(i) && dir_index(d) == first) {
                node.head = true;  // tour start
            } else {
                Direction pred = prev_tree_dir(mask, d);
                node.in =
                    in_link_for(pred, link_base(lane_base, x_block, i, pred));
            }
            inst[size_t(i)].push_back(node);
        }
        if (tree.is_root(i)) {
            PascProgram::Instance terminal;
            Direction pred = prev_tree_dir(mask, direction_from_index(first));
            terminal.in =
                in_link_for(pred, link_base(lane_base, x_block, i, pred));
            inst[size_t(i)].push_back(terminal);
        }
    }
    return inst;
}

EulerTourProgram::EulerTourProgram(const AmoebotStructure& s, std::string name,
                                   const TreeSpec& tree,
                                   const std::vector<int8_t>& mark_dir)
    : EulerTourProgram(s, std::move(name), tree, mark_dir, Options()) {}

EulerTourProgram::EulerTourProgram(const AmoebotStructure& s, std::string name,
                                   const TreeSpec& tree,
                                   const std::vector<int8_t>& mark_dir,
                                   Options opt)
    : PascProgram(s, std::move(name),
                  euler_tour_instances(s, tree, mark_dir, 0,
                                       opt.x_block.empty() ? nullptr
                                                           : &opt.x_block)),
      tree_(tree), opt_(std::move(opt)) {
    int n = s.size();
    out_inst_.assign(size_t(n), {-1, -1, -1, -1, -1, -1});
    in_inst_.assign(size_t(n), {-1, -1, -1, -1, -1, -1});
    terminal_inst_.assign(size_t(n), -1);
    cmp_.assign(size_t(n), {StreamCmp::EQ, StreamCmp::EQ, StreamCmp::EQ,
                            StreamCmp::EQ, StreamCmp::EQ, StreamCmp::EQ});
    sized_pass_.assign(size_t(n), {1, 1, 1, 1, 1, 1});
    w_bit_pending_.assign(size_t(n), 0);
    w_nonzero_.assign(size_t(n), 0);
    w_value_.assign(size_t(n), 0);
    done_flush_.assign(size_t(n), 0);
    if (opt_.sized) sized_state_.assign(size_t(n) * 6, SizedCmp{});
    for (AmoebotId i = 0; i < n; ++i) {
        uint8_t mask = tree_.edges[size_t(i)];
        if (!mask) continue;
        int8_t first = canonical_mark_dir(tree_, i);
        int8_t t = 0;
        for (Direction d : kAllDirs) {
            if (!(mask & (1u << dir_index(d)))) continue;
            out_inst_[size_t(i)][size_t(dir_index(d))] = t;
            if (!(tree_.is_root(i) && dir_index(d) == first)) {
                Direction pred = prev_tree_dir(mask, d);
                in_inst_[size_t(i)][size_t(dir_index(pred))] = t;
            }
            ++t;
        }
        if (tree_.is_root(i)) {
            Direction pred = prev_tree_dir(mask, direction_from_index(first));
            in_inst_[size_t(i)][size_t(dir_index(pred))] = t;
            terminal_inst_[size_t(i)] = t;
        }
        if (opt_.sized) {
            uint8_t pmask = opt_.parent_edge_mask.empty()
                                ? 0
                                : opt_.parent_edge_mask[size_t(i)];
            for (Direction d : kAllDirs)
                sized_state_[size_t(i) * 6 + size_t(dir_index(d))].w_on_b =
                    (pmask >> dir_index(d)) & 1;
        }
    }
}

void EulerTourProgram::sized_update(SizedCmp& st, uint8_t abit, uint8_t bbit,
                                    uint8_t wbit) {
    // Compare X with Y where one side additionally accumulates W.
    uint8_t x, y;
    if (st.w_on_b) {
        x = abit;
        uint8_t sum = uint8_t(bbit + wbit + st.carry);
        y = sum & 1;
        st.carry = sum >> 1;
    } else {
        uint8_t sum = uint8_t(abit + wbit + st.carry);
        x = sum & 1;
        st.carry = sum >> 1;
        y = bbit;
    }
    if (x != y) st.cmp = x ? 1 : -1;
}

void EulerTourProgram::on_iteration(AmoebotId i) {
    uint8_t mask = tree_.edges[size_t(i)];
    if (!mask) return;
    auto st = inst_state(i);
    for (Direction d : kAllDirs) {
        int di = dir_index(d);
        if (!(mask & (1u << di))) continue;
        uint8_t abit = st[size_t(out_inst_[size_t(i)][size_t(di)])].post;
        uint8_t bbit = st[size_t(in_inst_[size_t(i)][size_t(di)])].pre;
        if (abit != bbit)
            cmp_[size_t(i)][size_t(di)] = abit ? StreamCmp::GT : StreamCmp::LT;
        if (opt_.sized) {
            SizedCmp& sc = sized_state_[size_t(i) * 6 + size_t(di)];
            sc.a2 = sc.a1;
            sc.a1 = abit;
            sc.b2 = sc.b1;
            sc.b1 = bbit;
        }
    }
    if (terminal_inst_[size_t(i)] >= 0) {
        uint8_t wbit = st[size_t(terminal_inst_[size_t(i)])].pre;
        if (wbit) {
            w_nonzero_[size_t(i)] = 1;
            w_value_[size_t(i)] |= int64_t(1) << (iterations() - 1);
        }
        w_bit_pending_[size_t(i)] = wbit;
    }
}

void EulerTourProgram::control_setup(AmoebotId i, ActivationIo& io) {
    if (!opt_.broadcast_w) return;
    // Set 1: the tree circuit on lane 1 (cut between components).
    int8_t set = io.config.new_set();
    uint8_t mask = tree_.edges[size_t(i)];
    for (Direction d : kAllDirs)
        if (mask & (1u << dir_index(d)))
            io.config.assign(
                d,
                link_base(1, opt_.x_block.empty() ? nullptr : &opt_.x_block, i,
                          d),
                set);
    if (terminal_inst_[size_t(i)] >= 0 && w_bit_pending_[size_t(i)])
        io.beep(set);
}

void EulerTourProgram::control_read(AmoebotId i, const ActivationIo& io) {
    if (!opt_.sized) return;
    uint8_t wbit = opt_.broadcast_w && io.prev_num_sets > 1 ? io.got(1) : 0;
    uint8_t mask = tree_.edges[size_t(i)];
    for (Direction d : kAllDirs) {
        int di = dir_index(d);
        if (!(mask & (1u << di))) continue;
        SizedCmp& sc = sized_state_[size_t(i) * 6 + size_t(di)];
        sized_update(sc, sc.a2, sc.b2, wbit);
    }
}

void EulerTourProgram::on_finished(AmoebotId i) {
    if (done_flush_[size_t(i)]) return;
    done_flush_[size_t(i)] = 1;
    if (!opt_.sized) return;
    uint8_t mask = tree_.edges[size_t(i)];
    for (Direction d : kAllDirs) {
        int di = dir_index(d);
        if (!(mask & (1u << di))) continue;
        SizedCmp& sc = sized_state_[size_t(i) * 6 + size_t(di)];
        sized_update(sc, sc.a1, sc.b1, 0);
        sized_update(sc, 0, 0, 0);
        sized_update(sc, 0, 0, 0);
        sized_pass_[size_t(i)][size_t(di)] = sc.cmp >= 0;
    }
}

int EulerTourProgram::extra_state_bits(AmoebotId i) const {
    int deg = std::popcount(uint32_t(tree_.edges[size_t(i)]));
    int bits = 2 * deg;  // per-direction stream comparison
    if (opt_.sized) bits += 8 * deg;
    if (terminal_inst_[size_t(i)] >= 0) bits += 2;
    return bits;
}

// ------------------------------ beep scripts ------------------------------

void BeepScript::fill_singletons(const AmoebotStructure& s, int pins,
                                 AmoebotId i, ActivationIo& io) {
    for (Direction d : kAllDirs) {
        if (!(s.neighbor_mask(i) & (1u << dir_index(d)))) continue;
        for (int lane = 0; lane < pins; ++lane)
            if (io.config.set_of(d, lane) < 0)
                io.config.assign(d, lane, io.config.new_set());
    }
}

void BeepScript::activate(AmoebotId i, ActivationIo& io) {
    size_t r = size_t(round_);
    if (r > 0 && steps_[r - 1].read) steps_[r - 1].read(i, io);
    if (r < steps_.size()) {
        if (steps_[r].setup) steps_[r].setup(i, io);
        fill_singletons(s_, pins_, i, io);
    } else {
        fill_singletons(s_, pins_, i, io);
        io.terminate = true;
    }
    if (i == n_ - 1) ++round_;
}

int8_t portal_circuit_set(const Subview& view, Axis axis, int lane, AmoebotId i,
                          ActivationIo& io) {
    if (!view.is_active(i)) return -1;
    Direction pos = axis_positive_dir(axis);
    Direction neg = opposite(pos);
    bool any = view.has_edge(i, pos) || view.has_edge(i, neg);
    if (!any) return -1;
    int8_t set = io.config.new_set();
    if (view.has_edge(i, pos)) io.config.assign(pos, lane, set);
    if (view.has_edge(i, neg)) io.config.assign(neg, lane, set);
    return set;
}

// ------------------------------- primitives -------------------------------

namespace {

std::vector<int8_t> q_mark_dirs(const TreeSpec& tree,
                                const std::vector<uint8_t>& in_q) {
    std::vector<int8_t> mark(tree.edges.size(), -1);
    for (size_t i = 0; i < tree.edges.size(); ++i)
        if (in_q[i] && tree.edges[i]) mark[i] = canonical_mark_dir(tree, AmoebotId(i));
    return mark;
}

int64_t tour_round_limit(const AmoebotStructure& s) {
    return 64 + 8 * int64_t(s.size());
}

}  // namespace

RapResult root_and_prune(CircuitEngine& engine, const TreeSpec& tree,
                         const std::vector<uint8_t>& in_q, RoundStats& stats,
                         const std::string& label,
                         const std::vector<uint8_t>* x_block) {
    const AmoebotStructure& s = engine.structure();
    engine.reset_receipts();
    EulerTourProgram::Options opt;
    if (x_block) opt.x_block = *x_block;
    EulerTourProgram prog(s, label, tree, q_mark_dirs(tree, in_q), opt);
    auto outcome = engine.run_until(prog, tour_round_limit(s), stats, label);
    if (!outcome.terminated)
        throw std::runtime_error(label + ": round limit exceeded");
    RapResult res;
    res.in_vq.assign(size_t(s.size()), 0);
    res.parent.assign(size_t(s.size()), -1);
    res.edge_sign.assign(size_t(s.size()), {0, 0, 0, 0, 0, 0});
    bool any_q = false;
    for (AmoebotId i = 0; i < s.size(); ++i) {
        for (Direction d : kAllDirs) {
            if (!tree.has_edge(i, d)) continue;
            res.edge_sign[size_t(i)][size_t(dir_index(d))] =
                int8_t(prog.edge_cmp(i, d));
        }
        if (!tree.edges[size_t(i)]) {
            // Isolated node: its component is itself.
            res.in_vq[size_t(i)] = tree.is_root(i) && in_q[size_t(i)];
            if (in_q[size_t(i)]) any_q = true;
            continue;
        }
        if (in_q[size_t(i)]) any_q = true;
        if (tree.is_root(i)) {
            res.in_vq[size_t(i)] = prog.root_w_nonzero(i);
        } else {
            for (Direction d : kAllDirs) {
                if (!tree.has_edge(i, d)) continue;
                StreamCmp c = prog.edge_cmp(i, d);
                if (c != StreamCmp::EQ) res.in_vq[size_t(i)] = 1;
                if (c == StreamCmp::GT) res.parent[size_t(i)] = int8_t(dir_index(d));
            }
        }
    }
    res.q_empty = !any_q;
    return res;
}

namespace {

// One-shot election over the canonical tour: cut at marked out-edges, the
// tour head beeps, the owner of the first marked edge is elected. A marked
// head elects its owner directly; isolated roots in Q elect themselves.
class ElectionProgram : public AmoebotProgram {
  public:
    ElectionProgram(const AmoebotStructure& s, const TreeSpec& tree,
                    const std::vector<int8_t>& mark_dir,
                    std::vector<uint8_t> isolated_q,
                    const std::vector<uint8_t>* x_block = nullptr)
        : s_(s), tree_(tree), mark_(mark_dir), isolated_q_(std::move(isolated_q)),
          x_block_(x_block), elected_(size_t(s.size()), 0),
          watch_set_(size_t(s.size()), -1), round_(0) {}

    std::string name() const override { return "election"; }
    int min_pins() const override { return 4; }
    int state_bits(AmoebotId) const override { return 4; }
    const std::vector<uint8_t>& elected() const { return elected_; }

    void activate(AmoebotId i, ActivationIo& io) override {
        if (round_ == 0) {
            uint8_t mask = tree_.edges[size_t(i)];
            if (mask) {
                int8_t first = canonical_mark_dir(tree_, i);
                for (Direction d : kAllDirs) {
                    if (!(mask & (1u << dir_index(d)))) continue;
                    bool head = tree_.is_root(i) && dir_index(d) == first;
                    bool marked = mark_[size_t(i)] == dir_index(d);
                    auto out =
                        PascProgram::travel_link(d, link_base(0, x_block_, i, d));
                    if (head) {
                        int8_t set = io.config.new_set();
                        io.config.assign(out.dir, out.lane_pri, set);
                        if (marked) elected_[size_t(i)] = 1;  // empty subpath
                        else io.beep(set);
                        continue;
                    }
                    Direction pred = prev_tree_dir(mask, d);
                    auto in = in_link_for(pred, link_base(0, x_block_, i, pred));
                    int8_t set = io.config.new_set();
                    io.config.assign(in.dir, in.lane_pri, set);
                    if (marked) {
                        watch_set_[size_t(i)] = set;  // subpath ends here
                        io.config.assign(out.dir, out.lane_pri,
                                         io.config.new_set());
                    } else {
                        io.config.assign(out.dir, out.lane_pri, set);
                    }
                }
                if (tree_.is_root(i)) {
                    Direction pred =
                        prev_tree_dir(mask, direction_from_index(first));
                    auto in = in_link_for(pred, link_base(0, x_block_, i, pred));
                    io.config.assign(in.dir, in.lane_pri, io.config.new_set());
                }
            } else if (tree_.is_root(i) && isolated_q_[size_t(i)]) {
                elected_[size_t(i)] = 1;
            }
        } else {
            if (watch_set_[size_t(i)] >= 0 && io.got(watch_set_[size_t(i)]))
                elected_[size_t(i)] = 1;
            io.terminate = true;
        }
        BeepScript::fill_singletons(s_, min_pins(), i, io);
        if (i == s_.size() - 1) ++round_;
    }

  private:
    const AmoebotStructure& s_;
    const TreeSpec& tree_;
    std::vector<int8_t> mark_;
    std::vector<uint8_t> isolated_q_;
    const std::vector<uint8_t>* x_block_;
    std::vector<uint8_t> elected_;
    std::vector<int8_t> watch_set_;
    int64_t round_;
};

}  // namespace

AmoebotId election(CircuitEngine& engine, const TreeSpec& tree,
                   const std::vector<uint8_t>& in_q, RoundStats& stats,
                   const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    engine.reset_receipts();
    ElectionProgram prog(s, tree, q_mark_dirs(tree, in_q), in_q);
    auto outcome = engine.run_until(prog, 8, stats, label);
    if (!outcome.terminated)
        throw std::runtime_error(label + ": election did not settle");
    for (AmoebotId i = 0; i < s.size(); ++i)
        if (prog.elected()[size_t(i)]) return i;
    return kNoAmoebot;
}

std::vector<uint8_t> centroids(CircuitEngine& engine, const TreeSpec& tree,
                               const std::vector<uint8_t>& in_q,
                               RoundStats& stats, const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    auto rap = root_and_prune(engine, tree, in_q, stats, label + ".rap");
    EulerTourProgram::Options opt;
    opt.broadcast_w = true;
    opt.sized = true;
    opt.parent_edge_mask.assign(size_t(s.size()), 0);
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (tree.is_root(i) || !tree.edges[size_t(i)]) continue;
        // The component "above" u lies behind the tour-parent edge: the
        // unique direction with positive prefix difference, whether or not
        // u survived the prune.
        for (Direction d : kAllDirs)
            if (tree.has_edge(i, d) &&
                rap.edge_sign[size_t(i)][size_t(dir_index(d))] > 0)
                opt.parent_edge_mask[size_t(i)] |= uint8_t(1u << dir_index(d));
    }
    engine.reset_receipts();
    EulerTourProgram prog(s, label + ".sized", tree, q_mark_dirs(tree, in_q),
                          opt);
    auto outcome = engine.run_until(prog, tour_round_limit(s), stats,
                                    label + ".sized");
    if (!outcome.terminated)
        throw std::runtime_error(label + ": round limit exceeded");
    std::vector<uint8_t> result(size_t(s.size()), 0);
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (!in_q[size_t(i)]) continue;
        if (!tree.edges[size_t(i)]) {
            result[size_t(i)] = tree.is_root(i);
            continue;
        }
        bool ok = true;
        for (Direction d : kAllDirs)
            if (tree.has_edge(i, d) && !prog.size_ok(i, d)) ok = false;
        result[size_t(i)] = ok;
    }
    return result;
}

std::vector<uint8_t> augmentation(CircuitEngine& engine, const TreeSpec& tree,
                                  const std::vector<uint8_t>& in_q,
                                  RoundStats& stats, const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    auto rap = root_and_prune(engine, tree, in_q, stats, label);
    std::vector<uint8_t> result(size_t(s.size()), 0);
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (!rap.in_vq[size_t(i)]) continue;
        int deg = 0;
        for (Direction d : kAllDirs)
            if (tree.has_edge(i, d) &&
                rap.edge_sign[size_t(i)][size_t(dir_index(d))] != 0)
                ++deg;
        result[size_t(i)] = deg >= 3;
    }
    return result;
}

std::vector<int> decomposition(CircuitEngine& engine, const TreeSpec& tree,
                               const std::vector<uint8_t>& in_qprime,
                               RoundStats& stats, const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    const int n = s.size();
    std::vector<int> level(size_t(n), -1);
    std::vector<uint8_t> removed(size_t(n), 0);
    std::vector<uint8_t> zone_roots = tree.roots;

    for (int depth = 0; depth < n + 1; ++depth) {
        // Global continuation check: unelected Q' members beep.
        bool keep_going = false;
        {
            engine.reset_receipts();
            std::vector<BeepScript::Step> steps(1);
            steps[0].setup = [&](AmoebotId i, ActivationIo& io) {
                int8_t g = io.config.new_set();
                for (Direction d : kAllDirs)
                    if (s.neighbor_mask(i) & (1u << dir_index(d)))
                        io.config.assign(d, 0, g);
                if (in_qprime[size_t(i)] && !removed[size_t(i)]) io.beep(g);
            };
            steps[0].read = [&](AmoebotId i, const ActivationIo& io) {
                if (i == 0) keep_going = io.prev_num_sets > 0 && io.got(0);
            };
            BeepScript check(s, label + ".check", 1, std::move(steps));
            engine.run_until(check, 8, stats, label + ".check");
        }
        if (!keep_going) break;

        // Zone forest: tree edges avoiding removed amoebots.
        TreeSpec zone;
        zone.edges.assign(size_t(n), 0);
        zone.roots = zone_roots;
        for (AmoebotId i = 0; i < n; ++i) {
            if (removed[size_t(i)]) continue;
            for (Direction d : kAllDirs) {
                if (!tree.has_edge(i, d)) continue;
                AmoebotId v = s.neighbor(i, d);
                if (!removed[size_t(v)])
                    zone.edges[size_t(i)] |= uint8_t(1u << dir_index(d));
            }
        }
        std::vector<uint8_t> zone_q(size_t(n), 0);
        for (AmoebotId i = 0; i < n; ++i)
            zone_q[size_t(i)] = in_qprime[size_t(i)] && !removed[size_t(i)];

        auto cents = centroids(engine, zone, zone_q, stats, label + ".centroid");
        engine.reset_receipts();
        ElectionProgram elect(s, zone, q_mark_dirs(zone, cents), cents);
        auto outcome = engine.run_until(elect, 8, stats, label + ".elect");
        if (!outcome.terminated)
            throw std::runtime_error(label + ": election did not settle");

        // Elected centroids announce themselves edge-wise; their neighbors
        // become the roots of the next level's zones.
        std::vector<uint8_t> next_roots(size_t(n), 0);
        for (AmoebotId i = 0; i < n; ++i) {
            if (!elect.elected()[size_t(i)]) continue;
            level[size_t(i)] = depth;
            removed[size_t(i)] = 1;
            for (Direction d : kAllDirs) {
                if (!zone.has_edge(i, d)) continue;
                AmoebotId v = s.neighbor(i, d);
                if (!removed[size_t(v)]) next_roots[size_t(v)] = 1;
            }
        }
        // The announcement beeps cost one scripted round pair.
        {
            engine.reset_receipts();
            std::vector<BeepScript::Step> steps(1);
            steps[0].setup = [&](AmoebotId i, ActivationIo& io) {
                for (Direction d : kAllDirs)
                    if (s.neighbor_mask(i) & (1u << dir_index(d))) {
                        int8_t set = io.config.new_set();
                        io.config.assign(d, 0, set);
                        if (elect.elected()[size_t(i)]) io.beep(set);
                    }
            };
            BeepScript announce(s, label + ".announce", 1, std::move(steps));
            engine.run_until(announce, 8, stats, label + ".announce");
        }
        zone_roots = std::move(next_roots);
    }
    return level;
}

}  // namespace amoebot

// ---------------------------- portal variants -----------------------------

namespace amoebot {

namespace {

// The two sides of a portal axis and the chain-bridge qualifier cells for
// the per-(portal, neighbor-portal) adjacency circuits.
struct SideTable {
    std::array<Direction, 2> side_a, side_b;
    // For a chain link in direction cd, the side circuit bridges across it
    // iff the edge toward qual(cd, side) exists.
    Direction qual_a_pos, qual_a_neg, qual_b_pos, qual_b_neg;
};

SideTable side_table(Axis axis) {
    switch (axis) {
        case Axis::X:
            return {{Direction::NW, Direction::NE},
                    {Direction::SW, Direction::SE},
                    Direction::NE, Direction::NW, Direction::SE, Direction::SW};
        case Axis::Y:
            return {{Direction::E, Direction::SE},
                    {Direction::W, Direction::NW},
                    Direction::E, Direction::SE, Direction::NW, Direction::W};
        default:
            return {{Direction::NE, Direction::E},
                    {Direction::SW, Direction::W},
                    Direction::E, Direction::NE, Direction::SW, Direction::W};
    }
}

bool side_a_dir(Axis axis, Direction d) {
    auto t = side_table(axis);
    return d == t.side_a[0] || d == t.side_a[1];
}

// Builds the two side-adjacency circuits of the amoebot's portal on the
// given lanes; returns the set indices ({-1,-1} when absent).
std::array<int8_t, 2> side_circuit_sets(const Subview& view, Axis axis,
                                        int lane_a, int lane_b, AmoebotId i,
                                        ActivationIo& io) {
    std::array<int8_t, 2> sets{-1, -1};
    if (!view.is_active(i)) return sets;
    SideTable t = side_table(axis);
    Direction pos = axis_positive_dir(axis);
    Direction neg = opposite(pos);
    bool contact_a = view.has_edge(i, t.side_a[0]) || view.has_edge(i, t.side_a[1]);
    bool contact_b = view.has_edge(i, t.side_b[0]) || view.has_edge(i, t.side_b[1]);
    if (contact_a) {
        sets[0] = io.config.new_set();
        if (view.has_edge(i, pos) && view.has_edge(i, t.qual_a_pos))
            io.config.assign(pos, lane_a, sets[0]);
        if (view.has_edge(i, neg) && view.has_edge(i, t.qual_a_neg))
            io.config.assign(neg, lane_a, sets[0]);
    }
    if (contact_b) {
        sets[1] = io.config.new_set();
        if (view.has_edge(i, pos) && view.has_edge(i, t.qual_b_pos))
            io.config.assign(pos, lane_b, sets[1]);
        if (view.has_edge(i, neg) && view.has_edge(i, t.qual_b_neg))
            io.config.assign(neg, lane_b, sets[1]);
    }
    return sets;
}

std::vector<int8_t> rep_mark_dirs(const Subview& view, Axis axis,
                                  const TreeSpec& ipg,
                                  const std::vector<uint8_t>& in_q) {
    std::vector<int8_t> mark(ipg.edges.size(), -1);
    for (size_t i = 0; i < ipg.edges.size(); ++i)
        if (in_q[i] && view.is_active(AmoebotId(i)) &&
            is_portal_rep(view, AmoebotId(i), axis) && ipg.edges[i])
            mark[i] = canonical_mark_dir(ipg, AmoebotId(i));
    return mark;
}

}  // namespace

TreeSpec implicit_portal_tree(const Subview& view, Axis axis,
                              AmoebotId root_member) {
    TreeSpec t;
    t.edges.assign(view.active.size(), 0);
    t.roots.assign(view.active.size(), 0);
    for (AmoebotId i = 0; i < AmoebotId(view.active.size()); ++i) {
        if (!view.is_active(i)) continue;
        auto occ = [&](Direction q) { return view.has_edge(i, q); };
        for (Direction d : kAllDirs)
            if (ipg_edge_rule(occ, d, axis))
                t.edges[size_t(i)] |= uint8_t(1u << dir_index(d));
    }
    if (root_member != kNoAmoebot) t.roots[size_t(root_member)] = 1;
    return t;
}

bool is_portal_rep(const Subview& view, AmoebotId i, Axis axis) {
    if (!view.is_active(i)) return false;
    switch (axis) {
        case Axis::X: return !view.has_edge(i, Direction::W);
        case Axis::Y: return !view.has_edge(i, Direction::SW);
        default:      return !view.has_edge(i, Direction::NW);
    }
}

namespace {

// Representatives of all root-flagged portals (one per zone).
std::vector<uint8_t> root_reps_mask(const Subview& view, Axis axis,
                                    const std::vector<uint8_t>& root_portal) {
    std::vector<uint8_t> mask(root_portal.size(), 0);
    for (size_t i = 0; i < root_portal.size(); ++i)
        if (root_portal[i] && view.is_active(AmoebotId(i)) &&
            is_portal_rep(view, AmoebotId(i), axis))
            mask[i] = 1;
    return mask;
}

}  // namespace

TreeSpec portal_tree_with_roots(const Subview& view, Axis axis,
                                const std::vector<uint8_t>& root_portal) {
    TreeSpec t = implicit_portal_tree(view, axis, kNoAmoebot);
    t.roots = root_reps_mask(view, axis, root_portal);
    return t;
}

void extract_connector_signs(const Subview& view, Axis axis, const TreeSpec& ipg,
                             const EulerTourProgram& prog, PortalRapResult& out) {
    for (AmoebotId i = 0; i < AmoebotId(view.active.size()); ++i)
        for (Direction d : kAllDirs)
            if (ipg.has_edge(i, d) && axis_of(d) != axis)
                out.connector_sign[size_t(i)][size_t(dir_index(d))] =
                    int8_t(prog.edge_cmp(i, d));
}

BeepScript::Step portal_rap_dissemination(const Subview& view, Axis axis,
                                          const TreeSpec& ipg,
                                          const EulerTourProgram& prog,
                                          const std::vector<uint8_t>& in_q,
                                          int lane_base, PortalRapResult& out,
                                          const std::vector<uint8_t>* x_block) {
    struct Scratch {
        std::vector<int8_t> pc;
        std::vector<std::array<int8_t, 2>> side;
    };
    auto scratch = std::make_shared<Scratch>();
    scratch->pc.assign(view.active.size(), -1);
    scratch->side.assign(view.active.size(), {-1, -1});
    BeepScript::Step step;
    step.setup = [&view, &ipg, &prog, &in_q, &out, axis, lane_base, x_block,
                  scratch](AmoebotId i, ActivationIo& io) {
        if (!view.is_active(i)) return;
        int base = lane_base;
        if (axis == Axis::X && x_block && (*x_block)[size_t(i)]) base += 4;
        int8_t pc = portal_circuit_set(view, axis, base, i, io);
        if (pc < 0) pc = io.config.new_set();
        scratch->pc[size_t(i)] = pc;
        scratch->side[size_t(i)] =
            side_circuit_sets(view, axis, base + 1, base + 2, i, io);
        bool w_nonzero = ipg.edges[size_t(i)] ? prog.root_w_nonzero(i)
                                              : in_q[size_t(i)] != 0;
        if (ipg.is_root(i) && w_nonzero) io.beep(pc);
        for (Direction d : kAllDirs) {
            int8_t sign = out.connector_sign[size_t(i)][size_t(dir_index(d))];
            if (sign == 0) continue;
            io.beep(pc);
            if (sign > 0) {
                int8_t set = scratch->side[size_t(i)][side_a_dir(axis, d) ? 0 : 1];
                if (set >= 0) io.beep(set);
            }
        }
    };
    step.read = [&view, &out, axis, scratch](AmoebotId i,
                                             const ActivationIo& io) {
        if (!view.is_active(i)) return;
        if (scratch->pc[size_t(i)] >= 0 && io.got(scratch->pc[size_t(i)]))
            out.in_vq[size_t(i)] = 1;
        SideTable t = side_table(axis);
        if (scratch->side[size_t(i)][0] >= 0 && io.got(scratch->side[size_t(i)][0]))
            for (Direction d : t.side_a)
                if (view.has_edge(i, d))
                    out.parent_side[size_t(i)] |= uint8_t(1u << dir_index(d));
        if (scratch->side[size_t(i)][1] >= 0 && io.got(scratch->side[size_t(i)][1]))
            for (Direction d : t.side_b)
                if (view.has_edge(i, d))
                    out.parent_side[size_t(i)] |= uint8_t(1u << dir_index(d));
    };
    return step;
}

PortalRapResult portal_root_and_prune(CircuitEngine& engine, const Subview& view,
                                      Axis axis,
                                      const std::vector<uint8_t>& root_portal,
                                      const std::vector<uint8_t>& in_q,
                                      RoundStats& stats,
                                      const std::string& label,
                                      const std::vector<uint8_t>* x_block) {
    const AmoebotStructure& s = engine.structure();
    const int n = s.size();
    TreeSpec ipg = portal_tree_with_roots(view, axis, root_portal);
    auto marks = rep_mark_dirs(view, axis, ipg, in_q);

    engine.reset_receipts();
    EulerTourProgram::Options topt;
    if (x_block) topt.x_block = *x_block;
    EulerTourProgram prog(s, label + ".tour", ipg, marks, topt);
    auto outcome = engine.run_until(prog, 64 + 8 * int64_t(n), stats,
                                    label + ".tour");
    if (!outcome.terminated)
        throw std::runtime_error(label + ": round limit exceeded");

    PortalRapResult res;
    res.in_vq.assign(size_t(n), 0);
    res.parent_side.assign(size_t(n), 0);
    res.connector_sign.assign(size_t(n), {0, 0, 0, 0, 0, 0});
    bool any_q = false;
    for (AmoebotId i = 0; i < n; ++i)
        if (in_q[size_t(i)] && view.is_active(i)) any_q = true;
    res.q_empty = !any_q;
    extract_connector_signs(view, axis, ipg, prog, res);

    engine.reset_receipts();
    std::vector<BeepScript::Step> steps{
        portal_rap_dissemination(view, axis, ipg, prog, in_q, 0, res, x_block)};
    BeepScript script(s, label + ".disseminate", x_block ? 7 : 3,
                      std::move(steps));
    engine.run_until(script, 8, stats, label + ".disseminate");
    return res;
}

PortalElectionResult portal_election(CircuitEngine& engine, const Subview& view,
                                     Axis axis,
                                     const std::vector<uint8_t>& root_portal,
                                     const std::vector<uint8_t>& in_q,
                                     RoundStats& stats,
                                     const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    const int n = s.size();
    TreeSpec ipg = portal_tree_with_roots(view, axis, root_portal);
    auto marks = rep_mark_dirs(view, axis, ipg, in_q);
    std::vector<uint8_t> isolated(size_t(n), 0);
    for (AmoebotId i = 0; i < n; ++i)
        isolated[size_t(i)] =
            in_q[size_t(i)] && view.is_active(i) && is_portal_rep(view, i, axis);

    engine.reset_receipts();
    ElectionProgram prog(s, ipg, marks, isolated);
    auto outcome = engine.run_until(prog, 8, stats, label + ".elect");
    if (!outcome.terminated)
        throw std::runtime_error(label + ": election did not settle");

    PortalElectionResult res;
    res.elected.assign(size_t(n), 0);
    res.q_empty = true;
    // The winner beeps on its portal circuit.
    std::vector<int8_t> pc_set(size_t(n), -1);
    std::vector<BeepScript::Step> steps(1);
    steps[0].setup = [&](AmoebotId i, ActivationIo& io) {
        if (!view.is_active(i)) return;
        int8_t pc = portal_circuit_set(view, axis, 0, i, io);
        if (pc < 0) pc = io.config.new_set();
        pc_set[size_t(i)] = pc;
        if (prog.elected()[size_t(i)]) io.beep(pc);
    };
    steps[0].read = [&](AmoebotId i, const ActivationIo& io) {
        if (!view.is_active(i) || pc_set[size_t(i)] < 0) return;
        if (io.got(pc_set[size_t(i)])) {
            res.elected[size_t(i)] = 1;
            res.q_empty = false;
        }
    };
    engine.reset_receipts();
    BeepScript script(s, label + ".announce", 1, std::move(steps));
    engine.run_until(script, 8, stats, label + ".announce");
    return res;
}

std::vector<uint8_t> portal_centroids(CircuitEngine& engine, const Subview& view,
                                      Axis axis,
                                      const std::vector<uint8_t>& root_portal,
                                      const std::vector<uint8_t>& in_q,
                                      RoundStats& stats,
                                      const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    const int n = s.size();
    auto rap = portal_root_and_prune(engine, view, axis, root_portal, in_q,
                                     stats, label + ".rap");
    TreeSpec ipg = portal_tree_with_roots(view, axis, root_portal);
    auto marks = rep_mark_dirs(view, axis, ipg, in_q);

    EulerTourProgram::Options opt;
    opt.broadcast_w = true;
    opt.sized = true;
    opt.parent_edge_mask.assign(size_t(n), 0);
    for (AmoebotId i = 0; i < n; ++i)
        for (Direction d : kAllDirs)
            if (rap.connector_sign[size_t(i)][size_t(dir_index(d))] > 0)
                opt.parent_edge_mask[size_t(i)] |= uint8_t(1u << dir_index(d));

    engine.reset_receipts();
    EulerTourProgram prog(s, label + ".sized", ipg, marks, opt);
    auto outcome = engine.run_until(prog, 64 + 8 * int64_t(n), stats,
                                    label + ".sized");
    if (!outcome.terminated)
        throw std::runtime_error(label + ": round limit exceeded");

    // Violation beeps: a connector whose component exceeds |Q|/2 disables
    // its whole portal.
    std::vector<uint8_t> result(size_t(n), 0);
    std::vector<int8_t> pc_set(size_t(n), -1);
    std::vector<BeepScript::Step> steps(1);
    steps[0].setup = [&](AmoebotId i, ActivationIo& io) {
        if (!view.is_active(i)) return;
        int8_t pc = portal_circuit_set(view, axis, 0, i, io);
        if (pc < 0) pc = io.config.new_set();
        pc_set[size_t(i)] = pc;
        for (Direction d : kAllDirs)
            if (ipg.has_edge(i, d) && axis_of(d) != axis && !prog.size_ok(i, d))
                io.beep(pc);
    };
    steps[0].read = [&](AmoebotId i, const ActivationIo& io) {
        if (!view.is_active(i) || !in_q[size_t(i)]) return;
        if (pc_set[size_t(i)] < 0 || !io.got(pc_set[size_t(i)]))
            result[size_t(i)] = 1;
    };
    engine.reset_receipts();
    BeepScript script(s, label + ".verdict", 1, std::move(steps));
    engine.run_until(script, 8, stats, label + ".verdict");
    return result;
}

namespace {

// Per-portal prefix chains counting tree connectors on each side; the chain
// end compares the total degree with 3 and flags the portal.
class PortalDegreeProgram : public PascProgram {
  public:
    PortalDegreeProgram(const AmoebotStructure& s, const Subview& view,
                        Axis axis, const std::vector<uint8_t>& weight_a,
                        const std::vector<uint8_t>& weight_b)
        : PascProgram(s, "portal.degree",
                      build(s, view, axis, weight_a, weight_b)),
          view_(view), axis_(axis), ge3_(size_t(s.size()), 0),
          b0_(size_t(s.size()), 0), b1_(size_t(s.size()), 0),
          carry_(size_t(s.size()), 0), idx_(size_t(s.size()), 0) {}

    bool degree_ge3(AmoebotId i) const { return ge3_[size_t(i)] != 0; }

  protected:
    void on_iteration(AmoebotId i) override {
        if (!view_.is_active(i)) return;
        if (view_.has_edge(i, axis_positive_dir(axis_))) return;  // not chain end
        auto st = inst_state(i);
        if (st.size() < 2) return;
        uint8_t sum = uint8_t(st[0].post + st[1].post + carry_[size_t(i)]);
        uint8_t bit = sum & 1;
        carry_[size_t(i)] = sum >> 1;
        int k = idx_[size_t(i)]++;
        if (k == 0) b0_[size_t(i)] = bit;
        else if (k == 1) b1_[size_t(i)] = bit;
        else if (bit) ge3_[size_t(i)] = 1;
        if (b0_[size_t(i)] && b1_[size_t(i)]) ge3_[size_t(i)] = 1;
    }
    void on_finished(AmoebotId i) override {
        // Flush the adder carry.
        if (!view_.is_active(i)) return;
        if (carry_[size_t(i)] && idx_[size_t(i)] >= 2) ge3_[size_t(i)] = 1;
        if (carry_[size_t(i)] && idx_[size_t(i)] == 1) b1_[size_t(i)] = 1;
        if (b0_[size_t(i)] && b1_[size_t(i)]) ge3_[size_t(i)] = 1;
    }
    int extra_state_bits(AmoebotId) const override { return 6; }

  private:
    static std::vector<std::vector<Instance>> build(
        const AmoebotStructure& s, const Subview& view, Axis axis,
        const std::vector<uint8_t>& weight_a,
        const std::vector<uint8_t>& weight_b) {
        std::vector<std::vector<Instance>> inst(size_t(s.size()));
        Direction pos = axis_positive_dir(axis);
        Direction neg = opposite(pos);
        for (AmoebotId i = 0; i < s.size(); ++i) {
            if (!view.is_active(i)) continue;
            bool start = !view.has_edge(i, neg);
            bool end = !view.has_edge(i, pos);
            for (int side = 0; side < 2; ++side) {
                Instance node;
                node.head = start;
                node.weight1 = (side == 0 ? weight_a : weight_b)[size_t(i)] != 0;
                uint8_t base = uint8_t(side * 2);
                if (!start)
                    node.in = Link{neg, base, uint8_t(base + 1)};
                if (!end)
                    node.outs.push_back(Link{pos, base, uint8_t(base + 1)});
                inst[size_t(i)].push_back(node);
            }
        }
        return inst;
    }

    const Subview& view_;
    Axis axis_;
    std::vector<uint8_t> ge3_, b0_, b1_, carry_;
    std::vector<int> idx_;
};

}  // namespace

std::vector<uint8_t> portal_augmentation(CircuitEngine& engine,
                                         const Subview& view, Axis axis,
                                         const std::vector<uint8_t>& root_portal,
                                         const std::vector<uint8_t>& in_q,
                                         RoundStats& stats,
                                         const std::string& label) {
    auto rap = portal_root_and_prune(engine, view, axis, root_portal, in_q,
                                     stats, label + ".rap");
    return portal_augmentation_given(engine, view, axis, rap, stats, label);
}

std::vector<uint8_t> portal_augmentation_given(CircuitEngine& engine,
                                               const Subview& view, Axis axis,
                                               const PortalRapResult& rap,
                                               RoundStats& stats,
                                               const std::string& label) {
    const AmoebotStructure& s = engine.structure();
    const int n = s.size();
    std::vector<uint8_t> wa(size_t(n), 0), wb(size_t(n), 0);
    for (AmoebotId i = 0; i < n; ++i) {
        for (Direction d : kAllDirs) {
            if (rap.connector_sign[size_t(i)][size_t(dir_index(d))] == 0) continue;
            if (side_a_dir(axis, d)) wa[size_t(i)] = 1;
            else wb[size_t(i)] = 1;
        }
    }
    engine.reset_receipts();
    PortalDegreeProgram prog(s, view, axis, wa, wb);
    auto outcome = engine.run_until(prog, 64 + 8 * int64_t(n), stats,
                                    label + ".degree");
    if (!outcome.terminated)
        throw std::runtime_error(label + ": round limit exceeded");

    std::vector<uint8_t> result(size_t(n), 0);
    std::vector<int8_t> pc_set(size_t(n), -1);
    std::vector<BeepScript::Step> steps(1);
    steps[0].setup = [&](AmoebotId i, ActivationIo& io) {
        if (!view.is_active(i)) return;
        int8_t pc = portal_circuit_set(view, axis, 0, i, io);
        if (pc < 0) pc = io.config.new_set();
        pc_set[size_t(i)] = pc;
        if (!view.has_edge(i, axis_positive_dir(axis)) && prog.degree_ge3(i))
            io.beep(pc);
    };
    steps[0].read = [&](AmoebotId i, const ActivationIo& io) {
        if (!view.is_active(i) || pc_set[size_t(i)] < 0) return;
        if (io.got(pc_set[size_t(i)])) result[size_t(i)] = 1;
    };
    engine.reset_receipts();
    BeepScript script(s, label + ".verdict", 1, std::move(steps));
    engine.run_until(script, 8, stats, label + ".verdict");
    return result;
}

std::vector<int> portal_decomposition(
    CircuitEngine& engine, const Subview& view, Axis axis,
    const std::vector<uint8_t>& root_portal,
    const std::vector<uint8_t>& in_qprime, RoundStats& stats,
    const std::string& label,
    const std::function<void(int, const std::vector<uint8_t>&)>& on_level) {
    const AmoebotStructure& s = engine.structure();
    const int n = s.size();
    std::vector<int> level(size_t(n), -1);
    std::vector<uint8_t> removed(size_t(n), 0);
    std::vector<uint8_t> zone_roots = root_portal;

    for (int depth = 0; depth < n + 1; ++depth) {
        bool keep_going = false;
        {
            engine.reset_receipts();
            std::vector<BeepScript::Step> steps(1);
            steps[0].setup = [&](AmoebotId i, ActivationIo& io) {
                int8_t g = io.config.new_set();
                for (Direction d : kAllDirs)
                    if (s.neighbor_mask(i) & (1u << dir_index(d)))
                        io.config.assign(d, 0, g);
                if (in_qprime[size_t(i)] && !removed[size_t(i)] &&
                    view.is_active(i))
                    io.beep(g);
            };
            steps[0].read = [&](AmoebotId i, const ActivationIo& io) {
                if (i == 0) keep_going = io.prev_num_sets > 0 && io.got(0);
            };
            BeepScript check(s, label + ".check", 1, std::move(steps));
            engine.run_until(check, 8, stats, label + ".check");
        }
        if (!keep_going) break;

        // Zone view: drop removed portals.
        Subview zone = view;
        for (AmoebotId i = 0; i < n; ++i) {
            if (removed[size_t(i)]) {
                zone.active[size_t(i)] = 0;
                zone.edge_mask[size_t(i)] = 0;
            }
        }
        for (AmoebotId i = 0; i < n; ++i) {
            if (!zone.active[size_t(i)]) continue;
            for (Direction d : kAllDirs) {
                AmoebotId v = s.neighbor(i, d);
                if (v != kNoAmoebot && removed[size_t(v)])
                    zone.edge_mask[size_t(i)] &= uint8_t(~(1u << dir_index(d)));
            }
        }
        std::vector<uint8_t> zq(size_t(n), 0);
        for (AmoebotId i = 0; i < n; ++i)
            zq[size_t(i)] = in_qprime[size_t(i)] && !removed[size_t(i)] &&
                            zone.active[size_t(i)];

        auto cents = portal_centroids(engine, zone, axis, zone_roots, zq, stats,
                                      label + ".centroid");
        auto elected = portal_election(engine, zone, axis, zone_roots, cents,
                                       stats, label + ".elect");

        // New zone roots: portals adjacent to an elected portal, identified
        // by their connector on the zone tree.
        TreeSpec ipg = implicit_portal_tree(zone, axis, kNoAmoebot);
        std::vector<uint8_t> next_roots(size_t(n), 0);
        {
            engine.reset_receipts();
            std::vector<std::array<int8_t, 6>> edge_sets(
                size_t(n), {-1, -1, -1, -1, -1, -1});
            std::vector<uint8_t> root_conn(size_t(n), 0);
            std::vector<int8_t> pc_set(size_t(n), -1);
            std::vector<BeepScript::Step> steps(2);
            steps[0].setup = [&](AmoebotId i, ActivationIo& io) {
                for (Direction d : kAllDirs)
                    if (s.neighbor_mask(i) & (1u << dir_index(d))) {
                        int8_t set = io.config.new_set();
                        io.config.assign(d, 0, set);
                        edge_sets[size_t(i)][size_t(dir_index(d))] = set;
                        if (elected.elected[size_t(i)]) io.beep(set);
                    }
            };
            steps[0].read = [&](AmoebotId i, const ActivationIo& io) {
                if (!zone.active[size_t(i)] || elected.elected[size_t(i)]) return;
                for (Direction d : kAllDirs) {
                    int8_t set = edge_sets[size_t(i)][size_t(dir_index(d))];
                    if (set >= 0 && io.got(set) && ipg.has_edge(i, d) &&
                        axis_of(d) != axis)
                        root_conn[size_t(i)] = 1;
                }
            };
            steps[1].setup = [&](AmoebotId i, ActivationIo& io) {
                if (!zone.active[size_t(i)] || elected.elected[size_t(i)]) {
                    return;
                }
                int8_t pc = portal_circuit_set(zone, axis, 0, i, io);
                if (pc < 0) pc = io.config.new_set();
                pc_set[size_t(i)] = pc;
                if (root_conn[size_t(i)]) io.beep(pc);
            };
            steps[1].read = [&](AmoebotId i, const ActivationIo& io) {
                if (!zone.active[size_t(i)] || elected.elected[size_t(i)]) return;
                if (pc_set[size_t(i)] >= 0 && io.got(pc_set[size_t(i)]))
                    next_roots[size_t(i)] = 1;
            };
            BeepScript script(s, label + ".roots", 1, std::move(steps));
            engine.run_until(script, 8, stats, label + ".roots");
        }
        for (AmoebotId i = 0; i < n; ++i) {
            if (elected.elected[size_t(i)]) {
                level[size_t(i)] = depth;
                removed[size_t(i)] = 1;
            }
        }
        if (on_level) on_level(depth, elected.elected);
        zone_roots = std::move(next_roots);
    }
    return level;
}

}  // namespace amoebot
