#include "amoebot/pasc.hpp"

#include <algorithm>
#include <stdexcept>

namespace amoebot {

PascProgram::PascProgram(const AmoebotStructure& s, std::string name,
                         std::vector<std::vector<Instance>> instances,
                         int ctrl_lane)
    : s_(s), ctrl_lane_(ctrl_lane), name_(std::move(name)),
      instances_(std::move(instances)), n_(s.size()) {
    state_.resize(size_t(n_));
    sets_.resize(size_t(n_));
    min_pins_ = ctrl_lane_ + 1;
    for (AmoebotId i = 0; i < n_; ++i) {
        state_[size_t(i)].resize(instances_[size_t(i)].size());
        sets_[size_t(i)].resize(instances_[size_t(i)].size());
        for (const Instance& inst : instances_[size_t(i)]) {
            if (inst.in)
                min_pins_ = std::max(min_pins_, int(inst.in->lane_sec) + 1);
            for (const Link& l : inst.outs)
                min_pins_ = std::max(min_pins_, int(l.lane_sec) + 1);
        }
    }
}

void PascProgram::fill_singletons(AmoebotId i, ActivationIo& io) const {
    const uint8_t mask = s_.neighbor_mask(i);
    for (Direction d : kAllDirs) {
        if (!(mask & (1u << dir_index(d)))) continue;
        for (int lane = 0; lane < min_pins_; ++lane)
            if (io.config.set_of(d, lane) < 0)
                io.config.assign(d, lane, io.config.new_set());
    }
}

void PascProgram::control_base(AmoebotId i, ActivationIo& io) const {
    int8_t ctrl = io.config.new_set();
    const uint8_t mask = s_.neighbor_mask(i);
    for (Direction d : kAllDirs)
        if (mask & (1u << dir_index(d)))
            io.config.assign(d, ctrl_lane_, ctrl);
}

void PascProgram::build_signal_config(AmoebotId i, ActivationIo& io) {
    auto& insts = instances_[size_t(i)];
    auto& st = state_[size_t(i)];
    for (size_t t = 0; t < insts.size(); ++t) {
        const Instance& inst = insts[t];
        bool active = inst.weight1 && !st[t].fired;
        int8_t sa = io.config.new_set();  // post-bit 0 on receipt
        int8_t sb = io.config.new_set();  // post-bit 1 on receipt
        if (inst.in) {
            // Straight: pri -> post0, sec -> post1. Crossed: pri -> post1.
            io.config.assign(inst.in->dir, inst.in->lane_pri, active ? sb : sa);
            io.config.assign(inst.in->dir, inst.in->lane_sec, active ? sa : sb);
        }
        for (const Link& l : inst.outs) {
            io.config.assign(l.dir, l.lane_pri, sa);
            io.config.assign(l.dir, l.lane_sec, sb);
        }
        sets_[size_t(i)][t] = {sa, sb};
        if (inst.head) io.beep(active ? sb : sa);
    }
    fill_singletons(i, io);
}

void PascProgram::process_signal_receipts(AmoebotId i, const ActivationIo& io) {
    auto& insts = instances_[size_t(i)];
    auto& st = state_[size_t(i)];
    for (size_t t = 0; t < insts.size(); ++t) {
        const Instance& inst = insts[t];
        bool active = inst.weight1 && !st[t].fired;
        bool got0 = io.got(sets_[size_t(i)][t][0]);
        bool got1 = io.got(sets_[size_t(i)][t][1]);
        if (inst.head) {
            st[t].got = 1;
            st[t].post = active ? 1 : 0;
            st[t].pre = 0;
        } else {
            st[t].got = uint8_t(got0 || got1);
            st[t].post = uint8_t(got1);
            st[t].pre = uint8_t(active ? !got1 : got1);
            if (!st[t].got) st[t].pre = st[t].post = 0;
        }
        if (active && st[t].post && st[t].got) st[t].fired = 1;
    }
}

void PascProgram::activate(AmoebotId i, ActivationIo& io) {
    bool signal_round = (round_ % 2) == 0;
    if (signal_round) {
        if (round_ > 0) {
            control_read(i, io);
            if (!io.got(0)) {
                // One silent control round: the run is over.
                if (!finishing_) finishing_ = true;
                on_finished(i);
                fill_singletons(i, io);
                io.terminate = true;
                if (i == n_ - 1) ++round_;
                return;
            }
        }
        build_signal_config(i, io);
    } else {
        process_signal_receipts(i, io);
        if (i == 0) ++iterations_;
        on_iteration(i);
        control_base(i, io);
        control_setup(i, io);
        fill_singletons(i, io);
        bool still_active = false;
        for (size_t t = 0; t < instances_[size_t(i)].size(); ++t) {
            const Instance& inst = instances_[size_t(i)][t];
            const InstanceState& st = state_[size_t(i)][t];
            if (inst.weight1 && !st.fired && (st.got || inst.head))
                still_active = true;
        }
        if (still_active) io.beep(0);
    }
    if (i == n_ - 1) ++round_;
}

int PascProgram::state_bits(AmoebotId i) const {
    // Two flag bits and two buffered stream bits per instance, plus the
    // phase/iteration-parity bookkeeping.
    return int(instances_[size_t(i)].size()) * 4 + 4 + extra_state_bits(i);
}

namespace {

class CollectingPasc : public PascProgram {
  public:
    using PascProgram::PascProgram;
    std::vector<std::vector<uint8_t>> bits;

  protected:
    void on_iteration(AmoebotId i) override {
        if (bits.empty()) bits.resize(size_t(s_.size()));
        auto st = inst_state(i);
        bits[size_t(i)].push_back(st.empty() ? 0 : st[0].post);
    }
    int extra_state_bits(AmoebotId) const override { return 0; }
};

PascOutput run_collecting(const AmoebotStructure& s, int pins,
                          std::vector<std::vector<PascProgram::Instance>> inst,
                          const std::string& name, RoundStats* stats) {
    CircuitEngine engine(s, pins);
    CollectingPasc prog(s, name, std::move(inst));
    RoundStats local;
    RoundStats& st = stats ? *stats : local;
    auto outcome = engine.run_until(prog, 16 + 8 * int64_t(s.size()), st, name);
    if (!outcome.terminated)
        throw std::runtime_error(name + ": round limit exceeded");
    PascOutput out;
    out.bits = std::move(prog.bits);
    if (out.bits.empty()) out.bits.resize(size_t(s.size()));
    out.iterations = prog.iterations();
    out.rounds = outcome.rounds;
    return out;
}

}  // namespace

std::vector<std::vector<PascProgram::Instance>> chain_instances(
    const AmoebotStructure& s, const std::vector<AmoebotId>& chain,
    const std::vector<uint8_t>& weights, int lane_base) {
    std::vector<std::vector<PascProgram::Instance>> inst(size_t(s.size()));
    for (size_t k = 0; k < chain.size(); ++k) {
        PascProgram::Instance node;
        node.head = k == 0;
        node.weight1 = weights[k] != 0;
        if (k > 0) {
            NodeCoord from = s.coord(chain[k - 1]);
            NodeCoord to = s.coord(chain[k]);
            bool adjacent = false;
            for (Direction d : kAllDirs) {
                if (step(from, d) == to) {
                    node.in = PascProgram::travel_link(d, lane_base);
                    node.in->dir = opposite(d);  // this side's pins
                    adjacent = true;
                }
            }
            if (!adjacent)
                throw std::invalid_argument(
                    "pasc chain: consecutive amoebots not adjacent");
        }
        if (k + 1 < chain.size()) {
            NodeCoord from = s.coord(chain[k]);
            NodeCoord to = s.coord(chain[k + 1]);
            for (Direction d : kAllDirs)
                if (step(from, d) == to)
                    node.outs.push_back(PascProgram::travel_link(d, lane_base));
        }
        inst[size_t(chain[k])].push_back(node);
    }
    return inst;
}

std::vector<std::vector<PascProgram::Instance>> tree_instances(
    const AmoebotStructure& s, const std::vector<int8_t>& parent_dir,
    int lane_base) {
    // Cycle and adjacency validation.
    std::vector<uint8_t> mark(size_t(s.size()), 0);
    for (AmoebotId i = 0; i < s.size(); ++i) {
        AmoebotId u = i;
        std::vector<AmoebotId> path;
        while (mark[size_t(u)] == 0 && parent_dir[size_t(u)] >= 0) {
            mark[size_t(u)] = 1;
            path.push_back(u);
            AmoebotId p = s.neighbor(u, direction_from_index(parent_dir[size_t(u)]));
            if (p == kNoAmoebot)
                throw std::invalid_argument("pasc tree: parent edge unoccupied");
            u = p;
            for (AmoebotId w : path)
                if (w == u)
                    throw std::invalid_argument("pasc tree: parent cycle");
        }
        mark[size_t(u)] = 1;
    }
    std::vector<std::vector<PascProgram::Instance>> inst(size_t(s.size()));
    for (AmoebotId i = 0; i < s.size(); ++i) {
        PascProgram::Instance node;
        node.head = parent_dir[size_t(i)] < 0;
        node.weight1 = !node.head;
        if (!node.head) {
            Direction up = direction_from_index(parent_dir[size_t(i)]);
            node.in = PascProgram::Link{up, uint8_t(lane_base), uint8_t(lane_base + 1)};
        }
        for (Direction d : kAllDirs) {
            AmoebotId c = s.neighbor(i, d);
            if (c == kNoAmoebot) continue;
            if (parent_dir[size_t(c)] == dir_index(opposite(d)))
                node.outs.push_back(
                    {d, uint8_t(lane_base), uint8_t(lane_base + 1)});
        }
        inst[size_t(i)].push_back(node);
    }
    return inst;
}

PascOutput run_pasc_chain(const AmoebotStructure& s, int pins,
                          const std::vector<AmoebotId>& chain,
                          RoundStats* stats) {
    if (chain.empty()) throw std::invalid_argument("pasc chain: empty");
    std::vector<uint8_t> weights(chain.size(), 1);
    weights[0] = 0;  // the first amoebot has distance 0
    return run_collecting(s, pins, chain_instances(s, chain, weights),
                          "pasc.chain", stats);
}

PascOutput run_pasc_tree(const AmoebotStructure& s, int pins,
                         const std::vector<int8_t>& parent_dir,
                         RoundStats* stats) {
    return run_collecting(s, pins, tree_instances(s, parent_dir), "pasc.tree",
                          stats);
}

PascOutput run_pasc_prefix_sum(const AmoebotStructure& s, int pins,
                               const std::vector<AmoebotId>& chain,
                               const std::vector<uint8_t>& weights,
                               RoundStats* stats) {
    if (chain.size() != weights.size())
        throw std::invalid_argument("pasc prefix sum: weight count");
    return run_collecting(s, pins, chain_instances(s, chain, weights),
                          "pasc.prefix_sum", stats);
}

}  // namespace amoebot
