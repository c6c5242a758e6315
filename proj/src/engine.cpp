#include "amoebot/engine.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace amoebot {

CircuitEngine::CircuitEngine(const AmoebotStructure& s, int pins)
    : s_(s), pins_(pins) {
    if (pins_ < 1 || pins_ > kMaxPins)
        throw std::invalid_argument("pins out of range");
    configs_.resize(size_t(s_.size()));
    sends_.assign(size_t(s_.size()), 0);
    receipts_.assign(size_t(s_.size()), 0);
    prev_num_sets_.assign(size_t(s_.size()), 0);
    node_base_.assign(size_t(s_.size()) + 1, 0);
}

int32_t CircuitEngine::uf_find(int32_t x) {
    while (uf_parent_[size_t(x)] != x) {
        uf_parent_[size_t(x)] = uf_parent_[size_t(uf_parent_[size_t(x)])];
        x = uf_parent_[size_t(x)];
    }
    return x;
}

bool CircuitEngine::run_round(AmoebotProgram& program) {
    const int n = s_.size();
    const int managed = std::min(program.min_pins(), pins_);
    bool all_terminate = true;
    for (AmoebotId i = 0; i < n; ++i) {
        ActivationIo io;
        io.received = receipts_[size_t(i)];
        io.prev_num_sets = prev_num_sets_[size_t(i)];
        program.activate(i, io);

        // Auto-fill untouched lanes beyond the program's managed range.
        if (managed < pins_ && s_.neighbor_mask(i)) {
            int8_t pad = PinConfiguration::kUnassigned;
            for (Direction d : kAllDirs)
                if (s_.neighbor_mask(i) & (1u << dir_index(d)))
                    for (int lane = managed; lane < pins_; ++lane)
                        if (io.config.set_of(d, lane) < 0) {
                            if (pad < 0) pad = io.config.new_set();
                            io.config.assign(d, lane, pad);
                        }
        }

        // Partition validation: exactly the valid pins are assigned.
        const uint8_t mask = s_.neighbor_mask(i);
        for (Direction d : kAllDirs) {
            bool occ = mask & (1u << dir_index(d));
            for (int lane = 0; lane < kMaxPins; ++lane) {
                int8_t set = io.config.set_of(d, lane);
                bool valid = occ && lane < pins_;
                if (valid && (set < 0 || set >= io.config.num_sets)) {
                    std::ostringstream os;
                    os << "pin (" << direction_name(d) << "," << lane
                       << ") not in any partition set";
                    fault_ = ConfigFault{i, os.str()};
                    return false;
                }
                if (!valid && set != PinConfiguration::kUnassigned) {
                    std::ostringstream os;
                    os << "invalid pin (" << direction_name(d) << "," << lane
                       << ") assigned";
                    fault_ = ConfigFault{i, os.str()};
                    return false;
                }
            }
        }
        configs_[size_t(i)] = io.config;
        SetBits live = (io.config.num_sets >= 64)
                           ? ~SetBits(0)
                           : ((SetBits(1) << io.config.num_sets) - 1);
        sends_[size_t(i)] = io.sends & live;
        prev_num_sets_[size_t(i)] = io.config.num_sets;
        all_terminate &= io.terminate;
    }

    // Circuits: connected components of partition sets under external links.
    node_base_[0] = 0;
    for (AmoebotId i = 0; i < n; ++i)
        node_base_[size_t(i) + 1] =
            node_base_[size_t(i)] + configs_[size_t(i)].num_sets;
    int32_t total = node_base_[size_t(n)];
    uf_parent_.resize(size_t(total));
    std::iota(uf_parent_.begin(), uf_parent_.end(), 0);
    for (AmoebotId i = 0; i < n; ++i) {
        for (Direction d : {Direction::E, Direction::NE, Direction::NW}) {
            AmoebotId j = s_.neighbor(i, d);
            if (j == kNoAmoebot) continue;
            Direction back = opposite(d);
            for (int lane = 0; lane < pins_; ++lane) {
                int32_t a = node_base_[size_t(i)] + configs_[size_t(i)].set_of(d, lane);
                int32_t b = node_base_[size_t(j)] + configs_[size_t(j)].set_of(back, lane);
                int32_t ra = uf_find(a), rb = uf_find(b);
                if (ra != rb) uf_parent_[size_t(ra)] = rb;
            }
        }
    }

    // Deliver: a set receives iff its circuit contains at least one sender.
    root_sender_.assign(size_t(total), 0);
    for (AmoebotId i = 0; i < n; ++i) {
        SetBits snd = sends_[size_t(i)];
        while (snd) {
            int set = std::countr_zero(snd);
            snd &= snd - 1;
            root_sender_[size_t(uf_find(node_base_[size_t(i)] + set))] = 1;
        }
    }
    for (AmoebotId i = 0; i < n; ++i) {
        SetBits got = 0;
        for (int set = 0; set < configs_[size_t(i)].num_sets; ++set)
            if (root_sender_[size_t(uf_find(node_base_[size_t(i)] + set))])
                got |= SetBits(1) << set;
        receipts_[size_t(i)] = got;
    }

    if (trace_.on_round) {
        std::vector<Circuit> circuits;
        std::map<int32_t, int> index;
        for (AmoebotId i = 0; i < n; ++i) {
            for (int set = 0; set < configs_[size_t(i)].num_sets; ++set) {
                int32_t r = uf_find(node_base_[size_t(i)] + set);
                auto [it, fresh] = index.try_emplace(r, int(circuits.size()));
                if (fresh) circuits.emplace_back();
                Circuit& c = circuits[size_t(it->second)];
                c.members.push_back({i, set});
                c.has_sender |= root_sender_[size_t(r)] != 0;
            }
        }
        circuits_ = circuits;
        trace_.on_round(rounds_run_, circuits_, sends_, receipts_);
    }

    ++rounds_run_;
    last_all_terminate_ = all_terminate;
    return true;
}

RunOutcome CircuitEngine::run_until(AmoebotProgram& program, int64_t round_limit,
                                    RoundStats& stats, const std::string& label) {
    RunOutcome outcome;
    if (pins_ < program.min_pins())
        throw std::invalid_argument("program '" + program.name() +
                                    "' requires " +
                                    std::to_string(program.min_pins()) +
                                    " pins per edge, engine has " +
                                    std::to_string(pins_));
    for (int64_t r = 0; r < round_limit; ++r) {
        if (!run_round(program)) {
            outcome.fault = fault_;
            break;
        }
        ++outcome.rounds;
        audit(program, stats);
        if (last_all_terminate_) {
            outcome.terminated = true;
            break;
        }
    }
    stats.merge_phase(label, outcome.rounds);
    return outcome;
}

void CircuitEngine::reset_receipts() {
    std::fill(receipts_.begin(), receipts_.end(), 0);
    std::fill(prev_num_sets_.begin(), prev_num_sets_.end(), 0);
}

void CircuitEngine::audit(const AmoebotProgram& program, RoundStats& stats) const {
    for (AmoebotId i = 0; i < s_.size(); ++i) {
        stats.max_state_bits = std::max(stats.max_state_bits, program.state_bits(i));
        stats.max_counter_bits =
            std::max(stats.max_counter_bits, program.counter_bits(i));
    }
}

void BarrierProgram::activate(AmoebotId i, ActivationIo& io) {
    if (started_[size_t(i)] && !io.got(0) && io.prev_num_sets > 0)
        done_[size_t(i)] = 1;
    int8_t global = io.config.new_set();
    for (Direction d : kAllDirs)
        if (s_.neighbor_mask(i) & (1u << dir_index(d)))
            io.config.assign(d, 0, global);
    if (unfinished_[size_t(i)] && !done_[size_t(i)]) io.beep(global);
    started_[size_t(i)] = 1;
    io.terminate = done_[size_t(i)] != 0;
}

ParallelPrograms::ParallelPrograms(std::string name, std::vector<Entry> entries,
                                   const AmoebotStructure& s)
    : name_(std::move(name)), entries_(std::move(entries)), s_(s), n_(s.size()) {
    set_windows_.assign(size_t(n_), std::vector<std::array<int8_t, 2>>(
                                        entries_.size(), {0, 0}));
    done_.assign(entries_.size(), 0);
    vote_count_.assign(entries_.size(), 0);
}

int ParallelPrograms::min_pins() const {
    int total = 0;
    for (const auto& e : entries_)
        total = std::max(total, e.lane_offset + e.program->min_pins());
    return total;
}

void ParallelPrograms::activate(AmoebotId i, ActivationIo& io) {
    if (i == 0) {
        // Commit unanimous votes from the previous round before the new one.
        for (size_t k = 0; k < entries_.size(); ++k) {
            if (!done_[k] && vote_count_[k] == n_) done_[k] = 1;
            vote_count_[k] = 0;
        }
    }
    bool all_done = true;
    for (size_t k = 0; k < entries_.size(); ++k) {
        auto& e = entries_[k];
        auto& window = set_windows_[size_t(i)][k];
        int sub_pins = e.program->min_pins();
        if (done_[k]) {
            // Inert set holding this entry's finished lane window.
            int8_t set = io.config.new_set();
            for (Direction d : kAllDirs)
                if (s_.neighbor_mask(i) & (1u << dir_index(d)))
                    for (int lane = 0; lane < sub_pins; ++lane)
                        io.config.assign(d, lane + e.lane_offset, set);
            window = {set, 1};
            continue;
        }
        ActivationIo sub;
        sub.prev_num_sets = window[1];
        sub.received =
            (io.received >> window[0]) &
            ((window[1] >= 64) ? ~SetBits(0) : ((SetBits(1) << window[1]) - 1));
        e.program->activate(i, sub);
        int8_t base = io.config.num_sets;
        io.config.num_sets = int8_t(io.config.num_sets + sub.config.num_sets);
        for (Direction d : kAllDirs) {
            for (int lane = 0; lane < sub_pins; ++lane) {
                int8_t set = sub.config.set_of(d, lane);
                if (set >= 0)
                    io.config.assign(d, lane + e.lane_offset, int8_t(base + set));
            }
        }
        io.sends |= sub.sends << base;
        window = {base, sub.config.num_sets};
        if (sub.terminate) ++vote_count_[k];
        all_done &= sub.terminate;
    }
    io.terminate = all_done;
}

int ParallelPrograms::state_bits(AmoebotId i) const {
    int total = 0;
    for (const auto& e : entries_) total += e.program->state_bits(i);
    return total;
}

int ParallelPrograms::counter_bits(AmoebotId i) const {
    int total = 0;
    for (const auto& e : entries_) total += e.program->counter_bits(i);
    return total;
}

}  // namespace amoebot
