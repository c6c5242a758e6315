#pragma once

// Instrumented micro-programs shared by the engine unit tests and the
// acceptance suite: they drive the engine with randomized or scripted pin
// configurations and check beep delivery against an independent union-find
// recomputation.

#include <cstdint>
#include <string>
#include <vector>

#include "amoebot/engine.hpp"
#include "amoebot/rng.hpp"

namespace amoebot::probe {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(size_t(n)) {
        for (int i = 0; i < n; ++i) parent[size_t(i)] = i;
    }
    int find(int x) {
        while (parent[size_t(x)] != x) {
            parent[size_t(x)] = parent[size_t(parent[size_t(x)])];
            x = parent[size_t(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[size_t(find(a))] = find(b); }
};

// Random pin partitions and random senders every round; remembers the last
// configuration and sends for external verification.
class RandomConfigProgram : public AmoebotProgram {
  public:
    RandomConfigProgram(const AmoebotStructure& s, int pins, uint64_t seed,
                        int rounds)
        : s_(s), pins_(pins), seed_(seed), rounds_(rounds),
          last_config_(size_t(s.size())), last_sends_(size_t(s.size()), 0),
          round_(size_t(s.size()), 0) {}

    std::string name() const override { return "probe.random"; }
    int min_pins() const override { return pins_; }
    int state_bits(AmoebotId) const override { return 16; }

    void activate(AmoebotId i, ActivationIo& io) override {
        int r = round_[size_t(i)]++;
        Rng rng(seed_ ^ (uint64_t(uint32_t(i)) << 20) ^ uint64_t(r));
        int valid = 0;
        for (Direction d : kAllDirs)
            if (s_.neighbor_mask(i) & (1u << dir_index(d))) valid += pins_;
        int want_sets = valid == 0 ? 0 : 1 + int(rng.below(uint64_t(valid)));
        io.config.num_sets = int8_t(want_sets);
        std::vector<bool> used(size_t(want_sets), false);
        for (Direction d : kAllDirs) {
            if (!(s_.neighbor_mask(i) & (1u << dir_index(d)))) continue;
            for (int lane = 0; lane < pins_; ++lane) {
                int8_t set = int8_t(rng.below(uint64_t(want_sets)));
                io.config.assign(d, lane, set);
                used[size_t(set)] = true;
            }
        }
        // Compact away empty sets so the partition is tight.
        std::vector<int8_t> remap(size_t(want_sets), -1);
        int8_t next = 0;
        for (int kdx = 0; kdx < want_sets; ++kdx)
            if (used[size_t(kdx)]) remap[size_t(kdx)] = next++;
        for (Direction d : kAllDirs)
            for (int lane = 0; lane < pins_; ++lane) {
                int8_t set = io.config.set_of(d, lane);
                if (set >= 0) io.config.assign(d, lane, remap[size_t(set)]);
            }
        io.config.num_sets = next;
        for (int set = 0; set < next; ++set)
            if (rng.below(8) == 0) io.beep(set);
        last_config_[size_t(i)] = io.config;
        last_sends_[size_t(i)] = io.sends;
        io.terminate = r + 1 >= rounds_;
    }

    const std::vector<PinConfiguration>& last_config() const { return last_config_; }
    const std::vector<SetBits>& last_sends() const { return last_sends_; }

  private:
    const AmoebotStructure& s_;
    int pins_;
    uint64_t seed_;
    int rounds_;
    std::vector<PinConfiguration> last_config_;
    std::vector<SetBits> last_sends_;
    std::vector<int> round_;
};

// Checks beep soundness and completeness for one executed round: a set
// received iff its circuit (recomputed here independently) had a sender.
inline bool verify_beep_delivery(const AmoebotStructure& s, int pins,
                                 const std::vector<PinConfiguration>& configs,
                                 const std::vector<SetBits>& sends,
                                 const std::vector<SetBits>& receipts,
                                 std::string* error = nullptr) {
    int n = s.size();
    std::vector<int> base(size_t(n) + 1, 0);
    for (AmoebotId i = 0; i < n; ++i)
        base[size_t(i) + 1] = base[size_t(i)] + configs[size_t(i)].num_sets;
    UnionFind uf(base[size_t(n)]);
    for (AmoebotId i = 0; i < n; ++i)
        for (Direction d : {Direction::E, Direction::NE, Direction::NW}) {
            AmoebotId j = s.neighbor(i, d);
            if (j == kNoAmoebot) continue;
            for (int lane = 0; lane < pins; ++lane)
                uf.unite(base[size_t(i)] + configs[size_t(i)].set_of(d, lane),
                         base[size_t(j)] + configs[size_t(j)].set_of(opposite(d), lane));
        }
    std::vector<uint8_t> sender(size_t(base[size_t(n)]), 0);
    for (AmoebotId i = 0; i < n; ++i)
        for (int set = 0; set < configs[size_t(i)].num_sets; ++set)
            if ((sends[size_t(i)] >> set) & 1)
                sender[size_t(uf.find(base[size_t(i)] + set))] = 1;
    for (AmoebotId i = 0; i < n; ++i) {
        for (int set = 0; set < configs[size_t(i)].num_sets; ++set) {
            bool want = sender[size_t(uf.find(base[size_t(i)] + set))] != 0;
            bool got = (receipts[size_t(i)] >> set) & 1;
            if (want != got) {
                if (error)
                    *error = "amoebot " + std::to_string(i) + " set " +
                             std::to_string(set) + (want ? " missed" : " spurious") +
                             " beep";
                return false;
            }
        }
    }
    return true;
}

// Runs the randomized probe for `rounds` rounds, verifying every round.
inline bool run_beep_probe(const AmoebotStructure& s, int pins, uint64_t seed,
                           int rounds, std::string* error = nullptr) {
    CircuitEngine engine(s, pins);
    RandomConfigProgram prog(s, pins, seed, rounds);
    for (int r = 0; r < rounds; ++r) {
        if (!engine.run_round(prog)) {
            if (error) *error = "config fault";
            return false;
        }
        if (!verify_beep_delivery(s, pins, prog.last_config(), prog.last_sends(),
                                  engine.last_receipts(), error))
            return false;
    }
    return true;
}

// Two-phase ordering probe: round 0 sets up a global circuit and amoebot 0
// beeps; round 1 reconfigures to singleton sets. The round-0 beep must be
// delivered at the start of round 1 on the round-0 sets, and nothing may
// arrive on the round-1 sets afterwards.
class PhaseOrderProgram : public AmoebotProgram {
  public:
    explicit PhaseOrderProgram(const AmoebotStructure& s)
        : s_(s), round_(size_t(s.size()), 0), ok_(size_t(s.size()), 1) {}

    std::string name() const override { return "probe.phase_order"; }
    int min_pins() const override { return 1; }
    int state_bits(AmoebotId) const override { return 4; }

    void activate(AmoebotId i, ActivationIo& io) override {
        int r = round_[size_t(i)]++;
        if (r == 0) {
            int8_t g = io.config.new_set();
            for (Direction d : kAllDirs)
                if (s_.neighbor_mask(i) & (1u << dir_index(d)))
                    io.config.assign(d, 0, g);
            if (i == 0) io.beep(g);
        } else {
            if (r == 1) {
                // Delivery uses the configuration in force when the beep was
                // sent: exactly one set existed, and it must have received.
                if (!(io.prev_num_sets == 1 && io.got(0))) ok_[size_t(i)] = 0;
            } else {
                // No senders after round 0.
                if (io.received != 0) ok_[size_t(i)] = 0;
            }
            for (Direction d : kAllDirs)
                if (s_.neighbor_mask(i) & (1u << dir_index(d)))
                    io.config.assign(d, 0, io.config.new_set());
            io.terminate = r >= 2;
        }
    }

    bool all_ok() const {
        for (uint8_t v : ok_)
            if (!v) return false;
        return true;
    }

  private:
    const AmoebotStructure& s_;
    std::vector<int> round_;
    std::vector<uint8_t> ok_;
};

}  // namespace amoebot::probe
