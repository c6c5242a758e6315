#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "amoebot/engine.hpp"

namespace amoebot {

// ---------------------------------------------------------------------------
// PASC: the primary/secondary-circuit primitive. Participants ("weight 1"
// instances) cross their incoming and outgoing lanes until they observe
// their first 1-bit; everyone else forwards straight through. A head
// instance injects the signal every iteration. Receiving on the crossed
// (secondary) side yields bit 1 of the instance's prefix sum.
//
// One iteration takes two engine rounds: a signal round on the instance
// lanes and a control round on the control lane (global still-active check
// plus whatever circuits a subclass adds). The run terminates one round
// after the last participant deactivates.
// ---------------------------------------------------------------------------

class PascProgram : public AmoebotProgram {
  public:
    struct Link {
        Direction dir;
        uint8_t lane_pri = 0;
        uint8_t lane_sec = 1;
    };
    struct Instance {
        std::optional<Link> in;   // toward the predecessor
        std::vector<Link> outs;   // toward the successors
        bool head = false;        // injects the signal
        bool weight1 = false;     // participates
    };
    struct InstanceState {
        uint8_t fired = 0;  // participant that has seen its 1-bit
        uint8_t got = 0;    // received a signal this iteration
        uint8_t pre = 0;    // prefix bit excluding own weight
        uint8_t post = 0;   // prefix bit including own weight
    };

    PascProgram(const AmoebotStructure& s, std::string name,
                std::vector<std::vector<Instance>> instances,
                int ctrl_lane = 0);

    std::string name() const override { return name_; }
    int min_pins() const override { return min_pins_; }
    void activate(AmoebotId i, ActivationIo& io) override;
    int state_bits(AmoebotId i) const override;

    int iterations() const { return iterations_; }
    bool finished() const { return finishing_; }
    std::span<const InstanceState> inst_state(AmoebotId i) const {
        return state_[size_t(i)];
    }
    const std::vector<Instance>& inst_spec(AmoebotId i) const {
        return instances_[size_t(i)];
    }

    // Declares additional lanes a subclass touches in its control rounds.
    void require_pins(int n) { min_pins_ = std::max(min_pins_, n); }

    // Lanes for a link carried along `travel` (consistent on both sides).
    static Link travel_link(Direction travel, int base = 0) {
        if (dir_index(travel) < 3)
            return {travel, uint8_t(base), uint8_t(base + 1)};
        return {travel, uint8_t(base + 2), uint8_t(base + 3)};
    }

  protected:
    // Called during each control round, after this amoebot's instance bits
    // were updated; set 0 is the still-active circuit, subclasses may add
    // sets 1.. and beep on them.
    virtual void control_setup(AmoebotId, ActivationIo&) {}
    // Called during each signal round (round index >= 2) with the receipts
    // of the previous control round, before the termination decision.
    virtual void control_read(AmoebotId, const ActivationIo&) {}
    // Called once per amoebot per iteration after bits are updated.
    virtual void on_iteration(AmoebotId) {}
    // Called once per amoebot when the run terminates.
    virtual void on_finished(AmoebotId) {}
    // Extra per-amoebot persistent bits a subclass keeps (memory audit).
    virtual int extra_state_bits(AmoebotId) const { return 0; }

    const AmoebotStructure& s_;
    int ctrl_lane_;

    // Places every not-yet-assigned valid pin into its own singleton set.
    void fill_singletons(AmoebotId i, ActivationIo& io) const;
    // Builds the control-round base config: set 0 = control circuit.
    void control_base(AmoebotId i, ActivationIo& io) const;

  private:
    std::string name_;
    std::vector<std::vector<Instance>> instances_;
    std::vector<std::vector<InstanceState>> state_;
    // Receipt meaning of the two sets of each instance in the last signal
    // round: sets_[i][t] = {post0 set, post1 set}.
    std::vector<std::vector<std::array<int8_t, 2>>> sets_;
    int min_pins_ = 1;
    int n_;
    int64_t round_ = 0;
    int iterations_ = 0;
    bool finishing_ = false;

    void build_signal_config(AmoebotId i, ActivationIo& io);
    void process_signal_receipts(AmoebotId i, const ActivationIo& io);
};

// Collected bitwise output of a PASC run: least-significant bit first, one
// bit per iteration for every amoebot.
struct PascOutput {
    std::vector<std::vector<uint8_t>> bits;
    int iterations = 0;
    int64_t rounds = 0;

    // Value of the collected stream (tests and consumers with memory).
    int64_t value(AmoebotId i) const {
        int64_t v = 0;
        for (size_t k = 0; k < bits[size_t(i)].size(); ++k)
            v |= int64_t(bits[size_t(i)][k]) << k;
        return v;
    }
};

// Chains are lists of pairwise adjacent amoebots. Throws on a broken chain.
PascOutput run_pasc_chain(const AmoebotStructure& s, int pins,
                          const std::vector<AmoebotId>& chain,
                          RoundStats* stats = nullptr);

// Rooted tree given as parent direction per amoebot (-1 at roots). Throws
// on cycles or parent edges to unoccupied nodes.
PascOutput run_pasc_tree(const AmoebotStructure& s, int pins,
                         const std::vector<int8_t>& parent_dir,
                         RoundStats* stats = nullptr);

// Prefix sums over a chain with 0/1 weights.
PascOutput run_pasc_prefix_sum(const AmoebotStructure& s, int pins,
                               const std::vector<AmoebotId>& chain,
                               const std::vector<uint8_t>& weights,
                               RoundStats* stats = nullptr);

// Instance-list builders shared with the tree primitives.
std::vector<std::vector<PascProgram::Instance>> chain_instances(
    const AmoebotStructure& s, const std::vector<AmoebotId>& chain,
    const std::vector<uint8_t>& weights, int lane_base = 0);
std::vector<std::vector<PascProgram::Instance>> tree_instances(
    const AmoebotStructure& s, const std::vector<int8_t>& parent_dir,
    int lane_base = 0);

}  // namespace amoebot
