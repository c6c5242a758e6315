#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amoebot/structure.hpp"

namespace amoebot {

// ---------------------------------------------------------------------------
// Reconfigurable-circuit execution semantics.
//
// Each grid edge between neighbors carries `pins` external links with a
// common labeling: pin (d, lane) of u pairs with pin (opposite(d), lane) of
// the neighbor. Per round, every amoebot partitions its valid pins into
// partition sets, optionally beeps on some of them, and the engine delivers
// a beep to every partition set whose circuit (connected component of the
// system pin graph) contains at least one sender. Receipts become visible
// at the start of the next round.
// ---------------------------------------------------------------------------

inline constexpr int kMaxPins = 12;           // lanes per edge, hard cap
inline constexpr int kMaxPinSlots = 6 * kMaxPins;

inline int pin_slot(Direction d, int lane) { return dir_index(d) * kMaxPins + lane; }

// A partition of the amoebot's valid pins. pin_to_set[pin_slot] names the
// partition set of each pin; kUnassigned everywhere else.
struct PinConfiguration {
    static constexpr int8_t kUnassigned = -1;
    std::array<int8_t, kMaxPinSlots> pin_to_set;
    int8_t num_sets = 0;

    PinConfiguration() { pin_to_set.fill(kUnassigned); }
    void clear() {
        pin_to_set.fill(kUnassigned);
        num_sets = 0;
    }
    int8_t new_set() { return num_sets++; }
    void assign(Direction d, int lane, int8_t set) {
        pin_to_set[size_t(pin_slot(d, lane))] = set;
    }
    int8_t set_of(Direction d, int lane) const {
        return pin_to_set[size_t(pin_slot(d, lane))];
    }
};

// Receipt bits and send flags, indexed by partition set.
using SetBits = uint64_t;
static_assert(kMaxPinSlots <= 64 + 8, "set mask width");

struct ActivationIo {
    // Receipts for the partition sets this amoebot formed in the previous
    // round (empty bits on the first round of a program).
    SetBits received = 0;
    int prev_num_sets = 0;

    // Outputs.
    PinConfiguration config;
    SetBits sends = 0;
    bool terminate = false;

    bool got(int set) const { return (received >> set) & 1; }
    void beep(int set) { sends |= SetBits(1) << set; }
};

// The contract a distributed algorithm implements: one activation per
// amoebot per round, a pure function of the receipts, the persistent
// per-amoebot state and the static local neighborhood.
class AmoebotProgram {
  public:
    virtual ~AmoebotProgram() = default;
    virtual std::string name() const = 0;
    virtual int min_pins() const = 0;
    virtual void activate(AmoebotId i, ActivationIo& io) = 0;
    // Memory audit: serialized size of the amoebot's persistent program
    // state, in bits.
    virtual int state_bits(AmoebotId i) const = 0;
    // Bits held as part of a sanctioned distributed counter, audited
    // separately from the constant-memory bound.
    virtual int counter_bits(AmoebotId) const { return 0; }
};

struct RoundStats {
    int64_t rounds_total = 0;
    std::map<std::string, int64_t> rounds_per_phase;
    int max_state_bits = 0;
    int max_counter_bits = 0;

    void merge_phase(const std::string& label, int64_t rounds) {
        rounds_total += rounds;
        rounds_per_phase[label] += rounds;
    }
};

struct ConfigFault {
    AmoebotId amoebot;
    std::string message;
};

// A circuit: connected component of the system pin configuration graph.
struct Circuit {
    std::vector<std::pair<AmoebotId, int>> members;  // (amoebot, set)
    bool has_sender = false;
};

struct RunOutcome {
    int64_t rounds = 0;
    bool terminated = false;      // unanimous terminate vote
    std::optional<ConfigFault> fault;
};

// Optional per-round trace sink (consumed by the CLI renderer).
struct TraceSink {
    std::function<void(int64_t round, const std::vector<Circuit>& circuits,
                       const std::vector<SetBits>& sends,
                       const std::vector<SetBits>& receipts)>
        on_round;
};

class CircuitEngine {
  public:
    CircuitEngine(const AmoebotStructure& s, int pins);

    const AmoebotStructure& structure() const { return s_; }
    int pins() const { return pins_; }

    // Runs one round of `program`: activates every amoebot in sorted
    // coordinate order, rebuilds circuits from the new configurations and
    // delivers beeps. Returns false on a configuration fault. Valid lanes
    // beyond the program's managed range are auto-assigned to an inert set
    // so the system pin configuration stays an exact partition.
    bool run_round(AmoebotProgram& program);

    // Runs rounds until all amoebots vote to terminate in the same round
    // or the limit is reached. Rounds are added to `stats` under `label`.
    RunOutcome run_until(AmoebotProgram& program, int64_t round_limit,
                         RoundStats& stats, const std::string& label);

    // Clears pending receipts; called between host-scheduled phases.
    void reset_receipts();

    const std::vector<Circuit>& last_circuits() const { return circuits_; }
    const std::vector<SetBits>& last_receipts() const { return receipts_; }
    std::optional<ConfigFault> last_fault() const { return fault_; }
    int64_t rounds_run() const { return rounds_run_; }

    void set_trace(TraceSink sink) { trace_ = std::move(sink); }

    // Memory audit hook: samples program state sizes after each round.
    void audit(const AmoebotProgram& program, RoundStats& stats) const;

  private:
    const AmoebotStructure& s_;
    int pins_;
    std::vector<PinConfiguration> configs_;
    std::vector<SetBits> sends_;
    std::vector<SetBits> receipts_;
    std::vector<int> prev_num_sets_;
    std::vector<Circuit> circuits_;
    std::optional<ConfigFault> fault_;
    int64_t rounds_run_ = 0;
    bool last_all_terminate_ = false;
    TraceSink trace_;

    // Scratch union-find over (amoebot, set) nodes.
    std::vector<int32_t> uf_parent_;
    std::vector<int32_t> node_base_;
    std::vector<uint8_t> root_sender_;
    int32_t uf_find(int32_t x);
};

// Global-circuit completion check: amoebots with unfinished work beep; one
// full round of silence signals completion to everyone.
class BarrierProgram : public AmoebotProgram {
  public:
    BarrierProgram(const AmoebotStructure& s, std::vector<uint8_t> unfinished)
        : s_(s), unfinished_(std::move(unfinished)),
          done_(size_t(s.size()), 0), started_(size_t(s.size()), 0) {}

    std::string name() const override { return "barrier"; }
    int min_pins() const override { return 1; }
    void activate(AmoebotId i, ActivationIo& io) override;
    int state_bits(AmoebotId) const override { return 2; }

    bool done(AmoebotId i) const { return done_[size_t(i)] != 0; }

  private:
    const AmoebotStructure& s_;
    std::vector<uint8_t> unfinished_;
    std::vector<uint8_t> done_;
    std::vector<uint8_t> started_;
};

// Convenience: a program wrapper that composes independent sub-programs on
// disjoint lane ranges. Each sub-program sees its own lane window; the
// composite terminates when every sub-program has voted to terminate.
class ParallelPrograms : public AmoebotProgram {
  public:
    struct Entry {
        AmoebotProgram* program;
        int lane_offset;
    };
    ParallelPrograms(std::string name, std::vector<Entry> entries,
                     const AmoebotStructure& s);

    std::string name() const override { return name_; }
    int min_pins() const override;
    void activate(AmoebotId i, ActivationIo& io) override;
    int state_bits(AmoebotId i) const override;
    int counter_bits(AmoebotId i) const override;

  private:
    std::string name_;
    std::vector<Entry> entries_;
    const AmoebotStructure& s_;
    int n_;
    // Per amoebot, per entry: [set base, set count] of the previous round.
    std::vector<std::vector<std::array<int8_t, 2>>> set_windows_;
    std::vector<uint8_t> done_;      // entry finished in an earlier round
    std::vector<int> vote_count_;    // terminate votes in the current round
};

}  // namespace amoebot
