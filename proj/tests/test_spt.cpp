#include <gtest/gtest.h>

#include "amoebot/oracle.hpp"
#include "amoebot/rng.hpp"
#include "amoebot/spt.hpp"

using namespace amoebot;

namespace {

AmoebotStructure line_x(int n) {
    std::vector<NodeCoord> nodes;
    for (int a = 0; a < n; ++a) nodes.push_back({a, 0});
    AmoebotStructure s(std::move(nodes));
    s.set_source(0, true);
    s.set_dest(n - 1, true);
    s.set_leader(0);
    return s;
}

AmoebotStructure random_spt_instance(uint64_t seed, int n, int num_dests) {
    RandomStructureOptions opt;
    opt.num_sources = 1;
    opt.num_dests = num_dests;
    return generate_random_structure(seed, n, opt);
}

void check_valid(const AmoebotStructure& s, const SptResult& res,
                 const std::string& ctx) {
    auto report = oracle::validate_forest(s, s.sources(), s.destinations(),
                                          res.forest);
    ASSERT_TRUE(report.ok()) << ctx << "\n" << report.to_string();
}

}  // namespace

TEST(Spt, LineWestwardChain) {
    auto s = line_x(10);
    auto res = compute_spt(s, kSptConcurrentPins);
    for (AmoebotId i = 0; i < 10; ++i) {
        EXPECT_TRUE(res.forest.member[size_t(i)]);
        if (i == 0) EXPECT_FALSE(res.forest.has_parent(i));
        else EXPECT_EQ(res.forest.parent[size_t(i)], int8_t(dir_index(Direction::W)));
    }
    check_valid(s, res, "line");
}

TEST(Spt, SourceEqualsDestination) {
    std::vector<NodeCoord> nodes;
    for (int a = 0; a < 5; ++a) nodes.push_back({a, 0});
    AmoebotStructure s(std::move(nodes));
    s.set_source(2, true);
    s.set_dest(2, true);
    s.set_leader(2);
    auto res = compute_spt(s, kSptConcurrentPins);
    for (AmoebotId i = 0; i < 5; ++i)
        EXPECT_EQ(res.forest.member[size_t(i)], i == 2 ? 1 : 0);
    check_valid(s, res, "s==d");
}

TEST(Spt, RandomInstancesMatchBfs) {
    for (uint64_t seed = 1; seed <= 12; ++seed) {
        int n = 40 + int(seed) * 30;
        int l = 1 + int(seed % 5);
        auto s = random_spt_instance(seed, n, l);
        auto res = compute_spt(s, kSptConcurrentPins);
        check_valid(s, res, "seed " + std::to_string(seed));
    }
}

TEST(Spt, SequentialPinsAgree) {
    for (uint64_t seed = 21; seed <= 26; ++seed) {
        auto s = random_spt_instance(seed, 120, 4);
        auto a = compute_spt(s, kSptConcurrentPins);
        auto b = compute_spt(s, kSptSequentialPins);
        EXPECT_EQ(a.forest.parent, b.forest.parent) << "seed " << seed;
        EXPECT_EQ(a.forest.member, b.forest.member) << "seed " << seed;
        check_valid(s, b, "sequential");
    }
}

TEST(Spt, AllDestinations) {
    for (uint64_t seed = 31; seed <= 34; ++seed) {
        auto s = generate_random_structure(seed, 150);
        for (AmoebotId i = 0; i < s.size(); ++i) s.set_dest(i, true);
        auto res = compute_spt(s, kSptConcurrentPins);
        for (AmoebotId i = 0; i < s.size(); ++i)
            EXPECT_TRUE(res.forest.member[size_t(i)]) << i;
        check_valid(s, res, "sssp");
    }
}

TEST(Spt, SpspRoundCountIndependentOfSize) {
    // For a single destination the round count must not depend on n.
    std::vector<int64_t> rounds;
    for (int n : {50, 200, 800}) {
        RandomStructureOptions opt;
        opt.num_sources = 1;
        opt.num_dests = 1;
        auto s = generate_random_structure(uint64_t(7000 + n), n, opt);
        auto res = compute_spt(s, kSptConcurrentPins);
        check_valid(s, res, "spsp n=" + std::to_string(n));
        rounds.push_back(res.stats.rounds_total);
    }
    EXPECT_EQ(rounds[0], rounds[1]);
    EXPECT_EQ(rounds[1], rounds[2]);
}

TEST(Spt, DeterministicReplay) {
    auto s = random_spt_instance(99, 200, 8);
    auto a = compute_spt(s, kSptConcurrentPins);
    auto b = compute_spt(s, kSptConcurrentPins);
    EXPECT_EQ(a.forest.parent, b.forest.parent);
    EXPECT_EQ(a.stats.rounds_total, b.stats.rounds_total);
    EXPECT_EQ(a.stats.rounds_per_phase, b.stats.rounds_per_phase);
}

TEST(Spt, MultiSourceRejected) {
    auto s = line_x(5);
    s.set_source(3, true);
    EXPECT_THROW(compute_spt(s, kSptConcurrentPins), std::invalid_argument);
}

TEST(Spt, MemoryAuditConstant) {
    auto s = random_spt_instance(5, 400, 16);
    auto res = compute_spt(s, kSptConcurrentPins);
    EXPECT_LE(res.stats.max_state_bits, 200);
    EXPECT_EQ(res.stats.max_counter_bits, 0);
}
