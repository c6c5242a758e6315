#include <gtest/gtest.h>

#include <set>

#include "amoebot/oracle.hpp"
#include "amoebot/rng.hpp"
#include "amoebot/spf.hpp"

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

// Multi-source BFS forest on a subgraph: parents toward a closest source.
ForestSlice bfs_forest(const AmoebotStructure& s, const Subview& scope,
                       const std::vector<uint8_t>& sources) {
    ForestSlice f(s.size());
    std::vector<int> dist(size_t(s.size()), -1);
    std::vector<AmoebotId> queue;
    for (AmoebotId i = 0; i < s.size(); ++i)
        if (sources[size_t(i)] && scope.is_active(i)) {
            dist[size_t(i)] = 0;
            queue.push_back(i);
            f.member[size_t(i)] = 1;
        }
    for (size_t h = 0; h < queue.size(); ++h) {
        AmoebotId u = queue[h];
        for (Direction d : kAllDirs) {
            if (!scope.has_edge(u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (dist[size_t(v)] >= 0) continue;
            dist[size_t(v)] = dist[size_t(u)] + 1;
            f.member[size_t(v)] = 1;
            f.parent[size_t(v)] = int8_t(dir_index(opposite(d)));
            queue.push_back(v);
        }
    }
    return f;
}

std::vector<int> scope_bfs(const AmoebotStructure& s, const Subview& scope,
                           const std::vector<uint8_t>& sources) {
    std::vector<int> dist(size_t(s.size()), -1);
    std::vector<AmoebotId> queue;
    for (AmoebotId i = 0; i < s.size(); ++i)
        if (sources[size_t(i)] && scope.is_active(i)) {
            dist[size_t(i)] = 0;
            queue.push_back(i);
        }
    for (size_t h = 0; h < queue.size(); ++h) {
        AmoebotId u = queue[h];
        for (Direction d : kAllDirs) {
            if (!scope.has_edge(u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (dist[size_t(v)] < 0) {
                dist[size_t(v)] = dist[size_t(u)] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

// Depth of each forest member by following parents; -1 outside, -2 broken.
std::vector<int> forest_depths(const AmoebotStructure& s, const ForestSlice& f) {
    std::vector<int> depth(size_t(s.size()), -1);
    std::function<int(AmoebotId, int)> walk = [&](AmoebotId u, int guard) -> int {
        if (guard > s.size()) return -2;
        if (!f.member[size_t(u)]) return -2;
        if (depth[size_t(u)] >= 0) return depth[size_t(u)];
        if (f.parent[size_t(u)] < 0) return depth[size_t(u)] = 0;
        AmoebotId p = s.neighbor(u, direction_from_index(f.parent[size_t(u)]));
        if (p == kNoAmoebot) return -2;
        int dp = walk(p, guard + 1);
        if (dp < 0) return -2;
        return depth[size_t(u)] = dp + 1;
    };
    for (AmoebotId i = 0; i < s.size(); ++i)
        if (f.member[size_t(i)]) walk(i, 0);
    return depth;
}

}  // namespace

TEST(SpfOps, LineSingleSourceAtEnd) {
    auto s = line_x(9);
    std::vector<LineTask> tasks(1);
    tasks[0].in_segment.assign(9, 1);
    tasks[0].sources.assign(9, 0);
    tasks[0].sources[0] = 1;
    CircuitEngine engine(s, kSpfPins);
    RoundStats stats;
    line_forests(engine, tasks, stats, "line");
    for (AmoebotId i = 0; i < 9; ++i) {
        EXPECT_TRUE(tasks[0].forest.member[size_t(i)]);
        if (i == 0) EXPECT_EQ(tasks[0].forest.parent[size_t(i)], -1);
        else
            EXPECT_EQ(tasks[0].forest.parent[size_t(i)],
                      int8_t(dir_index(Direction::W)));
    }
}

TEST(SpfOps, LineTieBreaksWest) {
    auto s = line_x(7);
    std::vector<LineTask> tasks(1);
    tasks[0].in_segment.assign(7, 1);
    tasks[0].sources.assign(7, 0);
    tasks[0].sources[0] = tasks[0].sources[6] = 1;
    CircuitEngine engine(s, kSpfPins);
    RoundStats stats;
    line_forests(engine, tasks, stats, "line");
    // The middle amoebot (3) ties and points west.
    EXPECT_EQ(tasks[0].forest.parent[3], int8_t(dir_index(Direction::W)));
    EXPECT_EQ(tasks[0].forest.parent[2], int8_t(dir_index(Direction::W)));
    EXPECT_EQ(tasks[0].forest.parent[4], int8_t(dir_index(Direction::E)));
}

TEST(SpfOps, LineRandomNearestSource) {
    Rng rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        int m = 20 + int(rng.below(80));
        auto s = line_x(m);
        std::vector<LineTask> tasks(1);
        tasks[0].in_segment.assign(size_t(m), 1);
        tasks[0].sources.assign(size_t(m), 0);
        int k = 1 + int(rng.below(5));
        for (int j = 0; j < k; ++j)
            tasks[0].sources[size_t(rng.below(uint64_t(m)))] = 1;
        CircuitEngine engine(s, kSpfPins);
        RoundStats stats;
        line_forests(engine, tasks, stats, "line");
        auto depth = forest_depths(s, tasks[0].forest);
        Subview whole = Subview::whole(s);
        auto want = scope_bfs(s, whole, tasks[0].sources);
        for (AmoebotId i = 0; i < m; ++i)
            ASSERT_EQ(depth[size_t(i)], want[size_t(i)]) << "trial " << trial;
    }
}

TEST(SpfOps, MergeIdempotent) {
    auto s = generate_random_structure(3, 80);
    Subview whole = Subview::whole(s);
    std::vector<uint8_t> src(size_t(s.size()), 0);
    src[5] = src[20] = 1;
    auto f = bfs_forest(s, whole, src);
    std::vector<MergeTask> tasks(1);
    tasks[0].scope = whole;
    tasks[0].f1 = f;
    tasks[0].f2 = f;
    CircuitEngine engine(s, kSpfPins);
    RoundStats stats;
    merge_forest_pairs(engine, tasks, stats, "merge");
    EXPECT_EQ(tasks[0].out.parent, f.parent);
    EXPECT_EQ(tasks[0].out.member, f.member);
}

TEST(SpfOps, MergeDistancesAreMin) {
    Rng rng(77);
    for (uint64_t seed = 1; seed <= 8; ++seed) {
        auto s = generate_random_structure(seed, 120);
        Subview whole = Subview::whole(s);
        std::vector<uint8_t> s1(size_t(s.size()), 0), s2(size_t(s.size()), 0);
        for (int j = 0; j < 3; ++j) {
            s1[size_t(rng.below(uint64_t(s.size())))] = 1;
            s2[size_t(rng.below(uint64_t(s.size())))] = 1;
        }
        std::vector<MergeTask> tasks(1);
        tasks[0].scope = whole;
        tasks[0].f1 = bfs_forest(s, whole, s1);
        tasks[0].f2 = bfs_forest(s, whole, s2);
        CircuitEngine engine(s, kSpfPins);
        RoundStats stats;
        merge_forest_pairs(engine, tasks, stats, "merge");
        auto depth = forest_depths(s, tasks[0].out);
        std::vector<uint8_t> both(size_t(s.size()), 0);
        for (AmoebotId i = 0; i < s.size(); ++i) both[size_t(i)] = s1[size_t(i)] | s2[size_t(i)];
        auto want = scope_bfs(s, whole, both);
        for (AmoebotId i = 0; i < s.size(); ++i)
            ASSERT_EQ(depth[size_t(i)], want[size_t(i)])
                << "seed " << seed << " amoebot " << i;
    }
}

TEST(SpfOps, PropagateRectangleFromTopPortal) {
    // 6x5 parallelogram, sources on the top row: everybody below points up.
    std::vector<NodeCoord> nodes;
    for (int b = 0; b < 5; ++b)
        for (int a = 0; a < 6; ++a) nodes.push_back({a, b});
    AmoebotStructure s(std::move(nodes));
    s.set_source(0, true);
    s.set_dest(0, true);
    s.set_leader(0);
    std::vector<PropagateTask> tasks(1);
    auto& task = tasks[0];
    task.scope = Subview::whole(s);
    task.in_p.assign(size_t(s.size()), 0);
    task.in_b.assign(size_t(s.size()), 0);
    task.b_is_south = true;
    task.forest = ForestSlice(s.size());
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (s.coord(i).b == 4) {
            task.in_p[size_t(i)] = 1;
            task.forest.member[size_t(i)] = 1;  // every top amoebot a source
        } else {
            task.in_b[size_t(i)] = 1;
        }
    }
    CircuitEngine engine(s, kSpfPins);
    RoundStats stats;
    propagate_forests(engine, tasks, stats, "prop");
    auto depth = forest_depths(s, task.forest);
    for (AmoebotId i = 0; i < s.size(); ++i)
        EXPECT_EQ(depth[size_t(i)], 4 - s.coord(i).b) << i;
}

TEST(SpfOps, PropagateDistanceExactOnRandomStructures) {
    for (uint64_t seed = 1; seed <= 14; ++seed) {
        auto s = generate_random_structure(seed, 60 + int(seed) * 20);
        Rng rng(seed * 13);
        // Pick an x-portal, propagate from its north side into the south.
        auto pid = portal_ids(s, Axis::X);
        int np = *std::max_element(pid.begin(), pid.end()) + 1;
        int target = int(rng.below(uint64_t(np)));
        // Sides: BFS from the portal through non-portal amoebots.
        std::vector<int> side(size_t(s.size()), -1);  // 0 = P
        for (AmoebotId i = 0; i < s.size(); ++i)
            if (pid[size_t(i)] == target) side[size_t(i)] = 0;
        // North components touch portal members from above.
        std::function<void(AmoebotId, int)> flood = [&](AmoebotId u, int tag) {
            side[size_t(u)] = tag;
            for (Direction d : kAllDirs) {
                AmoebotId v = s.neighbor(u, d);
                if (v != kNoAmoebot && side[size_t(v)] == -1) flood(v, tag);
            }
        };
        for (AmoebotId i = 0; i < s.size(); ++i) {
            if (side[size_t(i)] != 0) continue;
            for (Direction d : {Direction::NE, Direction::NW}) {
                AmoebotId v = s.neighbor(i, d);
                if (v != kNoAmoebot && side[size_t(v)] == -1) flood(v, 1);
            }
        }
        for (AmoebotId i = 0; i < s.size(); ++i)
            if (side[size_t(i)] == -1) flood(i, 2);

        std::vector<PropagateTask> tasks(1);
        auto& task = tasks[0];
        task.scope = Subview::whole(s);
        task.in_p.assign(size_t(s.size()), 0);
        task.in_b.assign(size_t(s.size()), 0);
        task.b_is_south = true;
        std::vector<uint8_t> ap(size_t(s.size()), 0);  // A u P
        for (AmoebotId i = 0; i < s.size(); ++i) {
            if (side[size_t(i)] == 0) task.in_p[size_t(i)] = 1;
            if (side[size_t(i)] == 2) task.in_b[size_t(i)] = 1;
            if (side[size_t(i)] != 2) ap[size_t(i)] = 1;
        }
        // Random sources on A u P, forest via BFS restricted to A u P.
        Subview ap_view = Subview::whole(s);
        for (AmoebotId i = 0; i < s.size(); ++i) {
            if (!ap[size_t(i)]) {
                ap_view.active[size_t(i)] = 0;
                ap_view.edge_mask[size_t(i)] = 0;
            }
        }
        for (AmoebotId i = 0; i < s.size(); ++i)
            for (Direction d : kAllDirs) {
                AmoebotId v = s.neighbor(i, d);
                if (v != kNoAmoebot && !ap[size_t(v)])
                    ap_view.edge_mask[size_t(i)] &= uint8_t(~(1u << dir_index(d)));
            }
        std::vector<uint8_t> sources(size_t(s.size()), 0);
        int k = 1 + int(rng.below(4));
        std::vector<AmoebotId> ap_ids;
        for (AmoebotId i = 0; i < s.size(); ++i)
            if (ap[size_t(i)]) ap_ids.push_back(i);
        for (int j = 0; j < k; ++j)
            sources[size_t(ap_ids[size_t(rng.below(uint64_t(ap_ids.size())))])] = 1;
        task.forest = bfs_forest(s, ap_view, sources);

        CircuitEngine engine(s, kSpfPins);
        RoundStats stats;
        propagate_forests(engine, tasks, stats, "prop");
        auto depth = forest_depths(s, task.forest);
        auto want = scope_bfs(s, task.scope, sources);
        for (AmoebotId i = 0; i < s.size(); ++i)
            ASSERT_EQ(depth[size_t(i)], want[size_t(i)])
                << "seed " << seed << " amoebot " << i << " at ("
                << s.coord(i).a << "," << s.coord(i).b << ")";
    }
}

TEST(SpfOps, PropagateEmptySourceIsNoOp) {
    std::vector<NodeCoord> nodes;
    for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 4; ++a) nodes.push_back({a, b});
    AmoebotStructure s(std::move(nodes));
    s.set_source(0, true);
    s.set_dest(0, true);
    s.set_leader(0);
    std::vector<PropagateTask> tasks(1);
    auto& task = tasks[0];
    task.scope = Subview::whole(s);
    task.in_p.assign(size_t(s.size()), 0);
    task.in_b.assign(size_t(s.size()), 0);
    task.b_is_south = true;
    task.forest = ForestSlice(s.size());
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (s.coord(i).b == 2) task.in_p[size_t(i)] = 1;
        else task.in_b[size_t(i)] = 1;
    }
    CircuitEngine engine(s, kSpfPins);
    RoundStats stats;
    propagate_forests(engine, tasks, stats, "prop");
    for (AmoebotId i = 0; i < s.size(); ++i)
        EXPECT_FALSE(task.forest.member[size_t(i)]);
}

TEST(SpfOps, QprimeSingleSource) {
    RandomStructureOptions opt;
    opt.num_sources = 1;
    auto s = generate_random_structure(4, 100, opt);
    CircuitEngine engine(s, kSpfPins);
    RoundStats stats;
    auto qp = compute_qprime(engine, s, stats, "qp");
    auto pid = portal_ids(s, Axis::X);
    int src_pid = pid[size_t(s.sources()[0])];
    for (AmoebotId i = 0; i < s.size(); ++i) {
        EXPECT_EQ(qp.in_q[size_t(i)] != 0, pid[size_t(i)] == src_pid);
        EXPECT_FALSE(qp.in_aq[size_t(i)]);
    }
}

TEST(SpfOps, QprimeMatchesPortalOracle) {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        RandomStructureOptions opt;
        opt.num_sources = 1 + int(seed % 6);
        auto s = generate_random_structure(seed, 150, opt);
        CircuitEngine engine(s, kSpfPins);
        RoundStats stats;
        auto qp = compute_qprime(engine, s, stats, "qp");
        // Oracle: Q portals; A_Q = degree>=3 portals of the pruned tree
        // rooted at the leader's portal.
        auto tree = oracle::explicit_portal_tree(s, Axis::X);
        int np = int(tree.portals.size());
        auto adj = std::vector<std::vector<int>>(size_t(np));
        for (auto [a, b] : tree.edges) {
            adj[size_t(a)].push_back(b);
            adj[size_t(b)].push_back(a);
        }
        std::vector<uint8_t> q(size_t(np), 0);
        for (AmoebotId i : s.sources()) q[size_t(tree.portal_of[size_t(i)])] = 1;
        int root = tree.portal_of[size_t(s.leader())];
        // Prune: keep portals on paths root->Q.
        std::vector<int> parent(size_t(np), -1);
        std::vector<int> order{root};
        std::vector<uint8_t> seen(size_t(np), 0);
        seen[size_t(root)] = 1;
        for (size_t h = 0; h < order.size(); ++h)
            for (int c : adj[size_t(order[h])])
                if (!seen[size_t(c)]) {
                    seen[size_t(c)] = 1;
                    parent[size_t(c)] = order[h];
                    order.push_back(c);
                }
        std::vector<uint8_t> in_vq(size_t(np), 0);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            bool meets = q[size_t(*it)] != 0;
            for (int ch : adj[size_t(*it)])
                if (parent[size_t(ch)] == *it && in_vq[size_t(ch)]) meets = true;
            in_vq[size_t(*it)] = meets;
        }
        std::vector<uint8_t> aq(size_t(np), 0);
        for (int p = 0; p < np; ++p) {
            if (!in_vq[size_t(p)]) continue;
            int deg = 0;
            for (int cdx : adj[size_t(p)])
                if ((parent[size_t(cdx)] == p && in_vq[size_t(cdx)]) ||
                    parent[size_t(p)] == cdx)
                    ++deg;
            aq[size_t(p)] = deg >= 3;
        }
        for (AmoebotId i = 0; i < s.size(); ++i) {
            int p = tree.portal_of[size_t(i)];
            ASSERT_EQ(qp.in_q[size_t(i)] != 0, q[size_t(p)] != 0) << seed;
            ASSERT_EQ(qp.in_aq[size_t(i)] != 0, aq[size_t(p)] != 0)
                << "seed " << seed << " amoebot " << i;
        }
    }
}

TEST(SpfOps, RegionsCoverAndTouchBoundedPortals) {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        RandomStructureOptions opt;
        opt.num_sources = 1 + int(seed % 8);
        auto s = generate_random_structure(seed, 200, opt);
        CircuitEngine engine(s, kSpfPins);
        RoundStats stats;
        auto qp = compute_qprime(engine, s, stats, "qp");
        auto rs = decompose_regions(engine, s, qp, stats, "regions");
        // Coverage: every amoebot appears in at least one region.
        std::vector<int> count(size_t(s.size()), 0);
        for (const auto& r : rs.regions)
            for (auto [m, slot] : r.members) {
                ++count[size_t(m)];
                EXPECT_EQ(rs.slot_region[size_t(m)][slot] >= 0, true);
            }
        for (AmoebotId i = 0; i < s.size(); ++i)
            EXPECT_GE(count[size_t(i)], 1) << "seed " << seed << " " << i;
        // Each region intersects one or two Q' portals.
        for (const auto& r : rs.regions) {
            std::set<int> qportals;
            for (auto [m, slot] : r.members)
                if (qp.in_qprime[size_t(m)])
                    qportals.insert(rs.portal_of[size_t(m)]);
            EXPECT_GE(qportals.size(), 1u) << "seed " << seed;
            EXPECT_LE(qportals.size(), 2u) << "seed " << seed;
        }
        // Non-split amoebots appear exactly once.
        for (AmoebotId i = 0; i < s.size(); ++i)
            if (!qp.in_qprime[size_t(i)])
                EXPECT_EQ(count[size_t(i)], 1) << "seed " << seed << " " << i;
    }
}
