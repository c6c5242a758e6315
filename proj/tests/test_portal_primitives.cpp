#include <gtest/gtest.h>

#include <map>
#include <set>

#include "amoebot/oracle.hpp"
#include "amoebot/rng.hpp"
#include "amoebot/tree_primitives.hpp"

using namespace amoebot;

namespace {

// Centralized portal-level references built on the explicit portal tree.
struct PortalOracle {
    oracle::ExplicitPortalTree tree;
    std::vector<std::vector<int>> adj;  // portal -> neighbor portals

    explicit PortalOracle(const AmoebotStructure& s, Axis axis)
        : tree(oracle::explicit_portal_tree(s, axis)) {
        adj.resize(tree.portals.size());
        for (auto [a, b] : tree.edges) {
            adj[size_t(a)].push_back(b);
            adj[size_t(b)].push_back(a);
        }
    }

    int portal_of(AmoebotId i) const { return tree.portal_of[size_t(i)]; }
    int count() const { return int(tree.portals.size()); }

    // Rooted prune at portal level.
    struct Rap {
        std::vector<uint8_t> in_vq;
        std::vector<int> parent;  // portal id, -1 at root
    };
    Rap root_and_prune(int root, const std::vector<uint8_t>& q) const {
        Rap res;
        res.in_vq.assign(size_t(count()), 0);
        res.parent.assign(size_t(count()), -1);
        std::vector<int> order{root};
        std::vector<uint8_t> seen(size_t(count()), 0);
        seen[size_t(root)] = 1;
        for (size_t h = 0; h < order.size(); ++h) {
            int p = order[h];
            for (int c : adj[size_t(p)]) {
                if (seen[size_t(c)]) continue;
                seen[size_t(c)] = 1;
                res.parent[size_t(c)] = p;
                order.push_back(c);
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int p = *it;
            bool meets = q[size_t(p)] != 0;
            for (int c : adj[size_t(p)])
                if (res.parent[size_t(c)] == p && res.in_vq[size_t(c)]) meets = true;
            res.in_vq[size_t(p)] = meets;
        }
        return res;
    }

    std::vector<uint8_t> centroids(const std::vector<uint8_t>& q) const {
        int total = 0;
        for (uint8_t b : q) total += b;
        std::vector<uint8_t> out(size_t(count()), 0);
        if (total == 0) return out;
        auto rap = root_and_prune(0, std::vector<uint8_t>(size_t(count()), 1));
        std::vector<int> sub(size_t(count()), 0);
        std::vector<int> order{0};
        for (size_t h = 0; h < order.size(); ++h)
            for (int c : adj[size_t(order[h])])
                if (rap.parent[size_t(c)] == order[h]) order.push_back(c);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            sub[size_t(*it)] = q[size_t(*it)];
            for (int c : adj[size_t(*it)])
                if (rap.parent[size_t(c)] == *it) sub[size_t(*it)] += sub[size_t(c)];
        }
        for (int p = 0; p < count(); ++p) {
            if (!q[size_t(p)]) continue;
            bool ok = true;
            for (int c : adj[size_t(p)]) {
                int comp = rap.parent[size_t(c)] == p ? sub[size_t(c)]
                                                      : total - sub[size_t(p)];
                if (2 * comp > total) ok = false;
            }
            out[size_t(p)] = ok;
        }
        return out;
    }

    std::vector<uint8_t> augmentation(int root,
                                      const std::vector<uint8_t>& q) const {
        auto rap = root_and_prune(root, q);
        std::vector<uint8_t> out(size_t(count()), 0);
        for (int p = 0; p < count(); ++p) {
            if (!rap.in_vq[size_t(p)]) continue;
            int deg = 0;
            for (int c : adj[size_t(p)]) {
                bool in_tq = rap.parent[size_t(c)] == p ? rap.in_vq[size_t(c)]
                             : rap.parent[size_t(p)] == c;
                if (in_tq) ++deg;
            }
            out[size_t(p)] = deg >= 3;
        }
        return out;
    }
};

struct PortalInstance {
    AmoebotStructure s;
    Subview view;
    std::vector<uint8_t> root_portal;  // per amoebot
    std::vector<uint8_t> in_q;         // per amoebot (portal flag)
    int root_pid;
    std::vector<uint8_t> q_pids;       // per portal
};

PortalInstance make_instance(uint64_t seed, int n, Axis axis, double density) {
    PortalInstance inst{generate_random_structure(seed, n), {}, {}, {}, 0, {}};
    inst.view = Subview::whole(inst.s);
    PortalOracle oracle(inst.s, axis);
    Rng rng(seed * 5 + 3);
    inst.root_pid = int(rng.below(uint64_t(oracle.count())));
    inst.q_pids.assign(size_t(oracle.count()), 0);
    for (int p = 0; p < oracle.count(); ++p)
        inst.q_pids[size_t(p)] = rng.unit() < density;
    inst.root_portal.assign(size_t(inst.s.size()), 0);
    inst.in_q.assign(size_t(inst.s.size()), 0);
    for (AmoebotId i = 0; i < inst.s.size(); ++i) {
        inst.root_portal[size_t(i)] = oracle.portal_of(i) == inst.root_pid;
        inst.in_q[size_t(i)] = inst.q_pids[size_t(oracle.portal_of(i))];
    }
    return inst;
}

}  // namespace

TEST(PortalPrimitives, SinglePortalStructure) {
    std::vector<NodeCoord> nodes;
    for (int a = 0; a < 6; ++a) nodes.push_back({a, 0});
    AmoebotStructure s(std::move(nodes));
    s.set_source(0, true);
    s.set_dest(5, true);
    s.set_leader(0);
    auto view = Subview::whole(s);
    std::vector<uint8_t> all(6, 1);
    CircuitEngine engine(s, 4);
    RoundStats stats;
    auto rap = portal_root_and_prune(engine, view, Axis::X, all, all, stats, "p");
    for (AmoebotId i = 0; i < 6; ++i) EXPECT_TRUE(rap.in_vq[size_t(i)]);
    auto elect = portal_election(engine, view, Axis::X, all, all, stats, "p");
    for (AmoebotId i = 0; i < 6; ++i) EXPECT_TRUE(elect.elected[size_t(i)]);
    auto cents = portal_centroids(engine, view, Axis::X, all, all, stats, "p");
    for (AmoebotId i = 0; i < 6; ++i) EXPECT_TRUE(cents[size_t(i)]);
}

TEST(PortalPrimitives, ParallelogramMiddlePortalCentroid) {
    std::vector<NodeCoord> nodes;
    for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) nodes.push_back({a, b});
    AmoebotStructure s(std::move(nodes));
    s.set_source(0, true);
    s.set_dest(8, true);
    s.set_leader(0);
    auto view = Subview::whole(s);
    std::vector<uint8_t> all(9, 1);
    std::vector<uint8_t> root(9, 0);
    for (AmoebotId i = 0; i < 9; ++i) root[size_t(i)] = s.coord(i).b == 0;
    CircuitEngine engine(s, 4);
    RoundStats stats;
    auto cents = portal_centroids(engine, view, Axis::X, root, all, stats, "p");
    for (AmoebotId i = 0; i < 9; ++i)
        EXPECT_EQ(cents[size_t(i)], s.coord(i).b == 1 ? 1 : 0) << i;
}

TEST(PortalPrimitives, RapMatchesPortalOracle) {
    for (uint64_t seed = 1; seed <= 18; ++seed) {
        Axis axis = kAllAxes[seed % 3];
        auto inst = make_instance(seed, 70, axis, 0.3);
        PortalOracle po(inst.s, axis);
        CircuitEngine engine(inst.s, 4);
        RoundStats stats;
        auto got = portal_root_and_prune(engine, inst.view, axis,
                                         inst.root_portal, inst.in_q, stats, "p");
        auto want = po.root_and_prune(inst.root_pid, inst.q_pids);
        for (AmoebotId i = 0; i < inst.s.size(); ++i) {
            int pid = po.portal_of(i);
            ASSERT_EQ(got.in_vq[size_t(i)] != 0, want.in_vq[size_t(pid)] != 0)
                << "seed " << seed << " amoebot " << i;
            // Parent side: every flagged neighbor lies in the parent portal.
            for (Direction d : kAllDirs) {
                if (!(got.parent_side[size_t(i)] & (1u << dir_index(d)))) continue;
                AmoebotId v = inst.s.neighbor(i, d);
                ASSERT_NE(v, kNoAmoebot);
                ASSERT_EQ(po.portal_of(v), want.parent[size_t(pid)])
                    << "seed " << seed << " amoebot " << i;
            }
            // Members of pruned portals flag no parents; members of surviving
            // non-root portals adjacent to the parent portal flag it.
            if (want.in_vq[size_t(pid)] && want.parent[size_t(pid)] >= 0) {
                bool adjacent = false, flagged = false;
                for (Direction d : kAllDirs) {
                    AmoebotId v = inst.s.neighbor(i, d);
                    if (v != kNoAmoebot &&
                        po.portal_of(v) == want.parent[size_t(pid)]) {
                        adjacent = true;
                        if (got.parent_side[size_t(i)] & (1u << dir_index(d)))
                            flagged = true;
                    }
                }
                ASSERT_EQ(adjacent, flagged) << "seed " << seed << " i " << i;
            }
        }
    }
}

TEST(PortalPrimitives, ElectionElectsRepOrderPortal) {
    for (uint64_t seed = 1; seed <= 15; ++seed) {
        Axis axis = kAllAxes[seed % 3];
        auto inst = make_instance(seed, 60, axis, 0.25);
        PortalOracle po(inst.s, axis);
        CircuitEngine engine(inst.s, 4);
        RoundStats stats;
        auto got = portal_election(engine, inst.view, axis, inst.root_portal,
                                   inst.in_q, stats, "p");
        bool q_nonempty = false;
        for (uint8_t b : inst.q_pids) q_nonempty |= b != 0;
        if (!q_nonempty) {
            EXPECT_TRUE(got.q_empty);
            continue;
        }
        // Exactly the members of one Q portal are flagged.
        std::set<int> pids;
        for (AmoebotId i = 0; i < inst.s.size(); ++i)
            if (got.elected[size_t(i)]) pids.insert(po.portal_of(i));
        ASSERT_EQ(pids.size(), 1u) << "seed " << seed;
        int pid = *pids.begin();
        EXPECT_TRUE(inst.q_pids[size_t(pid)]);
        for (AmoebotId i = 0; i < inst.s.size(); ++i)
            EXPECT_EQ(got.elected[size_t(i)] != 0, po.portal_of(i) == pid);
    }
}

TEST(PortalPrimitives, CentroidsMatchPortalOracle) {
    for (uint64_t seed = 1; seed <= 18; ++seed) {
        Axis axis = kAllAxes[seed % 3];
        auto inst = make_instance(seed, 80, axis, 0.35);
        PortalOracle po(inst.s, axis);
        CircuitEngine engine(inst.s, 4);
        RoundStats stats;
        auto got = portal_centroids(engine, inst.view, axis, inst.root_portal,
                                    inst.in_q, stats, "p");
        auto want = po.centroids(inst.q_pids);
        int count = 0;
        std::set<int> got_pids;
        for (AmoebotId i = 0; i < inst.s.size(); ++i) {
            int pid = po.portal_of(i);
            ASSERT_EQ(got[size_t(i)] != 0, want[size_t(pid)] != 0)
                << "seed " << seed << " amoebot " << i << " axis "
                << axis_name(axis);
            if (got[size_t(i)]) got_pids.insert(pid);
        }
        for (uint8_t b : want) count += b;
        EXPECT_EQ(int(got_pids.size()), count);
        EXPECT_LE(count, 2);
    }
}

TEST(PortalPrimitives, AugmentationMatchesPortalOracle) {
    for (uint64_t seed = 1; seed <= 18; ++seed) {
        Axis axis = kAllAxes[seed % 3];
        auto inst = make_instance(seed, 90, axis, 0.3);
        PortalOracle po(inst.s, axis);
        CircuitEngine engine(inst.s, 4);
        RoundStats stats;
        auto got = portal_augmentation(engine, inst.view, axis, inst.root_portal,
                                       inst.in_q, stats, "p");
        auto want = po.augmentation(inst.root_pid, inst.q_pids);
        int q_size = 0, a_size = 0;
        for (uint8_t b : inst.q_pids) q_size += b;
        for (uint8_t b : want) a_size += b;
        for (AmoebotId i = 0; i < inst.s.size(); ++i) {
            int pid = po.portal_of(i);
            ASSERT_EQ(got[size_t(i)] != 0, want[size_t(pid)] != 0)
                << "seed " << seed << " amoebot " << i << " axis "
                << axis_name(axis);
        }
        if (q_size > 0) EXPECT_LE(a_size, q_size - 1);
    }
}

TEST(PortalPrimitives, DecompositionCoversQPrimeWithinDepthBound) {
    for (uint64_t seed = 1; seed <= 12; ++seed) {
        Axis axis = kAllAxes[seed % 3];
        auto inst = make_instance(seed, 80, axis, 0.3);
        PortalOracle po(inst.s, axis);
        int q_size = 0;
        for (uint8_t b : inst.q_pids) q_size += b;
        if (q_size == 0) {
            inst.q_pids[size_t(inst.root_pid)] = 1;
            for (AmoebotId i = 0; i < inst.s.size(); ++i)
                inst.in_q[size_t(i)] |= inst.root_portal[size_t(i)];
        }
        CircuitEngine engine(inst.s, 4);
        RoundStats stats;
        // Q' = Q u A_Q guarantees centroid existence in every zone.
        auto aq = portal_augmentation(engine, inst.view, axis, inst.root_portal,
                                      inst.in_q, stats, "p");
        std::vector<uint8_t> qprime = inst.in_q;
        for (size_t k = 0; k < qprime.size(); ++k) qprime[k] |= aq[k];
        auto levels = portal_decomposition(engine, inst.view, axis,
                                           inst.root_portal, qprime, stats, "p");
        // Per-portal uniform levels; every Q' portal gets exactly one level.
        std::map<int, int> portal_level;
        int qprime_portals = 0, max_level = -1;
        std::vector<uint8_t> qprime_pid(size_t(po.count()), 0);
        for (AmoebotId i = 0; i < inst.s.size(); ++i)
            if (qprime[size_t(i)]) qprime_pid[size_t(po.portal_of(i))] = 1;
        for (uint8_t b : qprime_pid) qprime_portals += b;
        for (AmoebotId i = 0; i < inst.s.size(); ++i) {
            int pid = po.portal_of(i);
            auto [it, fresh] = portal_level.try_emplace(pid, levels[size_t(i)]);
            ASSERT_EQ(it->second, levels[size_t(i)]) << "portal not uniform";
            max_level = std::max(max_level, levels[size_t(i)]);
        }
        for (int p = 0; p < po.count(); ++p)
            EXPECT_EQ(portal_level[p] >= 0, qprime_pid[size_t(p)] != 0)
                << "seed " << seed << " portal " << p;
        int bound = 1;
        while ((1 << bound) < qprime_portals + 1) ++bound;
        EXPECT_LE(max_level + 1, bound + 1) << "seed " << seed;
    }
}
