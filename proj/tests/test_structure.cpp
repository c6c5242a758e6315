#include <gtest/gtest.h>

#include <map>
#include <set>

#include "amoebot/oracle.hpp"
#include "amoebot/rng.hpp"
#include "amoebot/structure.hpp"

using namespace amoebot;

namespace {

AmoebotStructure make(std::vector<NodeCoord> nodes) {
    AmoebotStructure s(std::move(nodes));
    if (s.size() > 0) {
        s.set_source(0, true);
        s.set_dest(s.size() - 1, true);
        s.set_leader(0);
    }
    return s;
}

AmoebotStructure hexagon7() {
    std::vector<NodeCoord> nodes{{0, 0}};
    for (Direction d : kAllDirs) nodes.push_back(step({0, 0}, d));
    return make(std::move(nodes));
}

AmoebotStructure parallelogram(int w, int h) {
    std::vector<NodeCoord> nodes;
    for (int b = 0; b < h; ++b)
        for (int a = 0; a < w; ++a) nodes.push_back({a, b});
    return make(std::move(nodes));
}

AmoebotStructure line_x(int n) {
    std::vector<NodeCoord> nodes;
    for (int a = 0; a < n; ++a) nodes.push_back({a, 0});
    return make(std::move(nodes));
}

// Brute-force portal partition: connected components of (V, E_axis).
std::map<int, std::set<int>> brute_portal_components(const AmoebotStructure& s,
                                                     Axis ax) {
    std::vector<int> comp(size_t(s.size()), -1);
    int nc = 0;
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (comp[size_t(i)] >= 0) continue;
        int c = nc++;
        std::vector<AmoebotId> stack{i};
        comp[size_t(i)] = c;
        while (!stack.empty()) {
            AmoebotId u = stack.back();
            stack.pop_back();
            for (Direction d : kAllDirs) {
                if (axis_of(d) != ax) continue;
                AmoebotId v = s.neighbor(u, d);
                if (v != kNoAmoebot && comp[size_t(v)] < 0) {
                    comp[size_t(v)] = c;
                    stack.push_back(v);
                }
            }
        }
    }
    std::map<int, std::set<int>> out;
    for (AmoebotId i = 0; i < s.size(); ++i) out[comp[size_t(i)]].insert(i);
    return out;
}

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
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[size_t(a)] = b;
        return true;
    }
};

}  // namespace

TEST(Structure, HexagonValid) {
    EXPECT_TRUE(validate_structure(hexagon7()).ok());
}

TEST(Structure, RingHasHole) {
    std::vector<NodeCoord> nodes;
    for (Direction d : kAllDirs) nodes.push_back(step({0, 0}, d));
    auto s = make(std::move(nodes));
    auto report = validate_structure(s);
    ASSERT_FALSE(report.ok());
    bool hole = false;
    for (const auto& v : report.violations)
        if (v.kind == StructureViolation::Kind::Hole) hole = true;
    EXPECT_TRUE(hole);
}

TEST(Structure, DisconnectedPair) {
    auto s = make({{0, 0}, {3, 0}});
    auto report = validate_structure(s);
    ASSERT_FALSE(report.ok());
    EXPECT_EQ(report.violations[0].kind, StructureViolation::Kind::Connectivity);
}

TEST(Structure, ParallelogramPortalsX) {
    auto s = parallelogram(3, 3);
    auto ps = portals(s, Axis::X);
    ASSERT_EQ(ps.size(), 3u);
    for (const auto& p : ps) EXPECT_EQ(p.members.size(), 3u);
}

TEST(Structure, SingleAmoebotPortals) {
    auto s = make({{0, 0}});
    for (Axis ax : kAllAxes) {
        auto ps = portals(s, ax);
        ASSERT_EQ(ps.size(), 1u);
        EXPECT_EQ(ps[0].members.size(), 1u);
    }
}

TEST(Structure, PortalsMatchBruteComponents) {
    auto l_shape = make({{0, 0}, {1, 0}, {2, 0}, {0, 1}, {0, 2}});
    for (Axis ax : kAllAxes) {
        auto ps = portals(l_shape, ax);
        auto brute = brute_portal_components(l_shape, ax);
        std::set<std::set<int>> got, want;
        for (const auto& p : ps)
            got.insert(std::set<int>(p.members.begin(), p.members.end()));
        for (const auto& [c, members] : brute) want.insert(members);
        EXPECT_EQ(got, want) << axis_name(ax);
    }
    // Partition: every amoebot in exactly one portal.
    for (Axis ax : kAllAxes) {
        auto ids = portal_ids(l_shape, ax);
        auto ps = portals(l_shape, ax);
        size_t total = 0;
        for (const auto& p : ps) total += p.members.size();
        EXPECT_EQ(total, size_t(l_shape.size()));
        for (int id : ids) EXPECT_GE(id, 0);
    }
}

TEST(Structure, LineIpgIsLine) {
    auto s = line_x(10);
    auto g = implicit_portal_graph(s, Axis::X);
    EXPECT_EQ(g.edge_count(), 9);
    for (AmoebotId i = 0; i < s.size(); ++i)
        for (Direction d : kAllDirs)
            if (g.has_edge(i, d)) EXPECT_EQ(axis_of(d), Axis::X);
}

TEST(Structure, ParallelogramIpgX) {
    auto s = parallelogram(3, 3);
    auto g = implicit_portal_graph(s, Axis::X);
    EXPECT_EQ(g.edge_count(), 8);
    int intra = 0, conn = 0;
    for (AmoebotId i = 0; i < s.size(); ++i) {
        for (Direction d : {Direction::E, Direction::NE, Direction::NW}) {
            if (!g.has_edge(i, d)) continue;
            if (axis_of(d) == Axis::X) ++intra;
            else ++conn;
        }
    }
    EXPECT_EQ(intra, 6);
    EXPECT_EQ(conn, 2);
}

TEST(Structure, IpgIsSpanningTreeOnRandomInstances) {
    for (uint64_t seed = 1; seed <= 12; ++seed) {
        auto s = generate_random_structure(seed, 80 + int(seed) * 23);
        ASSERT_TRUE(validate_structure(s).ok());
        for (Axis ax : kAllAxes) {
            auto g = implicit_portal_graph(s, ax);
            EXPECT_EQ(g.edge_count(), s.size() - 1);
            UnionFind uf(s.size());
            bool acyclic = true;
            for (AmoebotId i = 0; i < s.size(); ++i)
                for (Direction d : {Direction::E, Direction::NE, Direction::NW})
                    if (g.has_edge(i, d))
                        acyclic &= uf.unite(i, s.neighbor(i, d));
            EXPECT_TRUE(acyclic) << "cycle, axis " << axis_name(ax);
            // Symmetric masks.
            for (AmoebotId i = 0; i < s.size(); ++i)
                for (Direction d : kAllDirs)
                    if (g.has_edge(i, d))
                        EXPECT_TRUE(g.has_edge(s.neighbor(i, d), opposite(d)));
        }
    }
}

TEST(Structure, IpgMatchesCanonicalConnectors) {
    for (uint64_t seed = 3; seed <= 9; ++seed) {
        auto s = generate_random_structure(seed, 120);
        for (Axis ax : kAllAxes) {
            auto g = implicit_portal_graph(s, ax);
            auto t = oracle::explicit_portal_tree(s, ax);
            // Collect the connector edges of the implicit graph.
            std::set<std::pair<AmoebotId, AmoebotId>> got;
            for (AmoebotId i = 0; i < s.size(); ++i)
                for (Direction d : kAllDirs)
                    if (g.has_edge(i, d) && axis_of(d) != ax) {
                        AmoebotId j = s.neighbor(i, d);
                        got.insert({std::min(i, j), std::max(i, j)});
                    }
            std::set<std::pair<AmoebotId, AmoebotId>> want;
            for (auto [u, v] : t.connectors)
                want.insert({std::min(u, v), std::max(u, v)});
            EXPECT_EQ(got, want) << "axis " << axis_name(ax) << " seed " << seed;
        }
    }
}

TEST(Structure, PortalDistanceIdentities) {
    auto s = line_x(8);
    // Same portal.
    EXPECT_EQ(portal_distance(s, Axis::X, {0, 0}, {7, 0}), 0);
    // Along a line each node is its own y-portal.
    EXPECT_EQ(portal_distance(s, Axis::Y, {0, 0}, {7, 0}), 7);

    Rng rng(7);
    for (uint64_t seed = 20; seed <= 26; ++seed) {
        auto st = generate_random_structure(seed, 150);
        for (int trial = 0; trial < 200; ++trial) {
            AmoebotId u = AmoebotId(rng.below(uint64_t(st.size())));
            AmoebotId v = AmoebotId(rng.below(uint64_t(st.size())));
            auto bfs = oracle::bfs_distances(st, {u});
            int dx = portal_distance(st, Axis::X, st.coord(u), st.coord(v));
            int dy = portal_distance(st, Axis::Y, st.coord(u), st.coord(v));
            int dz = portal_distance(st, Axis::Z, st.coord(u), st.coord(v));
            ASSERT_EQ(2 * bfs.dist[size_t(v)], dx + dy + dz);
        }
    }
}

TEST(Structure, ShortestPathsCrossSeparatingPortals) {
    // BFS path between u,v crosses portal P iff u,v separated by P.
    for (uint64_t seed = 40; seed <= 42; ++seed) {
        auto s = generate_random_structure(seed, 50);
        if (s.size() > 60) continue;
        Rng rng(seed);
        for (Axis ax : kAllAxes) {
            auto ps = portals(s, ax);
            auto ids = portal_ids(s, ax);
            for (size_t pi = 0; pi < ps.size(); ++pi) {
                // Components of X minus P.
                std::vector<int> comp(size_t(s.size()), -1);
                int nc = 0;
                for (AmoebotId i = 0; i < s.size(); ++i) {
                    if (ids[size_t(i)] == int(pi) || comp[size_t(i)] >= 0) continue;
                    std::vector<AmoebotId> stack{i};
                    comp[size_t(i)] = nc;
                    while (!stack.empty()) {
                        AmoebotId u = stack.back();
                        stack.pop_back();
                        for (Direction d : kAllDirs) {
                            AmoebotId v = s.neighbor(u, d);
                            if (v == kNoAmoebot || ids[size_t(v)] == int(pi) ||
                                comp[size_t(v)] >= 0)
                                continue;
                            comp[size_t(v)] = nc;
                            stack.push_back(v);
                        }
                    }
                    ++nc;
                }
                for (int trial = 0; trial < 20; ++trial) {
                    AmoebotId u = AmoebotId(rng.below(uint64_t(s.size())));
                    AmoebotId v = AmoebotId(rng.below(uint64_t(s.size())));
                    if (ids[size_t(u)] == int(pi) || ids[size_t(v)] == int(pi))
                        continue;
                    // Does some shortest path cross P? With exact distances,
                    // u->v crosses P iff every path does (P separates) iff
                    // comp differs; otherwise a same-component path of equal
                    // length exists by the portal lemma, so test separation
                    // against BFS distance through the full structure vs the
                    // component-restricted one.
                    bool separated = comp[size_t(u)] != comp[size_t(v)];
                    // BFS within the component of u (portal removed).
                    std::vector<int> dist(size_t(s.size()), -1);
                    std::vector<AmoebotId> queue{u};
                    dist[size_t(u)] = 0;
                    size_t head = 0;
                    while (head < queue.size()) {
                        AmoebotId w = queue[head++];
                        for (Direction d : kAllDirs) {
                            AmoebotId x = s.neighbor(w, d);
                            if (x == kNoAmoebot || ids[size_t(x)] == int(pi) ||
                                dist[size_t(x)] >= 0)
                                continue;
                            dist[size_t(x)] = dist[size_t(w)] + 1;
                            queue.push_back(x);
                        }
                    }
                    auto full = oracle::bfs_distances(s, {u});
                    if (separated) {
                        EXPECT_EQ(dist[size_t(v)], -1);
                    } else {
                        // An equally short path avoiding P must exist.
                        EXPECT_EQ(dist[size_t(v)], full.dist[size_t(v)]);
                    }
                }
            }
        }
    }
}

TEST(Structure, RandomGenerationDeterministicAndValid) {
    auto a = generate_random_structure(1, 1);
    EXPECT_EQ(a.size(), 1);
    for (uint64_t seed : {2ull, 9ull, 55ull}) {
        RandomStructureOptions opt;
        opt.num_sources = 3;
        opt.num_dests = 5;
        auto s1 = generate_random_structure(seed, 200, opt);
        auto s2 = generate_random_structure(seed, 200, opt);
        EXPECT_EQ(s1.digest(), s2.digest());
        EXPECT_GE(s1.size(), 200);
        EXPECT_TRUE(validate_structure(s1).ok());
        EXPECT_EQ(s1.sources().size(), 3u);
        EXPECT_EQ(s1.destinations().size(), 5u);
        EXPECT_NE(s1.leader(), kNoAmoebot);
    }
}

TEST(Structure, FileRoundTrip) {
    RandomStructureOptions opt;
    opt.num_sources = 2;
    opt.num_dests = 4;
    auto s = generate_random_structure(11, 60, opt);
    std::string text = write_structure(s);
    ParseError err;
    auto parsed = parse_structure(text, err);
    ASSERT_TRUE(parsed.has_value()) << err.message;
    EXPECT_EQ(parsed->digest(), s.digest());
    EXPECT_EQ(write_structure(*parsed), text);
}

TEST(Structure, ParseErrors) {
    ParseError err;
    EXPECT_FALSE(parse_structure("0 0 S\n1 0 Q\n", err).has_value());
    EXPECT_EQ(err.line, 2);
    EXPECT_FALSE(parse_structure("0 0 SL\n0 0 D\n", err).has_value());
    EXPECT_FALSE(parse_structure("# only comments\n", err).has_value());
    EXPECT_FALSE(parse_structure("0 0 S\n1 0 D\n", err).has_value());  // no L
    auto ok = parse_structure("# line\n0 0 SL\n\n1 0 D\n", err);
    ASSERT_TRUE(ok.has_value());
    EXPECT_EQ(ok->size(), 2);
}

TEST(Structure, ForestFileRoundTrip) {
    auto s = line_x(4);
    ParentForest f(s.size());
    f.member.assign(4, 1);
    f.parent = {ParentForest::kNoParent, 0 + 3, 3, 3};  // W chain to root 0
    f.parent[1] = int8_t(dir_index(Direction::W));
    std::string text = write_forest(s, f);
    ParseError err;
    auto parsed = parse_forest(s, text, err);
    ASSERT_TRUE(parsed.has_value()) << err.message;
    EXPECT_EQ(parsed->parent, f.parent);
    EXPECT_EQ(parsed->member, f.member);
}
