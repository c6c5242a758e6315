#include "amoebot/oracle.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <functional>
#include <map>
#include <sstream>

#include "amoebot/rng.hpp"

namespace amoebot::oracle {

DistanceField bfs_distances(const AmoebotStructure& s,
                            const std::vector<AmoebotId>& roots) {
    DistanceField f;
    f.dist.assign(size_t(s.size()), kUnreachable);
    std::deque<AmoebotId> queue;
    for (AmoebotId r : roots) {
        if (f.dist[size_t(r)] == 0) continue;
        f.dist[size_t(r)] = 0;
        queue.push_back(r);
    }
    while (!queue.empty()) {
        AmoebotId u = queue.front();
        queue.pop_front();
        for (Direction d : kAllDirs) {
            AmoebotId v = s.neighbor(u, d);
            if (v != kNoAmoebot && f.dist[size_t(v)] == kUnreachable) {
                f.dist[size_t(v)] = f.dist[size_t(u)] + 1;
                queue.push_back(v);
            }
        }
    }
    return f;
}

std::string ForestReport::to_string() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (const auto& v : violations)
        os << "property " << v.property << ": " << v.detail << "\n";
    return os.str();
}

namespace {

std::string coord_str(const AmoebotStructure& s, AmoebotId i) {
    std::ostringstream os;
    os << "(" << s.coord(i).a << "," << s.coord(i).b << ")";
    return os.str();
}

}  // namespace

ForestReport validate_forest(const AmoebotStructure& s,
                             const std::vector<AmoebotId>& sources,
                             const std::vector<AmoebotId>& dests,
                             const ParentForest& forest) {
    ForestReport report;
    auto fail = [&](int prop, const std::string& msg) {
        if (report.violations.size() < 64)
            report.violations.push_back({prop, msg});
    };
    std::vector<uint8_t> is_src(size_t(s.size()), 0), is_dst(size_t(s.size()), 0);
    for (AmoebotId i : sources) is_src[size_t(i)] = 1;
    for (AmoebotId i : dests) is_dst[size_t(i)] = 1;

    // Property 1: a tree rooted at every source; parent chains reach a
    // source without cycles and along occupied member edges.
    for (AmoebotId i : sources) {
        if (!forest.member[size_t(i)])
            fail(1, "source " + coord_str(s, i) + " not in any tree");
        else if (forest.has_parent(i))
            fail(1, "source " + coord_str(s, i) + " has a parent");
    }
    std::vector<AmoebotId> root(size_t(s.size()), kNoAmoebot);
    std::vector<int> depth(size_t(s.size()), -1);
    std::vector<uint8_t> state(size_t(s.size()), 0);  // 0 fresh, 1 on path, 2 done
    std::function<bool(AmoebotId)> resolve = [&](AmoebotId u) -> bool {
        if (state[size_t(u)] == 2) return root[size_t(u)] != kNoAmoebot;
        if (state[size_t(u)] == 1) {
            fail(1, "parent cycle through " + coord_str(s, u));
            state[size_t(u)] = 2;
            return false;
        }
        state[size_t(u)] = 1;
        bool ok = false;
        if (!forest.has_parent(u)) {
            if (is_src[size_t(u)]) {
                root[size_t(u)] = u;
                depth[size_t(u)] = 0;
                ok = true;
            } else {
                fail(1, "member " + coord_str(s, u) + " is a non-source root");
            }
        } else {
            AmoebotId p = s.neighbor(u, forest.parent_dir(u));
            if (p == kNoAmoebot) {
                fail(1, "parent of " + coord_str(s, u) + " is unoccupied");
            } else if (!forest.member[size_t(p)]) {
                fail(1, "parent of " + coord_str(s, u) + " is not a member");
            } else if (resolve(p)) {
                root[size_t(u)] = root[size_t(p)];
                depth[size_t(u)] = depth[size_t(p)] + 1;
                ok = true;
            }
        }
        state[size_t(u)] = 2;
        return ok;
    };
    for (AmoebotId i = 0; i < s.size(); ++i)
        if (forest.member[size_t(i)]) resolve(i);

    // Property 2: leaves of each tree lie in S u D.
    std::vector<uint8_t> has_child(size_t(s.size()), 0);
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (!forest.member[size_t(i)] || !forest.has_parent(i)) continue;
        AmoebotId p = s.neighbor(i, forest.parent_dir(i));
        if (p != kNoAmoebot) has_child[size_t(p)] = 1;
    }
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (forest.member[size_t(i)] && !has_child[size_t(i)] &&
            !is_src[size_t(i)] && !is_dst[size_t(i)])
            fail(2, "leaf " + coord_str(s, i) + " outside S u D");
    }

    // Property 3 (vertex-disjointness) is structural for parent pointers;
    // the cycle/rootedness walk above covers the degenerate cases.

    // Property 4: destination coverage.
    for (AmoebotId i : dests)
        if (!forest.member[size_t(i)])
            fail(4, "destination " + coord_str(s, i) + " not covered");

    // Property 5: tree paths are shortest and roots are closest sources.
    DistanceField multi = bfs_distances(s, sources);
    std::vector<std::vector<int>> per_source;
    per_source.reserve(sources.size());
    for (AmoebotId r : sources)
        per_source.push_back(bfs_distances(s, {r}).dist);
    std::vector<int> src_rank(size_t(s.size()), -1);
    for (size_t k = 0; k < sources.size(); ++k)
        src_rank[size_t(sources[k])] = int(k);
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (!forest.member[size_t(i)] || root[size_t(i)] == kNoAmoebot) continue;
        int rk = src_rank[size_t(root[size_t(i)])];
        if (rk < 0) continue;
        int d_root = per_source[size_t(rk)][size_t(i)];
        if (depth[size_t(i)] != d_root)
            fail(5, "path length " + std::to_string(depth[size_t(i)]) + " to root != dist " +
                        std::to_string(d_root) + " at " + coord_str(s, i));
        else if (d_root != multi.dist[size_t(i)])
            fail(5, "root is not a closest source at " + coord_str(s, i));
    }
    return report;
}

ExplicitPortalTree explicit_portal_tree(const AmoebotStructure& s, Axis axis) {
    ExplicitPortalTree t;
    t.axis = axis;
    t.portals = portals(s, axis);
    t.portal_of = portal_ids(s, axis);
    struct Conn {
        AmoebotId lo = kNoAmoebot, hi = kNoAmoebot;
    };
    std::map<std::pair<int, int>, Conn> best;
    auto edge_key = [&](AmoebotId u, AmoebotId v) {
        // Endpoints ordered lexicographically by the Euclidean embedding.
        if (euclid_less(s.coord(v), s.coord(u))) std::swap(u, v);
        return Conn{u, v};
    };
    auto conn_less = [&](const Conn& a, const Conn& b) {
        if (a.lo != b.lo)
            return euclid_less(s.coord(a.lo), s.coord(b.lo));
        return euclid_less(s.coord(a.hi), s.coord(b.hi));
    };
    for (AmoebotId i = 0; i < s.size(); ++i) {
        for (Direction d : {Direction::E, Direction::NE, Direction::NW}) {
            AmoebotId j = s.neighbor(i, d);
            if (j == kNoAmoebot) continue;
            int pi = t.portal_of[size_t(i)], pj = t.portal_of[size_t(j)];
            if (pi == pj) continue;
            auto key = std::minmax(pi, pj);
            Conn cand = edge_key(i, j);
            auto it = best.find(key);
            if (it == best.end() || conn_less(cand, it->second))
                best[key] = cand;
        }
    }
    for (const auto& [key, conn] : best) {
        t.edges.push_back(key);
        t.connectors.push_back({conn.lo, conn.hi});
    }
    return t;
}

bool tree_has_edge(const TreeMask& t, AmoebotId i, Direction d) {
    return t[size_t(i)] & (1u << dir_index(d));
}

int tree_degree(const TreeMask& t, AmoebotId i) {
    return std::popcount(uint32_t(t[size_t(i)]));
}

TreeMask random_spanning_tree(const AmoebotStructure& s, uint64_t seed) {
    Rng rng(seed);
    TreeMask t(size_t(s.size()), 0);
    std::vector<uint8_t> seen(size_t(s.size()), 0);
    struct Edge {
        AmoebotId from;
        Direction dir;
    };
    std::vector<Edge> frontier;
    AmoebotId start = AmoebotId(rng.below(uint64_t(s.size())));
    seen[size_t(start)] = 1;
    for (Direction d : kAllDirs)
        if (s.neighbor(start, d) != kNoAmoebot) frontier.push_back({start, d});
    while (!frontier.empty()) {
        size_t k = size_t(rng.below(frontier.size()));
        Edge e = frontier[k];
        frontier[k] = frontier.back();
        frontier.pop_back();
        AmoebotId v = s.neighbor(e.from, e.dir);
        if (seen[size_t(v)]) continue;
        seen[size_t(v)] = 1;
        t[size_t(e.from)] |= uint8_t(1u << dir_index(e.dir));
        t[size_t(v)] |= uint8_t(1u << dir_index(opposite(e.dir)));
        for (Direction d : kAllDirs)
            if (s.neighbor(v, d) != kNoAmoebot) frontier.push_back({v, d});
    }
    return t;
}

namespace {

Direction first_tree_dir(const TreeMask& t, AmoebotId i) {
    for (Direction d : kAllDirs)
        if (tree_has_edge(t, i, d)) return d;
    return Direction::E;  // isolated node; callers guard
}

// Successor rule: after entering v from u, leave toward the next
// counterclockwise tree neighbor of v with respect to u.
Direction tour_next_dir(const TreeMask& t, AmoebotId v, Direction came_from) {
    for (int k = 1; k <= 6; ++k) {
        Direction d = direction_from_index(dir_index(came_from) + k);
        if (tree_has_edge(t, v, d)) return d;
    }
    return came_from;
}

}  // namespace

std::vector<TourStep> tour_walk(const AmoebotStructure& s, const TreeMask& t,
                                AmoebotId root) {
    std::vector<TourStep> tour;
    if (tree_degree(t, root) == 0) return tour;
    Direction d = first_tree_dir(t, root);
    AmoebotId u = root;
    do {
        tour.push_back({u, d});
        AmoebotId v = s.neighbor(u, d);
        d = tour_next_dir(t, v, opposite(d));
        u = v;
    } while (!(u == root && d == first_tree_dir(t, root)));
    return tour;
}

std::vector<int64_t> brute_prefix_sums(const std::vector<int>& weights) {
    std::vector<int64_t> out(weights.size());
    int64_t acc = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        out[i] = acc;
    }
    return out;
}

Direction canonical_marked_dir(const TreeMask& t, AmoebotId i) {
    return first_tree_dir(t, i);
}

PruneResult brute_root_and_prune(const AmoebotStructure& s, const TreeMask& t,
                                 AmoebotId r, const std::vector<uint8_t>& in_q) {
    PruneResult res;
    res.in_vq.assign(size_t(s.size()), 0);
    res.parent.assign(size_t(s.size()), -1);
    // Iterative post-order over the tree rooted at r.
    std::vector<std::pair<AmoebotId, int8_t>> stack{{r, -1}};
    std::vector<AmoebotId> order;
    std::vector<int8_t> par_dir(size_t(s.size()), -1);
    std::vector<uint8_t> seen(size_t(s.size()), 0);
    seen[size_t(r)] = 1;
    while (!stack.empty()) {
        auto [u, pd] = stack.back();
        stack.pop_back();
        order.push_back(u);
        par_dir[size_t(u)] = pd;
        for (Direction d : kAllDirs) {
            if (!tree_has_edge(t, u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (seen[size_t(v)]) continue;
            seen[size_t(v)] = 1;
            stack.push_back({v, int8_t(dir_index(opposite(d)))});
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        AmoebotId u = *it;
        bool meets = in_q[size_t(u)] != 0;
        for (Direction d : kAllDirs) {
            if (!tree_has_edge(t, u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (par_dir[size_t(v)] == dir_index(opposite(d)) && res.in_vq[size_t(v)])
                meets = true;
        }
        if (meets) {
            res.in_vq[size_t(u)] = 1;
            res.parent[size_t(u)] = par_dir[size_t(u)];
        }
    }
    return res;
}

AmoebotId brute_election(const AmoebotStructure& s, const TreeMask& t,
                         AmoebotId r, const std::vector<uint8_t>& in_q) {
    if (tree_degree(t, r) == 0) return in_q[size_t(r)] ? r : kNoAmoebot;
    for (const TourStep& st : tour_walk(s, t, r)) {
        if (in_q[size_t(st.from)] &&
            canonical_marked_dir(t, st.from) == st.dir)
            return st.from;
    }
    return kNoAmoebot;
}

std::vector<AmoebotId> brute_centroids(const AmoebotStructure& s,
                                       const TreeMask& t,
                                       const std::vector<uint8_t>& in_q) {
    // Component Q-counts via rooted subtree sums from node 0's tree.
    std::vector<AmoebotId> out;
    int total = 0;
    for (uint8_t q : in_q) total += q;
    if (total == 0) return out;
    AmoebotId root = 0;
    std::vector<int> sub(size_t(s.size()), 0);
    std::vector<std::pair<AmoebotId, int8_t>> stack{{root, -1}};
    std::vector<AmoebotId> order;
    std::vector<int8_t> par(size_t(s.size()), -1);
    std::vector<uint8_t> seen(size_t(s.size()), 0);
    seen[size_t(root)] = 1;
    while (!stack.empty()) {
        auto [u, pd] = stack.back();
        stack.pop_back();
        order.push_back(u);
        par[size_t(u)] = pd;
        for (Direction d : kAllDirs) {
            if (!tree_has_edge(t, u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (!seen[size_t(v)]) {
                seen[size_t(v)] = 1;
                stack.push_back({v, int8_t(dir_index(opposite(d)))});
            }
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        AmoebotId u = *it;
        sub[size_t(u)] = in_q[size_t(u)] ? 1 : 0;
        for (Direction d : kAllDirs) {
            if (!tree_has_edge(t, u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (par[size_t(v)] == dir_index(opposite(d))) sub[size_t(u)] += sub[size_t(v)];
        }
    }
    for (AmoebotId u = 0; u < s.size(); ++u) {
        if (!in_q[size_t(u)]) continue;
        bool centroid = true;
        for (Direction d : kAllDirs) {
            if (!tree_has_edge(t, u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            int comp = (par[size_t(v)] == dir_index(opposite(d)))
                           ? sub[size_t(v)]
                           : total - sub[size_t(u)];
            if (2 * comp > total) centroid = false;
        }
        if (centroid) out.push_back(u);
    }
    return out;
}

std::vector<AmoebotId> brute_augmentation(const AmoebotStructure& s,
                                          const TreeMask& t, AmoebotId r,
                                          const std::vector<uint8_t>& in_q) {
    auto prune = brute_root_and_prune(s, t, r, in_q);
    std::vector<AmoebotId> out;
    for (AmoebotId u = 0; u < s.size(); ++u) {
        if (!prune.in_vq[size_t(u)]) continue;
        int deg = 0;
        for (Direction d : kAllDirs) {
            if (!tree_has_edge(t, u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (prune.in_vq[size_t(v)] &&
                (prune.parent[size_t(u)] == dir_index(d) ||
                 prune.parent[size_t(v)] == dir_index(opposite(d))))
                ++deg;
        }
        if (deg >= 3) out.push_back(u);
    }
    return out;
}

namespace {

struct ZoneCtx {
    const AmoebotStructure& s;
    const TreeMask& t;
    const std::vector<uint8_t>& in_qprime;
    std::vector<int>& level;
    std::vector<uint8_t> zone_of_current;
};

// Centroids of in_qprime within a node subset (zone) of the tree.
std::vector<AmoebotId> zone_centroids(const AmoebotStructure& s,
                                      const TreeMask& t,
                                      const std::vector<uint8_t>& zone,
                                      const std::vector<uint8_t>& in_q,
                                      AmoebotId zr) {
    int total = 0;
    for (AmoebotId u = 0; u < s.size(); ++u)
        if (zone[size_t(u)] && in_q[size_t(u)]) ++total;
    std::vector<AmoebotId> out;
    if (total == 0) return out;
    // Rooted subtree sums within the zone.
    std::vector<int> sub(size_t(s.size()), 0);
    std::vector<int8_t> par(size_t(s.size()), -1);
    std::vector<AmoebotId> order;
    std::vector<uint8_t> seen(size_t(s.size()), 0);
    std::vector<std::pair<AmoebotId, int8_t>> stack{{zr, -1}};
    seen[size_t(zr)] = 1;
    while (!stack.empty()) {
        auto [u, pd] = stack.back();
        stack.pop_back();
        order.push_back(u);
        par[size_t(u)] = pd;
        for (Direction d : kAllDirs) {
            if (!tree_has_edge(t, u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (!zone[size_t(v)] || seen[size_t(v)]) continue;
            seen[size_t(v)] = 1;
            stack.push_back({v, int8_t(dir_index(opposite(d)))});
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        AmoebotId u = *it;
        sub[size_t(u)] = in_q[size_t(u)] ? 1 : 0;
        for (Direction d : kAllDirs) {
            if (!tree_has_edge(t, u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (zone[size_t(v)] && seen[size_t(v)] &&
                par[size_t(v)] == dir_index(opposite(d)))
                sub[size_t(u)] += sub[size_t(v)];
        }
    }
    for (AmoebotId u : order) {
        if (!in_q[size_t(u)]) continue;
        bool centroid = true;
        for (Direction d : kAllDirs) {
            if (!tree_has_edge(t, u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (!zone[size_t(v)]) continue;
            int comp = (par[size_t(v)] == dir_index(opposite(d)))
                           ? sub[size_t(v)]
                           : total - sub[size_t(u)];
            if (2 * comp > total) centroid = false;
        }
        if (centroid) out.push_back(u);
    }
    return out;
}

// First centroid on the canonical tour of the zone from zr.
AmoebotId zone_elect(const AmoebotStructure& s, const TreeMask& t,
                     const std::vector<uint8_t>& zone,
                     const std::vector<AmoebotId>& centroids, AmoebotId zr) {
    std::vector<uint8_t> is_c(size_t(s.size()), 0);
    for (AmoebotId c : centroids) is_c[size_t(c)] = 1;
    // Tree mask restricted to the zone.
    TreeMask zt(size_t(s.size()), 0);
    for (AmoebotId u = 0; u < s.size(); ++u) {
        if (!zone[size_t(u)]) continue;
        for (Direction d : kAllDirs) {
            if (!tree_has_edge(t, u, d)) continue;
            AmoebotId v = s.neighbor(u, d);
            if (zone[size_t(v)]) zt[size_t(u)] |= uint8_t(1u << dir_index(d));
        }
    }
    if (tree_degree(zt, zr) == 0) return is_c[size_t(zr)] ? zr : kNoAmoebot;
    for (const TourStep& st : tour_walk(s, zt, zr)) {
        if (is_c[size_t(st.from)] && canonical_marked_dir(zt, st.from) == st.dir)
            return st.from;
    }
    return kNoAmoebot;
}

void decompose_zone(ZoneCtx& ctx, std::vector<uint8_t> zone, AmoebotId zr,
                    int depth) {
    int qcount = 0;
    for (AmoebotId u = 0; u < ctx.s.size(); ++u)
        if (zone[size_t(u)] && ctx.in_qprime[size_t(u)]) ++qcount;
    if (qcount == 0) return;
    auto cents = zone_centroids(ctx.s, ctx.t, zone, ctx.in_qprime, zr);
    AmoebotId c = zone_elect(ctx.s, ctx.t, zone, cents, zr);
    if (c == kNoAmoebot) return;  // no centroid: undefined for raw Q sets
    ctx.level[size_t(c)] = depth;
    // Recurse into the components of zone minus c.
    for (Direction d : kAllDirs) {
        if (!tree_has_edge(ctx.t, c, d)) continue;
        AmoebotId u = ctx.s.neighbor(c, d);
        if (!zone[size_t(u)]) continue;
        // Collect the component containing u.
        std::vector<uint8_t> part(size_t(ctx.s.size()), 0);
        std::deque<AmoebotId> queue{u};
        part[size_t(u)] = 1;
        while (!queue.empty()) {
            AmoebotId w = queue.front();
            queue.pop_front();
            for (Direction e : kAllDirs) {
                if (!tree_has_edge(ctx.t, w, e)) continue;
                AmoebotId x = ctx.s.neighbor(w, e);
                if (x == c || !zone[size_t(x)] || part[size_t(x)]) continue;
                part[size_t(x)] = 1;
                queue.push_back(x);
            }
        }
        decompose_zone(ctx, std::move(part), u, depth + 1);
    }
}

}  // namespace

std::vector<int> brute_decomposition(const AmoebotStructure& s,
                                     const TreeMask& t, AmoebotId r,
                                     const std::vector<uint8_t>& in_qprime) {
    std::vector<int> level(size_t(s.size()), -1);
    ZoneCtx ctx{s, t, in_qprime, level, {}};
    std::vector<uint8_t> all(size_t(s.size()), 1);
    decompose_zone(ctx, std::move(all), r, 0);
    return level;
}

}  // namespace amoebot::oracle
