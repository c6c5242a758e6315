#include "amoebot/structure.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "amoebot/rng.hpp"

namespace amoebot {

AmoebotStructure::AmoebotStructure(std::vector<NodeCoord> nodes)
    : nodes_(std::move(nodes)) {
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    flags_.assign(nodes_.size(), 0);
    index_.reserve(nodes_.size() * 2);
    for (size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i]] = AmoebotId(i);
    neighbors_.resize(nodes_.size());
    nbr_mask_.assign(nodes_.size(), 0);
    for (size_t i = 0; i < nodes_.size(); ++i) {
        for (Direction d : kAllDirs) {
            AmoebotId j = index_of(step(nodes_[i], d));
            neighbors_[i][dir_index(d)] = j;
            if (j != kNoAmoebot) nbr_mask_[i] |= uint8_t(1u << dir_index(d));
        }
    }
}

AmoebotId AmoebotStructure::index_of(NodeCoord u) const {
    auto it = index_.find(u);
    return it == index_.end() ? kNoAmoebot : it->second;
}

int AmoebotStructure::degree(AmoebotId i) const {
    return std::popcount(uint32_t(nbr_mask_[size_t(i)]));
}

void AmoebotStructure::set_source(AmoebotId i, bool v) {
    if (v) flags_[size_t(i)] |= kSource;
    else flags_[size_t(i)] &= uint8_t(~kSource);
}

void AmoebotStructure::set_dest(AmoebotId i, bool v) {
    if (v) flags_[size_t(i)] |= kDest;
    else flags_[size_t(i)] &= uint8_t(~kDest);
}

void AmoebotStructure::set_leader(AmoebotId i) {
    for (auto& f : flags_) f &= uint8_t(~kLeader);
    flags_[size_t(i)] |= kLeader;
}

std::vector<AmoebotId> AmoebotStructure::sources() const {
    std::vector<AmoebotId> out;
    for (AmoebotId i = 0; i < size(); ++i)
        if (is_source(i)) out.push_back(i);
    return out;
}

std::vector<AmoebotId> AmoebotStructure::destinations() const {
    std::vector<AmoebotId> out;
    for (AmoebotId i = 0; i < size(); ++i)
        if (is_dest(i)) out.push_back(i);
    return out;
}

AmoebotId AmoebotStructure::leader() const {
    for (AmoebotId i = 0; i < size(); ++i)
        if (is_leader(i)) return i;
    return kNoAmoebot;
}

uint64_t AmoebotStructure::digest() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            h ^= (v >> (8 * k)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (size_t i = 0; i < nodes_.size(); ++i) {
        mix(uint64_t(uint32_t(nodes_[i].a)));
        mix(uint64_t(uint32_t(nodes_[i].b)));
        mix(flags_[i]);
    }
    return h;
}

std::string ValidationReport::to_string() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (const auto& v : violations) {
        switch (v.kind) {
            case StructureViolation::Kind::Connectivity: os << "connectivity: "; break;
            case StructureViolation::Kind::Hole: os << "hole: "; break;
            case StructureViolation::Kind::Annotation: os << "annotation: "; break;
        }
        os << v.detail << "\n";
    }
    return os.str();
}

ValidationReport validate_structure(const AmoebotStructure& s) {
    ValidationReport report;
    if (s.size() == 0) {
        report.violations.push_back(
            {StructureViolation::Kind::Connectivity, "structure is empty"});
        return report;
    }

    // Connectivity of G_X.
    std::vector<uint8_t> seen(size_t(s.size()), 0);
    std::deque<AmoebotId> queue{0};
    seen[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
        AmoebotId u = queue.front();
        queue.pop_front();
        for (Direction d : kAllDirs) {
            AmoebotId v = s.neighbor(u, d);
            if (v != kNoAmoebot && !seen[size_t(v)]) {
                seen[size_t(v)] = 1;
                ++reached;
                queue.push_back(v);
            }
        }
    }
    if (reached != s.size()) {
        std::ostringstream os;
        os << "induced graph has " << (s.size() - reached)
           << " node(s) unreachable from " << s.coord(0).a << " " << s.coord(0).b;
        report.violations.push_back(
            {StructureViolation::Kind::Connectivity, os.str()});
    }

    // Hole-freeness: flood the complement from outside the bounding box
    // expanded by one ring; enclosed unoccupied nodes are holes.
    int32_t amin = INT32_MAX, amax = INT32_MIN, bmin = INT32_MAX, bmax = INT32_MIN;
    for (const auto& u : s.nodes()) {
        amin = std::min(amin, u.a);
        amax = std::max(amax, u.a);
        bmin = std::min(bmin, u.b);
        bmax = std::max(bmax, u.b);
    }
    --amin; ++amax; --bmin; ++bmax;
    int64_t W = int64_t(amax) - amin + 1, H = int64_t(bmax) - bmin + 1;
    auto cell = [&](NodeCoord u) { return size_t(u.b - bmin) * size_t(W) + size_t(u.a - amin); };
    std::vector<uint8_t> mark(size_t(W * H), 0);  // 1 = flooded complement
    std::deque<NodeCoord> flood{{amin, bmin}};
    mark[cell({amin, bmin})] = 1;
    while (!flood.empty()) {
        NodeCoord u = flood.front();
        flood.pop_front();
        for (Direction d : kAllDirs) {
            NodeCoord v = step(u, d);
            if (v.a < amin || v.a > amax || v.b < bmin || v.b > bmax) continue;
            if (mark[cell(v)] || s.occupied(v)) continue;
            mark[cell(v)] = 1;
            flood.push_back(v);
        }
    }
    int holes = 0;
    NodeCoord first_hole{};
    for (int32_t b = bmin; b <= bmax; ++b) {
        for (int32_t a = amin; a <= amax; ++a) {
            NodeCoord u{a, b};
            if (!s.occupied(u) && !mark[cell(u)]) {
                if (holes == 0) first_hole = u;
                ++holes;
            }
        }
    }
    if (holes > 0) {
        std::ostringstream os;
        os << holes << " enclosed node(s), e.g. " << first_hole.a << " "
           << first_hole.b;
        report.violations.push_back({StructureViolation::Kind::Hole, os.str()});
    }

    if (s.sources().empty())
        report.violations.push_back(
            {StructureViolation::Kind::Annotation, "no source"});
    if (s.destinations().empty())
        report.violations.push_back(
            {StructureViolation::Kind::Annotation, "no destination"});
    if (s.leader() == kNoAmoebot)
        report.violations.push_back(
            {StructureViolation::Kind::Annotation, "no leader"});
    return report;
}

std::vector<int> portal_ids(const AmoebotStructure& s, Axis axis) {
    std::vector<int> id(size_t(s.size()), -1);
    Direction pos = axis_positive_dir(axis);
    Direction neg = opposite(pos);
    int next = 0;
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (s.neighbor(i, neg) != kNoAmoebot) continue;  // not a run start
        int pid = next++;
        for (AmoebotId j = i; j != kNoAmoebot; j = s.neighbor(j, pos))
            id[size_t(j)] = pid;
    }
    return id;
}

std::vector<Portal> portals(const AmoebotStructure& s, Axis axis) {
    std::vector<Portal> out;
    Direction pos = axis_positive_dir(axis);
    Direction neg = opposite(pos);
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (s.neighbor(i, neg) != kNoAmoebot) continue;
        Portal p;
        p.axis = axis;
        for (AmoebotId j = i; j != kNoAmoebot; j = s.neighbor(j, pos))
            p.members.push_back(j);
        out.push_back(std::move(p));
    }
    return out;
}

bool ipg_edge_local_rule(const AmoebotStructure& s, AmoebotId i, Direction d,
                         Axis axis) {
    return ipg_edge_rule(
        [&](Direction q) { return s.neighbor(i, q) != kNoAmoebot; }, d, axis);
}

ImplicitPortalGraph implicit_portal_graph(const AmoebotStructure& s, Axis axis) {
    ImplicitPortalGraph g;
    g.axis = axis;
    g.edge_mask.assign(size_t(s.size()), 0);
    for (AmoebotId i = 0; i < s.size(); ++i)
        for (Direction d : kAllDirs)
            if (ipg_edge_local_rule(s, i, d, axis))
                g.edge_mask[size_t(i)] |= uint8_t(1u << dir_index(d));
    return g;
}

int ImplicitPortalGraph::edge_count() const {
    int total = 0;
    for (uint8_t m : edge_mask) total += std::popcount(uint32_t(m));
    return total / 2;
}

int portal_distance(const AmoebotStructure& s, Axis axis, NodeCoord u,
                    NodeCoord v) {
    AmoebotId ui = s.index_of(u), vi = s.index_of(v);
    if (ui == kNoAmoebot || vi == kNoAmoebot)
        throw std::invalid_argument("portal_distance: node not occupied");
    std::vector<int> pid = portal_ids(s, axis);
    int np = *std::max_element(pid.begin(), pid.end()) + 1;
    // Portal adjacency from grid edges.
    auto adj = std::vector<std::vector<int>>(size_t(np));
    for (AmoebotId i = 0; i < s.size(); ++i) {
        for (Direction d : kAllDirs) {
            AmoebotId j = s.neighbor(i, d);
            if (j == kNoAmoebot || pid[size_t(i)] == pid[size_t(j)]) continue;
            adj[size_t(pid[size_t(i)])].push_back(pid[size_t(j)]);
        }
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    std::vector<int> dist(size_t(np), -1);
    std::deque<int> queue{pid[size_t(ui)]};
    dist[size_t(pid[size_t(ui)])] = 0;
    while (!queue.empty()) {
        int p = queue.front();
        queue.pop_front();
        for (int q : adj[size_t(p)]) {
            if (dist[size_t(q)] < 0) {
                dist[size_t(q)] = dist[size_t(p)] + 1;
                queue.push_back(q);
            }
        }
    }
    return dist[size_t(pid[size_t(vi)])];
}

AmoebotStructure generate_random_structure(uint64_t seed, int n,
                                           const RandomStructureOptions& opt) {
    if (n < 1) throw std::invalid_argument("generate_random_structure: n < 1");
    Rng rng(seed);
    std::unordered_set<NodeCoord, NodeCoordHash> occ;
    std::vector<NodeCoord> frontier;
    std::unordered_set<NodeCoord, NodeCoordHash> in_frontier;
    auto push_frontier = [&](NodeCoord u) {
        if (!occ.count(u) && in_frontier.insert(u).second) frontier.push_back(u);
    };
    occ.insert({0, 0});
    for (Direction d : kAllDirs) push_frontier(step({0, 0}, d));

    while (int(occ.size()) < n) {
        // Biased boundary attachment: prefer candidates with many occupied
        // neighbors unless a straggle draw picks uniformly.
        size_t pick = 0;
        if (rng.unit() < opt.straggle) {
            pick = size_t(rng.below(frontier.size()));
        } else {
            int best = -1;
            // Sample a few candidates and keep the most embedded one.
            for (int t = 0; t < 4; ++t) {
                size_t c = size_t(rng.below(frontier.size()));
                int emb = 0;
                for (Direction d : kAllDirs)
                    if (occ.count(step(frontier[c], d))) ++emb;
                if (emb > best) {
                    best = emb;
                    pick = c;
                }
            }
        }
        NodeCoord u = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        in_frontier.erase(u);
        occ.insert(u);
        for (Direction d : kAllDirs) push_frontier(step(u, d));
    }

    // Fill enclosed pockets so the structure is hole-free.
    int32_t amin = 0, amax = 0, bmin = 0, bmax = 0;
    for (const auto& u : occ) {
        amin = std::min(amin, u.a);
        amax = std::max(amax, u.a);
        bmin = std::min(bmin, u.b);
        bmax = std::max(bmax, u.b);
    }
    --amin; ++amax; --bmin; ++bmax;
    int64_t W = int64_t(amax) - amin + 1, H = int64_t(bmax) - bmin + 1;
    auto cell = [&](NodeCoord u) { return size_t(u.b - bmin) * size_t(W) + size_t(u.a - amin); };
    std::vector<uint8_t> outside(size_t(W * H), 0);
    std::deque<NodeCoord> flood{{amin, bmin}};
    outside[cell({amin, bmin})] = 1;
    while (!flood.empty()) {
        NodeCoord u = flood.front();
        flood.pop_front();
        for (Direction d : kAllDirs) {
            NodeCoord v = step(u, d);
            if (v.a < amin || v.a > amax || v.b < bmin || v.b > bmax) continue;
            if (outside[cell(v)] || occ.count(v)) continue;
            outside[cell(v)] = 1;
            flood.push_back(v);
        }
    }
    std::vector<NodeCoord> nodes(occ.begin(), occ.end());
    for (int32_t b = bmin; b <= bmax; ++b)
        for (int32_t a = amin; a <= amax; ++a)
            if (!occ.count({a, b}) && !outside[cell({a, b})])
                nodes.push_back({a, b});

    AmoebotStructure s(std::move(nodes));

    // Annotations: sampled without replacement from the final node set.
    int k = std::clamp(opt.num_sources, 1, s.size());
    int l = std::clamp(opt.num_dests, 1, s.size());
    auto sample = [&](int count, auto setter) {
        std::vector<AmoebotId> ids(size_t(s.size()));
        for (AmoebotId i = 0; i < s.size(); ++i) ids[size_t(i)] = i;
        for (int t = 0; t < count; ++t) {
            size_t j = size_t(t) + size_t(rng.below(uint64_t(ids.size() - size_t(t))));
            std::swap(ids[size_t(t)], ids[j]);
            setter(ids[size_t(t)]);
        }
    };
    sample(k, [&](AmoebotId i) { s.set_source(i, true); });
    sample(l, [&](AmoebotId i) { s.set_dest(i, true); });
    s.set_leader(s.sources().front());
    return s;
}

std::optional<AmoebotStructure> parse_structure(const std::string& text,
                                                ParseError& err) {
    std::vector<NodeCoord> nodes;
    struct Rec { NodeCoord u; bool s, d, l; };
    std::vector<Rec> recs;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        long long a, b;
        if (!(ls >> a)) continue;  // blank
        if (!(ls >> b)) {
            err = {lineno, "expected two integer coordinates"};
            return std::nullopt;
        }
        if (a < INT32_MIN || a > INT32_MAX || b < INT32_MIN || b > INT32_MAX) {
            err = {lineno, "coordinate out of range"};
            return std::nullopt;
        }
        Rec r{{int32_t(a), int32_t(b)}, false, false, false};
        std::string flags;
        if (ls >> flags) {
            for (char c : flags) {
                switch (c) {
                    case 'S': r.s = true; break;
                    case 'D': r.d = true; break;
                    case 'L': r.l = true; break;
                    default:
                        err = {lineno, std::string("unknown flag '") + c + "'"};
                        return std::nullopt;
                }
            }
        }
        std::string extra;
        if (ls >> extra) {
            err = {lineno, "trailing content '" + extra + "'"};
            return std::nullopt;
        }
        recs.push_back(r);
        nodes.push_back(r.u);
    }
    if (recs.empty()) {
        err = {lineno, "no records"};
        return std::nullopt;
    }
    {
        auto sorted = nodes;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            err = {lineno, "duplicate coordinate record"};
            return std::nullopt;
        }
    }
    AmoebotStructure s(std::move(nodes));
    int leaders = 0;
    for (const auto& r : recs) {
        AmoebotId i = s.index_of(r.u);
        if (r.s) s.set_source(i, true);
        if (r.d) s.set_dest(i, true);
        if (r.l) {
            s.set_leader(i);
            ++leaders;
        }
    }
    if (leaders != 1) {
        err = {lineno, "expected exactly one L record, found " +
                           std::to_string(leaders)};
        return std::nullopt;
    }
    return s;
}

std::string write_structure(const AmoebotStructure& s) {
    std::ostringstream os;
    for (AmoebotId i = 0; i < s.size(); ++i) {
        NodeCoord u = s.coord(i);
        os << u.a << " " << u.b;
        std::string flags;
        if (s.is_source(i)) flags += 'S';
        if (s.is_dest(i)) flags += 'D';
        if (s.is_leader(i)) flags += 'L';
        if (!flags.empty()) os << " " << flags;
        os << "\n";
    }
    return os.str();
}

std::optional<AmoebotStructure> load_structure_file(const std::string& path,
                                                    ParseError& err) {
    std::ifstream in(path);
    if (!in) {
        err = {0, "cannot open '" + path + "'"};
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_structure(buf.str(), err);
}

bool save_structure_file(const AmoebotStructure& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) return false;
    out << write_structure(s);
    return bool(out);
}

std::string write_forest(const AmoebotStructure& s, const ParentForest& f) {
    std::ostringstream os;
    for (AmoebotId i = 0; i < s.size(); ++i) {
        NodeCoord u = s.coord(i);
        os << u.a << " " << u.b << " ";
        if (!f.member[size_t(i)]) os << "NONE";
        else if (!f.has_parent(i)) os << "ROOT";
        else os << direction_name(f.parent_dir(i));
        os << "\n";
    }
    return os.str();
}

std::optional<ParentForest> parse_forest(const AmoebotStructure& s,
                                         const std::string& text,
                                         ParseError& err) {
    ParentForest f(s.size());
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        long long a, b;
        std::string tok;
        if (!(ls >> a)) continue;
        if (!(ls >> b >> tok)) {
            err = {lineno, "expected `a b parent`"};
            return std::nullopt;
        }
        AmoebotId i = s.index_of({int32_t(a), int32_t(b)});
        if (i == kNoAmoebot) {
            err = {lineno, "coordinate not in structure"};
            return std::nullopt;
        }
        if (tok == "NONE") {
            f.member[size_t(i)] = 0;
        } else if (tok == "ROOT") {
            f.member[size_t(i)] = 1;
        } else {
            Direction d;
            if (!parse_direction(tok, d)) {
                err = {lineno, "unknown parent '" + tok + "'"};
                return std::nullopt;
            }
            f.member[size_t(i)] = 1;
            f.parent[size_t(i)] = int8_t(dir_index(d));
        }
    }
    return f;
}

}  // namespace amoebot
