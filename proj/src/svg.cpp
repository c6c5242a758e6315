#include "amoebot/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace amoebot {

namespace {

constexpr double kUnit = 24.0;
constexpr double kSqrt3Half = 0.8660254037844386;

struct Point {
    double x, y;
};

Point embed(NodeCoord u) {
    // SVG y grows downward; flip so north is up.
    return {kUnit * (u.a + 0.5 * u.b), -kUnit * (kSqrt3Half * u.b)};
}

std::string fmt(double v) {
    char buf[32];
    snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

const char* kCircuitColors[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3",
                                "#ff7f00", "#a65628", "#f781bf", "#17becf"};

}  // namespace

std::string render_svg(const AmoebotStructure& s, const ParentForest* forest,
                       const CircuitOverlay* overlay) {
    double minx = 1e18, miny = 1e18, maxx = -1e18, maxy = -1e18;
    for (AmoebotId i = 0; i < s.size(); ++i) {
        Point p = embed(s.coord(i));
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    double pad = kUnit;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
       << fmt(minx - pad) << " " << fmt(miny - pad) << " "
       << fmt(maxx - minx + 2 * pad) << " " << fmt(maxy - miny + 2 * pad)
       << "\">\n";
    os << "<defs><marker id=\"arrow\" viewBox=\"0 0 8 8\" refX=\"7\" refY=\"4\""
          " markerWidth=\"5\" markerHeight=\"5\" orient=\"auto\">"
          "<path d=\"M0,0 L8,4 L0,8 z\" fill=\"#c22\"/></marker></defs>\n";

    // Grid edges.
    os << "<g stroke=\"#ccc\" stroke-width=\"1\">\n";
    for (AmoebotId i = 0; i < s.size(); ++i) {
        for (Direction d : {Direction::E, Direction::NE, Direction::NW}) {
            AmoebotId j = s.neighbor(i, d);
            if (j == kNoAmoebot) continue;
            Point a = embed(s.coord(i)), b = embed(s.coord(j));
            os << "<line x1=\"" << fmt(a.x) << "\" y1=\"" << fmt(a.y)
               << "\" x2=\"" << fmt(b.x) << "\" y2=\"" << fmt(b.y) << "\"/>\n";
        }
    }
    os << "</g>\n";

    if (overlay) {
        os << "<g fill=\"none\" stroke-width=\"2.5\" opacity=\"0.7\">\n";
        for (size_t c = 0; c < overlay->circuits.size(); ++c) {
            const char* color = kCircuitColors[c % 8];
            for (auto [u, v] : overlay->circuits[c]) {
                Point a = embed(s.coord(u)), b = embed(s.coord(v));
                os << "<line stroke=\"" << color << "\" x1=\"" << fmt(a.x)
                   << "\" y1=\"" << fmt(a.y) << "\" x2=\"" << fmt(b.x)
                   << "\" y2=\"" << fmt(b.y) << "\"/>\n";
            }
        }
        os << "</g>\n";
    }

    if (forest) {
        os << "<g stroke=\"#c22\" stroke-width=\"2\">\n";
        for (AmoebotId i = 0; i < s.size(); ++i) {
            if (!forest->member[size_t(i)] || !forest->has_parent(i)) continue;
            AmoebotId p = s.neighbor(i, forest->parent_dir(i));
            if (p == kNoAmoebot) continue;
            Point a = embed(s.coord(i)), b = embed(s.coord(p));
            // Shorten toward the target so the arrowhead stays visible.
            double dx = b.x - a.x, dy = b.y - a.y;
            double len = std::sqrt(dx * dx + dy * dy);
            double cut = 7.0 / len;
            os << "<line marker-end=\"url(#arrow)\" x1=\"" << fmt(a.x)
               << "\" y1=\"" << fmt(a.y) << "\" x2=\""
               << fmt(b.x - dx * cut) << "\" y2=\"" << fmt(b.y - dy * cut)
               << "\"/>\n";
        }
        os << "</g>\n";
    }

    os << "<g stroke=\"#333\" stroke-width=\"1\">\n";
    for (AmoebotId i = 0; i < s.size(); ++i) {
        Point p = embed(s.coord(i));
        const char* fill = "#e8e8e8";
        if (s.is_source(i)) fill = "#2b8a3e";
        else if (s.is_dest(i)) fill = "#e8590c";
        os << "<circle cx=\"" << fmt(p.x) << "\" cy=\"" << fmt(p.y)
           << "\" r=\"" << fmt(kUnit * 0.33) << "\" fill=\"" << fill << "\"/>";
        if (s.is_dest(i) && s.is_source(i))
            os << "<circle cx=\"" << fmt(p.x) << "\" cy=\"" << fmt(p.y)
               << "\" r=\"" << fmt(kUnit * 0.18) << "\" fill=\"#e8590c\"/>";
        if (s.is_leader(i))
            os << "<circle cx=\"" << fmt(p.x) << "\" cy=\"" << fmt(p.y)
               << "\" r=\"" << fmt(kUnit * 0.45)
               << "\" fill=\"none\" stroke=\"#1864ab\" stroke-width=\"2\"/>";
        os << "\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace amoebot
