// Python bindings for the main operations: structure generation and I/O,
// validation, portals, the two shortest-path algorithms, and the oracle.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "amoebot/oracle.hpp"
#include "amoebot/spf.hpp"
#include "amoebot/spt.hpp"
#include "amoebot/svg.hpp"

namespace py = pybind11;
using namespace amoebot;

namespace {

std::vector<std::pair<int, int>> coords_of(const AmoebotStructure& s) {
    std::vector<std::pair<int, int>> out;
    out.reserve(size_t(s.size()));
    for (AmoebotId i = 0; i < s.size(); ++i)
        out.push_back({s.coord(i).a, s.coord(i).b});
    return out;
}

py::dict stats_dict(const RoundStats& stats) {
    py::dict phases;
    for (const auto& [label, rounds] : stats.rounds_per_phase)
        phases[py::str(label)] = rounds;
    py::dict d;
    d["rounds_total"] = stats.rounds_total;
    d["rounds_per_phase"] = phases;
    d["max_state_bits"] = stats.max_state_bits;
    d["max_counter_bits"] = stats.max_counter_bits;
    return d;
}

py::dict forest_dict(const AmoebotStructure& s, const ParentForest& f) {
    py::dict parents;
    for (AmoebotId i = 0; i < s.size(); ++i) {
        if (!f.member[size_t(i)]) continue;
        auto key = py::make_tuple(s.coord(i).a, s.coord(i).b);
        if (f.has_parent(i))
            parents[key] = py::str(direction_name(f.parent_dir(i)));
        else
            parents[key] = py::none();
    }
    return parents;
}

}  // namespace

PYBIND11_MODULE(_amoebot, m) {
    m.doc() = "Amoebot circuit simulator with shortest-path-forest algorithms";

    py::class_<AmoebotStructure>(m, "Structure")
        .def_property_readonly("n", &AmoebotStructure::size)
        .def_property_readonly("coords",
                               [](const AmoebotStructure& s) { return coords_of(s); })
        .def_property_readonly("sources",
                               [](const AmoebotStructure& s) {
                                   std::vector<std::pair<int, int>> out;
                                   for (AmoebotId i : s.sources())
                                       out.push_back({s.coord(i).a, s.coord(i).b});
                                   return out;
                               })
        .def_property_readonly("destinations",
                               [](const AmoebotStructure& s) {
                                   std::vector<std::pair<int, int>> out;
                                   for (AmoebotId i : s.destinations())
                                       out.push_back({s.coord(i).a, s.coord(i).b});
                                   return out;
                               })
        .def("validate",
             [](const AmoebotStructure& s) { return validate_structure(s).ok(); })
        .def("validation_report",
             [](const AmoebotStructure& s) {
                 return validate_structure(s).to_string();
             })
        .def("write", [](const AmoebotStructure& s) { return write_structure(s); })
        .def("digest", &AmoebotStructure::digest)
        .def("__repr__", [](const AmoebotStructure& s) {
            return "<amoebot.Structure n=" + std::to_string(s.size()) + ">";
        });

    m.def(
        "generate",
        [](uint64_t seed, int n, int k, int l) {
            RandomStructureOptions opt;
            opt.num_sources = k;
            opt.num_dests = l;
            return generate_random_structure(seed, n, opt);
        },
        py::arg("seed"), py::arg("n"), py::arg("k") = 1, py::arg("l") = 1,
        "Generate a random connected hole-free structure");

    m.def(
        "parse",
        [](const std::string& text) {
            ParseError err;
            auto s = parse_structure(text, err);
            if (!s)
                throw py::value_error("line " + std::to_string(err.line) + ": " +
                                      err.message);
            return std::move(*s);
        },
        py::arg("text"), "Parse the `a b [SDL]` structure format");

    m.def(
        "bfs_distances",
        [](const AmoebotStructure& s, bool from_sources) {
            auto roots = from_sources ? s.sources() : std::vector<AmoebotId>{0};
            auto field = oracle::bfs_distances(s, roots);
            py::dict out;
            for (AmoebotId i = 0; i < s.size(); ++i)
                out[py::make_tuple(s.coord(i).a, s.coord(i).b)] =
                    field.dist[size_t(i)];
            return out;
        },
        py::arg("structure"), py::arg("from_sources") = true,
        "Exact multi-source BFS distances (oracle)");

    m.def(
        "compute_spt",
        [](const AmoebotStructure& s, int pins) {
            auto res = compute_spt(s, pins);
            py::dict out;
            out["parents"] = forest_dict(s, res.forest);
            out["stats"] = stats_dict(res.stats);
            bool ok = oracle::validate_forest(s, s.sources(), s.destinations(),
                                              res.forest)
                          .ok();
            out["valid"] = ok;
            return out;
        },
        py::arg("structure"), py::arg("pins") = kSptConcurrentPins,
        "Single-source shortest-path tree (k = 1)");

    m.def(
        "compute_spf",
        [](const AmoebotStructure& s, int pins) {
            auto res = compute_spf(s, pins);
            py::dict out;
            out["parents"] = forest_dict(s, res.forest);
            out["stats"] = stats_dict(res.stats);
            bool ok = oracle::validate_forest(s, s.sources(), s.destinations(),
                                              res.forest)
                          .ok();
            out["valid"] = ok;
            return out;
        },
        py::arg("structure"), py::arg("pins") = kSpfPins,
        "Multi-source shortest-path forest");

    m.def(
        "render_svg",
        [](const AmoebotStructure& s) { return render_svg(s); },
        py::arg("structure"), "Hexagonal-lattice SVG drawing");

    m.def(
        "portals",
        [](const AmoebotStructure& s, const std::string& axis) {
            Axis ax = axis == "x" ? Axis::X : axis == "y" ? Axis::Y : Axis::Z;
            std::vector<std::vector<std::pair<int, int>>> out;
            for (const auto& p : portals(s, ax)) {
                std::vector<std::pair<int, int>> members;
                for (AmoebotId i : p.members)
                    members.push_back({s.coord(i).a, s.coord(i).b});
                out.push_back(std::move(members));
            }
            return out;
        },
        py::arg("structure"), py::arg("axis"),
        "Maximal runs of occupied nodes along an axis");
}
