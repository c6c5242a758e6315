"""Smoke tests for the native module."""

import amoebot


def test_generate_and_validate():
    s = amoebot.generate(seed=3, n=80, k=2, l=4)
    assert s.n >= 80
    assert s.validate()
    assert len(s.sources) == 2
    assert len(s.destinations) == 4
    # Deterministic in the seed.
    assert s.digest() == amoebot.generate(seed=3, n=80, k=2, l=4).digest()


def test_parse_roundtrip():
    s = amoebot.generate(seed=5, n=40)
    again = amoebot.parse(s.write())
    assert again.digest() == s.digest()


def test_spt_valid_and_shortest():
    s = amoebot.generate(seed=7, n=120, k=1, l=6)
    out = amoebot.compute_spt(s)
    assert out["valid"]
    assert out["stats"]["rounds_total"] > 0
    # Walk one destination to its root and compare with the BFS oracle.
    dist = amoebot.bfs_distances(s)
    parents = out["parents"]
    step = {
        "E": (1, 0), "NE": (0, 1), "NW": (-1, 1),
        "W": (-1, 0), "SW": (0, -1), "SE": (1, -1),
    }
    for d in s.destinations:
        hops, node = 0, tuple(d)
        while parents[node] is not None:
            da, db = step[parents[node]]
            node = (node[0] + da, node[1] + db)
            hops += 1
        assert hops == dist[tuple(d)]


def test_spf_multi_source():
    s = amoebot.generate(seed=11, n=150, k=4, l=8)
    out = amoebot.compute_spf(s)
    assert out["valid"]
    assert out["stats"]["max_counter_bits"] <= 16


def test_portals_partition():
    s = amoebot.generate(seed=2, n=60)
    for axis in ("x", "y", "z"):
        runs = amoebot.portals(s, axis)
        members = [c for run in runs for c in run]
        assert len(members) == s.n
        assert len(set(members)) == s.n


def test_render_svg():
    s = amoebot.generate(seed=1, n=30)
    svg = amoebot.render_svg(s)
    assert svg.startswith("<svg")
