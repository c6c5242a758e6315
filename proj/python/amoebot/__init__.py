"""Amoebot circuit simulator with shortest-path-forest algorithms."""

from ._amoebot import (
    Structure,
    bfs_distances,
    compute_spf,
    compute_spt,
    generate,
    parse,
    portals,
    render_svg,
)

__all__ = [
    "Structure",
    "bfs_distances",
    "compute_spf",
    "compute_spt",
    "generate",
    "parse",
    "portals",
    "render_svg",
]
