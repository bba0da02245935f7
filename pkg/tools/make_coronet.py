"""Regenerate ``src/robustnfv/data/coronet.scn``.

The CORONET CONUS city set (75 sites) is listed with approximate
coordinates.  Links are laid out geographically: a Euclidean minimum
spanning tree over the Delaunay triangulation, then the shortest remaining
Delaunay links until the graph is 2-connected and has 99 links.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import networkx as nx
import numpy as np
from scipy.spatial import Delaunay

CITIES = [
    ("Albany", 42.65, -73.76), ("Albuquerque", 35.08, -106.65),
    ("Atlanta", 33.75, -84.39), ("Austin", 30.27, -97.74),
    ("Baltimore", 39.29, -76.61), ("BatonRouge", 30.45, -91.19),
    ("Billings", 45.78, -108.50), ("Birmingham", 33.52, -86.80),
    ("Bismarck", 46.81, -100.78), ("Boston", 42.36, -71.06),
    ("Buffalo", 42.89, -78.88), ("Charleston", 32.78, -79.93),
    ("Charlotte", 35.23, -80.84), ("Chicago", 41.88, -87.63),
    ("Cincinnati", 39.10, -84.51), ("Cleveland", 41.50, -81.69),
    ("Columbus", 39.96, -83.00), ("Dallas", 32.78, -96.80),
    ("Denver", 39.74, -104.99), ("Detroit", 42.33, -83.05),
    ("ElPaso", 31.76, -106.49), ("Fresno", 36.74, -119.79),
    ("Greensboro", 36.07, -79.79), ("Hartford", 41.76, -72.69),
    ("Houston", 29.76, -95.37), ("Indianapolis", 39.77, -86.16),
    ("Jacksonville", 30.33, -81.66), ("KansasCity", 39.10, -94.58),
    ("LasVegas", 36.17, -115.14), ("LittleRock", 34.75, -92.29),
    ("LosAngeles", 34.05, -118.24), ("Louisville", 38.25, -85.76),
    ("Memphis", 35.15, -90.05), ("Miami", 25.76, -80.19),
    ("Milwaukee", 43.04, -87.91), ("Minneapolis", 44.98, -93.27),
    ("Nashville", 36.16, -86.78), ("NewOrleans", 29.95, -90.07),
    ("NewYork", 40.71, -74.01), ("Newark", 40.74, -74.17),
    ("Norfolk", 36.85, -76.29), ("Oakland", 37.80, -122.27),
    ("OklahomaCity", 35.47, -97.52), ("Omaha", 41.26, -95.93),
    ("Orlando", 28.54, -81.38), ("Philadelphia", 39.95, -75.17),
    ("Phoenix", 33.45, -112.07), ("Pittsburgh", 40.44, -80.00),
    ("Portland", 45.52, -122.68), ("Providence", 41.82, -71.41),
    ("Raleigh", 35.78, -78.64), ("Richmond", 37.54, -77.44),
    ("Rochester", 43.16, -77.61), ("Sacramento", 38.58, -121.49),
    ("SaltLakeCity", 40.76, -111.89), ("SanAntonio", 29.42, -98.49),
    ("SanDiego", 32.72, -117.16), ("SanFrancisco", 37.77, -122.42),
    ("SanJose", 37.34, -121.89), ("SantaBarbara", 34.42, -119.70),
    ("Scranton", 41.41, -75.66), ("Seattle", 47.61, -122.33),
    ("Spokane", 47.66, -117.43), ("Springfield", 42.10, -72.59),
    ("StLouis", 38.63, -90.20), ("Syracuse", 43.05, -76.15),
    ("Tallahassee", 30.44, -84.28), ("Tampa", 27.95, -82.46),
    ("Toledo", 41.65, -83.54), ("Tucson", 32.22, -110.97),
    ("Tulsa", 36.15, -95.99), ("WashingtonDC", 38.91, -77.04),
    ("WestPalmBeach", 26.72, -80.05), ("Wilmington", 39.74, -75.55),
    ("Worcester", 42.26, -71.80),
]
TARGET_LINKS = 99


def _xy(lat: float, lon: float) -> tuple[float, float]:
    return lon * math.cos(math.radians(38.0)), lat


def build() -> nx.Graph:
    names = [c[0] for c in CITIES]
    pts = np.array([_xy(lat, lon) for _, lat, lon in CITIES])
    tri = Delaunay(pts)
    cand = set()
    for simplex in tri.simplices:
        for a in range(3):
            u, v = sorted((int(simplex[a]), int(simplex[(a + 1) % 3])))
            cand.add((u, v))
    length = {e: float(np.hypot(*(pts[e[0]] - pts[e[1]]))) for e in cand}
    full = nx.Graph()
    for (u, v), w in length.items():
        full.add_edge(u, v, weight=w)
    g = nx.minimum_spanning_tree(full)
    rest = sorted(cand - {tuple(sorted(e)) for e in g.edges}, key=lambda e: (length[e], e))
    # close every bridge with the shortest link spanning it
    while not nx.is_biconnected(g):
        bridges = list(nx.bridges(g))
        best = None
        for e in rest:
            h = g.copy()
            h.add_edge(*e)
            gain = len(bridges) - sum(1 for _ in nx.bridges(h))
            if nx.is_biconnected(h):
                gain += 1000
            if gain > 0:
                key = (-gain, length[e], e)
                if best is None or key < best[0]:
                    best = (key, e)
        assert best is not None
        g.add_edge(*best[1])
        rest.remove(best[1])
    for e in rest:
        if g.number_of_edges() >= TARGET_LINKS:
            break
        g.add_edge(*e)
    assert g.number_of_edges() == TARGET_LINKS, g.number_of_edges()
    return nx.relabel_nodes(g, dict(enumerate(names)))


def main(out: Path) -> None:
    g = build()
    lines = [
        "# CORONET CONUS-style substrate: 75 sites, 99 links.",
        "# Site list follows the CORONET CONUS topology; links are a geographic",
        "# reconstruction (see tools/make_coronet.py), not an authoritative copy.",
        "[nodes]",
    ]
    lines += [f"{name} 0 -" for name, _, _ in CITIES]
    lines.append("[edges]")
    lines += [f"{u} {v} 1" for u, v in sorted(tuple(sorted(e)) for e in g.edges)]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("src/robustnfv/data/coronet.scn"))
