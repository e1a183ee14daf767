"""
Pattern densities G_i: subgraph counts of four small bipartite patterns per n.

A "mapping class" of a pattern into a lattice graph is read as a subgraph of
the lattice isomorphic to the pattern, i.e. the number of injective maps that
send pattern edges to lattice edges, divided by the pattern's automorphism
count. Non-edges of the pattern are unconstrained. The labeled count is kept
alongside so induced or homomorphism variants can be recomputed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Optional, Sequence

from .lattice import Graph, build_cycle

PATTERN_IDS = ("G1_four_loop", "G2_six_loop", "G3_theta", "G4_ladder")


@dataclass(frozen=True)
class PatternGraph:
    id: str
    graph: Graph
    automorphism_count: int
    # longest cycle inside the pattern; a lattice whose shortest
    # non-contractible cycle is longer cannot host a wrapped copy
    longest_cycle: int


def automorphism_count(p) -> int:
    """|Aut| by checking every vertex permutation; patterns have <= 8 vertices."""
    g = p.graph if isinstance(p, PatternGraph) else p
    if g.num_vertices > 8:
        raise ValueError("automorphism enumeration limited to 8 vertices")
    E = {frozenset(e) for e in g.edges}
    return sum(
        1
        for perm in permutations(range(g.num_vertices))
        if all(frozenset((perm[u], perm[v])) in E for u, v in g.edges)
    )


def _pattern(pid, V, edges, longest):
    g = Graph(V, tuple(edges), None, pid)
    return PatternGraph(pid, g, automorphism_count(g), longest)


def pattern_graphs() -> list[PatternGraph]:
    """The four patterns, in figure order."""
    c4 = build_cycle(4)
    c6 = build_cycle(6)
    # hubs 0, 1 joined through 2, 3, 4
    theta = [(0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 1)]
    # columns 0-1-2 and 3-4-5, rungs 0-3, 1-4, 2-5
    ladder = [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)]
    pats = [
        _pattern(PATTERN_IDS[0], 4, c4.edges, 4),
        _pattern(PATTERN_IDS[1], 6, c6.edges, 6),
        _pattern(PATTERN_IDS[2], 5, theta, 4),
        _pattern(PATTERN_IDS[3], 6, ladder, 6),
    ]
    expected = (8, 12, 12, 4)
    for p, a in zip(pats, expected):
        assert p.automorphism_count == a, (p.id, p.automorphism_count)
    return pats


def _search_order(pat: Graph) -> list[int]:
    # highest degree first, then always extend along an edge
    start = max(range(pat.num_vertices), key=lambda v: len(pat.adjacency[v]))
    order = [start]
    while len(order) < pat.num_vertices:
        placed = set(order)
        frontier = [
            v for v in range(pat.num_vertices)
            if v not in placed and any(u in placed for u in pat.adjacency[v])
        ]
        order.append(max(frontier, key=lambda v: sum(u in placed for u in pat.adjacency[v])))
    return order


def count_labeled_maps(g: Graph, p) -> int:
    """Injective maps sending every pattern edge onto an edge of g."""
    pat = p.graph if isinstance(p, PatternGraph) else p
    order = _search_order(pat)
    pos = {v: i for i, v in enumerate(order)}
    back = [[u for u in pat.adjacency[v] if pos[u] < pos[v]] for v in order]
    need = [len(pat.adjacency[v]) for v in order]
    adj = g.adjacency
    adj_sets = [set(a) for a in adj]
    k = len(order)
    img = [0] * k

    def extend(i, used):
        if i == k:
            return 1
        anchor = img[pos[back[i][0]]]
        others = [img[pos[u]] for u in back[i][1:]]
        total = 0
        for w in adj[anchor]:
            if w in used or len(adj[w]) < need[i]:
                continue
            if all(w in adj_sets[x] for x in others):
                img[i] = w
                used.add(w)
                total += extend(i + 1, used)
                used.discard(w)
        return total

    total = 0
    for v in range(g.num_vertices):
        if len(adj[v]) >= need[0]:
            img[0] = v
            total += extend(1, {v})
    return total


def count_embeddings(g: Graph, p: PatternGraph) -> int:
    """Number of subgraphs of g isomorphic to the pattern."""
    labeled = count_labeled_maps(g, p)
    q, rem = divmod(labeled, p.automorphism_count)
    assert rem == 0, "labeled count must be a multiple of |Aut|"
    return q


def geom_density(g: Graph, p: PatternGraph) -> Fraction:
    return Fraction(count_embeddings(g, p), g.num_vertices // 2)


def is_exact(g: Graph, p: PatternGraph) -> bool:
    """True when no copy of the pattern can wrap around the periodic graph."""
    return g.wrap is not None and g.wrap > p.longest_cycle


@dataclass
class PatternCount:
    pattern: str
    count: int
    labeled: int
    n: int
    exact: bool

    @property
    def density(self) -> Fraction:
        return Fraction(self.count, self.n)


@dataclass
class GeomDensities:
    family: str
    graph_id: str
    entries: list[PatternCount] = field(default_factory=list)

    def density(self, pid: str) -> Fraction:
        for e in self.entries:
            if e.pattern == pid or e.pattern.startswith(pid + "_"):
                return e.density
        raise KeyError(pid)

    def vector(self) -> dict[str, Fraction]:
        return {e.pattern.split("_")[0]: e.density for e in self.entries}

    @property
    def warnings(self) -> list[str]:
        return [
            f"{e.pattern}: wrap-around copies possible on {self.graph_id}"
            for e in self.entries if not e.exact
        ]

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "graph_id": self.graph_id,
            "patterns": [
                {
                    "pattern": e.pattern,
                    "count": str(e.count),
                    "labeled": str(e.labeled),
                    "n": e.n,
                    "density": str(e.density),
                    "exact": e.exact,
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeomDensities":
        return cls(
            d["family"],
            d["graph_id"],
            [
                PatternCount(e["pattern"], int(e["count"]), int(e["labeled"]), int(e["n"]), bool(e["exact"]))
                for e in d["patterns"]
            ],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def geom_densities(g: Graph, family: Optional[str] = None,
                   patterns: Optional[Sequence[PatternGraph]] = None) -> GeomDensities:
    out = GeomDensities(family or g.name, g.name)
    for p in patterns or pattern_graphs():
        labeled = count_labeled_maps(g, p)
        out.entries.append(
            PatternCount(p.id, labeled // p.automorphism_count, labeled,
                         g.num_vertices // 2, is_exact(g, p))
        )
    return out


def format_table(rows: Sequence[GeomDensities]) -> str:
    """Aligned text table of G1..G4 per lattice."""
    head = ["lattice", "G1", "G2", "G3", "G4"]
    body = []
    for gd in rows:
        vec = gd.vector()
        cells = [gd.graph_id]
        for key in head[1:]:
            e = next((x for x in gd.entries if x.pattern.startswith(key + "_")), None)
            cells.append("-" if e is None else str(e.density) + ("" if e.exact else "*"))
        body.append(cells)
    widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [head] + body]
    if any(not e.exact for gd in rows for e in gd.entries):
        lines.append("* may include wrap-around copies")
    return "\n".join(lines)
