"""
Finite periodic graphs approximating infinite r-regular lattices.

Every builder returns an immutable :class:`Graph` whose vertices are numbered
row-major over their coordinate tuples, with the slowest-varying coordinate
first. For the quasi one-dimensional families (prism torus, blown-up cycle)
the long periodic direction is the slow coordinate, so the natural vertex
order is already a narrow elimination order for the matching DP.
"""
from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np


class InvalidParameter(ValueError):
    """A lattice builder was called with parameters outside its domain."""


class InvalidInput(ValueError):
    """A graph does not satisfy the structural precondition of an operation."""


class SmallSizeWarning(UserWarning):
    """Finite-size pattern counts may include wrap-around artifacts."""


@dataclass(frozen=True)
class Graph:
    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    regularity: Optional[int] = None
    name: str = "graph"
    # shortest non-contractible cycle of a periodic family; None if unknown
    wrap: Optional[int] = None
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        V = self.num_vertices
        if V <= 0:
            raise InvalidInput("graph needs at least one vertex")
        canon = []
        seen = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise InvalidInput(f"self-loop at vertex {u}")
            if not (0 <= u < V and 0 <= v < V):
                raise InvalidInput(f"edge ({u}, {v}) out of range for {V} vertices")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise InvalidInput(f"parallel edge {e}")
            seen.add(e)
            canon.append(e)
        adj = [[] for _ in range(V)]
        for u, v in canon:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "edges", tuple(canon))
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in adj))
        if self.regularity is not None:
            bad = [v for v in range(V) if len(adj[v]) != self.regularity]
            if bad:
                raise InvalidInput(
                    f"declared {self.regularity}-regular but vertex {bad[0]} "
                    f"has degree {len(adj[bad[0]])}"
                )

    @property
    def n(self) -> int:
        """Half the number of vertices."""
        return self.num_vertices // 2

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the graph with vertex ``v`` renamed ``perm[v]``."""
        return Graph(
            self.num_vertices,
            tuple((perm[u], perm[v]) for u, v in self.edges),
            self.regularity,
            self.name + "~relabeled",
            self.wrap,
        )

    def remove_edge(self, u: int, v: int) -> "Graph":
        e = (min(u, v), max(u, v))
        return Graph(self.num_vertices, tuple(x for x in self.edges if x != e), None, self.name)

    def remove_vertices(self, vs: Iterable[int]) -> "Graph":
        """Delete vertices and renumber the survivors consecutively."""
        drop = set(vs)
        keep = [v for v in range(self.num_vertices) if v not in drop]
        new = {v: i for i, v in enumerate(keep)}
        edges = tuple(
            (new[u], new[v]) for u, v in self.edges if u not in drop and v not in drop
        )
        return Graph(len(keep), edges, None, self.name)

    def girth(self) -> Optional[int]:
        """Length of the shortest cycle, by BFS from every vertex."""
        best = None
        for s in range(self.num_vertices):
            dist = {s: 0}
            parent = {s: -1}
            q = deque([s])
            while q:
                x = q.popleft()
                for y in self.adjacency[x]:
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        parent[y] = x
                        q.append(y)
                    elif parent[x] != y:
                        c = dist[x] + dist[y] + 1
                        if best is None or c < best:
                            best = c
        return best


# ---------------------------------------------------------------- families


def build_cycle(m: int) -> Graph:
    if m < 4 or m % 2:
        raise InvalidParameter(f"cycle length must be even and >= 4, got {m}")
    return Graph(m, tuple((i, (i + 1) % m) for i in range(m)), 2, f"cycle_{m}", wrap=m)


def _torus_edges(dims: Sequence[int]) -> list[tuple[int, int]]:
    strides = [int(np.prod(dims[k + 1:], dtype=np.int64)) for k in range(len(dims))]
    edges = []
    for coord in product(*(range(d) for d in dims)):
        v = sum(c * s for c, s in zip(coord, strides))
        for k, d in enumerate(dims):
            w = v + (((coord[k] + 1) % d) - coord[k]) * strides[k]
            edges.append((v, w))
    return edges


def build_hypercubic_torus(dims: Sequence[int]) -> Graph:
    """d-dimensional periodic hyper-rectangle; r = 2d."""
    dims = [int(d) for d in dims]
    if not dims:
        raise InvalidParameter("need at least one dimension")
    if any(d < 3 for d in dims):
        raise InvalidParameter(f"every torus side must be >= 3, got {dims}")
    V = int(np.prod(dims))
    if V % 2:
        # odd tori are still useful as non-bipartite test graphs
        warnings.warn(f"torus volume {V} is odd; n = V/2 is not an integer", SmallSizeWarning,
                      stacklevel=2)
    if any(d < 5 for d in dims):
        warnings.warn(
            f"torus {dims} has a side below 5; 4-cycle counts include wrap-around loops",
            SmallSizeWarning,
            stacklevel=2,
        )
    name = "hypercubic_" + "x".join(map(str, dims))
    return Graph(V, tuple(_torus_edges(dims)), 2 * len(dims), name, wrap=min(dims))


def build_prism_torus(c: int, L: int) -> Graph:
    """Cartesian product C_c x C_L, indexed (l, i) -> l*c + i with l along C_L."""
    if c < 4 or L < 4 or c % 2 or L % 2:
        raise InvalidParameter(f"prism torus needs even c, L >= 4, got c={c}, L={L}")
    edges = []
    for l in range(L):
        for i in range(c):
            v = l * c + i
            edges.append((v, l * c + (i + 1) % c))
            edges.append((v, ((l + 1) % L) * c + i))
    # the C_c direction belongs to the lattice itself; only C_L wraps
    return Graph(c * L, tuple(edges), 4, f"prism_{c}x{L}", wrap=L)


def build_honeycomb_torus(a: int, b: int) -> Graph:
    """Brick-wall honeycomb with a x b unit cells of two sites each.

    Site A(x, y) = 2*(y*a + x), B(x, y) = A(x, y) + 1. A(x, y) is joined to
    B(x, y), B(x-1, y) and B(x, y-1). Non-contractible cycles have length at
    least 2*min(a, b), so 6-cycle counts are exact only for a, b >= 4.
    """
    if a < 2 or b < 2:
        raise InvalidParameter(f"honeycomb torus needs a, b >= 2, got a={a}, b={b}")
    if min(a, b) < 4:
        warnings.warn(
            f"honeycomb ({a},{b}) has wrap-around cycles of length {2 * min(a, b)}",
            SmallSizeWarning,
            stacklevel=2,
        )

    def site(x, y, s):
        return 2 * ((y % b) * a + (x % a)) + s

    edges = []
    for y in range(b):
        for x in range(a):
            A = site(x, y, 0)
            edges.append((A, site(x, y, 1)))
            edges.append((A, site(x - 1, y, 1)))
            edges.append((A, site(x, y - 1, 1)))
    return Graph(2 * a * b, tuple(edges), 3, f"honeycomb_{a}x{b}", wrap=2 * min(a, b))


def build_blowup_cycle(L: int, k: int = 2) -> Graph:
    """Cycle C_L with every vertex replaced by k independent copies.

    Copies of neighbouring cycle vertices are fully joined, giving a
    2k-regular graph on k*L vertices; bipartite for even L. For k = 2 and
    L >= 5 there are exactly 5L four-cycles, so the 4-cycle density is 5.
    """
    if L < 4 or L % 2:
        raise InvalidParameter(f"blow-up cycle needs even L >= 4, got {L}")
    if k < 1:
        raise InvalidParameter(f"blow-up factor must be >= 1, got {k}")
    if L < 5 and k > 1:
        warnings.warn("blow-up cycle with L = 4 has extra 4-cycles", SmallSizeWarning, stacklevel=2)
    edges = []
    for l in range(L):
        nxt = (l + 1) % L
        for i in range(k):
            for i2 in range(k):
                edges.append((l * k + i, nxt * k + i2))
    return Graph(k * L, tuple(edges), 2 * k, f"blowup_{L}x{k}", wrap=L)


def build_random_regular_bipartite(half: int, r: int, seed: Optional[int] = None,
                                   max_tries: int = 10_000) -> Graph:
    """Seeded configuration model on half + half vertices, rejecting multi-edges."""
    if r < 1 or half < r:
        raise InvalidParameter(f"need 1 <= r <= half, got r={r}, half={half}")
    rng = np.random.default_rng(seed)
    left = np.repeat(np.arange(half), r)
    for _ in range(max_tries):
        right = rng.permutation(left) + half
        pairs = set(zip(left.tolist(), right.tolist()))
        if len(pairs) == half * r:
            return Graph(2 * half, tuple(sorted(pairs)), r, f"randbip_{half}_{r}_{seed}")
    raise InvalidParameter(f"no simple {r}-regular bipartite graph found in {max_tries} tries")


FAMILIES = {
    "cycle": build_cycle,
    "hypercubic_torus": lambda *dims: build_hypercubic_torus(dims),
    "honeycomb_torus": build_honeycomb_torus,
    "prism_torus": build_prism_torus,
    "blowup_cycle": build_blowup_cycle,
    "random_regular_bipartite": build_random_regular_bipartite,
}


@dataclass(frozen=True)
class LatticeSpec:
    family: str
    size: tuple[int, ...]
    seed: Optional[int] = None

    def build(self) -> Graph:
        try:
            builder = FAMILIES[self.family]
        except KeyError:
            raise InvalidParameter(f"unknown lattice family {self.family!r}") from None
        if self.family == "random_regular_bipartite":
            return builder(*self.size, seed=self.seed)
        return builder(*self.size)


# ------------------------------------------------------------ bipartition


@dataclass(frozen=True)
class Bipartition:
    """Two-colouring of a connected graph, or an odd cycle proving none exists."""

    left: frozenset
    right: frozenset
    odd_cycle: Optional[tuple[int, ...]] = None

    @property
    def is_bipartite(self) -> bool:
        return self.odd_cycle is None


def bipartition(g: Graph) -> Bipartition:
    V = g.num_vertices
    color = [-1] * V
    parent = [-1] * V
    color[0] = 0
    q = deque([0])
    conflict = None
    while q and conflict is None:
        x = q.popleft()
        for y in g.adjacency[x]:
            if color[y] < 0:
                color[y] = 1 - color[x]
                parent[y] = x
                q.append(y)
            elif color[y] == color[x]:
                conflict = (x, y)
                break
    if conflict is None and min(color) < 0:
        raise InvalidInput("bipartition requires a connected graph")
    if conflict is None:
        return Bipartition(
            frozenset(v for v in range(V) if color[v] == 0),
            frozenset(v for v in range(V) if color[v] == 1),
        )
    # Both endpoints hang off the BFS tree; splice the two root paths at their
    # lowest common ancestor. Equal BFS depth makes the result odd.
    x, y = conflict
    px, py = [x], [y]
    while parent[px[-1]] >= 0:
        px.append(parent[px[-1]])
    while parent[py[-1]] >= 0:
        py.append(parent[py[-1]])
    on_py = set(py)
    lca = next(v for v in px if v in on_py)
    cyc = px[: px.index(lca) + 1] + list(reversed(py[: py.index(lca)]))
    return Bipartition(frozenset(), frozenset(), tuple(cyc))


def is_connected(g: Graph) -> bool:
    seen = {0}
    q = deque([0])
    while q:
        x = q.popleft()
        for y in g.adjacency[x]:
            if y not in seen:
                seen.add(y)
                q.append(y)
    return len(seen) == g.num_vertices


# ------------------------------------------------------------- edge lists


def write_edge_list(g: Graph, path) -> None:
    lines = [f"{g.num_vertices} {g.num_edges}"]
    lines += [f"{u} {v}" for u, v in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path, regularity: Optional[int] = None, name: Optional[str] = None) -> Graph:
    rows = Path(path).read_text().split("\n")
    head = rows[0].split()
    if len(head) != 2:
        raise InvalidInput(f"{path}: first line must be 'V E'")
    V, E = int(head[0]), int(head[1])
    edges = []
    for line in rows[1:]:
        if line.strip():
            u, v = line.split()
            edges.append((int(u), int(v)))
    if len(edges) != E:
        raise InvalidInput(f"{path}: header promises {E} edges, found {len(edges)}")
    return Graph(V, tuple(edges), regularity, name or Path(path).stem)
