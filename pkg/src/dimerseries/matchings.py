"""
Exact j-matching tables m(j) for finite graphs.

Two independent routes are provided: an exhaustive include/exclude recursion
for small graphs, and a frontier dynamic program over a vertex elimination
order. The DP runs in numpy over several 62-bit primes at once and rebuilds
the exact integers by Chinese remaindering, so no count ever passes through
floating point.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import mpmath
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .lattice import Graph


class SizeLimitError(ValueError):
    """Graph too large for the exhaustive matching counter."""


class ResourceLimitError(RuntimeError):
    """The elimination order needs a larger frontier than the configured budget."""


BRUTE_MAX_VERTICES = 20
DP_MAX_WIDTH = 28
DP_MAX_BYTES = 2 << 30
LOG_DIGITS = 30


@dataclass(frozen=True)
class MatchTable:
    """Counts m(j) of j-matchings, j = 0..V//2, on a graph with V = 2n vertices."""

    graph_id: str
    n: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if not self.counts or self.counts[0] != 1:
            raise ValueError("m(0) must be 1")
        if any(c < 0 for c in self.counts):
            raise ValueError("matching counts must be non-negative")

    @property
    def max_matching(self) -> int:
        return max(j for j, c in enumerate(self.counts) if c)

    def to_json(self) -> str:
        return json.dumps(
            {"graph_id": self.graph_id, "n": self.n, "counts": [str(c) for c in self.counts]}
        )

    @classmethod
    def from_json(cls, text: str) -> "MatchTable":
        d = json.loads(text)
        return cls(d["graph_id"], int(d["n"]), tuple(int(c) for c in d["counts"]))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "MatchTable":
        return cls.from_json(Path(path).read_text())


def count_matchings_brute(g: Graph) -> MatchTable:
    """Include/exclude recursion over the edge list with a vertex-availability mask."""
    if g.num_vertices > BRUTE_MAX_VERTICES:
        raise SizeLimitError(
            f"brute force limited to {BRUTE_MAX_VERTICES} vertices, graph has {g.num_vertices}"
        )
    edges = g.edges
    J = g.num_vertices // 2
    counts = [0] * (J + 1)

    def rec(i: int, used: int, j: int) -> None:
        if i == len(edges):
            counts[j] += 1
            return
        rec(i + 1, used, j)
        u, v = edges[i]
        mask = (1 << u) | (1 << v)
        if not used & mask:
            rec(i + 1, used | mask, j + 1)

    rec(0, 0, 0)
    return MatchTable(g.name, g.num_vertices // 2, tuple(counts))


# ------------------------------------------------------------ frontier DP


def frontier_width(g: Graph, order: Sequence[int]) -> int:
    """Maximum number of simultaneously open vertices along ``order``."""
    pos = {v: t for t, v in enumerate(order)}
    last = [max([pos[v]] + [pos[u] for u in g.adjacency[v]]) for v in range(g.num_vertices)]
    width = 0
    open_count = 0
    closing = [0] * len(order)
    for v in range(g.num_vertices):
        closing[last[v]] += 1
    for t in range(len(order)):
        open_count += 1
        width = max(width, open_count)
        open_count -= closing[t]
    return width


def default_order(g: Graph) -> list[int]:
    """Natural order or reverse Cuthill-McKee, whichever has the narrower frontier."""
    natural = list(range(g.num_vertices))
    if not g.edges:
        return natural
    rows = [u for u, v in g.edges] + [v for u, v in g.edges]
    cols = [v for u, v in g.edges] + [u for u, v in g.edges]
    A = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(g.num_vertices,) * 2)
    rcm = reverse_cuthill_mckee(A, symmetric_mode=True).tolist()
    return min((natural, rcm), key=lambda o: frontier_width(g, o))


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:  # deterministic below 3.3e24
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=None)
def _primes(count: int) -> tuple[int, ...]:
    # below 2**62 so the sum of two residues stays inside int64
    out = []
    p = (1 << 62) - 1
    while len(out) < count:
        if _is_probable_prime(p):
            out.append(p)
        p -= 2
    return tuple(out)


def _crt(residues: Sequence[Sequence[int]], primes: Sequence[int]) -> list[int]:
    M = math.prod(primes)
    out = []
    for col in zip(*residues):
        x = 0
        for r, p in zip(col, primes):
            Mi = M // p
            x += int(r) * Mi * pow(Mi, -1, p)
        out.append(x % M)
    return out


def count_matchings_dp(g: Graph, order: Optional[Sequence[int]] = None,
                       max_width: int = DP_MAX_WIDTH) -> MatchTable:
    """Frontier DP: state = which open vertices are already covered by a dimer.

    Vertices are opened in ``order``; each edge is decided (absent or dimer)
    when its later endpoint opens; a vertex is closed, summing over its
    covered bit, once all its neighbours have been opened.
    """
    V = g.num_vertices
    if order is None:
        order = default_order(g)
    order = [int(v) for v in order]
    if sorted(order) != list(range(V)):
        raise ValueError("order must be a permutation of the vertices")
    width = frontier_width(g, order)
    if width > max_width:
        raise ResourceLimitError(
            f"frontier of {width} vertices exceeds the budget of {max_width}"
        )
    J = V // 2
    # m(j) <= C(E, j); enough primes that their product exceeds every count
    bound = max(math.comb(g.num_edges, j) for j in range(J + 1))
    nprimes = max(1, -(-(bound.bit_length() + 1) // 61))
    primes = _primes(nprimes)
    S = 1 << width
    nbytes = nprimes * S * (J + 1) * 8
    if nbytes > DP_MAX_BYTES:
        raise ResourceLimitError(
            f"frontier of {width} vertices needs {nbytes / 2**30:.1f} GiB of DP state"
        )
    P = np.array(primes, dtype=np.int64)
    table = np.zeros((nprimes, S, J + 1), dtype=np.int64)
    table[:, 0, 0] = 1

    def bit_view(*bits):
        # expose each requested state bit as its own length-2 axis
        shape, rest = [], width
        for b in sorted(bits, reverse=True):
            shape += [1 << (rest - b - 1), 2]
            rest = b
        shape += [1 << rest, J + 1]
        return table.reshape([nprimes] + shape)

    def add_mod(dst, src):
        dst += src
        pb = P.reshape((-1,) + (1,) * (dst.ndim - 1))
        dst -= pb * (dst >= pb)

    pos = {v: t for t, v in enumerate(order)}
    last = [max([pos[v]] + [pos[u] for u in g.adjacency[v]]) for v in range(V)]
    slot = {}
    free = list(range(width - 1, -1, -1))
    for t, v in enumerate(order):
        slot[v] = free.pop()
        jtop = (t + 1) // 2 + 1  # no more dimers than opened vertices allow
        for u in g.adjacency[v]:
            if pos[u] >= t:
                continue
            T = bit_view(slot[v], slot[u])
            # a dimer on (u, v) needs both uncovered and covers both
            add_mod(T[:, :, 1, :, 1, :, 1:jtop], T[:, :, 0, :, 0, :, : jtop - 1])
        for w in [x for x in slot if last[x] == t]:
            s = slot.pop(w)
            T = bit_view(s)
            add_mod(T[:, :, 0, :, :jtop], T[:, :, 1, :, :jtop])
            T[:, :, 1, :, :jtop] = 0
            free.append(s)
    counts = _crt(table[:, 0, :].tolist(), primes)
    return MatchTable(g.name, V // 2, tuple(counts))


def count_matchings(g: Graph) -> MatchTable:
    return count_matchings_dp(g)


# --------------------------------------------------------- entropy samples


def log_bigint(m: int, digits: int = LOG_DIGITS) -> mpmath.mpf:
    """Natural log of a positive integer to ``digits`` significant digits."""
    if m <= 0:
        raise ValueError("log of a non-positive count")
    with mpmath.workdps(digits + 10):
        # mpf keeps a binary mantissa/exponent pair, so huge counts convert
        # without overflow and lose nothing below the working precision
        return mpmath.log(mpmath.mpf(m))


def lambda_samples(t: MatchTable, digits: int = LOG_DIGITS) -> list[tuple[Fraction, mpmath.mpf]]:
    """Finite-size entropy samples (p, ln m(j) / 2n) with p = j/n."""
    return list(_lambda_samples(t, digits))


@lru_cache(maxsize=1024)
def _lambda_samples(t: MatchTable, digits: int) -> tuple:
    out = []
    with mpmath.workdps(digits + 10):
        for j, c in enumerate(t.counts):
            if c > 0:
                out.append((Fraction(j, t.n), log_bigint(c, digits) / (2 * t.n)))
    return tuple(out)
