"""
Exact re-run of the symbolic high-j program and its threshold subroutine,
plus a numeric check that the 1/n-slices of ln m(j)_n have low j-degree.

Listing line references below count from ``mm:=10;`` as line 1 of the
program and ``Sq2:={}:`` as line 1 of the subroutine.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Optional, Sequence

import mpmath
import sympy

from .formal import FormalPoly, poly_sum
from .matchings import MatchTable

PARTITION_LIMIT = 40


class ResourceError(RuntimeError):
    pass


class InsufficientSizes(ValueError):
    pass


# ---------------------------------------------------------------- partitions


@lru_cache(maxsize=None)
def _partitions(m: int, largest: int) -> tuple[tuple[int, ...], ...]:
    if m == 0:
        return ((),)
    out = []
    for first in range(min(m, largest), 0, -1):
        for rest in _partitions(m - first, first):
            out.append((first,) + rest)
    return tuple(out)


def partitions(m: int) -> list[list[int]]:
    """Partitions of m as ascending lists, ordered by largest part.

    This is the order of combinat[partition]; partitions(4) gives
    [1,1,1,1], [1,1,2], [2,2], [1,3], [4].
    """
    if m < 0:
        raise ValueError("partitions of a negative integer")
    if m > PARTITION_LIMIT:
        raise ResourceError(f"partitions limited to m <= {PARTITION_LIMIT}, got {m}")
    parts = [sorted(p) for p in _partitions(m, m)]
    return sorted(parts, key=lambda p: (p[-1] if p else 0, p))


def multiplicities(part: Sequence[int]) -> dict[int, int]:
    """nn_s = number of parts equal to s."""
    nn: dict[int, int] = {}
    for s in part:
        nn[s] = nn.get(s, 0) + 1
    return nn


# ------------------------------------------------------------ configuration


@dataclass(frozen=True)
class KernelConfig:
    mm: int = 10
    lL: int = 3
    jq: int = 2
    aQ: Fraction = Fraction(0)
    thresholds: Optional[tuple[float, float]] = None
    # "listing" assigns u_v numerically as the program does; "formal" keeps
    # every u_v symbolic
    u_mode: str = "listing"

    def __post_init__(self):
        if not 2 <= self.lL <= self.mm:
            raise ValueError(f"need 2 <= lL <= mm, got lL={self.lL}, mm={self.mm}")
        if self.jq < 1:
            raise ValueError(f"jq must be >= 1, got {self.jq}")
        if self.mm > PARTITION_LIMIT:
            raise ResourceError(f"mm limited to {PARTITION_LIMIT}")
        if self.u_mode not in ("listing", "formal"):
            raise ValueError(f"u_mode must be 'listing' or 'formal', got {self.u_mode!r}")
        object.__setattr__(self, "aQ", Fraction(self.aQ))
        if self.thresholds is None:
            object.__setattr__(
                self, "thresholds", (100 ** 2 * (self.lL - 1), 100 ** 2 * self.lL)
            )

    def to_dict(self) -> dict:
        return {
            "mm": self.mm,
            "lL": self.lL,
            "jq": self.jq,
            "aQ": str(self.aQ),
            "thresholds": [_num_out(t) for t in self.thresholds],
            "u_mode": self.u_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelConfig":
        th = d.get("thresholds")
        return cls(
            int(d.get("mm", 10)),
            int(d.get("lL", 3)),
            int(d.get("jq", 2)),
            Fraction(d.get("aQ", 0)),
            None if th is None else tuple(_num_in(t) for t in th),
            d.get("u_mode", "listing"),
        )


def _num_out(t):
    return t if isinstance(t, int) or math.isfinite(t) else str(t)


def _num_in(t):
    return float(t) if isinstance(t, str) else t


def u_symbol(v: int) -> str:
    return f"u{v}"


def ch_symbol(s: int) -> str:
    return f"ch{s}"


def u_value(v: int, cfg: Optional[KernelConfig]) -> FormalPoly:
    # lines 7-9: u_v := v (1 - v/(10 + aQ)) for v <= mm; u_{mm+1} is
    # referenced by the product loop but never assigned, so it stays formal
    if cfg is None or cfg.u_mode == "formal" or v > cfg.mm:
        return FormalPoly.var(u_symbol(v))
    return FormalPoly.const(v * (1 - Fraction(v) / (10 + cfg.aQ)))


def ch_value(s: int, cfg: Optional[KernelConfig]) -> FormalPoly:
    # lines 16-18 zero ch_2 .. ch_{lL-1}; ch_1 and ch_{>= lL} are formal
    if cfg is not None and 2 <= s <= cfg.lL - 1:
        return FormalPoly.const(0)
    return FormalPoly.var(ch_symbol(s))


# ----------------------------------------------------------- building blocks


def falling_factorial_poly(q: int) -> FormalPoly:
    """j (j-1) ... (j-q+1).

    Lines 11-14 set sc_1 = j and recur from qq = lL, leaving sc_2 unassigned
    for lL = 3; the recursion is run from qq = 2 so sc_q is the full
    falling factorial.
    """
    if q < 1:
        raise ValueError("falling factorial order must be >= 1")
    j = FormalPoly.var("j")
    out = j
    for qq in range(2, q + 1):
        out = out * (j - (qq - 1))
    return out


def partition_product(i: int, flavor: str, cfg: Optional[KernelConfig] = None) -> FormalPoly:
    """F_i or ee_i: a sum over partitions of i of prod_s w_s^nn_s / nn_s!.

    Flavor F weights part s by u_{s+1}, flavor E by rh * ch_s (lines 29-33).
    The multiplicities are rebuilt from zero for each partition; the
    accumulation loop at lines 25-28 never resets them.
    """
    if flavor not in ("F", "E"):
        raise ValueError(f"flavor must be 'F' or 'E', got {flavor!r}")
    rh = FormalPoly.var("rh")
    terms = []
    for part in partitions(i):
        t = FormalPoly.const(1)
        for s, n in multiplicities(part).items():
            w = u_value(s + 1, cfg) if flavor == "F" else rh * ch_value(s, cfg)
            t = t * (w ** n) * Fraction(1, math.factorial(n))
        terms.append(t)
    return poly_sum(terms)


def assemble_FF(i: int, cfg: KernelConfig, F: Optional[FormalPoly] = None,
                ee: Optional[Mapping[int, FormalPoly]] = None) -> FormalPoly:
    """FF_i = F_i + sum_{q=lL}^{mm} ee_q sc_q z^q (1 + F_i(j -> j-q)), to z^mm.

    ``F`` and ``ee`` override the partition products (lines 41-47).
    """
    if not 1 <= i <= cfg.mm:
        raise ValueError(f"order i must lie in [1, {cfg.mm}], got {i}")
    if F is None:
        F = partition_product(i, "F", cfg)
    z = FormalPoly.var("z")
    j = FormalPoly.var("j")
    out = F
    for q in range(cfg.lL, cfg.mm + 1):
        e = ee[q] if ee is not None else partition_product(q, "E", cfg)
        if e.is_zero():
            continue
        shifted = F.subs("j", j - q)
        out = out + e * falling_factorial_poly(q) * z ** q * (1 + shifted)
    # line 46: series(FF, z=0, mm+1) keeps z^0 .. z^mm
    out = out.truncate(cfg.mm)
    if out.degree("z") > cfg.mm:
        raise AssertionError("z-truncation invariant broken")
    return out


def degree_certificate(ff: FormalPoly, jq: int) -> int:
    """j-degree of the rh^jq coefficient; -1 when that coefficient is zero."""
    return ff.coeff("rh", jq).degree("j")


# --------------------------------------------------------- threshold check


@dataclass
class Violation:
    i: int
    k: int
    degree_i: int
    degree_k: int

    def to_dict(self) -> dict:
        return {"i": self.i, "k": self.k, "degree_i": self.degree_i, "degree_k": self.degree_k}


@dataclass
class LemmaReport:
    config: KernelConfig
    certificates: dict[int, int]
    violations: list[Violation] = field(default_factory=list)

    @property
    def sq2(self) -> set[int]:
        """The set the subroutine accumulates: certificate values, not indices."""
        out = set()
        for v in self.violations:
            out |= {v.degree_i, v.degree_k}
        return out

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "certificates": [
                {"i": i, "jq": self.config.jq, "degree": d} for i, d in sorted(self.certificates.items())
            ],
            "thresholds": [_num_out(t) for t in self.config.thresholds],
            "violations": [v.to_dict() for v in self.violations],
            "Sq2": sorted(self.sq2),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LemmaReport":
        return cls(
            KernelConfig.from_dict(d["config"]),
            {int(c["i"]): int(c["degree"]) for c in d["certificates"]},
            [Violation(**v) for v in d["violations"]],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def proof_log(self) -> str:
        c = self.config
        lines = [
            f"mm:={c.mm}; lL:={c.lL}; aQ:={c.aQ}; jq:={c.jq};",
        ]
        for i, d in sorted(self.certificates.items()):
            lines.append(f"wwrhjq{i}:={d if d >= 0 else '-infinity'};")
        lines.append(f"Sq2:={{{', '.join(map(str, sorted(self.sq2)))}}};")
        lines.append(f"Sq2 violation count: {len(self.violations)}")
        return "\n".join(lines) + "\n"


def kernel_certificates(cfg: KernelConfig, orders: Optional[Sequence[int]] = None) -> dict[int, int]:
    orders = range(cfg.lL, cfg.mm + 1) if orders is None else orders
    return {i: degree_certificate(assemble_FF(i, cfg), cfg.jq) for i in orders}


def lemma_check(cfg: KernelConfig, i_range: Optional[Sequence[int]] = None,
                k_range: Optional[Sequence[int]] = None) -> LemmaReport:
    """Threshold scan over every pair k < i.

    A pair is recorded when deg_i > lower and deg_k < upper. The Maple
    inner loop starts at kq = lL-1, an order it never assembles, so k is
    taken from [lL, mm] like i.
    """
    i_range = list(range(cfg.lL, cfg.mm + 1) if i_range is None else i_range)
    k_range = list(range(cfg.lL, cfg.mm + 1) if k_range is None else k_range)
    for x in i_range + k_range:
        if not cfg.lL <= x <= cfg.mm:
            raise ValueError(f"order {x} outside [{cfg.lL}, {cfg.mm}]")
    certs = kernel_certificates(cfg, sorted(set(i_range) | set(k_range)))
    lower, upper = cfg.thresholds
    viol = []
    for i in i_range:
        for k in k_range:
            if k < i and certs[i] > lower and certs[k] < upper:
                viol.append(Violation(i, k, certs[i], certs[k]))
    return LemmaReport(cfg, certs, viol)


# --------------------------------------------------- numeric j-degree check


def _tables_to_pairs(tables) -> list[tuple[int, list[Fraction]]]:
    out = []
    if isinstance(tables, Mapping):
        tables = list(tables.items())
    for t in tables:
        if isinstance(t, MatchTable):
            out.append((t.n, list(t.counts)))
        else:
            n, counts = t
            out.append((int(n), list(counts)))
    return sorted(out)


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def _series_log(a: Sequence, H: int, exact: bool):
    """ln(a0 + a1 x + ...) minus ln a0, coefficients 1..H."""
    a0 = a[0]
    b = [ai / a0 for ai in a] + [0] * (H + 1)
    zero = Fraction(0) if exact else mpmath.mpf(0)
    out = [zero] * (H + 1)
    # L' = b' / b, solved term by term
    for h in range(1, H + 1):
        acc = h * b[h]
        for m in range(1, h):
            acc -= m * out[m] * b[h - m]
        out[h] = acc / h
    return out[1:]


def _exact_lstsq(rows, rhs):
    A = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in rows])
    b = sympy.Matrix([sympy.Rational(x.numerator, x.denominator) for x in rhs])
    sol = (A.T * A).LUsolve(A.T * b)
    res = A * sol - b
    to_f = lambda v: Fraction(int(v.p), int(v.q))
    return [to_f(v) for v in sol], [to_f(v) for v in res]


def _mp_lstsq(rows, rhs):
    A = mpmath.matrix(rows)
    b = mpmath.matrix(rhs)
    sol = mpmath.lu_solve(A.T * A, A.T * b)
    res = A * sol - b
    return list(sol), list(res)


@dataclass
class Eq28Report:
    sizes: list[int]
    j_values: list[int]
    h_max: int
    k_max: int
    exact: bool
    # (h, k) -> |coefficient of j^k in the n^-h slice|, k >= h+2 only
    flagged: dict[tuple[int, int], float]
    fit_residual: dict[int, float]
    h0_method: str

    @property
    def max_flagged(self) -> float:
        return max(self.flagged.values(), default=0.0)

    def to_dict(self) -> dict:
        return {
            "sizes": self.sizes,
            "j_values": self.j_values,
            "h_max": self.h_max,
            "k_max": self.k_max,
            "exact": self.exact,
            "h0_method": self.h0_method,
            "flagged": [{"h": h, "k": k, "abs_coefficient": v} for (h, k), v in sorted(self.flagged.items())],
            "fit_residual": {str(h): v for h, v in self.fit_residual.items()},
        }


def verify_eq28_numeric(tables, h_max: int, k_max: int,
                        j_values: Optional[Sequence[int]] = None,
                        dps: int = 60) -> Eq28Report:
    """Check that [n^-h] ln m(j)_n, as a function of j, has degree <= h+1.

    For each j, m(j)_n j!/n^j is interpolated exactly as a polynomial in 1/n
    through all sizes, giving a_0(j), a_1(j), ... . The slices f_h(j) of
    ln(sum_h a_h n^-h) for h >= 1 are then fitted by polynomials of degree
    k_max in j and the coefficients of j^k, k >= h+2, are reported. For
    h = 0, ln a_0(j) is affine in j exactly when a_0 is geometric.
    Integer or Fraction input runs in exact rationals, anything else in
    mpmath at ``dps`` digits.
    """
    pairs = _tables_to_pairs(tables)
    S = len(pairs)
    if S < h_max + 2:
        raise InsufficientSizes(f"{S} sizes given; need h_max + 2 = {h_max + 2}")
    exact = all(_is_exact(c) for _, cs in pairs for c in cs)
    n_min = pairs[0][0]
    if j_values is None:
        j_values = list(range(1, min(S - 1, n_min) + 1))
    j_values = list(j_values)
    if len(j_values) < k_max + 1:
        raise InsufficientSizes(
            f"{len(j_values)} j values available; a degree-{k_max} fit needs {k_max + 1}"
        )
    sizes = [n for n, _ in pairs]
    with mpmath.workdps(dps):
        a_hat = {}
        for j in j_values:
            if exact:
                pts = [(Fraction(1, n), Fraction(cs[j]) * math.factorial(j) / Fraction(n) ** j)
                       for n, cs in pairs]
                X = sympy.Symbol("X")
                poly = sympy.Poly(sympy.interpolate(
                    [(sympy.Rational(x.numerator, x.denominator),
                      sympy.Rational(y.numerator, y.denominator)) for x, y in pts], X), X)
                co = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
            else:
                rows = [[mpmath.mpf(1) / n ** d for d in range(S)] for n, _ in pairs]
                rhs = [mpmath.mpf(cs[j]) * math.factorial(j) / mpmath.mpf(n) ** j for n, cs in pairs]
                co = list(mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix(rhs)))
            a_hat[j] = co + [0] * (h_max + 1)
        flagged = {}
        residual = {}
        # h = 0
        a0 = [a_hat[j][0] for j in j_values]
        ratios = {a0[t + 1] / a0[t] for t in range(len(a0) - 1)} if exact else set()
        if exact and len(ratios) == 1 and all(b - a == 1 for a, b in zip(j_values, j_values[1:])):
            h0_method = "exact-geometric"
            for k in range(2, k_max + 1):
                flagged[(0, k)] = 0.0
            residual[0] = 0.0
        else:
            h0_method = "mp-fit"
            rows = [[mpmath.mpf(j) ** k for k in range(k_max + 1)] for j in j_values]
            sol, res = _mp_lstsq(rows, [mpmath.log(mpmath.mpf(a)) for a in a0])
            for k in range(2, k_max + 1):
                flagged[(0, k)] = float(abs(sol[k]))
            residual[0] = float(max(abs(r) for r in res))
        for h in range(1, h_max + 1):
            f = [_series_log(a_hat[j], h_max, exact)[h - 1] for j in j_values]
            if exact:
                rows = [[Fraction(j) ** k for k in range(k_max + 1)] for j in j_values]
                sol, res = _exact_lstsq(rows, f)
            else:
                rows = [[mpmath.mpf(j) ** k for k in range(k_max + 1)] for j in j_values]
                sol, res = _mp_lstsq(rows, f)
            for k in range(h + 2, k_max + 1):
                flagged[(h, k)] = float(abs(sol[k]))
            residual[h] = float(max(abs(r) for r in res))
    return Eq28Report(sizes, j_values, h_max, k_max, exact, flagged, residual, h0_method)


def planted_eq28_tables(r: int, slices: Mapping[int, Sequence[Fraction]],
                        sizes: Sequence[int], J: int) -> list[tuple[int, list[Fraction]]]:
    """Rational tables whose 1/n slices are the given polynomials in j.

    ``slices[h]`` lists the coefficients of f_h(j) = sum_k c_k j^k. The
    series r^j exp(sum_h f_h(j) x^h) is cut at x^D with D = len(sizes) - 1,
    so exact interpolation through the sizes recovers it.
    """
    D = len(sizes) - 1
    out = []
    for n in sizes:
        counts = [Fraction(1)]
        for j in range(1, J + 1):
            g = [Fraction(0)] * (D + 1)
            for h, co in slices.items():
                if 1 <= h <= D:
                    g[h] = sum(Fraction(c) * j ** k for k, c in enumerate(co))
            e = _series_exp(g, D)
            a = sum(e[h] * Fraction(1, n) ** h for h in range(D + 1)) * Fraction(r) ** j
            counts.append(a * Fraction(n) ** j / math.factorial(j))
        out.append((n, counts))
    return out


def _series_exp(g: Sequence[Fraction], D: int) -> list[Fraction]:
    # E' = g' E with g[0] = 0
    e = [Fraction(1)] + [Fraction(0)] * D
    for h in range(1, D + 1):
        e[h] = sum(m * g[m] * e[h - m] for m in range(1, h + 1)) / h
    return e
