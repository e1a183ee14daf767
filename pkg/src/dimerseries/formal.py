"""
Sparse multivariate polynomials over the rationals with optional truncation
in the variable ``z``.

A monomial is a sorted tuple of (variable, exponent) pairs, so the term map
is canonical regardless of insertion order.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Optional, Union

Monomial = tuple[tuple[str, int], ...]
Scalar = Union[int, Fraction]

TRUNC_VAR = "z"


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _zdeg(m: Monomial) -> int:
    for v, e in m:
        if v == TRUNC_VAR:
            return e
    return 0


class FormalPoly:
    """Immutable polynomial; ``ztrunc`` drops every term with z-degree above it."""

    __slots__ = ("_terms", "ztrunc")

    def __init__(self, terms: Optional[Mapping[Monomial, Scalar]] = None,
                 ztrunc: Optional[int] = None):
        clean = {}
        for m, c in (terms or {}).items():
            c = Fraction(c)
            if c and (ztrunc is None or _zdeg(m) <= ztrunc):
                clean[tuple(sorted((v, e) for v, e in m if e))] = c
        self._terms = clean
        self.ztrunc = ztrunc

    # -- constructors

    @classmethod
    def const(cls, c: Scalar, ztrunc: Optional[int] = None) -> "FormalPoly":
        return cls({(): c}, ztrunc)

    @classmethod
    def var(cls, name: str, power: int = 1, ztrunc: Optional[int] = None) -> "FormalPoly":
        if power < 0:
            raise ValueError("negative powers are not polynomials")
        return cls({((name, power),) if power else (): 1}, ztrunc)

    # -- inspection

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def variables(self) -> set[str]:
        return {v for m in self._terms for v, _ in m}

    def degree(self, name: str) -> int:
        """Highest power of ``name``; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(dict(m).get(name, 0) for m in self._terms)

    def coeff(self, name: str, power: int) -> "FormalPoly":
        """Coefficient of name**power, other variables kept."""
        out = {}
        for m, c in self._terms.items():
            d = dict(m)
            if d.get(name, 0) == power:
                d.pop(name, None)
                out[tuple(sorted(d.items()))] = c
        return FormalPoly(out, self.ztrunc)

    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    # -- arithmetic

    @staticmethod
    def _lift(x) -> "FormalPoly":
        if isinstance(x, FormalPoly):
            return x
        if isinstance(x, Rational):
            return FormalPoly.const(x)
        return NotImplemented

    @staticmethod
    def _trunc(a, b):
        ts = [t for t in (a.ztrunc, b.ztrunc) if t is not None]
        return min(ts) if ts else None

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return FormalPoly(out, self._trunc(self, other))

    __radd__ = __add__

    def __neg__(self):
        return FormalPoly({m: -c for m, c in self._terms.items()}, self.ztrunc)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        zt = self._trunc(self, other)
        out: dict = {}
        for ma, ca in self._terms.items():
            za = _zdeg(ma)
            for mb, cb in other._terms.items():
                if zt is not None and za + _zdeg(mb) > zt:
                    continue
                m = _mono_mul(ma, mb)
                out[m] = out.get(m, 0) + ca * cb
        return FormalPoly(out, zt)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Rational):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = FormalPoly.const(1, self.ztrunc)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return False
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    # -- substitution

    def truncate(self, order: int) -> "FormalPoly":
        zt = order if self.ztrunc is None else min(order, self.ztrunc)
        return FormalPoly(self._terms, zt)

    def subs(self, name: str, value) -> "FormalPoly":
        """Replace ``name`` by a polynomial or rational, expanding powers."""
        value = self._lift(value)
        out = FormalPoly({}, self.ztrunc)
        powers = {0: FormalPoly.const(1)}
        for m, c in self._terms.items():
            d = dict(m)
            e = d.pop(name, 0)
            if e not in powers:
                powers[e] = value ** e
            out = out + FormalPoly({tuple(sorted(d.items())): c}, self.ztrunc) * powers[e]
        return out

    def evaluate(self, values: Mapping[str, Scalar]) -> Union[Fraction, "FormalPoly"]:
        """Substitute rationals; returns a Fraction once no variable is left."""
        out = {}
        for m, c in self._terms.items():
            rest = []
            for v, e in m:
                if v in values:
                    c = c * Fraction(values[v]) ** e
                else:
                    rest.append((v, e))
            key = tuple(rest)
            out[key] = out.get(key, 0) + c
        p = FormalPoly(out, self.ztrunc)
        return p.constant_term() if not p.variables() else p

    # -- output

    def __repr__(self):
        return f"FormalPoly({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, c in sorted(self._terms.items(), key=lambda t: (sum(e for _, e in t[0]), t[0])):
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"({c})*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json_terms(self) -> list:
        return [[[list(p) for p in m], str(c)] for m, c in sorted(self._terms.items())]


def poly_sum(polys: Iterable[FormalPoly], ztrunc: Optional[int] = None) -> FormalPoly:
    out: dict = {}
    for p in polys:
        for m, c in p.terms.items():
            out[m] = out.get(m, 0) + c
    return FormalPoly(out, ztrunc)
