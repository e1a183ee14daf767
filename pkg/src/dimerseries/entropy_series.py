"""
Infinite-volume dimer entropy and its density series.

The entropy density of a dimer gas on an r-regular lattice is written as a
mean-field part plus sum_{k>=2} d_k p^k, with p the fraction of covered
vertices. Here finite-size samples ln m(j)/2n at a common p = j/n are first
extrapolated in the size, then the d_k are fitted by weighted least squares.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import mpmath
import numpy as np

from .matchings import MatchTable, lambda_samples

DEFAULT_WINDOW = (0.0, 0.3)
MAX_CONDITION = 1e10


class InsufficientData(ValueError):
    pass


class ConditioningError(ValueError):
    pass


def mean_field(p, r):
    """(1/2)[p ln r - p ln p - 2(1-p) ln(1-p) - p], continuous at p = 0 and 1."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {p}")
    if r < 2:
        raise ValueError(f"degree must be >= 2, got {r}")
    plogp = p * math.log(p) if p > 0 else 0.0
    qlogq = (1 - p) * math.log(1 - p) if p < 1 else 0.0
    return 0.5 * (p * math.log(r) - plogp - 2 * qlogq - p)


# ------------------------------------------------------------ extrapolation


def _size_basis(n, count, log_term):
    n = mpmath.mpf(n)
    cols = [mpmath.mpf(1)]
    if log_term:
        cols.append(mpmath.log(n) / n)
    k = 1
    while len(cols) < count:
        cols.append(n ** -k)
        k += 1
    return cols[:count]


def _interpolate_at_infinity(points, log_term):
    A = mpmath.matrix([_size_basis(n, len(points), log_term) for n, _ in points])
    y = mpmath.matrix([v for _, v in points])
    return mpmath.lu_solve(A, y)[0]


def _by_size(samples) -> dict[int, dict[Fraction, object]]:
    if isinstance(samples, Mapping):
        items = samples.items()
    else:
        items = samples
    return {int(n): {Fraction(p): lam for p, lam in rows} for n, rows in items}


def extrapolate_lambda(samples, p, max_sizes: int = 8, log_term: bool = True,
                       dps: int = 40) -> tuple[float, float]:
    """Extrapolate ln m(pn)/2n to n -> infinity at fixed p.

    ``samples`` maps n to the (p, lambda_n) list of that size. The largest
    ``max_sizes`` sizes that realise p exactly are interpolated in the basis
    {1, ln(n)/n, 1/n, 1/n^2, ...}; the log column carries the fixed-particle
    number prefactor and can be switched off. The error estimate is the
    difference from the interpolant one order lower.
    """
    p = Fraction(p)
    by_n = _by_size(samples)
    pts = sorted((n, rows[p]) for n, rows in by_n.items() if p in rows)
    if len(pts) < 3:
        raise InsufficientData(f"p = {p} is realised at {len(pts)} sizes; need 3")
    pts = pts[-max_sizes:]
    with mpmath.workdps(dps):
        pts = [(n, mpmath.mpf(v)) for n, v in pts]
        best = _interpolate_at_infinity(pts, log_term)
        lower = _interpolate_at_infinity(pts[1:], log_term)
        return float(best), float(abs(best - lower))


def common_densities(samples, min_sizes: int = 3,
                     window: tuple[float, float] = DEFAULT_WINDOW) -> list[Fraction]:
    """Densities inside ``window`` (open at the left end) realised at >= min_sizes sizes."""
    seen = defaultdict(int)
    for rows in _by_size(samples).values():
        for p in rows:
            if window[0] < p <= window[1]:
                seen[p] += 1
    return sorted(p for p, c in seen.items() if c >= min_sizes)


def samples_from_tables(tables: Iterable[MatchTable]) -> dict[int, list]:
    return {t.n: lambda_samples(t) for t in tables}


# ------------------------------------------------------------------ fitting


@dataclass
class EntropySeries:
    r: int
    coefficients: list[tuple[int, float, float]]
    p_window: tuple[float, float] = DEFAULT_WINDOW
    sizes_used: list[int] = field(default_factory=list)

    def __post_init__(self):
        ks = [k for k, _, _ in self.coefficients]
        if ks and (ks[0] != 2 or any(b != a + 1 for a, b in zip(ks, ks[1:]))):
            raise ValueError(f"coefficient orders must run 2, 3, ...; got {ks}")
        if any(not math.isfinite(s) or s < 0 for _, _, s in self.coefficients):
            raise ValueError("every coefficient needs a finite non-negative uncertainty")

    def dk(self, k: int) -> float:
        return dict((kk, d) for kk, d, _ in self.coefficients)[k]

    def sigma(self, k: int) -> float:
        return dict((kk, s) for kk, _, s in self.coefficients)[k]

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "p_window": list(self.p_window),
            "sizes_used": list(self.sizes_used),
            "coefficients": [{"k": k, "dk": d, "sigma": s} for k, d, s in self.coefficients],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EntropySeries":
        return cls(
            int(d["r"]),
            [(int(c["k"]), float(c["dk"]), float(c["sigma"])) for c in d["coefficients"]],
            tuple(d["p_window"]),
            [int(n) for n in d["sizes_used"]],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "dk", "sigma"])
        for k, d, s in self.coefficients:
            w.writerow([k, repr(d), repr(s)])
        return buf.getvalue()


def _wls(P, y, sig, kmax):
    A = np.stack([P ** k for k in range(2, kmax + 1)], axis=1)
    Aw = A / sig[:, None]
    yw = y / sig
    # column scaling keeps the condition number about the basis, not the units
    scale = np.linalg.norm(Aw, axis=0)
    cond = np.linalg.cond(Aw / scale)
    coef, *_ = np.linalg.lstsq(Aw / scale, yw, rcond=None)
    coef = coef / scale
    dof = len(P) - A.shape[1]
    chi2 = float(np.sum((Aw @ coef - yw) ** 2) / dof) if dof > 0 else 1.0
    cov = np.linalg.pinv(Aw.T @ Aw) * max(chi2, 1.0)
    return coef, np.sqrt(np.diag(cov)), cond


def extract_dk(lambda_inf: Sequence[tuple], r: int, kmax: int,
               p_window: tuple[float, float] = DEFAULT_WINDOW,
               sigma_floor: float = 1e-14, max_condition: float = MAX_CONDITION,
               sizes_used: Sequence[int] = ()) -> EntropySeries:
    """Weighted fit of lambda - mean_field against p^2 .. p^kmax.

    Entries are (p, lambda) or (p, lambda, sigma). Uncertainties combine the
    scaled residual covariance with the shift seen when one more power is
    admitted, which tracks the truncation of the series.
    """
    rows = [row for row in lambda_inf if p_window[0] < float(row[0]) <= p_window[1]]
    if len(rows) < kmax + 2:
        raise InsufficientData(
            f"{len(rows)} densities in window {p_window}; need {kmax + 2} for kmax={kmax}"
        )
    P = np.array([float(row[0]) for row in rows])
    lam = np.array([float(row[1]) for row in rows])
    sig = np.array([max(float(row[2]) if len(row) > 2 else 1.0, sigma_floor) for row in rows])
    y = lam - np.array([mean_field(p, r) for p in P])
    coef, err, cond = _wls(P, y, sig, kmax)
    if cond > max_condition:
        raise ConditioningError(
            f"design condition number {cond:.3g} exceeds {max_condition:.3g}; "
            f"use a wider p-window or a smaller kmax"
        )
    if len(rows) >= kmax + 3:
        coef_up, _, _ = _wls(P, y, sig, kmax + 1)
        err = np.sqrt(err ** 2 + (coef_up[: len(coef)] - coef) ** 2)
    return EntropySeries(
        r,
        [(k, float(c), float(e)) for k, c, e in zip(range(2, kmax + 1), coef, err)],
        tuple(p_window),
        sorted(sizes_used),
    )


def entropy_series(tables: Sequence[MatchTable], r: int, kmax: int,
                   p_window: tuple[float, float] = DEFAULT_WINDOW,
                   min_sizes: int = 4, max_sizes: int = 8,
                   log_term: bool = True) -> EntropySeries:
    """Tables of one lattice family at several sizes -> fitted d_2..d_kmax."""
    samples = samples_from_tables(tables)
    lam_inf = []
    for p in common_densities(samples, min_sizes, p_window):
        val, err = extrapolate_lambda(samples, p, max_sizes=max_sizes, log_term=log_term)
        lam_inf.append((p, val, err))
    return extract_dk(lam_inf, r, kmax, p_window, sizes_used=[t.n for t in tables])
