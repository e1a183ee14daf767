"""
Polynomial relations d_k = sum_i c_i M_i(G) across lattice families, and the
virial coefficients m_k derived from d_k.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Mapping, Optional, Sequence

import numpy as np

from .entropy_series import EntropySeries


class DegenerateDesign(ValueError):
    pass


class FamilyMismatch(ValueError):
    pass


def virial_from_dk(k: int, d):
    """m_k = (k-1)(1/(k(k-1)) - d_k); exact when d is rational."""
    if k < 2:
        raise ValueError(f"virial coefficients start at k = 2, got {k}")
    if isinstance(d, Rational):
        return (k - 1) * (Fraction(1, k * (k - 1)) - Fraction(d))
    return (k - 1) * (1.0 / (k * (k - 1)) - d)


@dataclass
class VirialSeries:
    coefficients: list[tuple[int, float]]
    source: Optional[EntropySeries] = None

    def mk(self, k: int):
        return dict(self.coefficients)[k]

    def to_dict(self) -> dict:
        return {
            "coefficients": [{"k": k, "mk": float(m)} for k, m in self.coefficients],
            "source": None if self.source is None else self.source.to_dict(),
        }


def virial_series(es: EntropySeries) -> VirialSeries:
    return VirialSeries([(k, virial_from_dk(k, d)) for k, d, _ in es.coefficients], es)


def pressure_series(p: float, virial: VirialSeries, kmax: int) -> float:
    """p/2 + sum_{k=2}^{kmax} m_k p^k."""
    if not 0 <= p < 1:
        raise ValueError(f"density must lie in [0, 1), got {p}")
    have = dict(virial.coefficients)
    missing = [k for k in range(2, kmax + 1) if k not in have]
    if missing:
        raise ValueError(f"virial series lacks orders {missing}")
    return p / 2 + sum(float(have[k]) * p ** k for k in range(2, kmax + 1))


# ---------------------------------------------------------------- relations

# a monomial is a tuple of exponents of (G1, G2, G3, G4)
ONE = (0, 0, 0, 0)
G1, G2, G3, G4 = (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)
G1SQ = (2, 0, 0, 0)

BASES = {
    2: [ONE],
    3: [ONE],
    4: [ONE, G1],
    5: [ONE, G1],
    6: [ONE, G1, G2, G3],
    7: [ONE, G1SQ, G1, G2, G3, G4],
}


def monomial_name(m) -> str:
    parts = []
    for i, e in enumerate(m, 1):
        if e == 1:
            parts.append(f"G{i}")
        elif e > 1:
            parts.append(f"G{i}^{e}")
    return "*".join(parts) or "1"


def monomial_value(m, g: Mapping[str, Fraction]) -> Fraction:
    out = Fraction(1)
    for i, e in enumerate(m, 1):
        if e:
            out *= Fraction(g[f"G{i}"]) ** e
    return out


@dataclass
class Observation:
    """One lattice family: its pattern densities and a measured d_k."""

    family: str
    r: int
    geometry: Mapping[str, Fraction]
    dk: float
    sigma: float
    bipartite: bool = True


@dataclass
class RelationModel:
    k: int
    basis: list[tuple[int, ...]]
    coefficients: list[float]
    sigmas: list[float]
    covariance: list[list[float]]
    residual_norm: float
    chi2: float
    families: list[str]
    design: list[list[float]]
    residuals: list[float]
    loo: list[dict] = field(default_factory=list)
    r: Optional[int] = None

    def predict(self, geometry: Mapping[str, Fraction]) -> tuple[float, float]:
        x = np.array([float(monomial_value(m, geometry)) for m in self.basis])
        cov = np.array(self.covariance)
        return float(x @ np.array(self.coefficients)), float(np.sqrt(max(x @ cov @ x, 0.0)))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "r": self.r,
            "basis": [monomial_name(m) for m in self.basis],
            "basis_exponents": [list(m) for m in self.basis],
            "coefficients": self.coefficients,
            "sigmas": self.sigmas,
            "covariance": self.covariance,
            "residual_norm": self.residual_norm,
            "chi2": self.chi2,
            "families": self.families,
            "design": self.design,
            "residuals": self.residuals,
            "leave_one_out": self.loo,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RelationModel":
        return cls(
            int(d["k"]),
            [tuple(m) for m in d["basis_exponents"]],
            list(d["coefficients"]),
            list(d["sigmas"]),
            [list(r) for r in d["covariance"]],
            float(d["residual_norm"]),
            float(d["chi2"]),
            list(d["families"]),
            [list(r) for r in d["design"]],
            list(d["residuals"]),
            list(d["leave_one_out"]),
            d.get("r"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _check(obs: Sequence[Observation]):
    if not obs:
        raise ValueError("no observations")
    rs = {o.r for o in obs}
    if len(rs) > 1:
        raise FamilyMismatch(f"families mix degrees {sorted(rs)}")
    bad = [o.family for o in obs if not o.bipartite]
    if bad:
        raise FamilyMismatch(f"non-bipartite families rejected: {bad}")


def _design(obs, basis):
    return np.array([[float(monomial_value(m, o.geometry)) for m in basis] for o in obs])


def _collisions(obs, basis):
    seen = {}
    out = []
    for o in obs:
        key = tuple(monomial_value(m, o.geometry) for m in basis)
        if key in seen:
            out.append((seen[key], o.family))
        else:
            seen[key] = o.family
    return out


def _solve(A, y, s):
    Aw = A / s[:, None]
    yw = y / s
    cov = np.linalg.inv(Aw.T @ Aw)
    coef = cov @ Aw.T @ yw
    res = y - A @ coef
    return coef, cov, res


def fit_relation(k: int, observations: Sequence[Observation],
                 basis: Optional[Sequence[tuple]] = None) -> RelationModel:
    """Weighted least squares for the c coefficients, weights 1/sigma^2.

    The covariance is the plain (A^T W A)^-1: with as many families as
    unknowns there is no residual to rescale it by. The leave-one-out table
    refits without each family in turn where the rest still determine the
    model, and records its prediction, the combined uncertainty and the pull.
    """
    obs = list(observations)
    _check(obs)
    basis = list(basis if basis is not None else BASES[k])
    if len(obs) < len(basis):
        raise DegenerateDesign(
            f"k={k} basis {[monomial_name(m) for m in basis]} needs {len(basis)} families, got {len(obs)}"
        )
    A = _design(obs, basis)
    if np.linalg.matrix_rank(A) < len(basis):
        coll = _collisions(obs, basis)
        raise DegenerateDesign(
            f"design for k={k} is rank deficient; identical geometry vectors: {coll or 'none (linear dependence)'}"
        )
    y = np.array([o.dk for o in obs])
    s = np.array([o.sigma for o in obs])
    if np.any(s <= 0):
        raise ValueError("every observation needs a positive uncertainty")
    coef, cov, res = _solve(A, y, s)
    chi2 = float(np.sum((res / s) ** 2))
    loo = []
    for i, o in enumerate(obs):
        keep = [x for x in range(len(obs)) if x != i]
        Ak = A[keep]
        if len(keep) < len(basis) or np.linalg.matrix_rank(Ak) < len(basis):
            continue
        c_i, cov_i, _ = _solve(Ak, y[keep], s[keep])
        pred = float(A[i] @ c_i)
        psig = float(np.sqrt(A[i] @ cov_i @ A[i]))
        comb = float(np.hypot(psig, o.sigma))
        loo.append({
            "family": o.family,
            "measured": o.dk,
            "sigma": o.sigma,
            "predicted": pred,
            "prediction_sigma": psig,
            "combined_sigma": comb,
            "error": pred - o.dk,
            "pull": (pred - o.dk) / comb,
        })
    return RelationModel(
        k,
        basis,
        [float(c) for c in coef],
        [float(x) for x in np.sqrt(np.diag(cov))],
        cov.tolist(),
        float(np.linalg.norm(res)),
        chi2,
        [o.family for o in obs],
        A.tolist(),
        [float(x) for x in res],
        loo,
        obs[0].r,
    )


def slope_test(observations: Sequence[Observation]) -> dict:
    """Weighted straight-line fit of d_k against G1; returns slope and its sigma."""
    m = fit_relation(0, observations, basis=[ONE, G1])
    return {"intercept": m.coefficients[0], "slope": m.coefficients[1],
            "slope_sigma": m.sigmas[1], "chi2": m.chi2}
