"""Preimage-weighted counting functions and boundary-growth diagnostics.

The central object: for a disc symbol phi and weight a in (0, 1/2],

    N_a(w) = sum over phi(zeta) = w, with multiplicity, of
             (log 1/|zeta|)^(1-2a).

At a = 1/2 the exponent collapses and N_a counts preimages.  The value
at w = phi(0) contains a preimage at the origin and blows up for
a < 1/2; grid sweeps flag that point (and boundary-ambiguous solves)
rather than interpolating around them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .errors import DomainError
from .series import WeightPair
from .symbols import DiscSymbol, Separated, batched_roots

__all__ = [
    "FLAG_BOUNDARY",
    "FLAG_CENTER_VALUE",
    "FLAG_RESIDUAL",
    "CountingFunctionQuery",
    "RatioReport",
    "SeparatedVerdict",
    "AlemanRecord",
    "counting_function",
    "counting_function_grid",
    "sup_ratio",
    "separated_verdict",
    "aleman_diagnostic",
]

FLAG_BOUNDARY = 1  # a preimage solve landed within 1e-9 of |z| = 1
FLAG_CENTER_VALUE = 2  # query point at the image of the disc center
FLAG_RESIDUAL = 4  # a root failed the residual gate and was dropped

_RESIDUAL_GATE = 1e-8
_BOUNDARY_GATE = 1e-9


def _check_weight(a):
    if not (0.0 < a <= 0.5):
        raise DomainError(f"weight must lie in (0, 1/2], got {a}")


@dataclass(frozen=True)
class CountingFunctionQuery:
    symbol: DiscSymbol
    a: float
    z: complex

    def __post_init__(self):
        _check_weight(self.a)
        if abs(self.z) >= 1.0:
            raise DomainError(f"query point {self.z} outside the open disc")


def _contributions(moduli, c):
    # (log 1/r)^c per root modulus r, with the exponent-0 collapse exact
    if c == 0.0:
        return np.ones_like(moduli)
    with np.errstate(divide="ignore"):
        return (-np.log(moduli)) ** c


def counting_function(q):
    """Weighted preimage count at a single point; empty preimage set -> 0."""
    roots = q.symbol.preimages(q.z)
    if not roots:
        return 0.0
    c = 1.0 - 2.0 * q.a
    moduli = np.array([abs(r) for r in roots])
    return float(np.sum(_contributions(moduli, c)))


def counting_function_grid(symbol, a, z_flat):
    """Vectorized counting function over a flat target array.

    Returns (values, flags).  Roots outside the disc are ignored; roots in
    the boundary band or failing the residual gate flag the query point
    instead of raising, so sweeps can report partial data.
    """
    _check_weight(a)
    z = np.asarray(z_flat, dtype=complex).ravel()
    roots = batched_roots(symbol, z)
    moduli = np.abs(roots)
    inside = moduli < 1.0
    boundary = np.abs(moduli - 1.0) <= _BOUNDARY_GATE
    residual = np.abs(symbol(roots.ravel()).reshape(roots.shape) - z[:, None])
    bad_res = inside & ~boundary & (residual > _RESIDUAL_GATE)
    keep = inside & ~boundary & ~bad_res
    c = 1.0 - 2.0 * a
    contrib = np.where(keep, _contributions(np.where(keep, moduli, 0.5), c), 0.0)
    values = contrib.sum(axis=1)
    flags = np.zeros(z.size, dtype=np.uint8)
    flags[boundary.any(axis=1)] |= FLAG_BOUNDARY
    flags[bad_res.any(axis=1)] |= FLAG_RESIDUAL
    center_image = complex(symbol(0.0))
    flags[np.abs(z - center_image) < 1e-12] |= FLAG_CENTER_VALUE
    flags[~np.isfinite(values)] |= FLAG_CENTER_VALUE
    return values, flags


@dataclass(frozen=True)
class RatioReport:
    """Ratio values over a polar grid with per-point flags.

    sup is the max over unflagged points; profile holds the per-radius
    unflagged max so growth toward the boundary is visible.
    """

    radii: np.ndarray
    angles: np.ndarray
    values: np.ndarray  # (n_radii, n_angles)
    flags: np.ndarray  # (n_radii, n_angles) uint8
    sup: float
    argmax: complex
    profile: np.ndarray  # (n_radii,)

    def csv_rows(self):
        rows = []
        for i, r in enumerate(self.radii):
            for j, th in enumerate(self.angles):
                rows.append(
                    (float(r), float(th), float(self.values[i, j]), int(self.flags[i, j]))
                )
        return rows

    def to_json_dict(self):
        def clean(x):
            return None if not np.isfinite(x) else float(x)

        return {
            "radii": [float(r) for r in self.radii],
            "angles": [float(t) for t in self.angles],
            "values": [[clean(v) for v in row] for row in self.values],
            "flags": [[int(f) for f in row] for row in self.flags],
            "sup": clean(self.sup),
            "argmax": [float(self.argmax.real), float(self.argmax.imag)],
            "profile": [clean(p) for p in self.profile],
        }


def _masked_report(radii, angles, values, flags, points):
    ok = flags == 0
    finite = np.isfinite(values)
    usable = ok & finite
    if usable.any():
        masked = np.where(usable, values, -np.inf)
        idx = np.unravel_index(int(np.argmax(masked)), values.shape)
        sup = float(values[idx])
        argmax = complex(points[idx])
    else:
        sup = float("nan")
        argmax = 0j
    profile = np.full(radii.size, np.nan)
    for i in range(radii.size):
        row = values[i][usable[i]]
        if row.size:
            profile[i] = float(np.max(row))
    return RatioReport(radii, angles, values, flags, sup, argmax, profile)


def sup_ratio(phi, a, j_levels=14, n_angles=256):
    """Ratio N_a(z) / (1-|z|²)^(1-2a) on dyadic radii approaching 1.

    Radii 1 - 2^-j, j = 1..j_levels; uniform angles.  Boundedness of the
    underlying criterion shows up as a flat or decaying profile.
    """
    _check_weight(a)
    if j_levels < 1 or n_angles < 8:
        raise DomainError("grid needs j_levels >= 1 and n_angles >= 8")
    radii = 1.0 - 2.0 ** (-np.arange(1, j_levels + 1, dtype=float))
    angles = 2.0 * np.pi * np.arange(n_angles) / n_angles
    points = radii[:, None] * np.exp(1j * angles)[None, :]
    values, flags = counting_function_grid(phi, a, points.ravel())
    values = values.reshape(points.shape)
    flags = flags.reshape(points.shape)
    denom = (1.0 - radii[:, None] ** 2) ** (1.0 - 2.0 * a)
    ratio = values / denom
    return _masked_report(radii, angles, ratio, flags, points)


@dataclass(frozen=True)
class SeparatedVerdict:
    bounded_evidence: str  # "finite" or "growth detected"
    sup1: float
    sup2: float
    growth1: bool
    growth2: bool
    report1: RatioReport
    report2: RatioReport

    def to_json_dict(self):
        return {
            "bounded_evidence": self.bounded_evidence,
            "sup1": None if not np.isfinite(self.sup1) else float(self.sup1),
            "sup2": None if not np.isfinite(self.sup2) else float(self.sup2),
            "growth1": self.growth1,
            "growth2": self.growth2,
            "report1": self.report1.to_json_dict(),
            "report2": self.report2.to_json_dict(),
        }


def _profile_grows(profile):
    # growth: any of the last three levels exceeds twice the mid-level value
    p = np.asarray(profile, dtype=float)
    p = np.where(np.isfinite(p), p, 0.0)
    if p.size < 4:
        return False
    mid = p[p.size // 2]
    return bool(np.any(p[-3:] > 2.0 * mid + 1e-300))


def separated_verdict(Phi, a, j_levels=14, n_angles=256):
    """Coordinatewise sup-ratio sweep with a declared growth heuristic.

    The verdict is evidence over the tested grid, not a proof; the raw
    profiles are always part of the record.
    """
    if not isinstance(Phi, Separated):
        raise TypeError("verdict requires a separated bidisc symbol")
    if not isinstance(a, WeightPair):
        raise TypeError("verdict requires a WeightPair")
    r1 = sup_ratio(Phi.phi1, a.a1, j_levels, n_angles)
    r2 = sup_ratio(Phi.phi2, a.a2, j_levels, n_angles)
    g1 = _profile_grows(r1.profile)
    g2 = _profile_grows(r2.profile)
    verdict = "growth detected" if (g1 or g2) else "finite"
    return SeparatedVerdict(verdict, r1.sup, r2.sup, g1, g2, r1, r2)


@dataclass(frozen=True)
class AlemanRecord:
    center_value: float
    disc_mean: float
    ratio: float
    disc_radius: float

    def to_json_dict(self):
        def clean(x):
            return None if not np.isfinite(x) else float(x)

        return {
            "center_value": clean(self.center_value),
            "disc_mean": clean(self.disc_mean),
            "ratio": clean(self.ratio),
            "disc_radius": float(self.disc_radius),
        }


def aleman_diagnostic(phi, a, omega, n_radial=12, n_angles=32):
    """Value of N_a at omega vs its mean over the hyperbolic-scale disc
    |z - omega| < (1 - |omega|²)/2.

    Reports the raw ratio only; no constant is asserted.  Doubling
    n_radial/n_angles provides the stability check.
    """
    _check_weight(a)
    omega = complex(omega)
    if not (0.5 < abs(omega) < 1.0 - 1e-3):
        raise DomainError(f"anchor must satisfy 1/2 < |omega| < 1-1e-3, got {omega}")
    rho = 0.5 * (1.0 - abs(omega) ** 2)
    x, wgl = roots_legendre(n_radial)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * wgl
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    z = omega + rho * np.sqrt(u)[:, None] * np.exp(1j * theta)[None, :]
    vals, flags = counting_function_grid(phi, a, z.ravel())
    usable = np.isfinite(vals) & ((flags & (FLAG_BOUNDARY | FLAG_RESIDUAL)) == 0)
    if not usable.all():
        warnings.warn("some mean-disc nodes were flagged and excluded")
    weights = np.repeat(wu / n_angles, n_angles)
    wsum = float(np.sum(weights[usable]))
    mean = float(np.dot(weights[usable], vals[usable]) / wsum) if wsum > 0 else 0.0
    cv, cf = counting_function_grid(phi, a, np.array([omega]))
    center = float(cv[0])
    if mean == 0.0 and center == 0.0:
        ratio = 0.0
    elif mean == 0.0:
        ratio = float("inf")
    else:
        ratio = center / mean
    return AlemanRecord(center, mean, ratio, rho)
