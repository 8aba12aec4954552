"""Holomorphic self-maps of the disc and bidisc.

Every disc symbol carries a rational representation phi = num/den with
polynomial numerator and denominator, so preimage solving is uniformly
"roots of num - w*den" through companion matrices.  Self-mapping is
validated numerically at construction on a boundary-adjacent grid; a
failing map is rejected.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DomainError,
    NumericalFailureError,
    BoundaryAmbiguityError,
)
from .series import TaylorGrid2D, eval2d

__all__ = [
    "DiscSymbol",
    "Polynomial",
    "Moebius",
    "FiniteBlaschke",
    "BidiscSymbol",
    "Separated",
    "PolyPair",
    "identity_symbol",
    "symbol_from_json",
    "symbol_to_json",
    "bidisc_from_json",
    "bidisc_to_json",
]

_BOUNDARY_POINTS = 720
_BOUNDARY_RADIUS = 1.0 - 1e-6
_SELF_MAP_SLACK = 1e-9
_RESIDUAL_GATE = 1e-8
_BOUNDARY_GATE = 1e-9
_CLUSTER_GATE = 1e-7


def _check_self_map(evaluate, label):
    theta = 2.0 * np.pi * np.arange(_BOUNDARY_POINTS) / _BOUNDARY_POINTS
    z = _BOUNDARY_RADIUS * np.exp(1j * theta)
    top = float(np.max(np.abs(evaluate(z))))
    if top > 1.0 + _SELF_MAP_SLACK:
        raise DomainError(
            f"{label} is not a self-map of the disc: boundary max |phi| = {top:.6f}"
        )


class DiscSymbol:
    """Base: evaluation, derivative, rational form, preimage solving."""

    def __call__(self, z):
        raise NotImplementedError

    def derivative(self, z):
        raise NotImplementedError

    def rational(self):
        """Ascending (num, den) with phi = num/den on the disc."""
        raise NotImplementedError

    @property
    def degree(self):
        raise NotImplementedError

    def taylor(self, order):
        """Series coefficients of phi to the given order, by long division.

        The denominator has constant term 1 after normalization and all
        its roots lie outside the closed disc, so the division is stable
        and the coefficients decay geometrically.
        """
        num, den = self.rational()
        num = np.asarray(num, dtype=complex)
        den = np.asarray(den, dtype=complex)
        num = num / den[0]
        den = den / den[0]
        out = np.zeros(order + 1, dtype=complex)
        for m in range(order + 1):
            acc = num[m] if m < num.size else 0.0
            top = min(m, den.size - 1)
            for i in range(1, top + 1):
                acc -= den[i] * out[m - i]
            out[m] = acc
        return out

    def _eval_checked(self, z):
        scalar = np.isscalar(z)
        if scalar and abs(z) >= 1.0:
            raise DomainError(f"point {z} outside the open disc")
        return scalar

    def preimages(self, w):
        """All z in D with phi(z) = w, repeated per multiplicity.

        Roots come from the companion matrix of num - w*den, polished by
        one Newton step.  A kept root failing the 1e-8 residual gate is a
        numerical failure; a root within 1e-9 of |z| = 1 is reported as
        boundary-ambiguous instead of being guessed in or out.
        """
        if abs(w) >= 1.0:
            raise DomainError(f"target {w} outside the open disc")
        num, den = self.rational()
        num = np.asarray(num, dtype=complex)
        den = np.asarray(den, dtype=complex)
        coeffs = np.zeros(max(num.size, den.size), dtype=complex)
        coeffs[: num.size] = num
        coeffs[: den.size] -= w * den
        # strip numerically zero leading (highest-degree) coefficients
        scale = float(np.max(np.abs(coeffs)))
        top = coeffs.size - 1
        while top > 0 and abs(coeffs[top]) <= 1e-14 * scale:
            top -= 1
        if top == 0:
            return []
        roots = np.roots(coeffs[top::-1])
        roots = _newton_polish(coeffs[: top + 1], roots)
        keep = []
        for r in roots:
            dist = abs(abs(r) - 1.0)
            if dist <= _BOUNDARY_GATE:
                raise BoundaryAmbiguityError(
                    f"preimage {r} within {dist:.2e} of the unit circle"
                )
            if abs(r) >= 1.0:
                continue
            res = abs(self(complex(r)) - w)
            if res > _RESIDUAL_GATE:
                raise NumericalFailureError(
                    f"preimage residual {res:.2e} exceeds gate at root {r}"
                )
            keep.append(complex(r))
        return _cluster(keep)


def _newton_polish(coeffs_ascending, roots):
    # one Newton step on p(z) = sum c_k z^k; skipped where |p'| is tiny
    c = np.asarray(coeffs_ascending, dtype=complex)
    dc = c[1:] * np.arange(1, c.size)
    p = np.polynomial.polynomial.polyval(roots, c)
    dp = np.polynomial.polynomial.polyval(roots, dc)
    safe = np.abs(dp) > 1e-12
    step = np.where(safe, p / np.where(safe, dp, 1.0), 0.0)
    return roots - step


def _cluster(points):
    """Group points closer than the cluster gate; output repeats preserved.

    Sorting by (re, im) makes the output order deterministic.
    """
    if not points:
        return []
    pts = sorted(points, key=lambda v: (v.real, v.imag))
    out = []
    group = [pts[0]]
    for p in pts[1:]:
        if abs(p - group[-1]) <= _CLUSTER_GATE:
            group.append(p)
        else:
            center = complex(np.mean(group))
            out.extend([center] * len(group))
            group = [p]
    center = complex(np.mean(group))
    out.extend([center] * len(group))
    return out


class Polynomial(DiscSymbol):
    """phi(z) = sum c_k z^k with ascending coefficients."""

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        while c.size > 1 and c[-1] == 0:
            c = c[:-1]
        if c.size < 2:
            raise DomainError("constant symbols are not supported")
        self.coeffs = c
        _check_self_map(self.__call__, "polynomial symbol")

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, z):
        scalar = self._eval_checked(z)
        v = np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.coeffs)
        return complex(v) if scalar else v

    def derivative(self, z):
        scalar = self._eval_checked(z)
        dc = self.coeffs[1:] * np.arange(1, self.coeffs.size)
        v = np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), dc)
        return complex(v) if scalar else v

    def rational(self):
        return self.coeffs.copy(), np.array([1.0 + 0.0j])


class Moebius(DiscSymbol):
    """phi_alpha(z) = (alpha - z) / (1 - conj(alpha) z), an involution."""

    def __init__(self, alpha):
        alpha = complex(alpha)
        if abs(alpha) >= 1.0:
            raise DomainError(f"Moebius parameter must satisfy |alpha| < 1, got {alpha}")
        self.alpha = alpha
        _check_self_map(self.__call__, "Moebius symbol")

    @property
    def degree(self):
        return 1

    def __call__(self, z):
        scalar = self._eval_checked(z)
        z = np.asarray(z, dtype=complex)
        v = (self.alpha - z) / (1.0 - np.conj(self.alpha) * z)
        return complex(v) if scalar else v

    def derivative(self, z):
        scalar = self._eval_checked(z)
        z = np.asarray(z, dtype=complex)
        v = (abs(self.alpha) ** 2 - 1.0) / (1.0 - np.conj(self.alpha) * z) ** 2
        return complex(v) if scalar else v

    def rational(self):
        return (
            np.array([self.alpha, -1.0], dtype=complex),
            np.array([1.0, -np.conj(self.alpha)], dtype=complex),
        )

    def preimages(self, w):
        if abs(w) >= 1.0:
            raise DomainError(f"target {w} outside the open disc")
        return [complex(self(w))]


class FiniteBlaschke(DiscSymbol):
    """factor * product (z - z_j)/(1 - conj(z_j) z), degree = #zeros."""

    def __init__(self, zeros, factor=1.0):
        zs = np.atleast_1d(np.asarray(zeros, dtype=complex))
        if zs.size == 0:
            raise DomainError("at least one zero required")
        if np.any(np.abs(zs) >= 1.0):
            raise DomainError("all zeros must lie strictly inside the disc")
        factor = complex(factor)
        if abs(abs(factor) - 1.0) > 1e-9:
            raise DomainError(f"factor must be unimodular, got |factor| = {abs(factor)}")
        self.zeros = zs
        self.factor = factor / abs(factor)
        _check_self_map(self.__call__, "Blaschke symbol")

    @property
    def degree(self):
        return self.zeros.size

    def __call__(self, z):
        scalar = self._eval_checked(z)
        z = np.asarray(z, dtype=complex)
        v = np.full_like(z, self.factor)
        for zj in self.zeros:
            v = v * (z - zj) / (1.0 - np.conj(zj) * z)
        return complex(v) if scalar else v

    def derivative(self, z):
        scalar = self._eval_checked(z)
        z = np.asarray(z, dtype=complex)
        factors = [(z - zj) / (1.0 - np.conj(zj) * z) for zj in self.zeros]
        out = np.zeros_like(z)
        for j, zj in enumerate(self.zeros):
            dj = (1.0 - abs(zj) ** 2) / (1.0 - np.conj(zj) * z) ** 2
            rest = np.ones_like(z)
            for i, fi in enumerate(factors):
                if i != j:
                    rest = rest * fi
            out = out + dj * rest
        out = self.factor * out
        return complex(out) if scalar else out

    def rational(self):
        num = np.array([1.0 + 0.0j])
        den = np.array([1.0 + 0.0j])
        for zj in self.zeros:
            num = np.convolve(num, np.array([-zj, 1.0]))
            den = np.convolve(den, np.array([1.0, -np.conj(zj)]))
        return self.factor * num, den


def identity_symbol():
    return Polynomial([0.0, 1.0])


def batched_roots(symbol, w_flat):
    """Roots of num - w*den for a whole vector of targets at once.

    Returns a (n, d) complex matrix of polished companion eigenvalues.
    The leading coefficient never vanishes for the supported variants
    (|leading num| is the unimodular factor or the polynomial top
    coefficient, |leading den contribution| < |w| bound keeps it away
    from zero), so one companion shape serves all targets.
    """
    num, den = symbol.rational()
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    w = np.asarray(w_flat, dtype=complex).ravel()
    d = max(num.size, den.size) - 1
    n = w.size
    coeffs = np.zeros((n, d + 1), dtype=complex)
    coeffs[:, : num.size] = num[None, :]
    coeffs[:, : den.size] -= w[:, None] * den[None, :]
    lead = coeffs[:, d]
    if np.any(np.abs(lead) < 1e-13):
        # fall back to per-point solving on the degenerate targets
        raise NumericalFailureError("leading coefficient vanished in a batch solve")
    monic = coeffs[:, :d] / lead[:, None]
    comp = np.zeros((n, d, d), dtype=complex)
    if d > 1:
        idx = np.arange(d - 1)
        comp[:, idx + 1, idx] = 1.0
    comp[:, :, d - 1] = -monic
    roots = np.linalg.eigvals(comp)
    # one vectorized Newton step against the unnormalized polynomial
    powers = roots[:, :, None] ** np.arange(d + 1)[None, None, :]
    p = np.einsum("nrk,nk->nr", powers, coeffs)
    dcoeffs = coeffs[:, 1:] * np.arange(1, d + 1)[None, :]
    dp = np.einsum("nrk,nk->nr", powers[:, :, :d], dcoeffs)
    safe = np.abs(dp) > 1e-12
    roots = roots - np.where(safe, p / np.where(safe, dp, 1.0), 0.0)
    return roots


class BidiscSymbol:
    def map_points(self, points):
        """Apply the map to an (N, 2) array of bidisc points."""
        raise NotImplementedError


class Separated(BidiscSymbol):
    """(z1, z2) -> (phi1(z1), phi2(z2)) with one-variable coordinates."""

    def __init__(self, phi1, phi2):
        if not isinstance(phi1, DiscSymbol) or not isinstance(phi2, DiscSymbol):
            raise TypeError("separated symbols take two disc symbols")
        self.phi1 = phi1
        self.phi2 = phi2

    def __call__(self, z):
        return (self.phi1(z[0]), self.phi2(z[1]))

    def map_points(self, points):
        out = np.empty_like(points)
        out[:, 0] = self.phi1(points[:, 0])
        out[:, 1] = self.phi2(points[:, 1])
        return out


class PolyPair(BidiscSymbol):
    """General polynomial bidisc map (p1(z1,z2), p2(z1,z2))."""

    def __init__(self, p1, p2):
        if not isinstance(p1, TaylorGrid2D) or not isinstance(p2, TaylorGrid2D):
            raise TypeError("PolyPair takes two coefficient grids")
        self.p1 = p1
        self.p2 = p2
        n = 120
        theta = 2.0 * np.pi * np.arange(n) / n
        ring = _BOUNDARY_RADIUS * np.exp(1j * theta)
        z1, z2 = np.meshgrid(ring, ring, indexing="ij")
        for label, p in (("first", p1), ("second", p2)):
            top = float(np.max(np.abs(eval2d(p, z1, z2))))
            if top > 1.0 + _SELF_MAP_SLACK:
                raise DomainError(
                    f"{label} coordinate is not a self-map: boundary max = {top:.6f}"
                )

    def __call__(self, z):
        return (eval2d(self.p1, z[0], z[1]), eval2d(self.p2, z[0], z[1]))

    def map_points(self, points):
        out = np.empty_like(points)
        out[:, 0] = eval2d(self.p1, points[:, 0], points[:, 1])
        out[:, 1] = eval2d(self.p2, points[:, 0], points[:, 1])
        return out


def _pair(x):
    return [float(np.real(x)), float(np.imag(x))]


def symbol_to_json(phi):
    if isinstance(phi, Moebius):
        return {"type": "moebius", "alpha": _pair(phi.alpha)}
    if isinstance(phi, FiniteBlaschke):
        return {
            "type": "blaschke",
            "zeros": [_pair(z) for z in phi.zeros],
            "factor": _pair(phi.factor),
        }
    if isinstance(phi, Polynomial):
        return {"type": "poly", "coeffs": [_pair(c) for c in phi.coeffs]}
    raise DomainError(f"cannot serialize symbol of type {type(phi).__name__}")


def _complex_from(pair):
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise DomainError(f"expected [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def symbol_from_json(d):
    kind = d.get("type")
    if kind == "moebius":
        return Moebius(_complex_from(d["alpha"]))
    if kind == "poly":
        return Polynomial([_complex_from(c) for c in d["coeffs"]])
    if kind == "blaschke":
        factor = _complex_from(d["factor"]) if "factor" in d else 1.0
        return FiniteBlaschke([_complex_from(z) for z in d["zeros"]], factor)
    raise DomainError(f"unknown symbol type {kind!r}")


def bidisc_to_json(Phi):
    if isinstance(Phi, Separated):
        return {
            "type": "separated",
            "phi1": symbol_to_json(Phi.phi1),
            "phi2": symbol_to_json(Phi.phi2),
        }
    if isinstance(Phi, PolyPair):
        return {
            "type": "polypair",
            "p1": Phi.p1.to_json_dict(),
            "p2": Phi.p2.to_json_dict(),
        }
    raise DomainError(f"cannot serialize bidisc symbol {type(Phi).__name__}")


def bidisc_from_json(d):
    kind = d.get("type")
    if kind == "separated":
        return Separated(symbol_from_json(d["phi1"]), symbol_from_json(d["phi2"]))
    if kind == "polypair":
        return PolyPair(
            TaylorGrid2D.from_json_dict(d["p1"]),
            TaylorGrid2D.from_json_dict(d["p2"]),
        )
    raise DomainError(f"unknown bidisc symbol type {kind!r}")
