"""Truncated power series on the disc and bidisc, and their weighted norms.

Coefficient grids are exact objects: a TaylorGrid2D IS the finite double
series sum a_{k,l} z1^k z2^l, with no truncation error inside the type.
Norms come in two flavors that are equivalent but not equal: the
coefficient form sum (k+1)^{2a1} (l+1)^{2a2} |a_{k,l}|² and the integral
form built from derivative energies.  The integral form supports two
radial weights:

  * "log":     (log 1/|z|)^{1-2a}, the weight matched to the counting
               function, for which substitution identities are exact;
  * "bergman": (1-|z|²)^{1-2a}, the smooth-weight convention.

Both are exposed; nothing here infers one from the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, AccuracyError
from .quadrature import build_rule, build_refined_rule, coarsen_rule

__all__ = [
    "WeightPair",
    "BergmanWeight",
    "TaylorGrid1D",
    "TaylorGrid2D",
    "eval2d",
    "mixed_partial",
    "partial1",
    "partial2",
    "antiderivative",
    "dirichlet_norm_coeff",
    "dirichlet_seminorm_coeff_1d",
    "dirichlet_energy_integral",
    "energy_components",
    "bergman_norm",
    "test_function",
]


@dataclass(frozen=True)
class WeightPair:
    """Anisotropic weight exponents, one per bidisc coordinate."""

    a1: float
    a2: float

    def __post_init__(self):
        for name, a in (("a1", self.a1), ("a2", self.a2)):
            if not (0.0 < a <= 0.5):
                raise DomainError(f"{name} must lie in (0, 1/2], got {a}")


@dataclass(frozen=True)
class BergmanWeight:
    beta: float

    def __post_init__(self):
        if self.beta <= -1.0:
            raise DomainError(f"beta must exceed -1, got {self.beta}")


class TaylorGrid1D:
    """Finite complex coefficient vector c_k, k = 0..K."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise DomainError("1-D coefficient vector required")
        self.coeffs = c

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, z):
        z = np.asarray(z)
        acc = np.zeros_like(z, dtype=complex) + self.coeffs[-1]
        for ck in self.coeffs[-2::-1]:
            acc = acc * z + ck
        return acc if acc.shape else complex(acc)

    def derivative(self):
        if self.coeffs.size == 1:
            return TaylorGrid1D([0.0])
        k = np.arange(1, self.coeffs.size)
        return TaylorGrid1D(self.coeffs[1:] * k)


class TaylorGrid2D:
    """Finite complex coefficient rectangle a_{k,l}, k = 0..K, l = 0..L."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
        if c.ndim != 2 or c.size == 0:
            raise DomainError("2-D coefficient grid required")
        self.coeffs = c

    @property
    def shape(self):
        return self.coeffs.shape

    def to_json_dict(self):
        return {
            "K": self.coeffs.shape[0] - 1,
            "L": self.coeffs.shape[1] - 1,
            "re": self.coeffs.real.tolist(),
            "im": self.coeffs.imag.tolist(),
        }

    @staticmethod
    def from_json_dict(d):
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d["im"], dtype=float)
        if re.shape != im.shape:
            raise DomainError("re and im grids must have the same shape")
        if re.shape != (d["K"] + 1, d["L"] + 1):
            raise DomainError("K, L must match the coefficient grid shape")
        return TaylorGrid2D(re + 1j * im)


def eval2d(f, z1, z2):
    """Exact finite sum of the double series at (z1, z2), |z_i| < 1.

    Horner in z2 inside Horner in z1.  Accepts scalars or broadcastable
    arrays; scalar inputs are domain-checked against the open bidisc.
    """
    scalar = np.isscalar(z1) and np.isscalar(z2)
    if scalar and (abs(z1) >= 1.0 or abs(z2) >= 1.0):
        raise DomainError(f"point ({z1}, {z2}) outside the open bidisc")
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    c = f.coeffs
    acc = np.polynomial.polynomial.polyval(z2, c[-1, :])
    for k in range(c.shape[0] - 2, -1, -1):
        acc = acc * z1 + np.polynomial.polynomial.polyval(z2, c[k, :])
    if c.shape[0] == 1:
        # single-row grids never touch z1 in the loop; keep the broadcast shape
        acc = acc + np.zeros_like(z1)
    return complex(acc) if scalar else acc


def mixed_partial(f):
    """d²/dz1 dz2 as a coefficient shift with factor k*l."""
    c = f.coeffs
    if c.shape[0] < 2 or c.shape[1] < 2:
        return TaylorGrid2D([[0.0]])
    k = np.arange(1, c.shape[0])
    l = np.arange(1, c.shape[1])
    return TaylorGrid2D(c[1:, 1:] * k[:, None] * l[None, :])


def partial1(f):
    c = f.coeffs
    if c.shape[0] < 2:
        return TaylorGrid2D(np.zeros((1, c.shape[1])))
    k = np.arange(1, c.shape[0])
    return TaylorGrid2D(c[1:, :] * k[:, None])


def partial2(f):
    c = f.coeffs
    if c.shape[1] < 2:
        return TaylorGrid2D(np.zeros((c.shape[0], 1)))
    l = np.arange(1, c.shape[1])
    return TaylorGrid2D(c[:, 1:] * l[None, :])


def antiderivative(f):
    """Termwise antiderivative in both variables; zero first row/column.

    Exact inverse of mixed_partial on coefficient grids.
    """
    c = f.coeffs
    out = np.zeros((c.shape[0] + 1, c.shape[1] + 1), dtype=complex)
    k = np.arange(1, c.shape[0] + 1)
    l = np.arange(1, c.shape[1] + 1)
    out[1:, 1:] = c / (k[:, None] * l[None, :])
    return TaylorGrid2D(out)


def dirichlet_norm_coeff(f, a):
    """sum (k+1)^{2a1} (l+1)^{2a2} |a_{k,l}|², row-major compensated sum."""
    c = f.coeffs
    kfac = (np.arange(c.shape[0]) + 1.0) ** (2.0 * a.a1)
    lfac = (np.arange(c.shape[1]) + 1.0) ** (2.0 * a.a2)
    terms = kfac[:, None] * lfac[None, :] * (c.real**2 + c.imag**2)
    return math.fsum(terms.ravel(order="C"))


def dirichlet_seminorm_coeff_1d(f, a):
    """sum over k >= 1 of (k+1)^{2a} |c_k|²; constants have seminorm 0."""
    c = f.coeffs
    if c.size < 2:
        return 0.0
    k = np.arange(1, c.size)
    terms = (k + 1.0) ** (2.0 * a) * (c[1:].real ** 2 + c[1:].imag ** 2)
    return math.fsum(terms)


def _radial_moment(m, c, weight_form):
    # integral over D of |z|^{2m} times the radial weight, weight exponent c
    if weight_form == "log":
        # integral_0^1 t^m ((-log t)/2)^c dt = 2^{-c} Gamma(c+1) / (m+1)^{c+1}
        return math.exp(-c * math.log(2.0) + math.lgamma(c + 1.0)) / (m + 1.0) ** (
            c + 1.0
        )
    # integral_0^1 t^m (1-t)^c dt = B(m+1, c+1)
    return math.exp(
        math.lgamma(m + 1.0) + math.lgamma(c + 1.0) - math.lgamma(m + c + 2.0)
    )


def _poly_energy_1d_exact(coeffs, c, weight_form):
    # integral over D of |h(z)|² against the radial weight, h a polynomial
    m = np.arange(len(coeffs))
    mom = np.array([_radial_moment(int(i), c, weight_form) for i in m])
    terms = (np.abs(np.asarray(coeffs)) ** 2) * mom
    return math.fsum(terms)


def _slice_poly(grid, axis):
    # polynomial in the surviving variable after setting the other to 0
    return grid.coeffs[:, 0] if axis == 0 else grid.coeffs[0, :]


def _rebuild_like(rule, gamma, c):
    kind = rule.recipe[0]
    if kind == "jacobi":
        if c != 0.0:
            # log-power weights need panel refinement at the origin
            return build_refined_rule(gamma, c)
        _, _, n, M = rule.recipe
        return build_rule(gamma, n, M)
    _, _, _, q, M, j0, j1 = rule.recipe
    return build_refined_rule(gamma, c, q, M, j0, j1)


def _poly_energy_1d_rule(coeffs, c, weight_form, rule):
    gamma, lc = (0.0, c) if weight_form == "log" else (c, 0.0)
    r = _rebuild_like(rule, gamma, lc)
    z, w = r.nodes()
    h = np.polynomial.polynomial.polyval(z, np.asarray(coeffs, dtype=complex))
    return float(np.dot(w, np.abs(h) ** 2)), r


def energy_components(f, a, rule=None, weight_form="log"):
    """The four pieces of the integral-form norm of a 2-D grid.

    Returns (head, e1, e2, e12): squared value at the origin, the two
    slice derivative energies (other variable frozen at 0), and the mixed
    derivative energy.  rule=None computes every radial integral from the
    exact closed-form moments (no quadrature error for polynomial input);
    otherwise the supplied rule fixes the resolution and companion rules
    with the correct weight exponents are derived from it.
    """
    if weight_form not in ("log", "bergman"):
        raise DomainError(f"unknown weight_form {weight_form!r}")
    c1 = 1.0 - 2.0 * a.a1
    c2 = 1.0 - 2.0 * a.a2
    head = abs(f.coeffs[0, 0]) ** 2
    d1 = _slice_poly(partial1(f), 0)
    d2 = _slice_poly(partial2(f), 1)
    d12 = mixed_partial(f).coeffs
    if rule is None:
        e1 = _poly_energy_1d_exact(d1, c1, weight_form)
        e2 = _poly_energy_1d_exact(d2, c2, weight_form)
        m1 = np.array(
            [_radial_moment(k, c1, weight_form) for k in range(d12.shape[0])]
        )
        m2 = np.array(
            [_radial_moment(l, c2, weight_form) for l in range(d12.shape[1])]
        )
        e12 = math.fsum(((np.abs(d12) ** 2) * m1[:, None] * m2[None, :]).ravel())
        return head, e1, e2, e12
    e1, _ = _poly_energy_1d_rule(d1, c1, weight_form, rule)
    e2, _ = _poly_energy_1d_rule(d2, c2, weight_form, rule)
    gamma1, lc1 = (0.0, c1) if weight_form == "log" else (c1, 0.0)
    gamma2, lc2 = (0.0, c2) if weight_form == "log" else (c2, 0.0)
    r1 = _rebuild_like(rule, gamma1, lc1)
    r2 = _rebuild_like(rule, gamma2, lc2)
    z1, w1 = r1.nodes()
    z2, w2 = r2.nodes()
    grid = TaylorGrid2D(d12)
    vals = np.abs(eval2d(grid, z1[:, None], z2[None, :])) ** 2
    e12 = float(np.dot(w1, vals @ w2))
    return head, e1, e2, e12


def dirichlet_energy_integral(f, a, rule=None, weight_form="log", tol=None):
    """Integral-form norm: |f(0,0)|² plus the three derivative energies.

    Deterministic for a fixed rule.  With tol set, the value is compared
    against a coarsened-rule evaluation and AccuracyError is raised when
    the difference exceeds tol * max(1, value).
    """
    head, e1, e2, e12 = energy_components(f, a, rule, weight_form)
    value = head + e1 + e2 + e12
    if tol is not None and rule is not None:
        ch, ce1, ce2, ce12 = energy_components(f, a, coarsen_rule(rule), weight_form)
        est = abs(value - (ch + ce1 + ce2 + ce12))
        if est > tol * max(1.0, value):
            raise AccuracyError("energy quadrature resolution insufficient", est)
    return value


def bergman_norm(f, w, rule=None, tol=None):
    """Squared norm of f against dV_beta = (1-|z1|²)^β (1-|z2|²)^β dA dA.

    rule=None uses the exact coefficient formula
    sum |a_{k,l}|² B(k+1, β+1) B(l+1, β+1); a rule triggers honest tensor
    quadrature of |f|².
    """
    beta = w.beta
    c = f.coeffs
    if rule is None:
        mk = np.array([_radial_moment(k, beta, "bergman") for k in range(c.shape[0])])
        ml = np.array([_radial_moment(l, beta, "bergman") for l in range(c.shape[1])])
        return math.fsum(((np.abs(c) ** 2) * mk[:, None] * ml[None, :]).ravel())
    r = _rebuild_like(rule, beta, 0.0)
    z1, w1 = r.nodes()
    vals = np.abs(eval2d(f, z1[:, None], z1[None, :])) ** 2
    value = float(np.dot(w1, vals @ w1))
    if tol is not None:
        rc = coarsen_rule(r)
        zc, wc = rc.nodes()
        vc = np.abs(eval2d(f, zc[:, None], zc[None, :])) ** 2
        est = abs(value - float(np.dot(wc, vc @ wc)))
        if est > tol * max(1.0, value):
            raise AccuracyError("Bergman quadrature resolution insufficient", est)
    return value


def _binom_series_integrated(omega_bar, power, K):
    # coefficients of integral_0^z (1 - omega_bar*u)^{-power} du, degree K
    # term k of the integrand is pochhammer(power,k)/k! * omega_bar^k
    out = np.zeros(K + 1, dtype=complex)
    term = 1.0 + 0.0j
    for k in range(K):
        out[k + 1] = term / (k + 1)
        term = term * (power + k) / (k + 1) * omega_bar
    return out


def test_function(omega, a, K=24):
    """Localized unit-family member anchored at omega in the bidisc.

    Three summands: an antiderivative kernel in z1, one in z2, and their
    product, each damped by the matching power of (1-|omega_i|²).  At
    omega = 0 this collapses to z1 + z2 + z1*z2 exactly.  K is the
    per-variable truncation order; coefficients decay geometrically at
    rate |omega_i|, so K = 24 keeps the tail below 1e-8 for |omega| <= 0.9.
    """
    if K < 1:
        raise DomainError(f"truncation order must be >= 1, got {K}")
    w1, w2 = complex(omega[0]), complex(omega[1])
    if abs(w1) >= 1.0 or abs(w2) >= 1.0:
        raise DomainError("anchor point must lie in the open bidisc")
    p1 = 3.0 - 2.0 * a.a1
    p2 = 3.0 - 2.0 * a.a2
    amp1 = (1.0 - abs(w1) ** 2) ** (p1 / 2.0)
    amp2 = (1.0 - abs(w2) ** 2) ** (p2 / 2.0)
    t1 = amp1 * _binom_series_integrated(np.conj(w1), p1, K)
    t2 = amp2 * _binom_series_integrated(np.conj(w2), p2, K)
    grid = np.outer(t1, t2)
    grid[:, 0] += t1
    grid[0, :] += t2
    return TaylorGrid2D(grid)
