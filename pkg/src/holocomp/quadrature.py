"""Weighted quadrature on the unit disc and seeded Monte Carlo sampling.

Radial rules live on t = r² in (0,1) against the density
(1-t)^gamma * ((-log t)/2)^c, angles are uniform.  With the normalized
area measure dA = (1/pi) dx dy this makes

    integral_D f(z) (1-|z|^2)^gamma (log 1/|z|)^c dA(z)
        = sum_j wt_j * (1/M) sum_k f(sqrt(t_j) e^{i theta_k}).

Two rule families: a plain Gauss-Jacobi rule (smooth integrands, c = 0)
and a composite rule with dyadically shrinking panels toward t = 0 and
t = 1 (log-power weights, boundary-concentrated integrands).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import DomainError, AccuracyError, NumericalFailureError

__all__ = [
    "QuadratureRule",
    "IntegralResult",
    "SampleCloud",
    "build_rule",
    "build_refined_rule",
    "integrate_disc",
    "integrate2d",
    "sample_dVbeta",
    "mc_mean",
]


class QuadratureRule:
    """Immutable disc rule: radial nodes/weights on t = r² plus M angles."""

    __slots__ = ("gamma", "c", "t", "wt", "M", "recipe", "_z", "_w")

    def __init__(self, gamma, c, t, wt, M, recipe):
        self.gamma = float(gamma)
        self.c = float(c)
        self.t = np.asarray(t, dtype=float)
        self.wt = np.asarray(wt, dtype=float)
        self.M = int(M)
        self.recipe = recipe
        self.t.flags.writeable = False
        self.wt.flags.writeable = False
        self._z = None
        self._w = None

    @property
    def n_radial(self):
        return self.t.size

    @property
    def n_nodes(self):
        return self.t.size * self.M

    def nodes(self):
        """Flat complex nodes and real weights, radius-major ordering."""
        if self._z is None:
            theta = 2.0 * np.pi * np.arange(self.M) / self.M
            ring = np.exp(1j * theta)
            r = np.sqrt(self.t)
            z = (r[:, None] * ring[None, :]).ravel()
            w = np.repeat(self.wt / self.M, self.M)
            z.flags.writeable = False
            w.flags.writeable = False
            self._z = z
            self._w = w
        return self._z, self._w

    def mass(self):
        return float(np.sum(self.wt))


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    error_estimate: float
    nodes_used: int


@dataclass(frozen=True)
class SampleCloud:
    """Reproducible weighted sample of the bidisc."""

    seed: int
    points: np.ndarray  # (N, 2) complex
    weights: np.ndarray  # (N,) positive

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def total_mass(self):
        return float(np.sum(self.weights))


def build_rule(gamma, n, M):
    """Gauss-Jacobi disc rule, exact for radial degree <= 2n-1 in t."""
    if gamma <= -1.0:
        raise DomainError(f"radial weight exponent must exceed -1, got {gamma}")
    if n < 4:
        raise DomainError(f"radial order must be >= 4, got {n}")
    if M < 8:
        raise DomainError(f"angular order must be >= 8, got {M}")
    x, w = roots_jacobi(n, gamma, 0.0)
    t = 0.5 * (x + 1.0)
    wt = w * 2.0 ** (-(gamma + 1.0))
    return QuadratureRule(gamma, 0.0, t, wt, M, ("jacobi", gamma, int(n), int(M)))


def _panel_breaks(j0, j1):
    left = [0.0] + [2.0 ** (-j) for j in range(j0, 0, -1)]
    right = [1.0 - 2.0 ** (-j) for j in range(2, j1 + 1)] + [1.0]
    return np.array(left + right)


def build_refined_rule(gamma, c, q=6, M=24, j0=10, j1=8):
    """Composite Gauss rule with dyadic panels toward both t=0 and t=1.

    Handles log-power radial weights ((-log t)/2)^c, c > -1, and integrands
    that concentrate at either end of the radius range.
    """
    if gamma <= -1.0 or c <= -1.0:
        raise DomainError(f"weight exponents must exceed -1, got gamma={gamma} c={c}")
    if q < 2 or M < 8 or j0 < 2 or j1 < 2:
        raise DomainError("refined rule needs q >= 2, M >= 8, panel counts >= 2")
    x, w = roots_legendre(q)
    breaks = _panel_breaks(j0, j1)
    a = breaks[:-1]
    b = breaks[1:]
    half = 0.5 * (b - a)
    t = (a[:, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    wt = wt * (1.0 - t) ** gamma
    if c != 0.0:
        wt = wt * (0.5 * (-np.log(t))) ** c
    return QuadratureRule(
        gamma, c, t, wt, M, ("panels", gamma, c, int(q), int(M), int(j0), int(j1))
    )


def coarsen_rule(rule):
    """A strictly cheaper rule of the same family, for error sentinels."""
    kind = rule.recipe[0]
    if kind == "jacobi":
        _, gamma, n, M = rule.recipe
        return build_rule(gamma, max(n // 2, 4), max(M // 2, 8))
    _, gamma, c, q, M, j0, j1 = rule.recipe
    return build_refined_rule(
        gamma, c, max(q // 2, 2), max(M // 2, 8), max(j0 - 2, 2), max(j1 - 2, 2)
    )


def integrate_disc(f, rule, tol=None):
    """Integrate f over the disc against the rule's weight.

    The error estimate compares against a coarsened companion rule.  When
    tol is given and the estimate exceeds tol * max(1, |value|), raises
    AccuracyError.
    """
    z, w = rule.nodes()
    value = complex(np.dot(w, np.asarray(f(z))))
    coarse = coarsen_rule(rule)
    zc, wc = coarse.nodes()
    ref = complex(np.dot(wc, np.asarray(f(zc))))
    est = abs(value - ref)
    if tol is not None and est > tol * max(1.0, abs(value)):
        raise AccuracyError("quadrature resolution insufficient", est)
    return IntegralResult(value, est, rule.n_nodes + coarse.n_nodes)


def _tensor_sum(g, rule1, rule2, chunk):
    z1, w1 = rule1.nodes()
    z2, w2 = rule2.nodes()
    total = 0.0 + 0.0j
    for lo in range(0, z1.size, chunk):
        sl = slice(lo, lo + chunk)
        vals = np.asarray(g(z1[sl][:, None], z2[None, :]))
        bad = ~np.isfinite(vals)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise NumericalFailureError(
                f"non-finite integrand value at z1={z1[sl][i]} z2={z2[j]}"
            )
        total += np.dot(w1[sl], vals @ w2)
    return complex(total)


def integrate2d(g, rule1, rule2, tol=None, chunk=2048):
    """Tensor-product quadrature of g(z1, z2) over the bidisc."""
    value = _tensor_sum(g, rule1, rule2, chunk)
    c1 = coarsen_rule(rule1)
    c2 = coarsen_rule(rule2)
    ref = _tensor_sum(g, c1, c2, chunk)
    est = abs(value - ref)
    if tol is not None and est > tol * max(1.0, abs(value)):
        raise AccuracyError("tensor quadrature resolution insufficient", est)
    nodes = rule1.n_nodes * rule2.n_nodes + c1.n_nodes * c2.n_nodes
    return IntegralResult(value, est, nodes)


def sample_dVbeta(beta, N, seed):
    """Draw N bidisc points from the density prop. to (1-|z1|²)^β(1-|z2|²)^β.

    Exact inverse-CDF radius r = sqrt(1 - u^{1/(β+1)}), uniform angles,
    counter-based generator so a fixed seed reproduces the cloud exactly.
    Weights are the constant total mass 1/(β+1)² split over the N points.
    """
    if beta <= -1.0:
        raise DomainError(f"Bergman exponent must exceed -1, got {beta}")
    if N < 1:
        raise DomainError(f"sample count must be >= 1, got {N}")
    gen = np.random.Generator(np.random.Philox(int(seed)))
    u = gen.random((int(N), 2))
    ang = gen.random((int(N), 2))
    r = np.sqrt(1.0 - u ** (1.0 / (beta + 1.0)))
    points = r * np.exp(2j * np.pi * ang)
    mass = 1.0 / (beta + 1.0) ** 2
    weights = np.full(int(N), mass / int(N))
    return SampleCloud(int(seed), points, weights)


def mc_mean(values, weights, n_batches=32):
    """Weighted-sum estimate with a batch-means standard error.

    Splits the stream into contiguous batches; the spread of batch partial
    sums estimates the error of the total.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    estimate = float(np.dot(w, v))
    n = v.size
    b = min(n_batches, n)
    if b < 2:
        return estimate, float("inf")
    edges = np.linspace(0, n, b + 1, dtype=int)
    partial = np.array(
        [np.dot(w[lo:hi], v[lo:hi]) for lo, hi in zip(edges[:-1], edges[1:])]
    )
    stderr = float(np.std(partial, ddof=1) * np.sqrt(b))
    return estimate, stderr
