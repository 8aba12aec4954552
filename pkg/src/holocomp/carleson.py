"""Bidisc Carleson boxes, pulled-back volume measures, and box-growth checks.

A box is anchored at a boundary point pair (e^{i zeta_1}, e^{i zeta_2})
with Euclidean half-sizes (delta_1, delta_2); its size parameter is
|I x J| = 4 delta_1 delta_2 (arc length |I| = 2 delta).  Box volumes
under the weighted area measure factor into per-coordinate lens
integrals with closed-form branch handling; pulled-back volumes are
seeded Monte Carlo counts over a fixed sample cloud.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import ConsistencyError, DomainError
from .quadrature import mc_mean, sample_dVbeta

__all__ = [
    "CarlesonBox",
    "BoxUnion",
    "McEstimate",
    "PullbackMeasure",
    "BidiscKernel",
    "KernelIntegralReport",
    "PsiReport",
    "OneBoxReport",
    "v_beta_arc",
    "box_volume",
    "pullback_box_volume",
    "kernel_integral_test",
    "psi_admissibility",
    "one_box_sufficient_check",
]

_TWO_PI_SQ = 4.0 * math.pi**2


@dataclass(frozen=True)
class CarlesonBox:
    """Product region {z: |z_i - e^{i zeta_i}| < delta_i} of the bidisc."""

    zeta: tuple
    delta: tuple

    def __post_init__(self):
        if len(self.zeta) != 2 or len(self.delta) != 2:
            raise DomainError("a box needs two anchor angles and two sizes")
        for d in self.delta:
            if not (0.0 < d <= 2.0):
                raise DomainError(f"box size must lie in (0, 2], got {d}")

    @property
    def area_param(self):
        return 4.0 * self.delta[0] * self.delta[1]

    def anchors(self):
        return (
            complex(np.exp(1j * self.zeta[0])),
            complex(np.exp(1j * self.zeta[1])),
        )

    def contains(self, points):
        z1, z2 = self.anchors()
        pts = np.asarray(points)
        return (np.abs(pts[:, 0] - z1) < self.delta[0]) & (
            np.abs(pts[:, 1] - z2) < self.delta[1]
        )


@dataclass(frozen=True)
class BoxUnion:
    boxes: tuple

    def __post_init__(self):
        if len(self.boxes) == 0:
            raise DomainError("box union must be nonempty")
        for b in self.boxes:
            if not isinstance(b, CarlesonBox):
                raise TypeError("box union holds CarlesonBox entries")

    def contains(self, points):
        mask = self.boxes[0].contains(points)
        for b in self.boxes[1:]:
            mask = mask | b.contains(points)
        return mask


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    hits: int
    n_samples: int

    def to_json_dict(self):
        return {
            "value": self.value,
            "stderr": self.stderr,
            "hits": self.hits,
            "n_samples": self.n_samples,
        }


# ---------------------------------------------------------------------------
# deterministic box volume

def _angular_halfwidth(r, delta):
    # half-angle of the boundary arc cut at radius r, clipped into [0, pi]
    c = (1.0 + r * r - delta * delta) / (2.0 * r)
    return np.arccos(np.clip(c, -1.0, 1.0))


def v_beta_arc(delta, beta, n=160):
    """Weighted area of {|z - 1| < delta} inside the disc, normalized.

    The per-coordinate factor of a box volume.  Branches keep the
    integrand smooth: the arc half-angle vanishes (or saturates) like a
    square root at the cut radius, and that factor is folded into a
    Gauss-Jacobi weight exactly.
    """
    if beta <= -1.0:
        raise DomainError(f"beta must exceed -1, got {beta}")
    if delta <= 0.0:
        raise DomainError(f"box size must be positive, got {delta}")
    if delta >= 2.0:
        return 1.0 / (beta + 1.0)
    if delta == 1.0:
        x, w = roots_jacobi(n, beta, 0.0)
        u = 0.5 * (x + 1.0)
        vals = np.arccos(0.5 * u) * (1.0 + u) ** beta * u
        return float((2.0 / math.pi) * 2.0 ** (-(beta + 1.0)) * np.dot(w, vals))
    if delta < 1.0:
        t0 = (1.0 - delta) ** 2
        x, w = roots_jacobi(n, beta, 0.5)
        t = t0 + (1.0 - t0) * 0.5 * (x + 1.0)
        h = _angular_halfwidth(np.sqrt(t), delta) / (math.pi * np.sqrt(t - t0))
        return float((1.0 - t0) ** (beta + 1.5) * 2.0 ** (-(beta + 1.5)) * np.dot(w, h))
    t1 = (delta - 1.0) ** 2
    x, w = roots_jacobi(n, beta, 0.5)
    t = t1 + (1.0 - t1) * 0.5 * (x + 1.0)
    h = (math.pi - _angular_halfwidth(np.sqrt(t), delta)) / (math.pi * np.sqrt(t - t1))
    corr = (1.0 - t1) ** (beta + 1.5) * 2.0 ** (-(beta + 1.5)) * np.dot(w, h)
    return float(1.0 / (beta + 1.0) - corr)


def box_volume(box, beta, n=160, mc_samples=100_000, seed=20259, cross_check=True):
    """Weighted volume of the box intersected with the bidisc.

    Deterministic per-coordinate quadrature; when cross_check is set a
    seeded Monte Carlo estimate must agree within 4 standard errors
    (with a Poisson floor) or ConsistencyError is raised.
    """
    value = v_beta_arc(box.delta[0], beta, n) * v_beta_arc(box.delta[1], beta, n)
    if cross_check:
        cloud = sample_dVbeta(beta, mc_samples, seed)
        ind = box.contains(cloud.points).astype(float)
        est, stderr = mc_mean(ind, cloud.weights)
        hits = int(ind.sum())
        floor = cloud.total_mass * math.sqrt(max(hits, 1)) / cloud.size
        if abs(value - est) > 4.0 * max(stderr, floor):
            raise ConsistencyError(
                f"quadrature volume {value:.6g} vs Monte Carlo {est:.6g} "
                f"(stderr {stderr:.3g}) differ beyond 4 sigma"
            )
    return float(value)


# ---------------------------------------------------------------------------
# pulled-back measure

class PullbackMeasure:
    """Image of the weighted bidisc volume under a self-map, as samples.

    The cloud is drawn once (counter-based generator, fixed seed) and the
    mapped points are cached; every downstream estimate is deterministic.
    """

    def __init__(self, Phi, beta, n_samples=200_000, seed=20259):
        if beta <= -1.0:
            raise DomainError(f"beta must exceed -1, got {beta}")
        if n_samples < 1:
            raise DomainError("need at least one sample")
        self.Phi = Phi
        self.beta = float(beta)
        self.n_samples = int(n_samples)
        self.seed = int(seed)
        self._cloud = None
        self._image = None

    @property
    def cloud(self):
        if self._cloud is None:
            self._cloud = sample_dVbeta(self.beta, self.n_samples, self.seed)
        return self._cloud

    @property
    def image(self):
        if self._image is None:
            self._image = self.Phi.map_points(self.cloud.points)
        return self._image

    @property
    def weights(self):
        return self.cloud.weights

    @property
    def total_mass(self):
        return 1.0 / (self.beta + 1.0) ** 2


def pullback_box_volume(measure, boxes):
    """Mass of {z: Phi(z) in the box union}, with batch-means stderr."""
    region = BoxUnion((boxes,)) if isinstance(boxes, CarlesonBox) else boxes
    ind = region.contains(measure.image).astype(float)
    est, stderr = mc_mean(ind, measure.weights)
    hits = int(ind.sum())
    if hits == 0 and measure.n_samples < 10_000:
        warnings.warn(
            "no samples landed in the target boxes; raise n_samples "
            "before trusting the zero estimate"
        )
    return McEstimate(float(est), float(stderr), hits, measure.n_samples)


# ---------------------------------------------------------------------------
# kernel-integral sufficient test

@dataclass(frozen=True)
class BidiscKernel:
    """Constants of the product log-majorant surrogate kernel."""

    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        if self.c1 <= 0.0 or self.c2 <= 0.0:
            raise DomainError("kernel constants must be positive")


@dataclass(frozen=True)
class KernelIntegralReport:
    sup: float
    argmax: tuple
    probes: np.ndarray
    values: np.ndarray  # (P, P) integral per probe pair
    kernel_label: str

    def to_json_dict(self):
        return {
            "sup": self.sup,
            "argmax": [
                [float(self.argmax[0].real), float(self.argmax[0].imag)],
                [float(self.argmax[1].real), float(self.argmax[1].imag)],
            ],
            "probes": [[float(p.real), float(p.imag)] for p in self.probes],
            "values": [[float(v) for v in row] for row in self.values],
            "kernel_label": self.kernel_label,
        }


_DEFAULT_PROBE_RADII = (0.3, 0.6, 0.8, 0.9, 0.95, 0.99)


def _probe_grid(radii, n_angles):
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0 or np.any(radii <= 0.0) or np.any(radii >= 1.0):
        raise DomainError("probe radii must lie strictly inside (0, 1)")
    ang = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    return np.concatenate(([0.0 + 0.0j], (radii[:, None] * ang[None, :]).ravel()))


def kernel_integral_test(measure, kernel=None, radii=_DEFAULT_PROBE_RADII, n_angles=8):
    """sup over probe points w of the sampled integral of the surrogate
    kernel (C1 + log 2/|1-conj(w1)z1|)(C2 + log 2/|1-conj(w2)z2|).

    The factorized form turns the probe sweep into two thin matrix
    products over the sample cloud.
    """
    if kernel is None:
        kernel = BidiscKernel()
    probes = _probe_grid(radii, n_angles)
    image = measure.image
    weights = measure.weights
    p = probes.size
    values = np.zeros((p, p))
    chunk = 100_000
    for lo in range(0, image.shape[0], chunk):
        hi = min(lo + chunk, image.shape[0])
        a = kernel.c1 + np.log(2.0 / np.abs(1.0 - np.conj(probes)[:, None] * image[None, lo:hi, 0]))
        b = kernel.c2 + np.log(2.0 / np.abs(1.0 - np.conj(probes)[:, None] * image[None, lo:hi, 1]))
        values += (a * weights[None, lo:hi]) @ b.T
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    return KernelIntegralReport(
        float(values[i, j]),
        (complex(probes[i]), complex(probes[j])),
        probes,
        values,
        "log-majorant product",
    )


# ---------------------------------------------------------------------------
# admissibility of the box-size weight

@dataclass(frozen=True)
class PsiReport:
    verdict: str  # "admissible" | "inadmissible" | "inconclusive"
    value: float | None
    octaves: int
    partial_sum: float

    def to_json_dict(self):
        return {
            "verdict": self.verdict,
            "value": self.value,
            "octaves": self.octaves,
            "partial_sum": self.partial_sum,
        }


def _psi_spot_check(psi):
    t = _TWO_PI_SQ * 2.0 ** (-np.arange(46, dtype=float))
    vals = np.asarray(psi(t), dtype=float)
    if np.any(vals < -1e-12):
        raise DomainError("weight function must be nonnegative on (0, 4 pi^2]")
    # t decreases along the grid, so values may not increase
    if np.any(np.diff(vals) > 1e-9 * (1.0 + np.abs(vals[:-1])) + 1e-12):
        raise DomainError("weight function must be nondecreasing")


def psi_admissibility(psi, max_octaves=40, rtol=1e-3):
    """Convergence verdict for the axis-singular double integral of
    psi(xy)/(xy) over (0, 2 pi]^2.

    Substituting exponential coordinates collapses the integral to
    int_0^inf s * psi(4 pi^2 e^{-s}) ds, summed octave by octave with a
    Gauss rule.  Divergence is declared after five consecutive >10%
    octave increases; convergence needs the last octave below the
    relative threshold, and a geometric tail estimate is added.
    """
    _psi_spot_check(psi)
    x, w = roots_legendre(16)
    ln2 = math.log(2.0)
    contributions = []
    consecutive = 0
    for j in range(max_octaves):
        s = ln2 * (j + 0.5 * (x + 1.0))
        c = 0.5 * ln2 * float(np.dot(w, s * np.asarray(psi(_TWO_PI_SQ * np.exp(-s)))))
        contributions.append(c)
        if j >= 1 and contributions[-2] > 0.0 and c > 1.1 * contributions[-2]:
            consecutive += 1
            if consecutive >= 5:
                return PsiReport(
                    "inadmissible", None, j + 1, float(sum(contributions))
                )
        else:
            consecutive = 0
    total = float(sum(contributions))
    last, prev = contributions[-1], contributions[-2]
    if last <= rtol * max(total, 1e-300):
        tail = 0.0
        if prev > 0.0:
            rho = last / prev
            if 0.0 < rho < 0.999:
                tail = last * rho / (1.0 - rho)
        return PsiReport("admissible", total + tail, max_octaves, total)
    return PsiReport("inconclusive", None, max_octaves, total)


# ---------------------------------------------------------------------------
# one-box dyadic sweep

@dataclass(frozen=True)
class OneBoxReport:
    verdict: str
    max_ratio: float
    profile: tuple  # per-level max ratio
    rows: tuple  # (j, theta1, theta2, volume, ratio, stderr)
    psi_value: float
    full_box_ratio: float
    n_samples: int

    def csv_rows(self):
        return list(self.rows)

    def to_json_dict(self):
        def clean(x):
            return None if not np.isfinite(x) else float(x)

        return {
            "verdict": self.verdict,
            "max_ratio": clean(self.max_ratio),
            "profile": [clean(p) for p in self.profile],
            "psi_value": self.psi_value,
            "full_box_ratio": clean(self.full_box_ratio),
            "n_samples": self.n_samples,
            "n_rows": len(self.rows),
        }


def _psi_scalar(psi, t):
    return float(np.asarray(psi(np.array([t], dtype=float)))[0])


def one_box_sufficient_check(measure, psi, j_max=10, n_centers=8):
    """Dyadic box sweep of the pulled-back volume against psi(|I x J|).

    Boxes have equal per-coordinate size 2^{-j}, j = 0..j_max, anchored
    at an n_centers x n_centers angular grid.  The evidence verdict
    compares the tail of the per-level max-ratio profile against its
    earlier levels; raw rows are always reported.
    """
    adm = psi_admissibility(psi)
    if adm.verdict != "admissible":
        raise DomainError(
            f"the box-size weight must pass the admissibility check ({adm.verdict})"
        )
    if j_max < 3 or n_centers < 1:
        raise DomainError("sweep needs j_max >= 3 and n_centers >= 1")
    image = measure.image
    n = image.shape[0]
    mass_per = measure.total_mass / n
    thetas = 2.0 * np.pi * np.arange(n_centers) / n_centers - np.pi
    anchors = np.exp(1j * thetas)
    d1 = np.abs(image[None, :, 0] - anchors[:, None])
    d2 = np.abs(image[None, :, 1] - anchors[:, None])
    n_batches = 32
    nb = n // n_batches
    rows = []
    profile = []
    for j in range(j_max + 1):
        delta = 2.0 ** (-j)
        a1 = (d1 < delta).astype(np.float32)
        a2 = (d2 < delta).astype(np.float32)
        counts = (a1 @ a2.T).astype(float)
        if nb >= 1:
            a1b = a1[:, : nb * n_batches].reshape(n_centers, n_batches, nb)
            a2b = a2[:, : nb * n_batches].reshape(n_centers, n_batches, nb)
            partial = np.einsum("cbj,dbj->cdb", a1b, a2b).astype(float) * mass_per
            stderrs = np.std(partial, axis=2, ddof=1) * math.sqrt(n_batches)
        else:
            stderrs = np.full((n_centers, n_centers), np.inf)
        volumes = counts * mass_per
        denom = _psi_scalar(psi, 4.0 * delta * delta)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(
                volumes > 0.0,
                volumes / denom if denom > 0.0 else np.inf,
                0.0,
            )
        for ci in range(n_centers):
            for cj in range(n_centers):
                rows.append(
                    (
                        j,
                        float(thetas[ci]),
                        float(thetas[cj]),
                        float(volumes[ci, cj]),
                        float(ratios[ci, cj]),
                        float(stderrs[ci, cj]),
                    )
                )
        profile.append(float(np.max(ratios)))
    p = np.asarray(profile)
    grows = bool(np.max(p[-3:]) > 2.0 * np.max(p[:-3]))
    verdict = "growth detected" if grows else "sufficient-condition satisfied"
    full_ratio = measure.total_mass / _psi_scalar(psi, 16.0)
    return OneBoxReport(
        verdict,
        float(np.max(p)),
        tuple(profile),
        tuple(rows),
        float(adm.value),
        float(full_ratio),
        measure.n_samples,
    )
