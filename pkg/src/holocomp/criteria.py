"""Disc-level boundedness machinery, each piece as a checkable identity.

Four independent computations live here:

* a substitution identity for weighted area integrals under a pair of
  one-variable symbols, verified by computing both sides with unrelated
  quadratures (counting-function side vs composed-integrand side);
* a two-route evaluation of the composed-function norm for separated
  bidisc symbols (exact coefficient route vs counting-function route);
* the normalized-kernel ratio criterion with critical-point flagging;
* the double-integral characterization of one-variable Dirichlet-type
  seminorms (difference quotient against a power of the Szego kernel).

Identities are never collapsed to one code path: agreement between the
two sides is the entire point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, DomainError, NumericalFailureError, UndefinedBoundError
from .nevanlinna import counting_function_grid
from .quadrature import build_refined_rule, build_rule
from .series import (
    TaylorGrid1D,
    TaylorGrid2D,
    WeightPair,
    dirichlet_seminorm_coeff_1d,
    energy_components,
    eval2d,
    mixed_partial,
    partial1,
    partial2,
)
from .symbols import DiscSymbol, Separated

__all__ = [
    "PairIntegrand",
    "BUILTIN_INTEGRANDS",
    "resolution_parameters",
    "IdentityReport",
    "verify_change_of_variables",
    "ExpansionReport",
    "verify_separated_norm_expansion",
    "KernelRatioQuery",
    "KernelRatioReport",
    "kernel_ratio_sup",
    "operator_norm_bound",
    "tied_weight",
    "BWRecord",
    "EquivalenceReport",
    "balooch_wu_ratio",
    "balooch_wu_family",
]


# ---------------------------------------------------------------------------
# resolution ladder

def resolution_parameters(level):
    """Quadrature knobs at a dyadic refinement level (0 = default)."""
    if not isinstance(level, (int, np.integer)) or not (0 <= level <= 4):
        raise DomainError(f"resolution level must be an integer in 0..4, got {level}")
    s = 2**level
    return {"q": 6 * s, "angular": 24 * s, "j0": 10 + 2 * level, "j1": 8 + 2 * level}


def _level_rule(gamma, c, level):
    p = resolution_parameters(level)
    return build_refined_rule(gamma, c, q=p["q"], M=p["angular"], j0=p["j0"], j1=p["j1"])


# ---------------------------------------------------------------------------
# test integrands g(w1, w2)

@dataclass(frozen=True)
class PairIntegrand:
    """Nonnegative weight g(w1, w2) for the substitution identity.

    factors, when present, lists (u, v) pairs with g = sum u(w1)·v(w2);
    separable structure lets tensor double sums collapse to 1-D dots.
    """

    name: str
    fn: object
    factors: tuple | None = None

    def __call__(self, w1, w2):
        return self.fn(w1, w2)


def _g_one(w1, w2):
    return np.ones(np.broadcast(w1, w2).shape)


def _g_boundary_product(w1, w2):
    return (1.0 - np.abs(w1) ** 2) * (1.0 - np.abs(w2) ** 2)


def _g_band_kernel(w1, w2):
    return np.abs(1.0 + 0.5 * w1 * np.conj(w2)) ** 2


def _g_inv_kernel_sq(w1, w2):
    return np.abs(1.0 - w1 * np.conj(w2)) ** (-2.0)


BUILTIN_INTEGRANDS = {
    "one": PairIntegrand("one", _g_one, ((lambda w: np.ones_like(w, dtype=float),) * 2,)),
    "boundary_product": PairIntegrand(
        "boundary_product",
        _g_boundary_product,
        (((lambda w: 1.0 - np.abs(w) ** 2),) * 2,),
    ),
    "band_kernel": PairIntegrand(
        "band_kernel",
        _g_band_kernel,
        (
            (lambda w: np.ones_like(w, dtype=complex), lambda w: np.ones_like(w, dtype=complex)),
            (lambda w: np.conj(w), lambda w: 0.5 * w),
            (lambda w: w, lambda w: 0.5 * np.conj(w)),
            (lambda w: 0.5 * np.abs(w) ** 2, lambda w: 0.5 * np.abs(w) ** 2),
        ),
    ),
    # no separable form; exercises the generic chunked tensor path
    "inv_kernel_sq": PairIntegrand("inv_kernel_sq", _g_inv_kernel_sq, None),
}


def _pair_sum(fn, x1, c1, x2, c2, chunk=256):
    """sum_{j,k} c1_j c2_k fn(x1_j, x2_k) with non-finite detection."""
    total = 0.0 + 0.0j
    for lo in range(0, x1.size, chunk):
        hi = min(lo + chunk, x1.size)
        block = np.asarray(fn(x1[lo:hi, None], x2[None, :]))
        if not np.all(np.isfinite(block.real)) or (
            np.iscomplexobj(block) and not np.all(np.isfinite(block.imag))
        ):
            bad = np.argwhere(~np.isfinite(block))[0]
            raise NumericalFailureError(
                "non-finite integrand value at pair "
                f"(z1={x1[lo + bad[0]]}, z2={x2[bad[1]]})"
            )
        total += np.dot(c1[lo:hi].astype(complex), block @ c2.astype(complex))
    return total


def _weighted_double_integral(g, x1, c1, x2, c2):
    if isinstance(g, PairIntegrand) and g.factors is not None:
        total = 0.0 + 0.0j
        for u, v in g.factors:
            total += np.dot(c1.astype(complex), np.asarray(u(x1))) * np.dot(
                c2.astype(complex), np.asarray(v(x2))
            )
        return float(total.real)
    return float(_pair_sum(g, x1, c1, x2, c2).real)


# ---------------------------------------------------------------------------
# substitution identity

@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    gap: float
    resolution: dict
    flags: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "resolution": dict(self.resolution),
            "flags": dict(self.flags),
        }


def _relative_gap(lhs, rhs):
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return abs(lhs - rhs) / scale


def verify_change_of_variables(phi1, phi2, a, g, level=0, weight_form="log"):
    """Both sides of the weighted substitution identity, independently.

    Mapped side: integral of g(phi1(z1), phi2(z2)) |phi1'|² |phi2'|²
    against the per-coordinate radial weights.  Counting side: integral
    of g(w1, w2) times the two preimage-weighted counting functions
    against plain area measure.  The radial weight is (log 1/|z|)^(1-2a)
    by default; weight_form="bergman" substitutes (1-|z|²)^(1-2a).
    """
    if not isinstance(a, WeightPair):
        raise TypeError("weights must be given as a WeightPair")
    if weight_form not in ("log", "bergman"):
        raise DomainError(f"unknown weight_form {weight_form!r}")
    if isinstance(g, str):
        if g not in BUILTIN_INTEGRANDS:
            raise DomainError(
                f"unknown integrand {g!r}; available: "
                + ", ".join(sorted(BUILTIN_INTEGRANDS))
            )
        g = BUILTIN_INTEGRANDS[g]
    exps = (1.0 - 2.0 * a.a1, 1.0 - 2.0 * a.a2)

    mapped_x, mapped_c = [], []
    for phi, c in zip((phi1, phi2), exps):
        rule = _level_rule(0.0, c, level) if weight_form == "log" else _level_rule(c, 0.0, level)
        z, w = rule.nodes()
        mapped_x.append(np.asarray(phi(z)))
        mapped_c.append(w * np.abs(phi.derivative(z)) ** 2)
    lhs = _weighted_double_integral(g, mapped_x[0], mapped_c[0], mapped_x[1], mapped_c[1])

    if weight_form == "bergman":
        warnings.warn(
            "counting side uses log-weight preimage sums; the bergman "
            "weight_form compares inequivalent densities"
        )
    count_rule = _level_rule(0.0, 0.0, level)
    wz, ww = count_rule.nodes()
    flags = {}
    count_x, count_c = [], []
    for idx, (phi, ai) in enumerate(zip((phi1, phi2), (a.a1, a.a2)), start=1):
        vals, fl = counting_function_grid(phi, ai, wz)
        finite = np.isfinite(vals)
        flags[f"counting_flagged_{idx}"] = int(np.count_nonzero(fl))
        flags[f"counting_nonfinite_{idx}"] = int(np.count_nonzero(~finite))
        count_x.append(wz)
        count_c.append(ww * np.where(finite, vals, 0.0))
    rhs = _weighted_double_integral(g, count_x[0], count_c[0], count_x[1], count_c[1])

    resolution = {"level": level, "weight_form": weight_form, **resolution_parameters(level)}
    return IdentityReport(lhs, rhs, _relative_gap(lhs, rhs), resolution, flags)


# ---------------------------------------------------------------------------
# separated norm expansion, two routes

@dataclass(frozen=True)
class ExpansionReport:
    route_coefficient: dict
    route_counting: dict
    term_gaps: dict
    total_gap: float
    resolution: dict
    flags: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "route_coefficient": dict(self.route_coefficient),
            "route_counting": dict(self.route_counting),
            "term_gaps": dict(self.term_gaps),
            "total_gap": self.total_gap,
            "resolution": dict(self.resolution),
            "flags": dict(self.flags),
        }


def _truncated_powers(phi, count, order):
    """Coefficient rows of phi^k, k = 0..count-1, truncated at the order."""
    t = phi.taylor(order)
    rows = np.zeros((count, order + 1), dtype=complex)
    rows[0, 0] = 1.0
    for k in range(1, count):
        rows[k] = np.convolve(rows[k - 1], t)[: order + 1]
    return rows


def _compose_separated(f, phi1, phi2, order):
    m = f.coeffs
    p1 = _truncated_powers(phi1, m.shape[0], order)
    p2 = _truncated_powers(phi2, m.shape[1], order)
    return TaylorGrid2D(p1.T @ m @ p2)


def verify_separated_norm_expansion(Phi, a, f, level=1, order=48, tail_rtol=1e-6):
    """Norm of the composed function by two unrelated routes.

    Coefficient route: substitute the coordinate series into f (truncated
    at the given order, with a re-truncation sentinel) and evaluate the
    integral-form norm from exact radial moments.  Counting route: value
    at the image of the origin plus three derivative integrals weighted
    by preimage counting functions on 1-D node sets.
    """
    if not isinstance(Phi, Separated):
        raise TypeError("norm expansion requires a separated bidisc symbol")
    if not isinstance(a, WeightPair):
        raise TypeError("weights must be given as a WeightPair")

    composed_hi = _compose_separated(f, Phi.phi1, Phi.phi2, order + 12)
    composed_lo = _compose_separated(f, Phi.phi1, Phi.phi2, order)
    head_a, e1_a, e2_a, e12_a = energy_components(composed_hi, a, rule=None)
    lo = energy_components(composed_lo, a, rule=None)
    total_a = head_a + e1_a + e2_a + e12_a
    tail_est = abs(total_a - sum(lo))
    if tail_est > tail_rtol * max(abs(total_a), 1e-300):
        raise AccuracyError(
            f"series composition truncated at order {order} has not settled", tail_est
        )

    rule = _level_rule(0.0, 0.0, level)
    w, wt = rule.nodes()
    c1 = complex(Phi.phi1(0.0))
    c2 = complex(Phi.phi2(0.0))
    flags = {}
    weighted = []
    for idx, (phi, ai) in enumerate(zip((Phi.phi1, Phi.phi2), (a.a1, a.a2)), start=1):
        vals, fl = counting_function_grid(phi, ai, w)
        finite = np.isfinite(vals)
        flags[f"counting_flagged_{idx}"] = int(np.count_nonzero(fl))
        flags[f"counting_nonfinite_{idx}"] = int(np.count_nonzero(~finite))
        weighted.append(wt * np.where(finite, vals, 0.0))

    head_b = abs(eval2d(f, c1, c2)) ** 2

    d1 = partial1(f).coeffs
    pow2 = c2 ** np.arange(d1.shape[1])
    slice1 = TaylorGrid1D(d1 @ pow2) if d1.size else TaylorGrid1D([0.0])
    t1 = float(np.dot(weighted[0], np.abs(slice1(w)) ** 2))

    d2 = partial2(f).coeffs
    pow1 = c1 ** np.arange(d2.shape[0])
    slice2 = TaylorGrid1D(pow1 @ d2) if d2.size else TaylorGrid1D([0.0])
    t2 = float(np.dot(weighted[1], np.abs(slice2(w)) ** 2))

    d12 = mixed_partial(f).coeffs
    v1 = np.vander(w, d12.shape[0], increasing=True)
    v2 = np.vander(w, d12.shape[1], increasing=True)
    x1 = v1.T @ (weighted[0][:, None] * v1.conj())
    x2 = v2.T @ (weighted[1][:, None] * v2.conj())
    t12 = float(np.einsum("kl,mn,km,ln->", d12, d12.conj(), x1, x2).real)

    total_b = head_b + t1 + t2 + t12
    route_a = {"head": head_a, "e1": e1_a, "e2": e2_a, "e12": e12_a, "total": total_a}
    route_b = {"head": head_b, "e1": t1, "e2": t2, "e12": t12, "total": total_b}
    scale = max(abs(total_a), abs(total_b), 1e-300)
    term_gaps = {
        key: abs(route_a[key] - route_b[key]) / scale
        for key in ("head", "e1", "e2", "e12")
    }
    resolution = {"level": level, "order": order, **resolution_parameters(level)}
    return ExpansionReport(
        route_a, route_b, term_gaps, _relative_gap(total_a, total_b), resolution, flags
    )


# ---------------------------------------------------------------------------
# normalized kernel ratio

def tied_weight(sigma, beta):
    """The derived space weight 2*sigma - 2*beta used when parameters are tied."""
    return 2.0 * sigma - 2.0 * beta


@dataclass(frozen=True)
class KernelRatioQuery:
    phi: DiscSymbol
    beta: float
    j_levels: int = 8
    n_angles: int = 16
    eps: float = 1e-6

    def __post_init__(self):
        if self.beta <= -2.0:
            raise DomainError(f"exponent must exceed -2, got {self.beta}")
        if self.eps <= 0.0:
            raise DomainError("critical-point cutoff must be positive")
        if self.j_levels < 1 or self.n_angles < 4:
            raise DomainError("grid needs j_levels >= 1 and n_angles >= 4")


@dataclass(frozen=True)
class KernelRatioReport:
    points: np.ndarray  # side grid on the disc, includes 0
    values: np.ndarray  # (n, n) ratio per point pair
    point_flags: np.ndarray  # bool, |phi'| below cutoff
    sup: float
    argmax: tuple
    n_flagged_points: int
    n_flagged_pairs: int

    def csv_rows(self):
        rows = []
        for i in range(self.points.size):
            for j in range(self.points.size):
                v = self.values[i, j]
                rows.append(
                    (
                        i,
                        j,
                        float(v) if np.isfinite(v) else float("nan"),
                        int(self.point_flags[i] or self.point_flags[j]),
                    )
                )
        return rows

    def to_json_dict(self):
        def clean(x):
            return None if not np.isfinite(x) else float(x)

        return {
            "points": [[float(p.real), float(p.imag)] for p in self.points],
            "values": [[clean(v) for v in row] for row in self.values],
            "point_flags": [bool(b) for b in self.point_flags],
            "sup": clean(self.sup),
            "argmax": [
                [float(self.argmax[0].real), float(self.argmax[0].imag)],
                [float(self.argmax[1].real), float(self.argmax[1].imag)],
            ],
            "n_flagged_points": self.n_flagged_points,
            "n_flagged_pairs": self.n_flagged_pairs,
        }


def _side_grid(j_levels, n_angles):
    radii = 1.0 - 2.0 ** (-np.arange(1, j_levels + 1, dtype=float))
    angles = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    return np.concatenate(([0.0 + 0.0j], (radii[:, None] * angles[None, :]).ravel()))


def kernel_ratio_sup(q):
    """|normalized kernel| / |phi'(z1) phi'(z2)|^(1/(beta+2)) over a pair grid.

    Points where |phi'| < eps are flagged as critical and excluded from
    the sup but kept in the table.  Same-point pairs use the closed-form
    diagonal value (1-|phi|²)/(1-|z|²).
    """
    z = _side_grid(q.j_levels, q.n_angles)
    fz = np.asarray(q.phi(z))
    dz = np.asarray(q.phi.derivative(z))
    num = 1.0 - fz[:, None] * np.conj(fz)[None, :]
    den = 1.0 - z[:, None] * np.conj(z)[None, :]
    kmat = np.abs(num / den)
    diag = (1.0 - np.abs(fz) ** 2) / (1.0 - np.abs(z) ** 2)
    np.fill_diagonal(kmat, np.abs(diag))
    dmod = np.abs(dz)
    flagged = dmod < q.eps
    with np.errstate(divide="ignore", over="ignore"):
        denom = (dmod[:, None] * dmod[None, :]) ** (1.0 / (q.beta + 2.0))
        values = kmat / denom
    ok = ~(flagged[:, None] | flagged[None, :])
    usable = ok & np.isfinite(values)
    if usable.any():
        masked = np.where(usable, values, -np.inf)
        i, j = np.unravel_index(int(np.argmax(masked)), values.shape)
        sup = float(values[i, j])
        arg = (complex(z[i]), complex(z[j]))
    else:
        sup = float("nan")
        arg = (0j, 0j)
    return KernelRatioReport(
        z,
        values,
        flagged,
        sup,
        arg,
        int(np.count_nonzero(flagged)),
        int(values.size - np.count_nonzero(ok)),
    )


def operator_norm_bound(q):
    """(grid sup)^(beta+2); the unknown absolute prefactor is not included."""
    report = kernel_ratio_sup(q)
    if not np.isfinite(report.sup):
        raise UndefinedBoundError("every grid pair involves a flagged critical point")
    return float(report.sup ** (q.beta + 2.0))


# ---------------------------------------------------------------------------
# double-integral seminorm equivalence

@dataclass(frozen=True)
class BWRecord:
    double_integral: float
    seminorm: float
    ratio: float
    weight_exponent: float
    warned: bool

    def to_json_dict(self):
        return {
            "double_integral": self.double_integral,
            "seminorm": self.seminorm,
            "ratio": self.ratio,
            "weight_exponent": self.weight_exponent,
            "warned": self.warned,
        }


@dataclass(frozen=True)
class EquivalenceReport:
    records: tuple
    min_ratio: float
    max_ratio: float

    def to_json_dict(self):
        return {
            "records": [r.to_json_dict() for r in self.records],
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
        }


def _check_bw_window(sigma, tau, beta):
    if sigma <= -1.0 or tau <= -1.0:
        raise DomainError("area weights must exceed -1 for integrability")
    lo = max(sigma, tau) / 2.0 - 1.0
    hi = (sigma + tau) / 2.0
    if not (lo < beta <= hi + 1e-12):
        raise DomainError(
            f"beta must satisfy max(sigma,tau)/2 - 1 < beta <= (sigma+tau)/2; "
            f"got beta={beta} outside ({lo}, {hi}]"
        )


def balooch_wu_ratio(f, sigma, tau, beta, n=24, M=64):
    """Difference-quotient double integral against the derived seminorm.

    Left side: |f(z)-f(w)|² |1-conj(w)z|^(-2(beta+2)) integrated against
    the two weighted area measures by tensor quadrature.  Right side:
    the coefficient seminorm with space weight sigma+tau-2*beta.
    Constants give 0/0 and the ratio is declared 0.
    """
    _check_bw_window(sigma, tau, beta)
    r1 = build_rule(sigma, n, M)
    r2 = build_rule(tau, n, M)
    z, wz = r1.nodes()
    w, ww = r2.nodes()
    fz = f(z)
    fw = f(w)
    e = 2.0 * (beta + 2.0)
    warned = False
    total = 0.0
    dmin = np.inf
    chunk = 512
    for lo in range(0, z.size, chunk):
        hi = min(lo + chunk, z.size)
        d = np.abs(1.0 - np.conj(w)[None, :] * z[lo:hi, None])
        dmin = min(dmin, float(d.min()))
        block = (np.abs(fz[lo:hi, None] - fw[None, :]) ** 2) * d ** (-e)
        total += float(np.dot(wz[lo:hi], block @ ww))
    if e >= 3.0 and dmin < 0.02:
        warned = True
        warnings.warn(
            f"kernel exponent {e:g} with node separation {dmin:.3g}; "
            "the double integral is nearly singular"
        )
    ap = sigma + tau - 2.0 * beta
    sm = dirichlet_seminorm_coeff_1d(f, ap)
    if sm <= 1e-300 and abs(total) <= 1e-20:
        ratio = 0.0
    else:
        ratio = total / sm
    return BWRecord(total, sm, ratio, ap, warned)


def balooch_wu_family(fs, sigma, tau, beta, n=24, M=64):
    """Equivalence band over a family; constant entries are excluded."""
    records = tuple(balooch_wu_ratio(f, sigma, tau, beta, n, M) for f in fs)
    ratios = [r.ratio for r in records if r.ratio > 0.0]
    if not ratios:
        return EquivalenceReport(records, 0.0, 0.0)
    return EquivalenceReport(records, float(min(ratios)), float(max(ratios)))
