"""Command-line front end: JSON job configs in, deterministic reports out.

Every command reads one config file, runs one check, and writes
report.json (canonical bytes, schema field "holocomp/1") into the
output directory; grid-bearing commands also write grid.csv and
heatmap.svg.  Exit codes: 0 for pass/finite-evidence verdicts, 2 for
fail/growth/inconclusive verdicts, 1 for any execution or config error.
"""

from __future__ import annotations

import difflib
import json
import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .capacity import (
    CapacityProblem,
    RectUnion,
    TorusGrid,
    capacity,
    capacity_condition_check,
)
from .carleson import (
    BidiscKernel,
    BoxUnion,
    CarlesonBox,
    PullbackMeasure,
    box_volume,
    kernel_integral_test,
    one_box_sufficient_check,
    psi_admissibility,
    pullback_box_volume,
)
from .criteria import (
    BUILTIN_INTEGRANDS,
    KernelRatioQuery,
    balooch_wu_ratio,
    kernel_ratio_sup,
    verify_change_of_variables,
)
from .errors import ConfigError, HolocompError
from .nevanlinna import aleman_diagnostic, separated_verdict
from .reports import emit_heatmap, sanitize, write_csv, write_json_report
from .series import (
    TaylorGrid1D,
    TaylorGrid2D,
    WeightPair,
    dirichlet_norm_coeff,
    energy_components,
)
from .symbols import Separated, symbol_from_json

__all__ = ["main"]

SCHEMA_TAG = "holocomp/1"


# ---------------------------------------------------------------------------
# field parsers; each returns the parsed value or raises ConfigError

def _fail(msg):
    raise ConfigError(msg)


def _p_number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"expected a number, got {v!r}")
    return float(v)


def _p_int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(f"expected an integer, got {v!r}")
    return int(v)


def _p_positive_int(v):
    n = _p_int(v)
    if n < 1:
        _fail(f"expected a positive integer, got {n}")
    return n


def _p_seed(v):
    n = _p_int(v)
    if not (0 <= n < 2**64):
        _fail(f"seed must fit in an unsigned 64-bit integer, got {n}")
    return n


def _p_bool(v):
    if not isinstance(v, bool):
        _fail(f"expected true or false, got {v!r}")
    return v


def _p_pair(v):
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        _fail(f"expected a pair of numbers, got {v!r}")
    return (_p_number(v[0]), _p_number(v[1]))


def _p_weight_pair(v):
    a1, a2 = _p_pair(v)
    return WeightPair(a1, a2)


def _p_weight_scalar(v):
    a = _p_number(v)
    if not (0.0 < a <= 0.5):
        _fail(f"weight must lie in (0, 1/2], got {a}")
    return a


def _p_complex(v):
    re, im = _p_pair(v)
    return complex(re, im)


def _p_symbol(v):
    if not isinstance(v, dict):
        _fail(f"symbol entry must be an object, got {v!r}")
    return symbol_from_json(v)


def _p_coeffs_1d(v):
    if not isinstance(v, list) or not v:
        _fail("coefficients must be a nonempty list of [re, im] pairs")
    return TaylorGrid1D([_p_complex(c) for c in v])


def _p_coeffs_2d(v):
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        _fail("coefficients must be a nonempty list of rows of [re, im] pairs")
    width = len(v[0])
    if width == 0 or any(len(r) != width for r in v):
        _fail("coefficient rows must be nonempty and equally long")
    return TaylorGrid2D([[_p_complex(c) for c in row] for row in v])


def _p_integrand(v):
    if v not in BUILTIN_INTEGRANDS:
        _fail(
            f"unknown integrand {v!r}; available: "
            + ", ".join(sorted(BUILTIN_INTEGRANDS))
        )
    return BUILTIN_INTEGRANDS[v]


def _p_choice(options):
    def parse(v):
        if v not in options:
            _fail(f"expected one of {sorted(options)}, got {v!r}")
        return v

    return parse


def _p_psi(v):
    if isinstance(v, str):
        table = {
            "t": lambda t: np.asarray(t, dtype=float),
            "sqrt_t": lambda t: np.sqrt(np.asarray(t, dtype=float)),
            "const_1": lambda t: np.ones_like(np.asarray(t, dtype=float)),
        }
        if v in table:
            return (v, table[v])
        _fail(f"unknown weight {v!r}; available: const_1, sqrt_t, t, or a pow object")
    if isinstance(v, dict) and set(v) == {"type", "p"} and v.get("type") == "pow":
        p = _p_number(v["p"])
        if p <= 0.0:
            _fail(f"pow weight needs a positive exponent, got {p}")
        return (f"t^{p:g}", lambda t, _p=p: np.asarray(t, dtype=float) ** _p)
    _fail(f"weight must be a name or {{\"type\":\"pow\",\"p\":...}}, got {v!r}")


def _p_box(v):
    if not isinstance(v, dict) or set(v) != {"zeta", "delta"}:
        _fail("each box needs exactly the keys 'zeta' and 'delta'")
    return CarlesonBox(_p_pair(v["zeta"]), _p_pair(v["delta"]))


def _p_boxes(v):
    if not isinstance(v, list) or not v:
        _fail("boxes must be a nonempty list")
    return BoxUnion(tuple(_p_box(b) for b in v))


def _p_rects(v):
    if not isinstance(v, list):
        _fail("E must be a list of rectangles")
    return RectUnion.from_json(v)


def _p_families(v):
    if not isinstance(v, list) or not v:
        _fail("families must be a nonempty list of rectangle lists")
    return tuple(_p_rects(fam) for fam in v)


@dataclass(frozen=True)
class Field:
    parser: object
    required: bool = False
    default: object = None


SCHEMAS = {
    "norm": {
        "f": Field(_p_coeffs_2d, required=True),
        "a": Field(_p_weight_pair, required=True),
    },
    "energy": {
        "f": Field(_p_coeffs_2d, required=True),
        "a": Field(_p_weight_pair, required=True),
        "weight_form": Field(_p_choice(("log", "bergman")), default="log"),
        "level": Field(_p_int, default=None),
    },
    "cov-verify": {
        "phi1": Field(_p_symbol, required=True),
        "phi2": Field(_p_symbol, required=True),
        "a": Field(_p_weight_pair, required=True),
        "g": Field(_p_integrand, default=BUILTIN_INTEGRANDS["one"]),
        "level": Field(_p_int, default=0),
        "weight_form": Field(_p_choice(("log", "bergman")), default="log"),
        "tol": Field(_p_number, default=1e-3),
    },
    "separated-verdict": {
        "phi1": Field(_p_symbol, required=True),
        "phi2": Field(_p_symbol, required=True),
        "a": Field(_p_weight_pair, required=True),
        "j_levels": Field(_p_positive_int, default=14),
        "n_angles": Field(_p_positive_int, default=256),
    },
    "kernel-ratio": {
        "phi": Field(_p_symbol, required=True),
        "beta": Field(_p_number, required=True),
        "j_levels": Field(_p_positive_int, default=8),
        "n_angles": Field(_p_positive_int, default=16),
        "eps": Field(_p_number, default=1e-6),
    },
    "balooch-wu": {
        "f": Field(_p_coeffs_1d, required=True),
        "sigma": Field(_p_number, required=True),
        "tau": Field(_p_number, required=True),
        "beta": Field(_p_number, required=True),
        "n": Field(_p_positive_int, default=24),
        "M": Field(_p_positive_int, default=64),
    },
    "box-volume": {
        "zeta": Field(_p_pair, required=True),
        "delta": Field(_p_pair, required=True),
        "beta": Field(_p_number, required=True),
        "n": Field(_p_positive_int, default=160),
        "mc_samples": Field(_p_positive_int, default=100_000),
        "seed": Field(_p_seed, default=20259),
        "cross_check": Field(_p_bool, default=True),
    },
    "pullback-volume": {
        "phi1": Field(_p_symbol, required=True),
        "phi2": Field(_p_symbol, required=True),
        "beta": Field(_p_number, required=True),
        "boxes": Field(_p_boxes, required=True),
        "n_samples": Field(_p_positive_int, default=200_000),
        "seed": Field(_p_seed, default=20259),
    },
    "psi-check": {
        "psi": Field(_p_psi, required=True),
    },
    "one-box-check": {
        "phi1": Field(_p_symbol, required=True),
        "phi2": Field(_p_symbol, required=True),
        "beta": Field(_p_number, required=True),
        "psi": Field(_p_psi, required=True),
        "n_samples": Field(_p_positive_int, default=200_000),
        "j_max": Field(_p_positive_int, default=10),
        "n_centers": Field(_p_positive_int, default=8),
        "seed": Field(_p_seed, default=20259),
    },
    "kernel-integral": {
        "phi1": Field(_p_symbol, required=True),
        "phi2": Field(_p_symbol, required=True),
        "beta": Field(_p_number, required=True),
        "c1": Field(_p_number, default=1.0),
        "c2": Field(_p_number, default=1.0),
        "n_samples": Field(_p_positive_int, default=200_000),
        "seed": Field(_p_seed, default=20259),
    },
    "capacity": {
        "E": Field(_p_rects, required=True),
        "M": Field(_p_positive_int, required=True),
        "kind": Field(_p_choice(("bessel", "log")), default="bessel"),
        "tol": Field(_p_number, default=1e-5),
        "max_iter": Field(_p_positive_int, default=50_000),
    },
    "capacity-condition": {
        "phi1": Field(_p_symbol, required=True),
        "phi2": Field(_p_symbol, required=True),
        "beta": Field(_p_number, required=True),
        "families": Field(_p_families, required=True),
        "M": Field(_p_positive_int, required=True),
        "n_samples": Field(_p_positive_int, default=200_000),
        "seed": Field(_p_seed, default=20259),
        "cap_tol": Field(_p_number, default=1e-4),
    },
    "aleman": {
        "phi": Field(_p_symbol, required=True),
        "a": Field(_p_weight_scalar, required=True),
        "omega": Field(_p_complex, required=True),
        "n_radial": Field(_p_positive_int, default=12),
        "n_angles": Field(_p_positive_int, default=32),
    },
}

RESOLUTION_FIELD = {
    "energy": "level",
    "cov-verify": "level",
    "separated-verdict": "j_levels",
    "kernel-ratio": "j_levels",
    "one-box-check": "j_max",
    "capacity": "M",
}

_DESCRIPTIONS = {
    "norm": "coefficient-form norm and exact integral components of a polynomial",
    "energy": "derivative-energy components under a chosen radial weight",
    "cov-verify": "both sides of the weighted substitution identity",
    "separated-verdict": "boundary ratio sweep of the counting functions",
    "kernel-ratio": "normalized kernel ratio sup over a disc grid",
    "balooch-wu": "difference-quotient double integral vs derived seminorm",
    "box-volume": "weighted volume of one bidisc box, cross-checked",
    "pullback-volume": "sampled mass of a box union under a bidisc self-map",
    "psi-check": "admissibility verdict for a box-size weight",
    "one-box-check": "dyadic box sweep of pulled-back volume against the weight",
    "kernel-integral": "sup of the sampled surrogate-kernel integral",
    "capacity": "discrete capacity of a rectangle union on the bitorus",
    "capacity-condition": "pull-back volume vs capacity over box families",
    "aleman": "local counting-function mean comparison at one point",
}


def _help_text():
    lines = [
        "usage: holocomp <command> --config <path> [--out <dir>]"
        " [--seed <u64>] [--resolution <n>]",
        "",
        "commands:",
    ]
    for name in sorted(SCHEMAS):
        lines.append(f"  {name:<20} {_DESCRIPTIONS[name]}")
    lines.append("")
    lines.append(
        "reports: report.json always; grid.csv and heatmap.svg for"
        " grid-bearing commands"
    )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# runners: parsed config + out dir -> (exit code, verdict, result dict)

def _run_norm(p, out):
    coeff = dirichlet_norm_coeff(p["f"], p["a"])
    head, e1, e2, e12 = energy_components(p["f"], p["a"], rule=None)
    result = {
        "coefficient_norm_sq": coeff,
        "integral_components": {"head": head, "e1": e1, "e2": e2, "e12": e12},
        "integral_total": head + e1 + e2 + e12,
    }
    return 0, "computed", result


def _energy_rule(level):
    if level is None:
        return None
    from .criteria import resolution_parameters
    from .quadrature import build_refined_rule

    knobs = resolution_parameters(level)
    return build_refined_rule(
        0.0, 0.0, q=knobs["q"], M=knobs["angular"], j0=knobs["j0"], j1=knobs["j1"]
    )


def _run_energy(p, out):
    rule = _energy_rule(p["level"])
    head, e1, e2, e12 = energy_components(
        p["f"], p["a"], rule=rule, weight_form=p["weight_form"]
    )
    result = {
        "head": head,
        "e1": e1,
        "e2": e2,
        "e12": e12,
        "total": head + e1 + e2 + e12,
        "weight_form": p["weight_form"],
        "level": p["level"],
    }
    return 0, "computed", result


def _run_cov_verify(p, out):
    report = verify_change_of_variables(
        p["phi1"], p["phi2"], p["a"], p["g"], level=p["level"],
        weight_form=p["weight_form"],
    )
    ok = report.gap < p["tol"]
    verdict = "identity verified" if ok else "gap above tolerance"
    result = report.to_json_dict()
    result["tol"] = p["tol"]
    result["g"] = p["g"].name
    return (0 if ok else 2), verdict, result


def _run_separated_verdict(p, out):
    v = separated_verdict(
        Separated(p["phi1"], p["phi2"]), p["a"], p["j_levels"], p["n_angles"]
    )
    rows = []
    for coord, rep in ((1, v.report1), (2, v.report2)):
        for r, th, val, fl in rep.csv_rows():
            rows.append((coord, r, th, val, fl))
    write_csv(os.path.join(out, "grid.csv"), ["coord", "r", "theta", "ratio", "flag"], rows)
    rep = v.report1
    emit_heatmap(
        {
            "grid": [[None if not np.isfinite(x) else float(x) for x in row] for row in rep.values],
            "flags": [[int(f) for f in row] for row in rep.flags],
            "title": "boundary ratio, coordinate 1",
            "x_label": "theta",
            "y_label": "r",
            "row_labels": [f"{r:.6f}" for r in rep.radii],
            "col_labels": [f"{t:.3f}" for t in rep.angles],
        },
        os.path.join(out, "heatmap.svg"),
    )
    code = 0 if v.bounded_evidence == "finite" else 2
    return code, v.bounded_evidence, v.to_json_dict()


def _run_kernel_ratio(p, out):
    q = KernelRatioQuery(
        p["phi"], p["beta"], j_levels=p["j_levels"], n_angles=p["n_angles"],
        eps=p["eps"],
    )
    report = kernel_ratio_sup(q)
    write_csv(
        os.path.join(out, "grid.csv"),
        ["i", "j", "ratio", "flagged"],
        report.csv_rows(),
    )
    flags = report.point_flags
    emit_heatmap(
        {
            "grid": [
                [None if not np.isfinite(v) else float(v) for v in row]
                for row in report.values
            ],
            "flags": [
                [int(flags[i] or flags[j]) for j in range(flags.size)]
                for i in range(flags.size)
            ],
            "title": "normalized kernel ratio",
            "x_label": "z2 index",
            "y_label": "z1 index",
        },
        os.path.join(out, "heatmap.svg"),
    )
    result = report.to_json_dict()
    if np.isfinite(report.sup):
        result["operator_norm_bound"] = float(report.sup ** (p["beta"] + 2.0))
        return 0, "finite sup", result
    result["operator_norm_bound"] = None
    return 2, "undefined (all pairs flagged)", result


def _run_balooch_wu(p, out):
    rec = balooch_wu_ratio(p["f"], p["sigma"], p["tau"], p["beta"], p["n"], p["M"])
    return 0, "computed", rec.to_json_dict()


def _run_box_volume(p, out):
    box = CarlesonBox(p["zeta"], p["delta"])
    value = box_volume(
        box, p["beta"], n=p["n"], mc_samples=p["mc_samples"], seed=p["seed"],
        cross_check=p["cross_check"],
    )
    result = {
        "value": value,
        "area_param": box.area_param,
        "cross_checked": p["cross_check"],
    }
    return 0, "computed", result


def _run_pullback_volume(p, out):
    measure = PullbackMeasure(
        Separated(p["phi1"], p["phi2"]), p["beta"], p["n_samples"], p["seed"]
    )
    est = pullback_box_volume(measure, p["boxes"])
    return 0, "computed", est.to_json_dict()


def _run_psi_check(p, out):
    label, fn = p["psi"]
    report = psi_admissibility(fn)
    result = report.to_json_dict()
    result["psi"] = label
    return (0 if report.verdict == "admissible" else 2), report.verdict, result


def _run_one_box_check(p, out):
    label, fn = p["psi"]
    measure = PullbackMeasure(
        Separated(p["phi1"], p["phi2"]), p["beta"], p["n_samples"], p["seed"]
    )
    report = one_box_sufficient_check(
        measure, fn, j_max=p["j_max"], n_centers=p["n_centers"]
    )
    write_csv(
        os.path.join(out, "grid.csv"),
        ["j", "theta1", "theta2", "volume", "ratio", "stderr"],
        report.csv_rows(),
    )
    result = report.to_json_dict()
    result["psi"] = label
    code = 0 if report.verdict == "sufficient-condition satisfied" else 2
    return code, report.verdict, result


def _run_kernel_integral(p, out):
    measure = PullbackMeasure(
        Separated(p["phi1"], p["phi2"]), p["beta"], p["n_samples"], p["seed"]
    )
    report = kernel_integral_test(measure, BidiscKernel(p["c1"], p["c2"]))
    return 0, "computed", report.to_json_dict()


def _run_capacity(p, out):
    grid = TorusGrid(p["M"])
    prob = CapacityProblem(grid, p["E"], p["kind"])
    res = capacity(prob, tol=p["tol"], max_iter=p["max_iter"])
    rows = []
    for i in range(grid.M):
        for j in range(grid.M):
            rows.append((i, j, float(res.h[i, j])))
    write_csv(os.path.join(out, "grid.csv"), ["i", "j", "h"], rows)
    emit_heatmap(
        {
            "grid": [[float(x) for x in row] for row in res.h],
            "title": f"capacity field, M={grid.M}",
            "x_label": "theta2 cell",
            "y_label": "theta1 cell",
        },
        os.path.join(out, "heatmap.svg"),
    )
    result = res.to_json_dict(grid)
    result["kind"] = p["kind"]
    verdict = "converged" if res.converged else "not converged"
    return (0 if res.converged else 2), verdict, result


def _run_capacity_condition(p, out):
    report = capacity_condition_check(
        Separated(p["phi1"], p["phi2"]),
        p["beta"],
        list(p["families"]),
        TorusGrid(p["M"]),
        n_samples=p["n_samples"],
        seed=p["seed"],
        cap_tol=p["cap_tol"],
    )
    code = 0 if report.verdict == "bounded over tested families" else 2
    return code, report.verdict, report.to_json_dict()


def _run_aleman(p, out):
    rec = aleman_diagnostic(
        p["phi"], p["a"], p["omega"], n_radial=p["n_radial"], n_angles=p["n_angles"]
    )
    code = 0 if np.isfinite(rec.ratio) else 2
    return code, "computed" if code == 0 else "unbounded ratio", rec.to_json_dict()


RUNNERS = {
    "norm": _run_norm,
    "energy": _run_energy,
    "cov-verify": _run_cov_verify,
    "separated-verdict": _run_separated_verdict,
    "kernel-ratio": _run_kernel_ratio,
    "balooch-wu": _run_balooch_wu,
    "box-volume": _run_box_volume,
    "pullback-volume": _run_pullback_volume,
    "psi-check": _run_psi_check,
    "one-box-check": _run_one_box_check,
    "kernel-integral": _run_kernel_integral,
    "capacity": _run_capacity,
    "capacity-condition": _run_capacity_condition,
    "aleman": _run_aleman,
}


# ---------------------------------------------------------------------------
# config validation and dispatch

def _validate(cmd, config, seed_override, resolution_override):
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    config = dict(config)
    declared = config.pop("command", None)
    if declared is not None and declared != cmd:
        raise ConfigError(
            f"config declares command {declared!r} but {cmd!r} was invoked"
        )
    schema = SCHEMAS[cmd]
    if seed_override is not None:
        if "seed" not in schema:
            raise ConfigError(f"command {cmd!r} does not take a seed")
        config["seed"] = seed_override
    if resolution_override is not None:
        field = RESOLUTION_FIELD.get(cmd)
        if field is None:
            raise ConfigError(f"command {cmd!r} does not take a resolution")
        config[field] = resolution_override
    unknown = sorted(set(config) - set(schema))
    if unknown:
        raise ConfigError(
            f"unknown config field {unknown[0]!r} for command {cmd!r}"
        )
    parsed = {}
    for name, fld in schema.items():
        if name in config:
            try:
                parsed[name] = fld.parser(config[name])
            except ConfigError:
                raise
            except HolocompError as e:
                raise ConfigError(f"field {name!r}: {e}")
            except (TypeError, ValueError, KeyError) as e:
                raise ConfigError(f"field {name!r}: {e}")
        elif fld.required:
            raise ConfigError(
                f"missing required field {name!r} for command {cmd!r}"
            )
        else:
            parsed[name] = fld.default
    return parsed, config


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help", "help"):
        print(_help_text())
        return 0
    cmd = argv[0]
    if cmd not in SCHEMAS:
        msg = f"unknown command {cmd!r}"
        close = difflib.get_close_matches(cmd, list(SCHEMAS), n=1)
        if close:
            msg += f"; did you mean {close[0]!r}?"
        print(msg, file=sys.stderr)
        return 1

    opts = {"config": None, "out": ".", "seed": None, "resolution": None}
    it = iter(argv[1:])
    for tok in it:
        if tok in ("--config", "--out", "--seed", "--resolution"):
            try:
                opts[tok[2:]] = next(it)
            except StopIteration:
                print(f"option {tok} needs a value", file=sys.stderr)
                return 1
        else:
            print(f"unknown option {tok!r}", file=sys.stderr)
            return 1
    if opts["config"] is None:
        print("--config is required", file=sys.stderr)
        return 1
    try:
        seed_override = None if opts["seed"] is None else int(opts["seed"])
        if seed_override is not None and not (0 <= seed_override < 2**64):
            raise ValueError(f"seed out of range: {seed_override}")
        resolution_override = (
            None if opts["resolution"] is None else int(opts["resolution"])
        )
    except ValueError as e:
        print(f"bad option value: {e}", file=sys.stderr)
        return 1

    try:
        with open(opts["config"], "r", encoding="utf-8") as f:
            raw = f.read()
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return 1
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as e:
        print(f"{opts['config']}:{e.lineno}:{e.colno}: {e.msg}", file=sys.stderr)
        return 1

    out = opts["out"]
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as e:
        print(f"cannot create output directory: {e}", file=sys.stderr)
        return 1

    try:
        parsed, effective = _validate(cmd, config, seed_override, resolution_override)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1

    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code, verdict, result = RUNNERS[cmd](parsed, out)
        notes = [str(w.message) for w in caught]
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except HolocompError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    report = {
        "schema": SCHEMA_TAG,
        "command": cmd,
        "verdict": verdict,
        "result": sanitize(result),
        "config": sanitize(effective),
        "warnings": notes,
    }
    path = write_json_report(os.path.join(out, "report.json"), report)
    print(f"{cmd}: {verdict} ({path})")
    return code
