"""Command-line front end.

Subcommands: ``compute``, ``verify``, ``kernel-grid``, ``bench`` and
``skew-poly``.  Exit codes: 0 success, 1 computation error, 2 invalid
configuration, 3 verification failure.  Errors are reported on standard
error as a JSON object ``{"error": {...}}``.
"""

import argparse
import csv
import io
import json
import math
import sys
import time

import jsonschema
import numpy as np

from . import __version__, kernels, verification
from .ensembles import ENSEMBLE_IDS, get_ensemble
from .errors import BudgetError, ConfigError, DegenerateShiftError, OnSupportError, PfrmtError
from .oracle import MCSpec, QuadratureSpec, z_eigenvalue_quadrature, z_matrix_montecarlo
from .precision import PRECISIONS
from .skew_linalg import SpectralParams
from .skew_poly import skew_orthogonalize

SCHEMA_VERSION = "1.0"

EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2, 3

METHODS = ("pfaffian", "oracle-quadrature", "oracle-mc", "all")

_COMPLEX_LIST = {
    "type": "array",
    "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["ensemble", "N"],
    "additionalProperties": False,
    "properties": {
        "ensemble": {"type": "string", "enum": list(ENSEMBLE_IDS)},
        "N": {"type": "integer", "minimum": 1},
        "nu": {"type": "integer", "minimum": 0},
        "kappa1": _COMPLEX_LIST,
        "kappa2": _COMPLEX_LIST,
        "method": {"type": "string", "enum": list(METHODS)},
        "precision": {"type": "string", "enum": list(PRECISIONS)},
        "seed": {"type": "integer", "minimum": 0},
        "quadrature_nodes": {"type": "integer", "minimum": 2},
        "mc_samples": {"type": "integer", "minimum": 2},
        "normalize": {"type": "boolean"},
        "output": {"type": "string"},
    },
}

DEFAULTS = {
    "nu": 0,
    "kappa1": [],
    "kappa2": [],
    "method": "pfaffian",
    "precision": "double",
    "seed": 0,
    "quadrature_nodes": None,
    "mc_samples": 100_000,
    "normalize": True,
    "output": None,
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _json_path(path):
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "$"


def validate_config(raw):
    """Schema-check ``raw`` and fill defaults; raises :class:`ConfigError` naming the field."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, field=_json_path(err.absolute_path))
    cfg = dict(DEFAULTS)
    cfg.update(raw)
    return cfg


def build_problem(cfg):
    """Ensemble and shift parameters from a validated config."""
    ens = get_ensemble(cfg["ensemble"], cfg["nu"])
    kappa1 = [complex(*z) for z in cfg["kappa1"]]
    kappa2 = [complex(*z) for z in cfg["kappa2"]]
    for i, k in enumerate(kappa1):
        ens.check_off_support(k, f"kappa1[{i}]")
    try:
        params = SpectralParams(kappa1, kappa2)
    except DegenerateShiftError as exc:
        # the message starts with the first offending field, e.g. "kappa2[0] and kappa2[1] coincide"
        raise ConfigError(str(exc), field=str(exc).split()[0]) from exc
    for i, a in enumerate(kappa1):
        for j, b in enumerate(kappa2):
            if a == b:
                raise ConfigError(f"kappa1[{i}] coincides with kappa2[{j}]", field=f"kappa1[{i}]")
    return ens, params


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}", field="$") from exc
    return validate_config(raw)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def encode(obj):
    """JSON-ready copy: complex numbers become ``[re, im]``, numpy scalars become Python numbers."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(obj):
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(encode(obj), indent=2, allow_nan=False)


def load_result(text):
    """Parse a serialized RunResult, rejecting unknown major schema versions."""
    data = json.loads(text)
    version = str(data.get("schema_version", ""))
    major = version.split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise ConfigError(f"unsupported schema_version {version!r}", field="schema_version")
    return data


def fmt17(x):
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _run_pfaffian(ens, cfg, params):
    t = time.perf_counter()
    z = verification.average(ens, cfg["N"], params, cfg["precision"])
    ms = 1e3 * (time.perf_counter() - t)
    diag = {k: v for k, v in z.diagnostics.items() if k != "time_ms"}
    return {
        "value": z.normalized if cfg["normalize"] else z.raw,
        "raw": z.raw,
        "normalized": z.normalized,
        "stderr": None,
        "regime": z.regime,
        "d": z.d,
        "time_ms": ms,
        "diagnostics": diag,
    }


def _run_quadrature(ens, cfg, params):
    nodes = cfg["quadrature_nodes"] or verification.default_nodes(ens, cfg["N"])
    spec = QuadratureSpec(nodes_per_dim=nodes)
    t = time.perf_counter()
    num = z_eigenvalue_quadrature(ens, cfg["N"], params, spec)
    den = z_eigenvalue_quadrature(ens, cfg["N"], SpectralParams(), spec)
    ms = 1e3 * (time.perf_counter() - t)
    norm = num.value / den.value
    return {
        "value": norm if cfg["normalize"] else num.value,
        "raw": num.value,
        "normalized": norm,
        "stderr": None,
        "regime": None,
        "d": None,
        "time_ms": ms,
        "diagnostics": {"nodes_per_dim": nodes, "halving_error": num.error, "evaluations": num.evaluations},
    }


def _run_mc(ens, cfg, params):
    spec = MCSpec(samples=cfg["mc_samples"], seed=cfg["seed"])
    t = time.perf_counter()
    res = z_matrix_montecarlo(ens, cfg["N"], params, spec)
    ms = 1e3 * (time.perf_counter() - t)
    return {
        "value": res.value,
        "raw": None,
        "normalized": res.value,
        "stderr": res.error,
        "regime": None,
        "d": None,
        "time_ms": ms,
        "diagnostics": {"samples": res.evaluations, "seed": cfg["seed"]},
    }


_RUNNERS = {"pfaffian": _run_pfaffian, "oracle-quadrature": _run_quadrature, "oracle-mc": _run_mc}


def compute(cfg):
    """Run every requested method and assemble the RunResult dictionary."""
    ens, params = build_problem(cfg)
    methods = list(_RUNNERS) if cfg["method"] == "all" else [cfg["method"]]
    results = {m: _RUNNERS[m](ens, cfg, params) for m in methods}
    deviations = {}
    for i, a in enumerate(methods):
        for b in methods[i + 1 :]:
            deviations[f"{a}/{b}"] = _rel(results[a]["normalized"], results[b]["normalized"])
    return {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "config": cfg,
        "results": results,
        "deviations": deviations,
    }


def cmd_compute(args, out):
    cfg = load_config(args.config)
    if args.output:
        cfg["output"] = args.output
    result = compute(cfg)
    text = dumps(result)
    if cfg["output"]:
        with open(cfg["output"], "w") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=out)
        return EXIT_OK
    for m, r in result["results"].items():
        v = r["value"]
        err = f" +/- {r['stderr']:.2e}" if r["stderr"] is not None else ""
        print(f"{m:<18s} {v.real:+.12e} {v.imag:+.12e}j{err}  ({r['time_ms']:.1f} ms)", file=out)
    for pair, dev in result["deviations"].items():
        print(f"rel. deviation {pair}: {dev:.3e}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args, out):
    results = verification.run_checks(args.level, fault=args.inject_fault, stream=out)
    failed = [r.name for r in results if not r.passed]
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(dumps({"schema_version": SCHEMA_VERSION, "checks": [r.__dict__ for r in results]}) + "\n")
    print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=out)
    return EXIT_VERIFY if failed else EXIT_OK


# ---------------------------------------------------------------------------
# kernel grid
# ---------------------------------------------------------------------------


def _segment(spec, name):
    """``"START,STOP,COUNT"`` with complex endpoints, e.g. ``"-2+1j,2+1j,10"``."""
    parts = spec.split(",")
    try:
        if len(parts) != 3:
            raise ValueError("expected START,STOP,COUNT")
        start, stop, count = complex(parts[0].strip()), complex(parts[1].strip()), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad segment {spec!r}: {exc}", field=name) from exc
    if count < 1:
        raise ConfigError("segment needs at least one point", field=name)
    return np.linspace(start, stop, count) if count > 1 else np.array([start])


def kernel_grid(ens, d, kernel, xs, ys, bordered=None):
    """Rows ``(x, y, K(x, y))`` in x-major order."""
    # denominator-type arguments must avoid the support
    checked = {"K11": (), "K12": ((xs, "x"),), "K22": ((xs, "x"), (ys, "y"))}[kernel]
    for pts, name in checked:
        for i, z in enumerate(pts):
            ens.check_off_support(z, f"{name}[{i}]")
    ks = kernels.KernelSet(ens, d, bordered=bordered)
    fn = {"K11": ks.K11, "K12": ks.K12, "K22": ks.K22}[kernel]
    return [(complex(x), complex(y), fn(x, y)) for x in xs for y in ys]


def write_csv(header, rows, out):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt17(v) if isinstance(v, float) else v for v in row])


def cmd_kernel_grid(args, out):
    cfg = load_config(args.config)
    ens, _ = build_problem(cfg)
    n = cfg["N"] if ens.beta == 1 else 2 * cfg["N"]
    chi = n % 2
    d = args.d if args.d is not None else n
    if d < 1 or (d + chi) % 2:
        raise ConfigError(f"kernel order d={d} must be positive with d + {chi} even", field="d")
    xs = _segment(args.x, "x")
    ys = _segment(args.y, "y")
    rows = kernel_grid(ens, d, args.kernel, xs, ys, bordered=chi == 1)
    flat = [(x.real, x.imag, y.real, y.imag, k.real, k.imag) for x, y, k in rows]
    header = ["re_x", "im_x", "re_y", "im_y", "re_K", "im_K"]
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_csv(header, flat, fh)
    else:
        write_csv(header, flat, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _fit_exponent(xs, ys):
    if len(xs) < 2:
        return None
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


def bench(ens, params, sizes, nodes=None):
    rows = []
    for N in sizes:
        try:
            rows.append(verification.bench_point(ens, N, params, nodes))
        except BudgetError as exc:
            rows.append({"ensemble": ens.id, "N": N, "capped": True, "reason": str(exc)})
    done = [r for r in rows if not r.get("capped")]
    growth = None
    if len(done) >= 2:
        ratios = [b["oracle_ms"] / a["oracle_ms"] for a, b in zip(done, done[1:])]
        growth = float(np.exp(np.mean(np.log(ratios))))
    return {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "rows": rows,
        "pfaffian_time_exponent_in_d": _fit_exponent([r["d"] for r in done], [r["pfaffian_ms"] for r in done]),
        "oracle_time_growth_per_N": growth,
    }


def cmd_bench(args, out):
    cfg = load_config(args.config)
    ens, params = build_problem(cfg)
    sizes = args.sizes or ([1, 2, 3, 4] if ens.beta == 1 else [1, 2, 3])
    report = bench(ens, params, sizes, cfg["quadrature_nodes"])
    text = dumps(report)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# skew polynomials
# ---------------------------------------------------------------------------


def skew_poly_rows(basis):
    """One polynomial per row: index, pair norm (empty when unpaired), coefficients by degree."""
    rows = []
    for j in range(basis.d):
        r = basis.pairing_norms[j // 2] if j // 2 < len(basis.pairing_norms) else None
        coeffs = basis.coeffs[j]
        rows.append([j, "" if r is None else float(r.real)] + [float(c.real) for c in coeffs])
    return rows


def cmd_skew_poly(args, out):
    ens = get_ensemble(args.ensemble, args.nu)
    if args.d < 1:
        raise ConfigError("d must be positive", field="d")
    basis = skew_orthogonalize(ens.build_moment_matrix(args.d, bordered=False))
    header = ["index", "pair_norm"] + [f"c{b}" for b in range(args.d)]
    rows = skew_poly_rows(basis)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_csv(header, rows, fh)
    else:
        write_csv(header, rows, out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="pfrmt", description="Pfaffian evaluation of characteristic-polynomial ratio averages.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="evaluate one configuration")
    p.add_argument("config", help="RunConfig JSON file")
    p.add_argument("-o", "--output", help="write the RunResult here (overrides the config)")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="run the release checks")
    p.add_argument("level", choices=sorted(verification.LEVELS), nargs="?", default="quick")
    p.add_argument("--inject-fault", choices=["even-sum-sign"], help="test hook: corrupt a formula route")
    p.add_argument("--json", help="also write the check table as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("kernel-grid", help="tabulate a kernel on a grid of shifts")
    p.add_argument("config", help="RunConfig JSON file (ensemble, N, nu)")
    p.add_argument("--kernel", choices=["K11", "K12", "K22"], default="K12")
    p.add_argument("--x", metavar="START,STOP,COUNT", required=True, help="first-argument segment, e.g. --x=-2+1j,2+1j,10")
    p.add_argument("--y", metavar="START,STOP,COUNT", required=True, help="second-argument segment")
    p.add_argument("--d", type=int, help="kernel order (default: the number of eigenvalues)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_kernel_grid)

    p = sub.add_parser("bench", help="time the Pfaffian route against the quadrature oracle")
    p.add_argument("config", help="RunConfig JSON file (ensemble, shifts, quadrature_nodes)")
    p.add_argument("--sizes", type=int, nargs="+", help="matrix sizes N to sweep")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("skew-poly", help="dump skew-orthogonal polynomial coefficients")
    p.add_argument("--ensemble", choices=ENSEMBLE_IDS, required=True)
    p.add_argument("--nu", type=int, default=0)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_skew_poly)
    return parser


def _error_object(exc):
    err = {"type": type(exc).__name__, "message": str(exc)}
    for attr in ("field", "rcond", "step"):
        if getattr(exc, attr, None) is not None:
            err[attr] = getattr(exc, attr)
    return {"error": err}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (ConfigError, OnSupportError) as exc:
        print(dumps(_error_object(exc)), file=err)
        return EXIT_CONFIG
    except (PfrmtError, ValueError, ArithmeticError) as exc:
        print(dumps(_error_object(exc)), file=err)
        return EXIT_COMPUTE


def run(argv=None):
    """Capture ``(exit_code, stdout, stderr)`` of one invocation."""
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()
