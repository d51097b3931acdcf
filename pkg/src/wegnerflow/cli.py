"""Batch command-line front-end.

Subcommands::

    wegnerflow flow      --spec spec.json --out outdir
    wegnerflow metric    --spec spec.json --out outdir
    wegnerflow geodesic  --spec spec.json --out outdir
    wegnerflow condition --bands 1,2 --a 1
    wegnerflow verify-all --out outdir [--seed N]

The spec file either holds a serialized Hermitian matrix
({"dim": d, "entries": [[[re, im], ...], ...]}) or a model description
({"model": "gho" | "spin" | "jc", ...fields...}), optionally with
"generator" and "flow" sections.  Outputs are deterministic: identical
spec + seed give byte-identical report files.  Wall-clock information
lives only in a metadata.json sidecar.

Exit codes: 0 success, 1 verification failures, 2 spec/usage errors,
3 integrator failure, 4 internal check errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .operators import WegnerFlowError, band_split, matrix_from_json
from .flow import FlowConfig, Wegner, Band, IntegratorFailureError, integrate_flow
from .geometry import condition17, condition17_offenders, fs_metric
from .models import (
    GhoSpec,
    SpinSpec,
    JcSpec,
    build_gho,
    build_spin,
    build_jc,
    displacement_family,
    squeeze_family,
    spin_family,
    jc_family,
)
from . import verification

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_SPEC = 2
EXIT_INTEGRATOR = 3
EXIT_CHECK_ERROR = 4


class SpecError(WegnerFlowError):
    pass


# ---------------------------------------------------------------------------
# deterministic serialization (floats at 17 significant digits)


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if np.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        if np.isnan(v):
            return '"nan"'
        return format(v, ".17g")
    if isinstance(x, str):
        return json.dumps(x)
    if x is None:
        return "null"
    if isinstance(x, dict):
        inner = ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}"
                          for k, v in x.items())
        return "{" + inner + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _write_json(path, obj):
    Path(path).write_text(_fmt(obj) + "\n")


def _write_metadata(outdir, argv):
    _write_json(Path(outdir) / "metadata.json", {
        "schema_version": SCHEMA_VERSION,
        "argv": list(argv),
        "unix_time": time.time(),
    })


# ---------------------------------------------------------------------------
# spec parsing


def _as_complex(v, name):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise SpecError(f"field {name!r} must be a number or [re, im] pair")


def _load_spec(path):
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SpecError(f"spec file not found: {path}")
    except json.JSONDecodeError as e:
        raise SpecError(f"spec file is not valid JSON: {e}")
    if not isinstance(obj, dict):
        raise SpecError("spec must be a JSON object")
    return obj


def _parse_model(obj):
    """Model spec -> (model spec dataclass, Hamiltonian matrix)."""
    model = obj.get("model")
    if model == "gho":
        spec = GhoSpec(
            omega=float(obj.get("omega", 1.0)),
            lam=_as_complex(obj.get("lam", 0.0), "lam"),
            mu=_as_complex(obj.get("mu", 0.0), "mu"),
            nu=float(obj.get("nu", 0.0)),
            n_max=int(obj.get("n_max", 40)),
        )
        return spec, build_gho(spec)
    if model == "spin":
        b = obj.get("b_field")
        if not (isinstance(b, (list, tuple)) and len(b) == 3):
            raise SpecError("spin model needs b_field: [bx, by, bz]")
        spec = SpinSpec(s=float(obj.get("s", 0.5)),
                        b_field=tuple(float(v) for v in b))
        return spec, build_spin(spec)
    if model == "jc":
        spec = JcSpec(
            omega0=float(obj.get("omega0", 1.0)),
            omega=float(obj.get("omega", 1.0)),
            kappa=float(obj.get("kappa", 0.1)),
            n_max=int(obj.get("n_max", 4)),
        )
        return spec, build_jc(spec)
    raise SpecError(f"unknown model {model!r} (expected gho, spin, or jc)")


def _parse_input(obj):
    """Spec object -> (model spec or None, Hamiltonian matrix)."""
    if "entries" in obj:
        try:
            return None, matrix_from_json(obj)
        except WegnerFlowError as e:
            raise SpecError(f"bad matrix spec: {e}")
    if "model" in obj:
        try:
            return _parse_model(obj)
        except WegnerFlowError as e:
            raise SpecError(f"bad model spec: {e}")
    raise SpecError('spec needs either "entries" (matrix) or "model"')


def _parse_generator(obj):
    gen = obj.get("generator", "wegner")
    if gen == "wegner":
        return Wegner()
    if isinstance(gen, dict) and "band" in gen:
        return Band(int(gen["band"]))
    raise SpecError('generator must be "wegner" or {"band": a}')


def _parse_flow_config(obj):
    kw = dict(obj.get("flow", {}))
    try:
        return FlowConfig(**kw)
    except (TypeError, ValueError) as e:
        raise SpecError(f"bad flow config: {e}")


_FAMILIES = {
    "displacement": lambda o: displacement_family(int(o.get("n_max", 40))),
    "squeeze": lambda o: squeeze_family(int(o.get("base_n", 0)),
                                        int(o.get("n_max", 60))),
    "spin": lambda o: spin_family(float(o.get("s", 0.5)),
                                  float(o.get("base_m", o.get("s", 0.5)))),
    "jc": lambda o: jc_family(),
}


# ---------------------------------------------------------------------------
# subcommands


def cmd_flow(args):
    obj = _load_spec(args.spec)
    _, h0 = _parse_input(obj)
    choice = _parse_generator(obj)
    cfg = _parse_flow_config(obj)
    traj = integrate_flow(h0, choice, cfg)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    bands0 = band_split(h0).band_indices()
    header = ["l", "trace_h", "trace_h2", "offdiag_sq", "eps_sq_sum"]
    header += [f"band_i{a}_sq" for a in bands0]
    lines = [",".join(header)]
    for s in traj.samples:
        row = [s.l, s.trace_h, s.trace_h2, s.offdiag_sq, s.eps_sq_sum]
        row += [s.band_sq.get(a, 0.0) for a in bands0]
        lines.append(",".join(format(float(v), ".17g") for v in row))
    (outdir / "trajectory.csv").write_text("\n".join(lines) + "\n")

    final = traj.samples[-1]
    flowed = np.sort(np.real(np.diag(final.h)))
    direct = np.sort(np.linalg.eigvalsh(h0))
    t0, t20 = traj.samples[0].trace_h, traj.samples[0].trace_h2
    summary = {
        "schema_version": SCHEMA_VERSION,
        "stop_reason": traj.stop_reason,
        "l_final": final.l,
        "final_offdiag_sq": final.offdiag_sq,
        "eigenvalue_match_error": float(np.max(np.abs(flowed - direct))),
        "trace_drift": max(abs(final.trace_h - t0) / max(abs(t0), 1.0),
                           abs(final.trace_h2 - t20) / max(abs(t20), 1.0)),
        "block_report": traj.block_report,
    }
    _write_json(outdir / "summary.json", summary)
    _write_metadata(outdir, sys.argv[1:])
    print(f"flow: {traj.stop_reason} at l = {final.l:g}, "
          f"offdiag_sq = {final.offdiag_sq:.3e}")
    if traj.stop_reason == "stalled":
        print("warning: generator vanished with nonzero off-diagonal norm "
              "(degenerate-diagonal fixed point; flow cannot proceed)")
    return EXIT_OK


def cmd_metric(args):
    obj = _load_spec(args.spec)
    kind = obj.get("family")
    if kind not in _FAMILIES:
        raise SpecError(f"unknown family {kind!r}; "
                        f"choose from {sorted(_FAMILIES)}")
    family = _FAMILIES[kind](obj)
    points = obj.get("points")
    if not points:
        raise SpecError('metric command needs "points": [[coords], ...]')

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    k = family.k
    header = list(family.coord_names)
    header += [f"g_{i}{j}" for i in range(k) for j in range(k)]
    lines = [",".join(header)]
    for p in points:
        alpha = np.asarray([float(v) for v in p])
        if alpha.shape != (k,):
            raise SpecError(f"point {p!r} has wrong dimension (need {k})")
        g = fs_metric(family, alpha).g
        row = list(alpha) + list(g.ravel())
        lines.append(",".join(format(float(v), ".17g") for v in row))
    (outdir / "metric.csv").write_text("\n".join(lines) + "\n")
    _write_metadata(outdir, sys.argv[1:])
    print(f"metric: wrote {len(points)} points for the {kind} family")
    return EXIT_OK


def _verdict_json(checks):
    return {
        "schema_version": SCHEMA_VERSION,
        "checks": [
            {
                "name": r.name,
                "max_residual": r.max_residual,
                "tolerance": r.tolerance,
                "comparison": r.comparison,
                "pass": r.passed,
                "note": r.note,
            }
            for r in checks
        ],
    }


def _print_checks(checks):
    for r in checks:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name}: {r.max_residual:.3e} "
              f"{r.comparison} {r.tolerance:.1e}")


def cmd_geodesic(args):
    obj = _load_spec(args.spec)
    spec, _ = _parse_input(obj)
    if spec is None:
        raise SpecError("geodesic command needs a model spec, not a matrix")
    try:
        checks = verification.geodesic_suite(
            spec,
            base_n=int(obj.get("base_n", 0)),
            sector=int(obj.get("sector", 0)),
        )
    except WegnerFlowError as e:
        print(f"check error: {e}", file=sys.stderr)
        return EXIT_CHECK_ERROR

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "verdict.json", _verdict_json(checks))
    _write_metadata(outdir, sys.argv[1:])
    _print_checks(checks)
    return EXIT_OK if all(r.passed for r in checks) else EXIT_FAILED_CHECKS


def cmd_condition(args):
    try:
        bands = {int(v) for v in args.bands.split(",") if v.strip()}
        a = int(args.a)
        if not bands or any(b < 1 for b in bands) or a < 1:
            raise ValueError
    except ValueError:
        raise SpecError("--bands needs positive integers like 1,2 "
                        "and --a a positive integer")
    if a not in bands:
        raise SpecError(f"--a {a} must be one of the bands {sorted(bands)}")
    ok = condition17(bands, a)
    if ok:
        print(f"true: bands {sorted(bands)} with a = {a} satisfy the "
              "band condition")
    else:
        for b, mult in condition17_offenders(bands, a):
            print(f"false: band {b} = {mult}x the targeted index {a}")
    return EXIT_OK


def cmd_verify_all(args):
    try:
        checks = verification.run_all(seed=args.seed)
    except WegnerFlowError as e:
        print(f"check error: {e}", file=sys.stderr)
        return EXIT_CHECK_ERROR

    if args.force_fail:
        checks = [
            type(r)(r.name, r.max_residual, r.tolerance, False,
                    r.comparison, "tolerance corrupted in test mode")
            if r.name == args.force_fail else r
            for r in checks
        ]

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    report = _verdict_json(checks)
    report["seed"] = args.seed
    report["n_checks"] = len(checks)
    report["n_failed"] = sum(not r.passed for r in checks)
    _write_json(outdir / "report.json", report)
    _write_metadata(outdir, sys.argv[1:])
    _print_checks(checks)

    failed = [r.name for r in checks if not r.passed]
    if failed:
        print(f"{len(failed)} failed check(s): {', '.join(failed)}")
        return EXIT_FAILED_CHECKS
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _build_parser():
    p = argparse.ArgumentParser(
        prog="wegnerflow",
        description="Flow-equation diagonalization and geodesic verification",
    )
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, needs_spec in (
        ("flow", cmd_flow, True),
        ("metric", cmd_metric, True),
        ("geodesic", cmd_geodesic, True),
    ):
        sp = sub.add_parser(name)
        sp.add_argument("--spec", required=needs_spec)
        sp.add_argument("--out", required=True)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("condition")
    sp.add_argument("--bands", required=True,
                    help="comma-separated band indices, e.g. 1,2")
    sp.add_argument("--a", required=True, help="targeted band index")
    sp.set_defaults(fn=cmd_condition)

    sp = sub.add_parser("verify-all")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--force-fail", default=None, help=argparse.SUPPRESS)
    sp.set_defaults(fn=cmd_verify_all)
    return p


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SpecError as e:
        print(f"spec error: {e}", file=sys.stderr)
        return EXIT_SPEC
    except IntegratorFailureError as e:
        print(f"integrator failure: {e}", file=sys.stderr)
        return EXIT_INTEGRATOR


if __name__ == "__main__":
    sys.exit(main())
