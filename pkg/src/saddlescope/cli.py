"""Command-line frontend: ``saddlescope list | run | certify``.

Exit codes: 0 all expectations met, 1 verdict or endpoint mismatch,
2 usage error, 3 IO error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from . import scenarios as scn
from .errors import SaddleScopeError
from .integrate import METHODS
from .report import jsonable

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "SADDLESCOPE_SEED"
INTEGRATOR_KEYS = ("method", "dt", "rtol", "atol", "t_max", "sample_every")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _parse_x0(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise UsageError(f"--x0 expects comma-separated numbers, got {text!r}") from None
    if not vals or not all(np.isfinite(vals)):
        raise UsageError(f"--x0 must be finite numbers, got {text!r}")
    return vals


def load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path}: top level must be an object")
    return cfg


def resolve(args: argparse.Namespace) -> dict:
    """Merge config file, environment and flags (flags win) into one run config."""
    cfg = load_config(getattr(args, "config", None))
    out: dict[str, Any] = {}
    out["scenario"] = args.scenario or cfg.get("scenario")
    if not out["scenario"]:
        raise UsageError("a scenario is required (--scenario or config 'scenario')")
    if out["scenario"] not in scn.names():
        raise UsageError(f"unknown scenario {out['scenario']!r}; choose from {', '.join(scn.names())}")

    x0s = [_parse_x0(t) for t in (getattr(args, "x0", None) or [])]
    if not x0s and "x0" in cfg:
        raw = cfg["x0"]
        x0s = [list(map(float, r)) for r in raw] if raw and isinstance(raw[0], list) else [list(map(float, raw))]
    out["x0"] = x0s

    integ = dict(cfg.get("integrator", {}))
    unknown = set(integ) - set(INTEGRATOR_KEYS)
    if unknown:
        raise UsageError(f"unknown integrator keys: {sorted(unknown)}")
    for key in INTEGRATOR_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            integ[key] = val
    out["integrator"] = integ

    seed = getattr(args, "seed", None)
    if seed is None:
        seed = cfg.get("seed")
    if seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            seed = int(env) if env else 0
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    out["seed"] = int(seed)
    out["strict_cc"] = bool(args.strict_cc or cfg.get("strict_cc", False))
    out["out_dir"] = getattr(args, "out_dir", None) or cfg.get("out_dir") or f"saddlescope-out/{out['scenario']}"
    out["jobs"] = int(getattr(args, "jobs", None) or cfg.get("jobs", 1))
    out["certificates"] = cfg.get("certificates")

    sc = scn.get(out["scenario"])
    for x in out["x0"]:
        if len(x) != sc.dim:
            raise UsageError(f"--x0 needs {sc.dim} values for {sc.name}, got {len(x)}")
    try:
        sc.integrator.replace(**integ)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"integrator settings: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------


def _select(outcomes, labels):
    if not labels:
        return outcomes
    return [o for o in outcomes if o.label in labels]


def trajectory_table(res: scn.ScenarioResult) -> tuple[list[str], np.ndarray]:
    sc, tr = res.scenario, res.trajectory
    header = ["t"] + [f"s{i + 1}" for i in range(sc.dim)] + ["field_norm", "F"] + list(sc.monitors)
    cols = [tr.times[:, None], tr.states, tr.diagnostics["field_norm"][:, None],
            np.array([sc.F_value(s) for s in tr.states])[:, None]]
    for f in sc.monitors.values():
        cols.append(np.array([f(s) for s in tr.states])[:, None])
    return header, np.hstack(cols)


def _write_table(path: Path, header: list[str], data: np.ndarray, sep: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(sep.join(header) + "\n")
        for row in data:
            fh.write(sep.join(format(float(v), ".17g") for v in row) + "\n")


def build_report(cfg: dict, res: scn.ScenarioResult, x0, outcomes) -> dict:
    tr = res.trajectory
    endpoint_ok = all(v for k, v in res.endpoint.items() if k.endswith("_ok"))
    mismatches = [o.label for o in outcomes if not o.matched]
    return {
        "tool": "saddlescope",
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config": {k: cfg[k] for k in ("scenario", "integrator", "seed", "strict_cc", "certificates")},
        "initial": list(map(float, x0)),
        "seed": cfg["seed"],
        "scenario": res.scenario.name,
        "stop_reason": tr.stop_reason if tr is not None else None,
        "n_steps": tr.n_steps if tr is not None else None,
        "n_samples": len(tr) if tr is not None else None,
        "events": tr.events if tr is not None else [],
        "endpoint": tr.endpoint if tr is not None else None,
        "endpoint_checks": res.endpoint,
        "certificates": [o.to_dict() for o in outcomes],
        "mismatches": mismatches,
        "ok": bool(endpoint_ok and not mismatches),
    }


def dump_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_outputs(out_dir: Path, res: scn.ScenarioResult, report: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    header, data = trajectory_table(res)
    _write_table(out_dir / "trajectory.csv", header, data, ",")
    sc, tr = res.scenario, res.trajectory
    dist = np.array([sc.saddle_set.distance(s) for s in tr.states])
    _write_table(out_dir / "plot_distance.tsv", ["t", "distance"], np.column_stack([tr.times, dist]), "\t")
    mon = data[:, [header.index("F")] + list(range(header.index("F") + 1, len(header)))]
    _write_table(out_dir / "plot_monitors.tsv", ["t", "F"] + list(sc.monitors), np.column_stack([tr.times, mon]), "\t")
    _write_table(out_dir / "plot_states.tsv", header[: sc.dim + 1], data[:, : sc.dim + 1], "\t")
    with open(out_dir / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_json(report))


def _run_one(cfg: dict, x0: Optional[list], out_dir: str) -> dict:
    res = scn.run_scenario(cfg["scenario"], initial=x0, integrator=cfg["integrator"] or None,
                           seed=cfg["seed"], strict_cc=cfg["strict_cc"])
    outcomes = _select(res.outcomes, cfg["certificates"])
    start = x0 if x0 is not None else list(res.scenario.default_initial)
    report = build_report(cfg, res, start, outcomes)
    write_outputs(Path(out_dir), res, report)
    return report


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_list(args: argparse.Namespace) -> int:
    rows = [{
        "name": sc.name, "dim": sc.dim,
        "n": sc.function.n if sc.function else None,
        "m": sc.function.m if sc.function else None,
        "set": sc.saddle_set.description or sc.saddle_set.name,
        "initial": list(sc.default_initial), "expected_limit": list(sc.expected_limit),
        "description": sc.description,
    } for sc in scn.catalog()]
    if args.json:
        sys.stdout.write(dump_json(rows))
        return EXIT_OK
    for r in rows:
        lim = ", ".join(f"{v:g}" for v in r["expected_limit"])
        print(f"{r['name']:22s} dim={r['dim']}  set: {r['set']:34s} limit: ({lim})")
    return EXIT_OK


def _print_table(report: dict) -> None:
    print(f"scenario {report['scenario']}  seed {report['seed']}")
    if report.get("stop_reason"):
        end = ", ".join(f"{v:.6g}" for v in report["endpoint"])
        print(f"  stop: {report['stop_reason']}  endpoint: ({end})")
        for k, v in sorted(report["endpoint_checks"].items()):
            if k.endswith("_ok"):
                print(f"  {k:28s} {'ok' if v else 'MISMATCH'}")
    for c in report["certificates"]:
        cert = c["certificate"]
        mark = "ok" if c["matched"] else "MISMATCH"
        consts = ""
        if cert["check_name"] == "proximal":
            k = cert["constants"]
            consts = f"  k1={k['k1']:g} alpha1={k['alpha1']:g} k2={k['k2']:g} beta1={k['beta1']:g}"
        print(f"  {c['label']:28s} {cert['verdict']:12s} expected {c['expected']:5s} {mark}{consts}")


def cmd_run(args: argparse.Namespace) -> int:
    cfg = resolve(args)
    x0s: list = cfg["x0"] or [None]
    base = Path(cfg["out_dir"])
    if len(x0s) == 1:
        dirs = [base]
    else:
        dirs = [base / f"x0_{i:03d}" for i in range(len(x0s))]
    if cfg["jobs"] > 1 and len(x0s) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as ex:
            reports = list(ex.map(_run_one, [cfg] * len(x0s), x0s, [str(d) for d in dirs]))
    else:
        reports = [_run_one(cfg, x, str(d)) for x, d in zip(x0s, dirs)]
    if args.json:
        sys.stdout.write(dump_json(reports[0] if len(reports) == 1 else reports))
    else:
        for r, d in zip(reports, dirs):
            _print_table(r)
            print(f"  wrote {d}")
    return EXIT_OK if all(r["ok"] for r in reports) else EXIT_MISMATCH


def cmd_certify(args: argparse.Namespace) -> int:
    cfg = resolve(args)
    sc = scn.get(cfg["scenario"])
    outcomes = _select(scn.certify_scenario(sc, cfg["seed"], cfg["strict_cc"]), cfg["certificates"])
    res = scn.ScenarioResult(sc, None, outcomes, {})
    report = build_report(cfg, res, sc.default_initial, outcomes)
    if getattr(args, "out_dir", None):
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dump_json(report))
    if args.json:
        sys.stdout.write(dump_json(report))
    else:
        _print_table(report)
    return EXIT_OK if report["ok"] else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="saddlescope", description="Saddle-point dynamics simulation and certification.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ls = sub.add_parser("list", help="list catalog scenarios")
    ls.add_argument("--json", action="store_true", help="machine-readable output")
    ls.set_defaults(func=cmd_list)

    def common(sp, integrator: bool):
        sp.add_argument("--scenario", help="catalog scenario name")
        sp.add_argument("--config", help="JSON config file; flags override its values")
        sp.add_argument("--seed", type=int, help=f"base seed for sampling (default ${SEED_ENV} or 0)")
        sp.add_argument("--out-dir", dest="out_dir", help="output directory")
        sp.add_argument("--json", action="store_true", help="print the report as JSON")
        sp.add_argument("--strict-cc", dest="strict_cc", action="store_true",
                        help="also run the strict convexity-concavity check")
        if integrator:
            sp.add_argument("--x0", action="append", help="initial state 'a,b,...'; repeat for a sweep")
            sp.add_argument("--t-max", dest="t_max", type=float)
            sp.add_argument("--rtol", type=float)
            sp.add_argument("--atol", type=float)
            sp.add_argument("--dt", type=float, help="step for rk4_fixed, first-step hint for rk45_adaptive")
            sp.add_argument("--method", choices=METHODS)
            sp.add_argument("--sample-every", dest="sample_every", type=float)
            sp.add_argument("--jobs", type=int, help="parallel workers for --x0 sweeps")

    run = sub.add_parser("run", help="integrate a scenario, certify it and write outputs")
    common(run, True)
    run.set_defaults(func=cmd_run)
    cert = sub.add_parser("certify", help="run only the certificate suite")
    common(cert, False)
    cert.set_defaults(func=cmd_certify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"saddlescope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"saddlescope: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SaddleScopeError as exc:
        print(f"saddlescope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
