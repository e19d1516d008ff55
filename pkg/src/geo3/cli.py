"""Command-line verifier: catalog checks, parameter sweeps and table checks.

Exit codes: 0 when every expectation is met, 1 when one is violated and 2
for usage or configuration errors.  Reports are deterministic for a fixed
configuration and seed; wall time is only included with ``--timing``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import spaces, submersion
from .calculus import oracle_discrepancy
from .errors import Geo3Error, StructuralError
from .geometry import verify_connection_tables
from .submersion import RC0_LABELS, RC_LABELS

SCHEMA = 1
DEFAULT_POINTS = 200
DEFAULT_TOLERANCES = {"harmonic": 1e-8, "identity": 1e-7, "curvature": 1e-9, "fd": 1e-5}
SYMMETRY_TOL = 1e-8
TENSION_NORM_TOL = 1e-9
SIGMA2_TOL = 1e-9
KN_SPREAD_TOL = 1e-6
ROTATION_ANGLES = (0.3, 1.1)
FD_POINTS = 100
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class ConfigError(Exception):
    """Bad command-line configuration; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    map_id: Optional[str] = None
    space_id: Optional[str] = None
    params: dict = field(default_factory=dict)
    points: int = DEFAULT_POINTS
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    format: str = "json"
    out: Optional[str] = None
    timing: bool = False

    def __post_init__(self):
        if self.points < 1:
            raise ConfigError("--points must be at least 1")
        for name, tol in self.tolerances.items():
            if not (tol > 0 and math.isfinite(tol)):
                raise ConfigError(f"--tol-{name} must be a positive number")

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("out")
        out.pop("timing")
        return out


# checks ----------------------------------------------------------------------


def _max(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(a.max()) if a.size else 0.0


def _fd_discrepancy(spec, pts) -> float:
    worst = 0.0
    for _, f, where in spec.oracle_fields():
        at = pts if where == "total" else spec.map_values(pts)
        worst = max(worst, oracle_discrepancy(f, at))
    return worst


class _Expectations:
    def __init__(self):
        self.results: dict = {}
        self.diagnostics: list = []

    def add(self, name: str, ok: bool, message: str = ""):
        self.results[name] = bool(ok)
        if not ok:
            self.diagnostics.append(f"{name}: {message}" if message else name)

    @property
    def passed(self) -> bool:
        return all(self.results.values())


def run_check(spec, config: RunConfig):
    """Run every check on one submersion; return the report and per-point rows."""
    tol = config.tolerances
    pts = spec.sample(config.points, config.seed)
    exp = _Expectations()
    report = {
        "schema": SCHEMA,
        "command": "check",
        "config": config.echo(),
        "map": {"id": spec.map_id, "key": spec.key, "label": spec.label, "params": dict(spec.params)},
    }
    if spec.map_id == "bcv.projection":
        report["map"]["classification"] = spaces.classify_bcv(spec.params["m"], spec.params["l"])

    try:
        sub = submersion.validate_submersion(spec, pts)
        sub_info = sub.to_dict()
        sub_ok = sub.passed
    except StructuralError as err:
        sub_info = {"passed": False, "error": str(err)}
        sub_ok = False
    report["submersion"] = sub_info
    exp.add(
        "submersion",
        sub_ok == spec.expected.submersion,
        f"expected submersion={spec.expected.submersion}, observed {sub_ok}",
    )
    if not sub_ok:
        report.update(expectations=exp.results, passed=exp.passed, diagnostics=exp.diagnostics)
        return report, []

    rep = submersion.identity_report(spec, pts, tol_harmonic=tol["harmonic"])
    data = rep.data
    tau = rep.tension_norm
    tau_direct = rep.tension_direct_norm
    kn_direct = submersion.base_gauss_curvature_direct(spec, pts)
    verdict = rep.verdict
    kappa_max = rep.kappa_max

    exp.add("natural_frame", _max(data.residual) <= submersion.NATURAL_TOL, f"decomposition residual {_max(data.residual):.3e}")
    exp.add("verdict_decided", verdict != "inconclusive", f"max |kappa| = {kappa_max:.3e} is in the gap zone")
    if spec.expected.harmonic is not None:
        exp.add(
            "harmonic",
            verdict == ("harmonic" if spec.expected.harmonic else "non-harmonic"),
            f"expected harmonic={spec.expected.harmonic}, observed {verdict}",
        )
    tau_max = _max(tau_direct)
    exp.add(
        "tension_equivalence",
        (kappa_max <= tol["harmonic"]) == (tau_max <= tol["harmonic"]),
        f"max |kappa| = {kappa_max:.3e} but direct max |tau| = {tau_max:.3e}",
    )
    norm_gap = _max(np.abs(tau**2 - (data.kappa1**2 + data.kappa2**2)))
    exp.add("tension_norm", norm_gap <= TENSION_NORM_TOL, f"| |tau|^2 - kappa^2 | = {norm_gap:.3e}")
    exp.add("rc_identities", rep.rc_max <= tol["identity"], f"max residual {rep.rc_max:.3e}")
    if spec.expected.rc0_holds is True:
        exp.add("rc0_system", rep.rc0_max <= tol["harmonic"], f"max residual {rep.rc0_max:.3e}")
    elif spec.expected.rc0_holds is False:
        exp.add("rc0_system_fails", rep.rc0_max >= submersion.OBSTRUCTION_LEVEL, f"max residual {rep.rc0_max:.3e}")
    if rep.sigma_min >= 0.01 and rep.rc0_max <= tol["harmonic"]:
        exp.add("rc0_converse", verdict == "harmonic", "sigma != 0 and RC0 holds, yet not harmonic")

    kn_gap = _max(np.abs(rep.kn - kn_direct))
    exp.add("kn_consistency", kn_gap <= tol["identity"], f"data and metric Gauss curvature differ by {kn_gap:.3e}")
    kn_info = {
        "mean": rep.kn_mean,
        "spread": rep.kn_spread,
        "min": float(rep.kn.min()),
        "max": float(rep.kn.max()),
        "direct_max_dev": kn_gap,
        "expected": spec.expected.kn,
    }
    if spec.expected.kn is not None:
        dev = _max(np.abs(rep.kn - spec.expected.kn))
        kn_info["expected_max_dev"] = dev
        exp.add("kn_expected", dev <= tol["identity"], f"|K^N - {spec.expected.kn:g}| up to {dev:.3e}")
        exp.add("kn_constant", rep.kn_spread <= KN_SPREAD_TOL, f"K^N spread {rep.kn_spread:.3e}")
    sigma2 = data.sigma**2
    if spec.expected.sigma2 is not None:
        dev = _max(np.abs(sigma2 - spec.expected.sigma2))
        exp.add("sigma2_expected", dev <= SIGMA2_TOL, f"|sigma^2 - {spec.expected.sigma2:g}| up to {dev:.3e}")

    rotation = []
    frame = submersion.natural_frame(spec)
    for theta in ROTATION_ANGLES:
        rot = submersion.identity_report(
            spec, pts, frame=frame.rotated(spaces.rotation_about(2, theta)), tol_harmonic=tol["harmonic"]
        )
        dkn = _max(np.abs(rot.kn - rep.kn))
        rotation.append({"theta": theta, "verdict": rot.verdict, "kn_max_dev": dkn})
        exp.add(
            f"rotation_{theta:g}",
            rot.verdict == verdict and dkn <= 2 * tol["identity"],
            f"rotated frame gives {rot.verdict}, K^N shift {dkn:.3e}",
        )

    fd = _fd_discrepancy(spec, pts[:FD_POINTS])
    exp.add("fd_oracle", fd <= tol["fd"], f"engine and finite differences differ by {fd:.3e}")

    report.update(
        verdict={
            "harmonic": verdict == "harmonic",
            "label": verdict,
            "expected_harmonic": spec.expected.harmonic,
            "kappa_max": kappa_max,
        },
        kn=kn_info,
        sigma={"min_abs": rep.sigma_min, "sigma2_mean": float(sigma2.mean()), "expected_sigma2": spec.expected.sigma2},
        residuals={
            "rc": {"max": rep.rc_max, "per_equation": dict(zip(RC_LABELS, map(float, rep.rc.max(axis=0))))},
            "rc0": {"max": rep.rc0_max, "per_equation": dict(zip(RC0_LABELS, map(float, rep.rc0.max(axis=0))))},
            "tension": {
                "max": _max(tau),
                "direct_max": tau_max,
                "norm_identity_max": norm_gap,
            },
            "natural_frame": _max(data.residual),
            "fd_oracle": fd,
        },
        rotation=rotation,
        expectations=exp.results,
        passed=exp.passed,
        diagnostics=exp.diagnostics,
    )

    rows = []
    coords = [f"p{k}" for k in range(pts.shape[1])]
    for n in range(len(pts)):
        row = {"point": n}
        row.update(zip(coords, map(float, pts[n])))
        row.update({name: float(getattr(data, name)[n]) for name in submersion.DATA_NAMES})
        row.update(
            natural_residual=float(data.residual[n]),
            tension=float(tau[n]),
            tension_direct=float(tau_direct[n]),
            kn=float(rep.kn[n]),
            kn_direct=float(kn_direct[n]),
        )
        row.update({f"rc{k+1}": float(rep.rc[n, k]) for k in range(rep.rc.shape[1])})
        row.update({f"rc0_{k+1}": float(rep.rc0[n, k]) for k in range(rep.rc0.shape[1])})
        rows.append(row)
    return report, rows


def run_sweep(map_id: str, grid: list, config: RunConfig):
    """Run ``check`` on each parameter cell and aggregate the verdicts."""
    if not grid:
        raise ConfigError("parameter ranges are empty")
    cells = []
    for params in grid:
        spec = spaces.get_map(map_id, **params)
        cell_config = RunConfig(**{**asdict(config), "command": "check", "params": params})
        rep, _ = run_check(spec, cell_config)
        cell = {
            "params": params,
            "passed": rep["passed"],
            "harmonic": rep.get("verdict", {}).get("harmonic"),
            "kn_mean": rep.get("kn", {}).get("mean"),
            "kn_expected": spec.expected.kn,
            "rc_max": rep.get("residuals", {}).get("rc", {}).get("max"),
            "diagnostics": rep["diagnostics"],
        }
        if map_id == "bcv.projection":
            cell["classification"] = spaces.classify_bcv(params["m"], params["l"])
        cells.append(cell)
    report = {
        "schema": SCHEMA,
        "command": "sweep",
        "config": config.echo(),
        "map": {"id": map_id},
        "cells": cells,
        "verdict": {"harmonic": all(c["harmonic"] for c in cells)},
        "passed": all(c["passed"] for c in cells),
    }
    return report, cells


def run_tables(space, config: RunConfig):
    tol = config.tolerances["curvature"]
    pts = space.sample(config.points, config.seed)
    tr = verify_connection_tables(space, pts)
    exp = _Expectations()
    for key, dev in tr.max_dev.items():
        exp.add(f"table_{key}", dev <= tol, f"max deviation {dev:.3e}")
    sym = max(tr.symmetry.values())
    exp.add("symmetries", sym <= SYMMETRY_TOL, f"symmetry/Bianchi defect {sym:.3e}")
    exp.add("orthonormal", tr.orthonormality <= tol, f"frame Gram defect {tr.orthonormality:.3e}")
    report = {
        "schema": SCHEMA,
        "command": "tables",
        "config": config.echo(),
        "space": {"id": space.id, "label": space.label, "params": dict(space.params)},
        "residuals": {
            "tables": tr.max_dev,
            "symmetry": tr.symmetry,
            "orthonormality": tr.orthonormality,
            "decomposition": tr.decomposition,
        },
        "expectations": exp.results,
        "passed": exp.passed,
        "diagnostics": exp.diagnostics,
    }
    rows = [{"table": k, "max_dev": v} for k, v in tr.max_dev.items()]
    return report, rows


def run_list(config: RunConfig):
    entries = []
    for spec in spaces.catalog():
        entries.append(
            {
                "key": spec.key,
                "label": spec.label,
                "map": spec.map_id,
                "params": dict(spec.params),
                "expected_harmonic": spec.expected.harmonic,
                "expected_kn": spec.expected.kn,
                "description": spec.description,
            }
        )
    report = {
        "schema": SCHEMA,
        "command": "list",
        "maps": sorted(spaces.MAPS),
        "spaces": sorted(spaces.SPACES),
        "catalog": entries,
    }
    return report, entries


# serialisation ------------------------------------------------------------------


def _number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def to_json(obj, indent: int = 2, level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{to_json(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    return _number(obj)


def to_csv(rows: list) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    names = list(rows[0])
    for row in rows[1:]:
        names += [k for k in row if k not in names]
    writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(v) for k, v in row.items()})
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return _number(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return v


def emit_report(report: dict, rows: list, fmt: str) -> str:
    if fmt == "json":
        return to_json(report) + "\n"
    if fmt == "csv":
        return to_csv(rows)
    raise ConfigError(f"unknown format {fmt!r}")


# argument handling ----------------------------------------------------------


def _float_list(text: str) -> list:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


def _single(text: Optional[str], name: str) -> Optional[float]:
    if text is None:
        return None
    values = _float_list(text)
    if len(values) != 1:
        raise ConfigError(f"--{name} takes exactly one number here")
    return values[0]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geo3", description="Verify Riemannian submersions from 3-manifolds onto surfaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, params=True):
        if params:
            p.add_argument("--m", help="BCV parameter m (comma list for sweep)")
            p.add_argument("--l", help="BCV parameter l (comma list for sweep)")
            p.add_argument("--eps", help="Berger parameter eps (comma list for sweep)")
            p.add_argument("--points", type=int, default=DEFAULT_POINTS, help="sample size (default 200)")
            p.add_argument("--seed", type=int, default=None, help="sample seed (default $GEO3_SEED or 0)")
            for name, value in DEFAULT_TOLERANCES.items():
                p.add_argument(f"--tol-{name}", type=float, default=value, help=f"default {value:g}")
            p.add_argument("--timing", action="store_true", help="add wall time to the report")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write the report here instead of stdout")

    common(sub.add_parser("list", help="list catalog entries and ids"), params=False)
    p = sub.add_parser("check", help="run every check on one map")
    p.add_argument("--map", required=True)
    common(p)
    p = sub.add_parser("sweep", help="run check over a parameter grid")
    p.add_argument("--map", required=True)
    common(p)
    p = sub.add_parser("tables", help="compare connection and curvature tables with closed forms")
    p.add_argument("--space", required=True)
    common(p)
    return parser


def _seed(arg: Optional[int]) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("GEO3_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"GEO3_SEED={env!r} is not an integer") from None


def _config(args) -> RunConfig:
    if args.command == "list":
        return RunConfig(command="list", format=args.format, out=args.out)
    return RunConfig(
        command=args.command,
        map_id=getattr(args, "map", None),
        space_id=getattr(args, "space", None),
        points=args.points,
        seed=_seed(args.seed),
        tolerances={name: getattr(args, f"tol_{name}") for name in DEFAULT_TOLERANCES},
        format=args.format,
        out=args.out,
        timing=args.timing,
    )


def _given_params(args, allowed) -> dict:
    out = {}
    for name in ("m", "l", "eps"):
        value = getattr(args, name)
        if value is None:
            continue
        if name not in allowed:
            raise ConfigError(f"--{name} does not apply here")
        out[name] = value
    return out


def _grid(args, map_id: str) -> list:
    names = spaces.MAP_PARAMS.get(map_id)
    if not names:
        raise ConfigError(f"map {map_id!r} has no parameters to sweep")
    given = _given_params(args, names)
    lists = {}
    for name in names:
        if name not in given:
            raise ConfigError(f"sweep over {map_id!r} needs --{name}")
        lists[name] = _float_list(given[name])
        if not lists[name]:
            raise ConfigError(f"--{name} range is empty")
    grid = [{}]
    for name in names:
        grid = [{**cell, name: v} for cell in grid for v in lists[name]]
    return grid


def execute(args) -> tuple:
    config = _config(args)
    start = time.perf_counter()
    if args.command == "list":
        report, rows = run_list(config)
    elif args.command == "check":
        if args.map not in spaces.MAPS:
            raise ConfigError(f"unknown map id {args.map!r}")
        allowed = spaces.MAP_PARAMS.get(args.map, ())
        params = {k: _single(v, k) for k, v in _given_params(args, allowed).items()}
        spec = spaces.get_map(args.map, **params)
        config.params = dict(spec.params)
        report, rows = run_check(spec, config)
    elif args.command == "sweep":
        if args.map not in spaces.MAPS:
            raise ConfigError(f"unknown map id {args.map!r}")
        grid = _grid(args, args.map)
        config.params = {k: sorted({c[k] for c in grid}) for k in grid[0]}
        report, rows = run_sweep(args.map, grid, config)
    else:
        if args.space not in spaces.SPACES:
            raise ConfigError(f"unknown space id {args.space!r}")
        params = {k: _single(v, k) for k, v in _given_params(args, spaces.SPACE_PARAMS[args.space]).items()}
        space = spaces.get_space(args.space, **params)
        config.params = dict(space.params)
        report, rows = run_tables(space, config)
    if config.timing:
        report["wall_time_s"] = time.perf_counter() - start
    return config, report, rows


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config, report, rows = execute(args)
        text = emit_report(report, rows, config.format)
    except (ConfigError, Geo3Error, ValueError) as err:
        print(f"geo3: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    if config.out:
        try:
            with open(config.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as err:
            print(f"geo3: error: cannot write {config.out}: {err}", file=sys.stderr)
            return EXIT_USAGE
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
            return EXIT_OK if report.get("passed", True) else EXIT_VIOLATION
    passed = report.get("passed", True)
    for line in report.get("diagnostics", []):
        print(f"geo3: violated: {line}", file=sys.stderr)
    for cell in report.get("cells", []):
        for line in cell["diagnostics"]:
            print(f"geo3: violated at {cell['params']}: {line}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
