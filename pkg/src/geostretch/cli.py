"""Command-line interface: ``geostretch {field,sim,check,trajectory}``.

Exit codes: 0 success, 1 usage/config error, 2 numerical or domain
failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .checks import run_checks, sample_points
from .errors import DomainError, GeostretchError
from .geometry import geodesic_residual
from .simfinder import CONVERGED, compare_reference, resolve_objective, trace_sim
from .stretching import REPORT_FIELDS, full_report
from .vectorfield import (
    DEFAULT_FD_STEP,
    davis_skodje_sim,
    integrate,
    make_constant,
    make_davis_skodje,
    make_linear,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
MODELS = ("davis-skodje", "linear", "constant")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str = ""
    model: str = "davis-skodje"
    gamma: float = 3.0
    matrix: str = "-1,0;0,-10"
    constant: str = "1,0"
    grid: str = "0.25:2:41,0:1:41"
    band: float | None = None
    rpv: str = "0.25:2:0.25"
    rpv_index: int = 0
    fiber_bounds: str | None = None
    objective: str = "geodesic"
    method: str = "auto"
    fd_step: float | None = None
    tol: float = 1e-8
    coarse_points: int = 41
    warm_start: bool = False
    x0: str = "1,0.5"
    t_end: float = 2.0
    dt: float = 1e-3
    samples: int = 20
    seed: int = 0
    format: str = "csv"

    def validate(self):
        if self.model not in MODELS:
            raise UsageError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.model == "davis-skodje" and not self.gamma > 1:
            raise UsageError(f"davis-skodje requires gamma > 1, got {self.gamma}")
        if self.fd_step is not None and not self.fd_step > 0:
            raise UsageError("--fd-step must be positive")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")
        if self.method not in ("auto", "analytic", "fd"):
            raise UsageError(f"unknown curvature method {self.method!r}")
        if self.coarse_points < 8:
            raise UsageError("--coarse-points must be >= 8")
        try:
            resolve_objective(self.objective)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        parse_grid(self.grid)
        if self.band is not None and not self.band > 0:
            raise UsageError("--band must be positive")

    def echo(self) -> dict:
        return dataclasses.asdict(self)


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _floats(text: str, sep: str = ",") -> list[float]:
    try:
        return [float(t) for t in text.split(sep) if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse numbers from {text!r}") from None


def parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range {text!r} must look like LOW:HIGH:COUNT")
    lo, hi = _floats(parts[0]) + _floats(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise UsageError(f"count in {text!r} must be an integer") from None
    if count < 2 or not lo < hi:
        raise UsageError(f"range {text!r} needs LOW < HIGH and COUNT >= 2")
    return lo, hi, count


def parse_grid(text: str) -> list[tuple[float, float, int]]:
    axes = [parse_range(p) for p in text.split(",")]
    if len(axes) != 2:
        raise UsageError(f"grid {text!r} must give two ranges, e.g. 0.25:2:41,0:1:41")
    return axes


def parse_rpv(text: str) -> np.ndarray:
    """``START:STOP:STEP`` (inclusive of STOP when it is hit) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array(_floats(parts[0]))
    if len(parts) != 3:
        raise UsageError(f"rpv {text!r} must look like START:STOP:STEP")
    start, stop, step = (_floats(p)[0] for p in parts)
    if step <= 0 or stop < start:
        raise UsageError(f"rpv {text!r} needs STEP > 0 and STOP >= START")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def build_model(cfg: RunConfig):
    fd = DEFAULT_FD_STEP if cfg.fd_step is None else cfg.fd_step
    if cfg.model == "davis-skodje":
        return make_davis_skodje(cfg.gamma, fd_step=fd)
    if cfg.model == "linear":
        rows = [_floats(r) for r in cfg.matrix.split(";")]
        if any(len(r) != len(rows) for r in rows):
            raise UsageError(f"matrix {cfg.matrix!r} is not square")
        return make_linear(rows, fd_step=fd)
    return make_constant(_floats(cfg.constant), fd_step=fd)


def reference_for(cfg: RunConfig):
    return davis_skodje_sim if cfg.model == "davis-skodje" else None


def fmt(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def _json_number(v):
    v = float(v)
    return v if math.isfinite(v) else None


def write_sidecar(out: Path, cfg: RunConfig, started: float, extra: dict | None = None):
    meta = {
        "tool": "geostretch",
        "version": __version__,
        "config": cfg.echo(),
        "elapsed_seconds": time.perf_counter() - started,
    }
    meta.update(extra or {})
    Path(f"{out}.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

@dataclass
class FieldGrid:
    x_values: np.ndarray
    y_values: np.ndarray  # shape (nx, ny); row i holds the y samples of fiber x_values[i]
    cells: np.ndarray  # shape (nx, ny, 6), NaN for singular ratios and failed cells
    failures: int = 0


def compute_field(cfg: RunConfig) -> FieldGrid:
    model = build_model(cfg)
    (x0, x1, nx), (y0, y1, ny) = parse_grid(cfg.grid)
    xs = np.linspace(x0, x1, nx)
    if cfg.band is not None:
        ref = reference_for(cfg)
        if ref is None:
            raise UsageError("--band needs a model with a known reference manifold (davis-skodje)")
        offsets = np.linspace(-cfg.band, cfg.band, ny)
        ys = np.array([ref(x) + offsets for x in xs])
    else:
        ys = np.tile(np.linspace(y0, y1, ny), (nx, 1))
    cells = np.full((nx, ny, len(REPORT_FIELDS)), np.nan)
    failures = 0
    for i, x in enumerate(xs):
        for j, y in enumerate(ys[i]):
            try:
                cells[i, j] = full_report(model, [x, y], method=cfg.method).as_row()
            except GeostretchError:
                failures += 1
    return FieldGrid(xs, ys, cells, failures)


def cmd_field(cfg: RunConfig, out: Path) -> int:
    started = time.perf_counter()
    grid = compute_field(cfg)
    if cfg.format == "csv":
        lines = [",".join(("x", "y") + REPORT_FIELDS)]
        for i, x in enumerate(grid.x_values):
            for j, y in enumerate(grid.y_values[i]):
                lines.append(",".join([fmt(x), fmt(y)] + [fmt(v) for v in grid.cells[i, j]]))
        out.write_text("\n".join(lines) + "\n")
    else:
        records = []
        for i, x in enumerate(grid.x_values):
            for j, y in enumerate(grid.y_values[i]):
                rec = {"x": float(x), "y": float(y)}
                failed = bool(np.all(np.isnan(grid.cells[i, j])))
                for k, name in enumerate(REPORT_FIELDS):
                    v = grid.cells[i, j, k]
                    if name.endswith("ratio") and math.isnan(v) and not failed:
                        rec[name] = "singular"
                    else:
                        rec[name] = _json_number(v)
                records.append(rec)
        out.write_text(json.dumps({"records": records}, indent=1) + "\n")
    write_sidecar(out, cfg, started, {"cells": int(grid.cells.shape[0] * grid.cells.shape[1]),
                                      "failed_cells": grid.failures})
    print(f"wrote {out} ({grid.cells.shape[0]}x{grid.cells.shape[1]} cells, {grid.failures} failed)")
    return EXIT_OK


def fiber_bounds_for(cfg: RunConfig):
    if cfg.fiber_bounds is not None:
        parts = cfg.fiber_bounds.split(":")
        if len(parts) != 2:
            raise UsageError(f"--fiber-bounds {cfg.fiber_bounds!r} must look like LOW:HIGH")
        lo, hi = _floats(parts[0]) + _floats(parts[1])
        if not lo < hi:
            raise UsageError("--fiber-bounds needs LOW < HIGH")
        return lo, hi
    ref = reference_for(cfg)
    if ref is None:
        raise UsageError("--fiber-bounds is required for models without a reference manifold")
    return lambda r: (max(ref(r) - 0.3, 0.0), ref(r) + 0.3)


def cmd_sim(cfg: RunConfig, out: Path) -> int:
    started = time.perf_counter()
    model = build_model(cfg)
    if model.dimension != 2:
        raise UsageError("sim needs a planar model")
    rpv = parse_rpv(cfg.rpv)
    bounds = fiber_bounds_for(cfg)
    curve = trace_sim(model, cfg.rpv_index, rpv, bounds, objective=cfg.objective, tol=cfg.tol,
                      coarse_points=cfg.coarse_points, warm_start=cfg.warm_start)
    ref = reference_for(cfg) if cfg.rpv_index == 0 else None
    rows = []
    for e in curve:
        row = {"rpv_value": e.rpv_value, "maximizer": e.maximizer,
               "objective_value": e.objective_value, "status": e.status}
        if ref is not None:
            rv = float(ref(e.rpv_value))
            row["reference_value"] = rv
            row["abs_error"] = abs(e.maximizer - rv)
        rows.append(row)
    if cfg.format == "csv":
        cols = list(rows[0].keys())
        lines = [",".join(cols)]
        for row in rows:
            lines.append(",".join(row[c] if c == "status" else fmt(row[c]) for c in cols))
        out.write_text("\n".join(lines) + "\n")
    else:
        clean = [{k: (v if isinstance(v, str) else _json_number(v)) for k, v in r.items()} for r in rows]
        out.write_text(json.dumps({"entries": clean}, indent=1) + "\n")
    summary = {}
    if ref is not None and any(e.status == CONVERGED for e in curve):
        dev = compare_reference(curve, ref)
        summary = {"max_abs_error": dev.max_abs, "mean_abs_error": dev.mean_abs}
        print(f"{len(curve)} fibers, max_abs_error={dev.max_abs:.6e} mean_abs_error={dev.mean_abs:.6e}")
    else:
        print(f"{len(curve)} fibers")
    write_sidecar(out, cfg, started, summary)
    return EXIT_OK


def cmd_check(cfg: RunConfig, out: Path | None, corrupt_metric_sign: bool = False) -> int:
    model = build_model(cfg)
    if model.dimension == 2:
        (x0, x1, _), (y0, y1, _) = parse_grid(cfg.grid)
        box = [(x0, x1), (y0, y1)]
    else:
        box = [(-1.0, 1.0)] * model.dimension
    pts = sample_points(model, box, cfg.samples, cfg.seed)
    results = run_checks(model, pts, method=cfg.method, seed=cfg.seed,
                         corrupt_metric_sign=corrupt_metric_sign)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("all checks passed" if ok else "verification FAILED")
    if out is not None:
        out.write_text(json.dumps(
            {"config": cfg.echo(), "checks": [
                {"name": r.name, "measured": r.measured, "tolerance": r.tolerance, "passed": r.passed}
                for r in results]}, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_trajectory(cfg: RunConfig, out: Path) -> int:
    started = time.perf_counter()
    model = build_model(cfg)
    x0 = _floats(cfg.x0)
    traj = integrate(model, x0, cfg.t_end, cfg.dt)
    n = model.dimension
    cols = ["t"] + [f"x{i + 1}" for i in range(n)] + ["geodesic_residual"]
    if cfg.format == "csv":
        lines = [",".join(cols)]
        for t, p in zip(traj.times, traj.points):
            res = float(np.max(np.abs(geodesic_residual(model, p))))
            lines.append(",".join([fmt(t)] + [fmt(v) for v in p] + [fmt(res)]))
        out.write_text("\n".join(lines) + "\n")
    else:
        rows = []
        for t, p in zip(traj.times, traj.points):
            res = float(np.max(np.abs(geodesic_residual(model, p))))
            rows.append(dict(zip(cols, [float(t)] + [float(v) for v in p] + [res])))
        out.write_text(json.dumps({"points": rows}, indent=1) + "\n")
    write_sidecar(out, cfg, started, {"rows": len(traj)})
    print(f"wrote {out} ({len(traj)} rows)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config or a previous run's .meta.json sidecar")
    common.add_argument("--model", choices=MODELS)
    common.add_argument("--gamma", type=float, help="Davis-Skodje parameter (> 1)")
    common.add_argument("--matrix", help="linear model matrix, rows separated by ';'")
    common.add_argument("--constant", help="constant field value, comma separated")
    common.add_argument("--grid", help="X0:X1:NX,Y0:Y1:NY")
    common.add_argument("--fd-step", type=float)
    common.add_argument("--method", choices=("auto", "analytic", "fd"),
                        help="how Christoffel partials are obtained")
    common.add_argument("--format", choices=("csv", "json"))

    parser = _Parser(prog="geostretch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("field", parents=[common], help="stretching rates and ratios on a grid")
    p.add_argument("--band", type=float, help="sample y = h(x) + [-BAND, BAND] around the reference SIM")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("sim", parents=[common], help="trace the SIM by fiber maximization")
    p.add_argument("--rpv", help="START:STOP:STEP or a single value")
    p.add_argument("--rpv-index", type=int, choices=(0, 1))
    p.add_argument("--fiber-bounds", help="LOW:HIGH (default: reference +- 0.3)")
    p.add_argument("--objective", choices=("geodesic", "classical"))
    p.add_argument("--tol", type=float)
    p.add_argument("--coarse-points", type=int)
    p.add_argument("--warm-start", action="store_true", default=None)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("check", parents=[common], help="run the geometric verification suite")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--corrupt-metric-sign", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("trajectory", parents=[common], help="integrate and log geodesic residuals")
    p.add_argument("--x0", help="initial state, comma separated")
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--out", type=Path, required=True)
    return parser


_NOT_CONFIG = {"config", "out", "command", "corrupt_metric_sign"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the --config file, then explicit flags."""
    values = {}
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        loaded = loaded.get("config", loaded)
        known = {f.name for f in dataclasses.fields(RunConfig)}
        values.update({k: v for k, v in loaded.items() if k in known and k != "command"})
    for k, v in vars(args).items():
        if k not in _NOT_CONFIG and v is not None:
            values[k] = v
    cfg = RunConfig(command=args.command, **values)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "field":
            return cmd_field(cfg, args.out)
        if args.command == "sim":
            return cmd_sim(cfg, args.out)
        if args.command == "check":
            return cmd_check(cfg, args.out, getattr(args, "corrupt_metric_sign", False))
        return cmd_trajectory(cfg, args.out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"geostretch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        where = "" if exc.last_valid_time is None else f" (last valid time {exc.last_valid_time:g})"
        print(f"geostretch: domain error: {exc}{where}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GeostretchError, ValueError) as exc:
        print(f"geostretch: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
