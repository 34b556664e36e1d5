"""Command-line front end: ``verify``, ``sweep`` and ``optimize``.

Configuration is a flat JSON object; command-line flags override file
values and omitted fields fall back to the defaults below. Results are
written as CSV (12 significant digits) or JSON with the same rounding.

Exit codes: 0 success, 1 validation error, 2 agreement failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytics, montecarlo
from .analytics import SeriesPolicy
from .montecarlo import McRunSpec
from .network import SystemConfig, Topology, mean_channel_gains, place_relay_on_height
from .optimizer import optimize_ps, optimize_ts, sweep_distance, sweep_power
from .protocols import PsParams, TsParams, coefficients
from .specfun import QuadratureSpec

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_DISAGREE = 2
EXIT_IO = 3

CLOSED_FORM_RTOL = 1e-5
MC_SIGMAS = 4.0

DEFAULT_VERIFY_GRID = [round(0.1 * i, 10) for i in range(1, 10)]
DEFAULT_GRIDS = {"power": "0:30:5", "distance": "0.3:0.8:0.1"}

_SYSTEM_KEYS = {"p1", "p2", "ps_db", "eta", "m", "rt", "theta1"}
_TOPOLOGY_KEYS = {"d_sr", "d_s1", "d_s2", "d_12", "d_r1", "d_r2"}
_OTHER_KEYS = {
    "protocol", "n_samples", "seed", "n_streams", "max_terms", "term_rel_tol",
    "abs_tol", "rel_tol", "max_subdivisions", "output_path", "output_format",
    "method", "resolution", "verify_grid", "axis", "grid",
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class RunConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    topology: Topology = field(default_factory=lambda: place_relay_on_height(0.5))
    protocol: str = "both"
    mc: McRunSpec = field(default_factory=McRunSpec)
    series: SeriesPolicy = field(default_factory=SeriesPolicy)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    output_path: Optional[str] = None
    output_format: str = "csv"
    method: str = "grid"
    resolution: int = 256
    verify_grid: list = field(default_factory=lambda: list(DEFAULT_VERIFY_GRID))
    axis: str = "power"
    grid: Optional[str] = None

    @property
    def protocols(self):
        return ["ts", "ps"] if self.protocol == "both" else [self.protocol]


def _build(cls, name, **kwargs):
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def run_config_from_dict(raw: dict) -> RunConfig:
    """Validate a flat mapping and assemble a ``RunConfig``."""
    unknown = set(raw) - _SYSTEM_KEYS - _TOPOLOGY_KEYS - _OTHER_KEYS
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
    raw = {k: v for k, v in raw.items() if v is not None}

    system = {k: raw[k] for k in _SYSTEM_KEYS - {"ps_db"} if k in raw}
    if "ps_db" in raw:
        if "p1" in raw or "p2" in raw:
            raise ConfigError("ps_db: give either ps_db or p1/p2, not both")
        ps = 10.0 ** (float(raw["ps_db"]) / 10.0)
        system.update(p1=ps, p2=ps)
    system_cfg = _build(SystemConfig, "system", **system)

    d_s1 = raw.get("d_s1", 1.0)
    d_s2 = raw.get("d_s2", d_s1)
    d_12 = raw.get("d_12", 1.0)
    d_sr = raw.get("d_sr", 0.5)
    if "d_r1" in raw or "d_r2" in raw:
        topology = _build(Topology, "topology", d_s1=d_s1, d_s2=d_s2, d_12=d_12, d_sr=d_sr,
                          d_r1=raw.get("d_r1"), d_r2=raw.get("d_r2", raw.get("d_r1")))
    else:
        try:
            topology = place_relay_on_height(d_sr, d_s1, d_s2, d_12)
        except ValueError as exc:
            raise ConfigError(f"topology: {exc}") from None

    mc = _build(McRunSpec, "mc", **{k: raw[k] for k in ("n_samples", "seed", "n_streams") if k in raw})
    series = _build(SeriesPolicy, "series", **{k: raw[k] for k in ("max_terms", "term_rel_tol") if k in raw})
    quad = _build(QuadratureSpec, "quadrature",
                  **{k: raw[k] for k in ("abs_tol", "rel_tol", "max_subdivisions") if k in raw})

    cfg = RunConfig(system=system_cfg, topology=topology, mc=mc, series=series, quadrature=quad)
    for key in ("protocol", "output_path", "output_format", "method", "resolution", "verify_grid", "axis", "grid"):
        if key in raw:
            setattr(cfg, key, raw[key])
    cfg.protocol = str(cfg.protocol).lower()
    if cfg.protocol not in ("ts", "ps", "both"):
        raise ConfigError(f"protocol: expected ts, ps or both, got {cfg.protocol!r}")
    if cfg.output_format not in ("csv", "json"):
        raise ConfigError(f"output_format: expected csv or json, got {cfg.output_format!r}")
    if cfg.method not in ("grid", "golden"):
        raise ConfigError(f"method: expected grid or golden, got {cfg.method!r}")
    if cfg.axis not in ("power", "distance"):
        raise ConfigError(f"axis: expected power or distance, got {cfg.axis!r}")
    if int(cfg.resolution) != cfg.resolution or cfg.resolution < 32:
        raise ConfigError("resolution: need an integer grid size >= 32")
    for value in cfg.verify_grid:
        if not 0 <= value < 1:
            raise ConfigError(f"verify_grid: parameter {value!r} outside [0, 1)")
    return cfg


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return raw


def parse_grid(spec: str) -> list:
    """``start:stop:step`` with ``stop`` included, e.g. ``0:30:5``."""
    try:
        start, stop, step = (float(p) for p in spec.split(":"))
    except ValueError:
        raise ConfigError(f"grid: expected start:stop:step, got {spec!r}") from None
    if not step > 0 or stop < start:
        raise ConfigError(f"grid: need step > 0 and stop >= start, got {spec!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


# -- commands -----------------------------------------------------------------

def _params(protocol: str, value: float):
    return TsParams(value) if protocol == "ts" else PsParams.equal(value)


def cmd_verify(cfg: RunConfig):
    """Closed form vs quadrature vs Monte Carlo over the parameter grid.

    Returns ``(rows, all_agree)``.
    """
    gains = mean_channel_gains(cfg.topology, cfg.system.m)
    rows = []
    for protocol in cfg.protocols:
        for value in cfg.verify_grid:
            coeffs = coefficients(cfg.system, _params(protocol, value))
            args = (coeffs, gains.omega_sr, gains.omega_r1, gains.omega_s1, cfg.system.p1)
            quad = analytics.outage_quadrature(*args, spec=cfg.quadrature).p
            closed = analytics.outage_closed_form(*args, policy=cfg.series, spec=cfg.quadrature).p
            mc = montecarlo.estimate_outage(cfg.system, gains, coeffs, cfg.mc)
            agree = (abs(closed - quad) <= CLOSED_FORM_RTOL * quad) and montecarlo.agrees(mc, quad, MC_SIGMAS)
            rows.append({
                "protocol": protocol,
                "parameter": value,
                "closed_form": closed,
                "quadrature": quad,
                "monte_carlo": mc.p,
                "mc_stderr": mc.stderr,
                "agree": agree,
            })
    return rows, all(r["agree"] for r in rows)


def cmd_sweep(cfg: RunConfig, axis: Optional[str] = None, grid: Optional[list] = None):
    axis = axis or cfg.axis
    if grid is None:
        grid = parse_grid(cfg.grid or DEFAULT_GRIDS[axis])
    if axis == "power":
        return sweep_power(cfg.system, cfg.topology, grid, cfg.method, cfg.resolution, cfg.quadrature, cfg.series)
    if axis == "distance":
        return sweep_distance(cfg.system, grid, cfg.topology.d_s1, cfg.topology.d_12,
                              cfg.method, cfg.resolution, cfg.quadrature, cfg.series)
    raise ConfigError(f"axis: expected power or distance, got {axis!r}")


def sweep_rows(result) -> list:
    return [
        {"axis": axis, "pout_ts": ts, "pout_ps": ps, "pout_baseline": base, "rho_opt": rho, "alpha_opt": alpha}
        for axis, ts, ps, base, rho, alpha in result.rows()
    ]


def cmd_optimize(cfg: RunConfig) -> list:
    gains = mean_channel_gains(cfg.topology, cfg.system.m)
    runners = {"ts": optimize_ts, "ps": optimize_ps}
    rows = []
    for protocol in cfg.protocols:
        best = runners[protocol](cfg.system, gains, cfg.method, cfg.resolution, cfg.quadrature, cfg.series)
        rows.append({"protocol": protocol, "param_star": best.param, "pout_star": best.outage, "method": cfg.method})
    return rows


# -- output -------------------------------------------------------------------

def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, int, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, int, np.floating)):
        return float(format(float(value), ".12g"))
    return value


def render(rows: list, fmt: str) -> str:
    if not rows:
        return "" if fmt == "csv" else "{}\n"
    keys = list(rows[0])
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(keys)
        for row in rows:
            writer.writerow([_cell(row[k]) for k in keys])
        return buf.getvalue()
    columns = {k: [_json_value(row[k]) for row in rows] for k in keys}
    return json.dumps(columns, indent=2) + "\n"


def _emit(text: str, path: Optional[str]):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat JSON configuration file")
    common.add_argument("--protocol", choices=["ts", "ps", "both"])
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int, dest="n_samples")
    common.add_argument("--streams", type=int, dest="n_streams")
    common.add_argument("--ps-db", type=float, dest="ps_db", help="source power in dB (P1 = P2)")
    common.add_argument("--d-sr", type=float, dest="d_sr", help="source-relay distance")
    common.add_argument("--method", choices=["grid", "golden"])
    common.add_argument("--out", metavar="PATH", dest="output_path")
    common.add_argument("--format", choices=["csv", "json"], dest="output_format")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ehrelay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="cross-check closed form, quadrature and Monte Carlo")
    sweep = sub.add_parser("sweep", parents=[common], help="optimal outage against power or relay distance")
    sweep.add_argument("--axis", choices=["power", "distance"])
    sweep.add_argument("--grid", help="start:stop:step (stop included)")
    sub.add_parser("optimize", parents=[common], help="optimal rho / alpha at one operating point")
    return parser


_FLAG_KEYS = ("protocol", "seed", "n_samples", "n_streams", "ps_db", "d_sr", "method",
              "output_path", "output_format", "axis", "grid")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        raw = load_config_file(args.config) if args.config else {}
        for key in _FLAG_KEYS:
            value = getattr(args, key, None)
            if value is not None:
                raw[key] = value
        if "ps_db" in raw and args.ps_db is not None:
            raw.pop("p1", None)
            raw.pop("p2", None)
        cfg = run_config_from_dict(raw)
        if args.command == "verify":
            rows, ok = cmd_verify(cfg)
        elif args.command == "sweep":
            rows, ok = sweep_rows(cmd_sweep(cfg)), True
        else:
            rows, ok = cmd_optimize(cfg), True
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        _emit(render(rows, cfg.output_format), cfg.output_path)
    except OSError as exc:
        print(f"error: cannot write {cfg.output_path}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    if not ok:
        print("error: closed form, quadrature and Monte Carlo disagree", file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
