"""Command-line front end: ``allee-zone <command> [flags]``.

Every output embeds the full parameter set and the package version. JSON
floats are rounded to 12 significant digits and keys keep a fixed order,
so identical flags give byte-identical files.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .baseline import spectral_bracket
from .eigen_core import principal_eigenvalue, verify_transcendental
from .fd_oracle import oracle_eigenvalue
from .model import AlleeZoneError, BoundarySpec, GrowthPair, NumericalError, ZoneLayout, verdict_from_sign
from .pde_sim import SimConfig, classify_fate, simulate, to_json_dict
from .sensitivity import NoFormula, dlambda_dalpha_closed, dlambda_dalpha_fd
from .zone_design import design_report, sweep

__all__ = ["RunConfig", "build_parser", "run", "main"]

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

COMMANDS = ("eigen", "sweep", "sensitivity", "simulate", "design", "oracle-compare")

# values a preset fills in when the corresponding flag is not given
PRESETS = {
    "fig1-rn": {"L": 10.0, "r": 0.2, "a": 0.1, "bc_raw": "1,1,1,0"},
    "fig2-rd": {"L": 10.0, "r": 0.2, "a": 0.1, "bc_raw": "1,1,0,1"},
    "fig3": {"L": 10.0, "r": 0.2, "a": 0.1, "u0": 0.01, "t_end": 2000.0, "alpha": 1.0, "l": 3.0},
}

DEFAULTS = {
    "L": 10.0, "r": 0.2, "a": 0.1, "u0": 0.01, "t_end": 2000.0, "dx": 0.025, "dt": None,
    "alpha": None, "l": None, "tol": 1e-13, "alpha_step": 0.25, "l_step": 0.25,
    "snapshot_every": 10.0, "xi": None, "workers": None,
}

DEFAULT_FORMAT = {"eigen": "json", "design": "json", "sweep": "csv", "sensitivity": "csv",
                  "simulate": "csv", "oracle-compare": "csv"}

# layouts used by oracle-compare when no zone is given
COMPARE_LAYOUTS = ((0.0, 3.0), (1.0, 4.0), (3.0, 4.0), (6.0, 4.0))


class UsageError(AlleeZoneError):
    pass


@dataclass
class RunConfig:
    command: str
    L: float
    r: float
    a: float
    bc: BoundarySpec
    alpha: Optional[float]
    l: Optional[float]
    u0: float
    t_end: float
    dx: float
    dt: Optional[float]
    tol: float
    alpha_step: float
    l_step: float
    snapshot_every: float
    xi: Optional[float]
    workers: Optional[int]
    preset: Optional[str]
    fmt: str
    output: Optional[str]
    all_keywords: bool = False  # oracle-compare without a boundary flag runs NN, DD, ND, DN
    growth: GrowthPair = field(init=False, repr=False)

    def __post_init__(self):
        # model-level validation before any dispatch
        self.growth = GrowthPair.cubic(self.r, self.a)
        if not (self.L > 0):
            raise ValueError(f"L must be positive, got {self.L}")
        if self.alpha is not None and self.l is not None:
            ZoneLayout(self.L, self.alpha, self.l)
        for name in ("tol", "alpha_step", "l_step", "dx", "t_end", "snapshot_every"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"--{name.replace('_', '-')} must be positive")
        if not (self.u0 >= 0):
            raise ValueError("--u0 must be nonnegative")

    def layout(self) -> ZoneLayout:
        if self.alpha is None or self.l is None:
            raise UsageError(f"{self.command} needs --alpha and --l")
        return ZoneLayout(self.L, self.alpha, self.l)

    def params(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("bc", "output", "fmt", "growth", "all_keywords")}
        d["bc"] = self.bc.as_dict()
        d["growth"] = self.growth.as_dict()
        d["format"] = self.fmt
        return d


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--L", type=float, help="habitat length")
    common.add_argument("--r", type=float, help="growth rate; f'(0) = r")
    common.add_argument("--a", type=float, help="Allee threshold; g'(0) = -r a")
    bcg = common.add_mutually_exclusive_group()
    bcg.add_argument("--bc", help="boundary keyword NN, ND, DN or DD")
    bcg.add_argument("--bc-raw", help="Robin coefficients a1,a2,b1,b2")
    common.add_argument("--alpha", type=float, help="zone start")
    common.add_argument("--l", type=float, help="zone length")
    common.add_argument("--u0", type=float, help="constant initial density")
    common.add_argument("--t-end", type=float)
    common.add_argument("--dx", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--tol", type=float, help="eigenvalue bisection tolerance")
    common.add_argument("--alpha-step", type=float, help="alpha grid spacing for sweep/sensitivity")
    common.add_argument("--l-step", type=float, help="l grid spacing for sweep")
    common.add_argument("--snapshot-every", type=float, help="time between stored snapshots")
    common.add_argument("--xi", type=float, help="persistence floor (default a/2)")
    common.add_argument("--workers", type=int, help="sweep worker processes")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--output", "-o", help="output file (default stdout)")

    p = argparse.ArgumentParser(prog="allee-zone",
                                description="Principal eigenvalue, sensitivity, simulation and "
                                            "design tools for a protection zone in an Allee habitat.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "eigen": "lambda1, case tag and residuals for one layout",
        "sweep": "lambda1 over an alpha x l grid",
        "sensitivity": "closed-form and finite-difference d lambda1 / d alpha",
        "simulate": "time integration, trajectory export and fate",
        "design": "optimal zone placement and critical lengths",
        "oracle-compare": "transfer-matrix lambda1 against the finite-difference oracle",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def _config(ns: argparse.Namespace) -> RunConfig:
    preset = PRESETS.get(ns.preset, {}) if ns.preset else {}
    vals = {}
    for key, default in DEFAULTS.items():
        given = getattr(ns, key)
        vals[key] = given if given is not None else preset.get(key, default)
    if ns.bc is not None:
        bc = BoundarySpec.from_keyword(ns.bc)
    elif ns.bc_raw is not None:
        bc = BoundarySpec.parse_raw(ns.bc_raw)
    elif "bc_raw" in preset:
        bc = BoundarySpec.parse_raw(preset["bc_raw"])
    elif ns.command == "oracle-compare":
        bc = None
    else:
        raise UsageError("give --bc or --bc-raw")
    fmt = ns.format or DEFAULT_FORMAT[ns.command]
    return RunConfig(command=ns.command, bc=bc or BoundarySpec.from_keyword("NN"), preset=ns.preset,
                     fmt=fmt, output=ns.output, all_keywords=bc is None, **vals)


def _round(v):
    """Round floats to 12 significant digits; non-finite floats become null."""
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(f"{v:.12g}") if math.isfinite(v) else None
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, dict):
        return {str(k): _round(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_round(x) for x in v]
    if hasattr(v, "value"):
        return v.value
    return str(v)


def dump_json(payload: dict) -> str:
    return json.dumps(_round(payload), indent=2, allow_nan=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if math.isfinite(v) else ""
    return str(v)


def dump_csv(header: list[str], rows, comments: list[str]) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _comments(cfg: RunConfig) -> list[str]:
    return [f"allee-zone {__version__} {cfg.command}",
            "params " + json.dumps(_round(cfg.params()))]


def _envelope(cfg: RunConfig, body: dict) -> dict:
    return {"command": cfg.command, "version": __version__, "params": cfg.params(), **body}


def _grid(stop: float, step: float, start: float = 0.0) -> np.ndarray:
    n = int(math.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(n + 1)


def cmd_eigen(cfg: RunConfig) -> str:
    lay = cfg.layout()
    res = principal_eigenvalue(lay, cfg.bc, cfg.growth, tol=cfg.tol)
    tan = verify_transcendental(res, lay, cfg.bc, cfg.growth)
    br = spectral_bracket(cfg.L, cfg.bc, cfg.growth)
    body = {"lambda1": res.lambda1, "case": res.case_tag.value, "f_tilde": res.f_tilde,
            "g_tilde": res.g_tilde, "characteristic_residual": res.residual,
            "tan_residuals": tan, "bracket": [br.lo, br.hi],
            "verdict": verdict_from_sign(res.lambda1).verdict.value}
    if cfg.fmt == "json":
        return dump_json(_envelope(cfg, body))
    header = ["lambda1", "case", "f_tilde", "g_tilde", "characteristic_residual", "max_tan_residual"]
    row = [res.lambda1, res.case_tag.value, res.f_tilde, res.g_tilde, res.residual,
           max((abs(v) for v in tan.values()), default=None)]
    return dump_csv(header, [row], _comments(cfg))


def cmd_sweep(cfg: RunConfig) -> str:
    alphas = _grid(cfg.L, cfg.alpha_step)
    ls = _grid(cfg.L, cfg.l_step, start=cfg.l_step)
    table = sweep(cfg.L, cfg.bc, cfg.growth, alphas, ls, workers=cfg.workers)
    if cfg.fmt == "json":
        return dump_json(_envelope(cfg, {"alpha": table.alpha, "l": table.l,
                                         "lambda1": table.values}))
    rows = (r for r in table.rows() if r[2] is not None)  # drop alpha + l > L
    return dump_csv(["alpha", "l", "lambda1"], rows, _comments(cfg))


def cmd_sensitivity(cfg: RunConfig) -> str:
    if cfg.l is None:
        raise UsageError("sensitivity needs --l")
    alphas = [cfg.alpha] if cfg.alpha is not None else list(_grid(cfg.L - cfg.l, cfg.alpha_step))
    rows = []
    for a in alphas:
        lay = ZoneLayout(cfg.L, min(float(a), cfg.L - cfg.l), cfg.l)
        res = principal_eigenvalue(lay, cfg.bc, cfg.growth, tol=cfg.tol)
        try:
            t = dlambda_dalpha_closed(res, lay, cfg.bc, cfg.growth)
            closed, formula = t.dlambda_dalpha, t.formula
        except NoFormula:
            closed, formula = None, ""
        fd = dlambda_dalpha_fd(lay, cfg.bc, cfg.growth)
        rows.append([lay.alpha, res.lambda1, res.case_tag.value, closed, fd, formula])
    header = ["alpha", "lambda1", "case", "dlambda_dalpha_closed", "dlambda_dalpha_fd", "formula"]
    if cfg.fmt == "json":
        return dump_json(_envelope(cfg, {"rows": [dict(zip(header, r)) for r in rows]}))
    return dump_csv(header, rows, _comments(cfg))


def cmd_simulate(cfg: RunConfig) -> str:
    lay = cfg.layout()
    sim_cfg = SimConfig(dx=cfg.dx, dt=cfg.dt, t_end=cfg.t_end, persistence_floor=cfg.xi,
                        snapshot_every=cfg.snapshot_every)
    traj = simulate(lay, cfg.bc, cfg.growth, cfg.u0, sim_cfg)
    xi = traj.params["persistence_floor"]
    fate = classify_fate(traj, cfg.bc, xi)
    lam = principal_eigenvalue(lay, cfg.bc, cfg.growth).lambda1
    linear = verdict_from_sign(lam).verdict.value
    summary = {"fate": fate.verdict.value, "sim_floor": fate.sim_floor, "note": fate.note,
               "lambda1": lam, "linear_verdict": linear,
               "agrees_with_sign": fate.verdict.value == linear}
    if cfg.fmt == "json":
        return dump_json(_envelope(cfg, {"summary": summary, "trajectory": to_json_dict(traj)}))
    comments = _comments(cfg) + ["summary " + json.dumps(_round(summary))]
    rows = ((t, xv, uv) for t, row in zip(traj.times, traj.snapshots) for xv, uv in zip(traj.x, row))
    return dump_csv(["t", "x", "u"], rows, comments)


def cmd_design(cfg: RunConfig) -> str:
    rep = design_report(cfg.L, cfg.bc, cfg.growth, l=cfg.l)
    if cfg.fmt == "json":
        return dump_json(_envelope(cfg, {"report": rep.as_dict()}))
    d = rep.as_dict()
    header = ["regime", "alpha_star", "verdict", "lambda1_at_optimum", "lambda_worst"]
    row = [d["regime"], d["alpha_star"], d["verdict_at_optimum"]["verdict"],
           d["verdict_at_optimum"]["lambda1"], d["lambda_worst"]]
    return dump_csv(header, [row], _comments(cfg) + [f"l_bars {json.dumps(_round(d['l_bars']))}"])


def cmd_oracle_compare(cfg: RunConfig) -> str:
    bcs = ([BoundarySpec.from_keyword(k) for k in ("NN", "DD", "ND", "DN")]
           if cfg.all_keywords else [cfg.bc])
    if cfg.alpha is not None and cfg.l is not None:
        layouts = [(cfg.alpha, cfg.l)]
    else:
        layouts = [(a * cfg.L / 10, l * cfg.L / 10) for a, l in COMPARE_LAYOUTS]
    rows = []
    for bc in bcs:
        for a, l in layouts:
            lay = ZoneLayout(cfg.L, a, l)
            tm = principal_eigenvalue(lay, bc, cfg.growth, tol=cfg.tol).lambda1
            fd, err = oracle_eigenvalue(lay, bc, cfg.growth)
            rows.append([bc.code, a, l, tm, fd, err, abs(tm - fd)])
    header = ["bc", "alpha", "l", "lambda1_transfer", "lambda1_oracle", "oracle_refinement", "abs_diff"]
    if cfg.fmt == "json":
        return dump_json(_envelope(cfg, {"rows": [dict(zip(header, r)) for r in rows],
                                         "max_abs_diff": max(r[-1] for r in rows)}))
    return dump_csv(header, rows, _comments(cfg))


HANDLERS = {"eigen": cmd_eigen, "sweep": cmd_sweep, "sensitivity": cmd_sensitivity,
            "simulate": cmd_simulate, "design": cmd_design, "oracle-compare": cmd_oracle_compare}


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:  # argparse already printed the usage
        return EXIT_OK if e.code == 0 else EXIT_VALIDATION
    try:
        cfg = _config(ns)
        text = HANDLERS[cfg.command](cfg)
    except NumericalError as e:
        print(f"allee-zone: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, AlleeZoneError) as e:
        print(f"allee-zone: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
