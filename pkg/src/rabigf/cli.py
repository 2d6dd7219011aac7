"""Command-line front end.

    rabigf gscan       G±(x) samples on an x grid
    rabigf spectrum    regular spectrum over a coupling grid
    rabigf crosscheck  spectrum plus ED energies and |ΔE|
    rabigf exceptional lifting-condition solutions
    rabigf ed          truncated exact diagonalization
    rabigf collapse    adjacent level spacings against F(g)
    rabigf replay      re-run the config echoed in an output file

Exit codes: 0 success, 1 configuration error, 2 fatal numerical failure in a
single-point command.  Sweeps report per-cell failures in-band.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import __version__
from .ed import ed_spectrum
from .errors import (CouplingOutOfRange, DeltaZero, GridResolutionExceeded,
                     InvalidSector, LiftingFailed, NoConvergence, NoSolution,
                     PoleProximity, RabiError)
from .exceptional import solve_exceptional_delta, solve_exceptional_g, verify_lifting
from .gfunction import eval_G
from .io import read_table, render, write_output
from .model import Controls, Family, ModelParams, as_bargmann, check_sector
from .recurrence import FamilyRecurrence
from .solver import PARITY_LABEL, collapse_spacing, pole_spacing, sweep_g

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

GSCAN_COLUMNS = ["q", "x", "g_plus", "g_minus", "n_terms", "pole_distance"]
SPECTRUM_COLUMNS = ["g", "q", "parity", "level_index", "x_root", "energy",
                    "classification", "residual", "status"]
CROSSCHECK_COLUMNS = SPECTRUM_COLUMNS + ["ed_energy", "abs_diff"]
EXCEPTIONAL_COLUMNS = ["n", "q", "g_star", "delta", "energy", "residual", "verified"]
ED_COLUMNS = ["g", "q", "parity", "level_index", "energy", "truncation", "converged"]
COLLAPSE_COLUMNS = ["g", "q", "parity", "level_index", "spacing", "two_beta", "ratio",
                    "classification"]


class ConfigError(Exception):
    pass


class NumericFailure(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    family: str = Family.TWO_MODE.value
    delta: float = 0.35
    g: Optional[float] = None
    g_start: Optional[float] = None
    g_stop: Optional[float] = None
    g_steps: Optional[int] = None
    q: list = field(default_factory=lambda: ["1/2"])
    parity: str = "both"
    x_max: float = 10.0
    x_start: float = -1.0
    x_stop: float = 5.0
    samples: int = 2000
    n_min: int = 1
    n_max: int = 1
    g_lo: Optional[float] = None
    g_hi: Optional[float] = None
    solve_for: str = "g"
    verify: bool = True
    n_levels: int = 8
    level_start: int = 10
    level_stop: int = 20
    crosscheck: bool = False
    workers: int = 1
    format: str = "csv"
    out: Optional[str] = None
    controls: dict = field(default_factory=lambda: asdict(Controls()))

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d["version"] = __version__
        return d

    @classmethod
    def from_echo(cls, data: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})

    # -- derived ---------------------------------------------------------
    def control_obj(self) -> Controls:
        try:
            return Controls(**self.controls)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad numeric control: {exc}") from exc

    def family_obj(self) -> Family:
        try:
            return Family.parse(self.family)
        except ValueError as exc:
            raise ConfigError(f"unknown family {self.family!r}") from exc

    def params(self, g: Optional[float] = None) -> ModelParams:
        try:
            p = ModelParams(float(self.delta), float(self.g if g is None else g),
                            self.family_obj())
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return p

    def q_values(self):
        fam = self.family_obj()
        try:
            return [check_sector(fam, q) for q in self.q]
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(str(exc)) from exc

    def parities(self) -> list[int]:
        return {"plus": [1], "minus": [-1], "both": [1, -1]}[self.parity]

    def g_values(self) -> list[float]:
        if self.g_steps is not None:
            if None in (self.g_start, self.g_stop) or self.g_steps < 1:
                raise ConfigError("--g-start, --g-stop and --g-steps >= 1 go together")
            grid = [float(v) for v in np.linspace(self.g_start, self.g_stop, self.g_steps)]
        elif self.g is not None:
            grid = [float(self.g)]
        else:
            raise ConfigError("give --g or --g-start/--g-stop/--g-steps")
        for g in grid:
            try:
                self.params(g).check_coupling()
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        return grid


# --------------------------------------------------------------------------
# commands; each returns (columns, rows, status)

def cmd_gscan(cfg: RunConfig):
    g_list = cfg.g_values()
    if len(g_list) != 1:
        raise ConfigError("gscan takes a single --g")
    params = cfg.params(g_list[0])
    if params.delta == 0:
        raise ConfigError("gscan needs --delta > 0 (G-functions are undefined at delta = 0)")
    if not cfg.x_start < cfg.x_stop or cfg.samples < 2:
        raise ConfigError("need --x-start < --x-stop and --samples >= 2")
    ctl = cfg.control_obj()
    xs = np.linspace(cfg.x_start, cfg.x_stop, cfg.samples)
    rows = []
    skipped = 0
    for q in cfg.q_values():
        rec = FamilyRecurrence(params, q)
        for x in xs:
            x = float(x)
            try:
                ev = eval_G(params, q, x, ctl, rec)
            except PoleProximity:
                skipped += 1
                continue
            except NoConvergence as exc:
                raise NumericFailure(str(exc)) from exc
            rows.append(dict(q=str(q), x=x, g_plus=ev.value_plus, g_minus=ev.value_minus,
                             n_terms=ev.n_terms_used, pole_distance=ev.pole_distance))
    return GSCAN_COLUMNS, rows, {"rows": len(rows), "skipped_pole_guard": skipped}


def _match_ed(levels, ed_levels):
    out = []
    for p in levels:
        best = min(ed_levels, key=lambda e: abs(e.energy - p.energy))
        out.append(best.energy)
    return out


def cmd_spectrum(cfg: RunConfig):
    g_list = cfg.g_values()
    qs = cfg.q_values()
    params = cfg.params(g_list[0])
    if not cfg.x_max > 0:
        raise ConfigError("--x-max must be > 0")
    ctl = cfg.control_obj()
    table = sweep_g(params, qs, g_list, cfg.x_max, ctl, parities=cfg.parities(),
                    workers=cfg.workers)
    rows = []
    failed = 0
    for cell in table.cells:
        if cell.status not in ("ok", "delta_zero"):
            failed += 1
        ed_e = None
        if cfg.crosscheck and cell.levels:
            eds = ed_spectrum(params.with_g(cell.g), cell.q, cell.parity,
                              len(cell.levels) + 2, ctl)
            ed_e = _match_ed(cell.levels, eds)
        if not cell.levels:
            rows.append(dict(g=cell.g, q=cell.q, parity=PARITY_LABEL[cell.parity],
                             status=cell.status))
        for i, p in enumerate(cell.levels):
            row = dict(g=cell.g, q=cell.q, parity=PARITY_LABEL[cell.parity], level_index=i,
                       x_root=p.x_root, energy=p.energy, classification=p.classification,
                       residual=p.residual, status=cell.status)
            if ed_e is not None:
                row["ed_energy"] = ed_e[i]
                row["abs_diff"] = abs(ed_e[i] - p.energy)
            rows.append(row)
    cols = CROSSCHECK_COLUMNS if cfg.crosscheck else SPECTRUM_COLUMNS
    return cols, rows, {"cells": len(table.cells), "failed_cells": failed}


def cmd_crosscheck(cfg: RunConfig):
    cfg.crosscheck = True
    return cmd_spectrum(cfg)


def cmd_exceptional(cfg: RunConfig):
    fam = cfg.family_obj()
    qs = cfg.q_values()
    ctl = cfg.control_obj()
    if cfg.n_min < 1 or cfg.n_max < cfg.n_min:
        raise ConfigError("need 1 <= --n-min <= --n-max")
    if cfg.delta <= 0 and cfg.solve_for == "g":
        raise ConfigError("--delta must be > 0")
    bracket = None
    if cfg.g_lo is not None or cfg.g_hi is not None:
        if cfg.g_lo is None or cfg.g_hi is None:
            raise ConfigError("--g-lo and --g-hi go together")
        bracket = (cfg.g_lo, cfg.g_hi)
    rows = []
    for q in qs:
        for n in range(cfg.n_min, cfg.n_max + 1):
            try:
                if cfg.solve_for == "g":
                    pts = solve_exceptional_g(n, q, cfg.delta, bracket, family=fam, controls=ctl)
                else:
                    if cfg.g is None:
                        raise ConfigError("--solve-for delta needs --g")
                    pts = solve_exceptional_delta(n, q, cfg.g, family=fam, controls=ctl)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            for p in pts:
                verified = None
                if cfg.verify:
                    try:
                        verified = verify_lifting(p.params, q, n, ctl).passed
                    except LiftingFailed:
                        verified = False
                rows.append(dict(n=n, q=p.q, g_star=p.g, delta=p.delta, energy=p.energy,
                                 residual=p.residual, verified=verified))
    return EXCEPTIONAL_COLUMNS, rows, {"solutions": len(rows)}


def cmd_ed(cfg: RunConfig):
    ctl = cfg.control_obj()
    qs = cfg.q_values()
    if cfg.n_levels < 1:
        raise ConfigError("--n-levels must be >= 1")
    rows = []
    unconverged = 0
    for g in cfg.g_values():
        p = cfg.params(g)
        for q in qs:
            for parity in cfg.parities():
                for i, lv in enumerate(ed_spectrum(p, q, parity, cfg.n_levels, ctl)):
                    unconverged += not lv.converged
                    rows.append(dict(g=g, q=str(q), parity=PARITY_LABEL[parity],
                                     level_index=i, energy=lv.energy,
                                     truncation=lv.truncation, converged=lv.converged))
    return ED_COLUMNS, rows, {"unconverged_levels": unconverged}


def cmd_collapse(cfg: RunConfig):
    ctl = cfg.control_obj()
    qs = cfg.q_values()
    if not 0 <= cfg.level_start < cfg.level_stop:
        raise ConfigError("need 0 <= --level-start < --level-stop")
    if cfg.delta <= 0:
        raise ConfigError("collapse needs --delta > 0")
    rows = []
    for g in cfg.g_values():
        p = cfg.params(g)
        for q in qs:
            for parity in cfg.parities():
                try:
                    res = collapse_spacing(p, q, g, (cfg.level_start, cfg.level_stop),
                                           sign=parity, controls=ctl)
                except (NoConvergence, GridResolutionExceeded) as exc:
                    raise NumericFailure(str(exc)) from exc
                for idx, s, r in zip(res.level_indices, res.spacings, res.ratios):
                    rows.append(dict(g=g, q=str(q), parity=PARITY_LABEL[parity],
                                     level_index=idx, spacing=s, two_beta=res.two_beta,
                                     ratio=r, classification="level"))
                for idx in res.level_indices[:-1]:
                    s = pole_spacing(p, q, idx)
                    rows.append(dict(g=g, q=str(q), parity=PARITY_LABEL[parity],
                                     level_index=idx, spacing=s, two_beta=res.two_beta,
                                     ratio=s / res.two_beta, classification="pole"))
    return COLLAPSE_COLUMNS, rows, {"rows": len(rows)}


COMMANDS = {
    "gscan": cmd_gscan,
    "spectrum": cmd_spectrum,
    "crosscheck": cmd_crosscheck,
    "exceptional": cmd_exceptional,
    "ed": cmd_ed,
    "collapse": cmd_collapse,
}


def run_config(cfg: RunConfig) -> str:
    """Execute ``cfg`` and return the rendered output text."""
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"unknown format {cfg.format!r}")
    if cfg.parity not in ("plus", "minus", "both"):
        raise ConfigError(f"unknown parity {cfg.parity!r}")
    cols, rows, status = COMMANDS[cfg.command](cfg)
    return render(cfg.format, cols, rows, cfg.echo(), status)


# --------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


CONTROL_FLAGS = {
    "eps_tail": float, "tail_window": int, "n_max_hard": int, "pole_guard": float,
    "grid_points": int, "refine_factor": int, "tol_x": float, "x_floor": float,
    "N0": int, "N_hard": int, "tol_ed": float, "exc_grid": int, "tol_exc": float,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", default=Family.TWO_MODE.value,
                   choices=[f.value for f in Family])
    p.add_argument("--delta", type=float, default=0.35)
    p.add_argument("--g", type=float)
    p.add_argument("--g-start", type=float)
    p.add_argument("--g-stop", type=float)
    p.add_argument("--g-steps", type=int)
    p.add_argument("--q", action="append", help="Bargmann index, e.g. 1/2 (repeatable)")
    p.add_argument("--parity", choices=["plus", "minus", "both"], default="both")
    p.add_argument("--x-max", type=float, default=10.0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="output path (default stdout)")
    ctl = p.add_argument_group("numeric controls")
    for name, typ in CONTROL_FLAGS.items():
        ctl.add_argument("--" + name.replace("_", "-"), dest="ctl_" + name, type=typ)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rabigf", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gscan", help="sample G+(x) and G-(x)")
    _common(p)
    p.add_argument("--x-start", type=float, default=-1.0)
    p.add_argument("--x-stop", type=float, default=5.0)
    p.add_argument("--samples", type=int, default=2000)

    for name in ("spectrum", "crosscheck"):
        p = sub.add_parser(name, help="regular spectrum from G-function zeros")
        _common(p)
        p.add_argument("--workers", type=int, default=1)
        if name == "spectrum":
            p.add_argument("--crosscheck", action="store_true")

    p = sub.add_parser("exceptional", help="solve the pole-lifting condition")
    _common(p)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=1)
    p.add_argument("--g-lo", type=float)
    p.add_argument("--g-hi", type=float)
    p.add_argument("--solve-for", choices=["g", "delta"], default="g")
    p.add_argument("--no-verify", dest="verify", action="store_false")

    p = sub.add_parser("ed", help="exact diagonalization per sector")
    _common(p)
    p.add_argument("--n-levels", type=int, default=8)

    p = sub.add_parser("collapse", help="level spacings near the critical coupling")
    _common(p)
    p.add_argument("--level-start", type=int, default=10)
    p.add_argument("--level-stop", type=int, default=20)

    p = sub.add_parser("replay", help="re-run the configuration echoed in an output file")
    p.add_argument("source")
    p.add_argument("--out")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    controls = asdict(Controls())
    for name in CONTROL_FLAGS:
        v = getattr(ns, "ctl_" + name, None)
        if v is not None:
            controls[name] = v
    cfg = RunConfig(command=ns.command, controls=controls)
    for f in fields(RunConfig):
        if f.name in ("command", "controls"):
            continue
        if hasattr(ns, f.name) and getattr(ns, f.name) is not None:
            setattr(cfg, f.name, getattr(ns, f.name))
    if cfg.command == "crosscheck":
        cfg.crosscheck = True
    if ns.command == "gscan" and ns.q is None:
        cfg.q = ["1/4"] if Family.parse(cfg.family) is Family.TWO_PHOTON else ["1/2"]
    elif ns.q is None and Family.parse(cfg.family) is Family.TWO_PHOTON:
        cfg.q = ["1/4", "3/4"]
    cfg.q = [str(as_bargmann(q)) if _is_q(q) else q for q in cfg.q]
    return cfg


def _is_q(q) -> bool:
    try:
        as_bargmann(q)
        return True
    except (ValueError, ZeroDivisionError):
        return False


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.command == "replay":
            try:
                echo, _, _ = read_table(ns.source)
            except (OSError, ValueError, KeyError, StopIteration) as exc:
                raise ConfigError(f"cannot read a config echo from {ns.source}: {exc}")
            cfg = RunConfig.from_echo(echo)
            cfg.out = ns.out
        else:
            cfg = config_from_args(ns)
        text = run_config(cfg)
    except ConfigError as exc:
        stderr.write(f"rabigf: config error: {exc}\n")
        return EXIT_CONFIG
    except NumericFailure as exc:
        stderr.write(f"rabigf: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (CouplingOutOfRange, InvalidSector, DeltaZero, NoSolution) as exc:
        stderr.write(f"rabigf: config error: {exc}\n")
        return EXIT_CONFIG
    except RabiError as exc:
        stderr.write(f"rabigf: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    write_output(text, cfg.out, stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
