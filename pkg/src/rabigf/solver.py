"""Pole-aware root finding on G±, regular spectra, coupling sweeps, collapse."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DeltaZero, GridResolutionExceeded, RabiError
from .gfunction import eval_G, pole_positions
from .model import (DEFAULT_CONTROLS, Controls, ModelParams, QLike, as_bargmann,
                    beta_of, check_sector, energy_from_x, x_from_energy)
from .recurrence import FamilyRecurrence

PARITY_LABEL = {1: "plus", -1: "minus"}
# G+ zeros are the P = +1 sector of the ED oracle (see tests/test_parity_map.py).
G_SIGN_TO_PARITY = {1: 1, -1: -1}

TOL_G_REL = 1e-9


@dataclass(frozen=True)
class SpectralPoint:
    x_root: float
    energy: float
    parity: int
    q: str
    classification: str
    residual: float
    bracket: tuple
    scale: float = 1.0

    @property
    def parity_label(self) -> str:
        return PARITY_LABEL[self.parity]


@dataclass(frozen=True)
class _Root:
    x: float
    residual: float
    bracket: tuple
    scale: float


def _is_pole(x: float) -> bool:
    return x >= 0 and float(x).is_integer()


def _guarded(x_lo: float, x_hi: float, guard: float) -> tuple[float, float]:
    lo, hi = x_lo, x_hi
    if _is_pole(x_lo):
        lo = x_lo + guard
        while lo - x_lo < guard:
            lo = math.nextafter(lo, math.inf)
    if _is_pole(x_hi):
        hi = x_hi - guard
        while x_hi - hi < guard:
            hi = math.nextafter(hi, -math.inf)
    if not lo < hi:
        raise ValueError(f"interval ({x_lo}, {x_hi}) is empty after the pole guard")
    return lo, hi


def _sign_changes(vals: Sequence[float]) -> list[int]:
    """Indices i with a sign change on [i, i+1] (an exact zero counts once)."""
    out = []
    for i in range(len(vals) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            if i == 0 or vals[i - 1] != 0.0:
                out.append(i)
        elif a * b < 0:
            out.append(i)
    if vals and vals[-1] == 0.0 and (len(vals) == 1 or vals[-2] != 0.0):
        out.append(len(vals) - 1)
    return out


def _local_minima(vals: Sequence[float]) -> list[int]:
    a = [abs(v) for v in vals]
    return [i for i in range(1, len(a) - 1)
            if a[i] <= a[i - 1] and a[i] <= a[i + 1] and vals[i - 1] * vals[i + 1] > 0]


def _refine(xs: list[float], cells: Iterable[int], factor: int) -> list[float]:
    extra = []
    for i in set(cells):
        if 0 <= i < len(xs) - 1:
            a, b = xs[i], xs[i + 1]
            extra.extend(a + (b - a) * k / factor for k in range(1, factor))
    return sorted(set(xs) | set(extra))


def _zeros(params: ModelParams, q: QLike, sign: int, x_lo: float, x_hi: float,
           controls: Controls, rec: FamilyRecurrence) -> list[_Root]:
    if pole_positions(x_lo, x_hi):
        raise ValueError(f"interval ({x_lo}, {x_hi}) contains a pole in its interior")
    lo, hi = _guarded(x_lo, x_hi, controls.pole_guard)

    def G(x):
        return eval_G(params, q, x, controls, rec).value(sign)

    xs = [float(v) for v in np.linspace(lo, hi, controls.grid_points)]
    vals = [G(x) for x in xs]
    changes = _sign_changes(vals)

    suspects = []
    if len(changes) > 2:
        suspects = range(len(xs) - 1)
    elif len(changes) == 0:
        suspects = [j for i in _local_minima(vals) for j in (i - 1, i)]
    if suspects:
        new_xs = _refine(xs, suspects, controls.refine_factor)
        known = dict(zip(xs, vals))
        vals = [known[x] if x in known else G(x) for x in new_xs]
        xs = new_xs
        changes = _sign_changes(vals)
        if len(changes) > 2:
            raise GridResolutionExceeded(
                f"{len(changes)} sign changes of G{'+' if sign > 0 else '-'} in "
                f"({x_lo}, {x_hi}) after refinement; at most two are expected",
                interval=(x_lo, x_hi))

    scale = max(abs(v) for v in vals)
    roots = []
    for i in changes:
        a, fa = xs[i], vals[i]
        if fa == 0.0:
            roots.append(_Root(a, 0.0, (a, a), scale))
            continue
        b = xs[i + 1]
        while b - a > controls.tol_x:
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            fm = G(m)
            if fm == 0.0:
                a = b = m
                break
            if (fm < 0) == (fa < 0):
                a, fa = m, fm
            else:
                b = m
        x = 0.5 * (a + b)
        roots.append(_Root(x, abs(G(x)), (a, b), scale))
    return roots


def find_zeros_in_interval(params: ModelParams, q: QLike, sign: int,
                           x_lo: float, x_hi: float,
                           controls: Controls = DEFAULT_CONTROLS) -> list[float]:
    """Roots of G_sign in (x_lo, x_hi); integer endpoints are treated as poles.

    Samples ``grid_points`` values, brackets sign changes and bisects each to
    ``tol_x``.  An empty interval whose samples dip towards zero, or one with
    more than two sign changes, gets one ``refine_factor``-fold refinement.
    """
    rec = FamilyRecurrence(params, q)
    return [r.x for r in _zeros(params, q, sign, x_lo, x_hi, controls, rec)]


def default_x_floor(params: ModelParams, q: QLike) -> float:
    return -(1.0 + params.delta) / beta_of(params) - 2.0 * float(as_bargmann(q))


def interval_edges(x_floor: float, x_max: float) -> list[float]:
    return [x_floor] + [float(n) for n in pole_positions(x_floor, x_max)] + [float(x_max)]


def regular_spectrum(params: ModelParams, q: QLike, sign: int, x_max: float,
                     controls: Controls = DEFAULT_CONTROLS,
                     ed_ground: Optional[float] = None) -> list[SpectralPoint]:
    """All zeros of G_sign between the ground-state floor and ``x_max``.

    ``ed_ground`` (an oracle ground energy for the sector) moves the scan floor
    down, with a warning, when it lies below the default floor.
    """
    if params.delta == 0:
        raise DeltaZero("delta = 0: regular spectrum is not defined by G-function zeros")
    if not x_max > 0:
        raise ValueError("x_max must be > 0")
    fq = check_sector(params.family, q)
    floor = controls.x_floor if controls.x_floor is not None else default_x_floor(params, fq)
    if ed_ground is not None:
        x_ed = x_from_energy(params, fq, ed_ground)
        if x_ed <= floor:
            warnings.warn(f"oracle ground state x={x_ed:.6g} lies below the scan floor "
                          f"{floor:.6g}; extending the scan", RuntimeWarning)
            floor = x_ed - 1.0
    rec = FamilyRecurrence(params, fq)
    edges = interval_edges(floor, x_max)
    points = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        try:
            roots = _zeros(params, fq, sign, lo, hi, controls, rec)
        except RabiError as exc:
            exc.interval = (lo, hi)
            exc.args = (f"{exc} [interval ({lo}, {hi}), q={fq}, sign={sign:+d}]",)
            raise
        for r in roots:
            points.append(SpectralPoint(
                x_root=r.x, energy=energy_from_x(params, fq, r.x),
                parity=G_SIGN_TO_PARITY[sign], q=str(fq), classification="regular",
                residual=r.residual, bracket=r.bracket, scale=r.scale))
    points.sort(key=lambda p: p.energy)
    return points


def interval_root_counts(params: ModelParams, q: QLike, sign: int, n_intervals: int,
                         controls: Controls = DEFAULT_CONTROLS) -> list[int]:
    """Number of zeros of G_sign in each inter-pole interval (n, n+1), n < n_intervals."""
    rec = FamilyRecurrence(params, q)
    return [len(_zeros(params, q, sign, float(n), float(n + 1), controls, rec))
            for n in range(n_intervals)]


def lowest_levels(params: ModelParams, q: QLike, sign: int, count: int,
                  controls: Controls = DEFAULT_CONTROLS) -> list[SpectralPoint]:
    """The ``count`` lowest regular levels of one parity."""
    x_max = float(count + 2)
    while True:
        pts = regular_spectrum(params, q, sign, x_max, controls)
        if len(pts) >= count:
            return pts[:count]
        x_max += count


# --------------------------------------------------------------------------
# sweeps

@dataclass
class SweepCell:
    g: float
    q: str
    parity: int
    levels: list
    status: str = "ok"
    message: str = ""


@dataclass
class SweepTable:
    g_grid: list
    cells: list
    meta: dict = field(default_factory=dict)

    def cell(self, g: float, q: QLike, parity: int) -> SweepCell:
        key = str(as_bargmann(q))
        for c in self.cells:
            if c.g == g and c.q == key and c.parity == parity:
                return c
        raise KeyError((g, key, parity))

    def rows(self) -> list[dict]:
        out = []
        for c in self.cells:
            if not c.levels:
                out.append(dict(g=c.g, q=c.q, parity=PARITY_LABEL[c.parity], level_index=None,
                                x_root=None, energy=None, classification=None,
                                residual=None, status=c.status, message=c.message))
            for i, p in enumerate(c.levels):
                out.append(dict(g=c.g, q=c.q, parity=PARITY_LABEL[c.parity], level_index=i,
                                x_root=p.x_root, energy=p.energy,
                                classification=p.classification, residual=p.residual,
                                status=c.status, message=c.message))
        return out


def _ed_fallback_levels(params: ModelParams, q, parity: int, x_max: float,
                        controls: Controls) -> list[SpectralPoint]:
    from .ed import ed_spectrum

    n_levels = int(math.floor(x_max)) + 1
    levels = ed_spectrum(params, q, parity, n_levels, controls)
    return [SpectralPoint(x_root=x_from_energy(params, q, lv.energy), energy=lv.energy,
                          parity=parity, q=str(as_bargmann(q)), classification="ed-fallback",
                          residual=float("nan"), bracket=(float("nan"), float("nan")))
            for lv in levels]


def _solve_cell(args) -> SweepCell:
    params, q, parity, x_max, controls, ed_fallback = args
    fq = str(as_bargmann(q))
    sign = parity
    try:
        levels = regular_spectrum(params, q, sign, x_max, controls)
        return SweepCell(params.g, fq, parity, levels)
    except DeltaZero as exc:
        if ed_fallback:
            return SweepCell(params.g, fq, parity,
                             _ed_fallback_levels(params, q, parity, x_max, controls),
                             status="delta_zero", message="ED fallback")
        return SweepCell(params.g, fq, parity, [], status="delta_zero", message=str(exc))
    except RabiError as exc:
        return SweepCell(params.g, fq, parity, [], status=type(exc).__name__,
                         message=str(exc))


def sweep_g(params_template: ModelParams, q_list: Sequence[QLike], g_grid: Sequence[float],
            x_max: float, controls: Controls = DEFAULT_CONTROLS,
            parities: Sequence[int] = (1, -1), workers: int = 1,
            ed_fallback: bool = True) -> SweepTable:
    """Regular spectra on a (g, q, parity) grid; one failed cell never aborts the sweep."""
    qs = [check_sector(params_template.family, q) for q in q_list]
    for g in g_grid:
        params_template.with_g(g).check_coupling()
    jobs = [(params_template.with_g(float(g)), q, p, x_max, controls, ed_fallback)
            for g in g_grid for q in qs for p in parities]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_solve_cell, jobs))
    else:
        cells = [_solve_cell(j) for j in jobs]
    cells.sort(key=lambda c: (c.g, as_bargmann(c.q), -c.parity))
    meta = dict(delta=params_template.delta, family=params_template.family.value,
                x_max=x_max, controls=controls)
    return SweepTable(g_grid=[float(g) for g in g_grid], cells=cells, meta=meta)


# --------------------------------------------------------------------------
# spectral collapse

@dataclass(frozen=True)
class CollapseResult:
    g: float
    q: str
    parity: int
    level_indices: tuple
    energies: tuple
    spacings: tuple
    two_beta: float
    ratios: tuple

    @property
    def mean_spacing(self) -> float:
        return float(np.mean(self.spacings))


def pole_spacing(params: ModelParams, q: QLike, n: int) -> float:
    """Energy distance between the poles at x = n and x = n + 1."""
    return energy_from_x(params, q, n + 1) - energy_from_x(params, q, n)


def collapse_spacing(params: ModelParams, q: QLike, g: float,
                     level_window: tuple[int, int], sign: int = 1,
                     controls: Controls = DEFAULT_CONTROLS) -> CollapseResult:
    """Adjacent spacings E_{n+1} - E_n for n in the inclusive window, and their
    ratio to the pole spacing F(g)."""
    start, stop = level_window
    if not 0 <= start < stop:
        raise ValueError("level_window must satisfy 0 <= start < stop")
    p = params.with_g(g)
    levels = lowest_levels(p, q, sign, stop + 1, controls)
    energies = [lv.energy for lv in levels[start:stop + 1]]
    spacings = [b - a for a, b in zip(energies[:-1], energies[1:])]
    two_beta = 2.0 * beta_of(p)
    return CollapseResult(g=g, q=str(as_bargmann(q)), parity=G_SIGN_TO_PARITY[sign],
                          level_indices=tuple(range(start, stop + 1)),
                          energies=tuple(energies), spacings=tuple(spacings),
                          two_beta=two_beta, ratios=tuple(s / two_beta for s in spacings))
