"""Exceptional (doubly degenerate) eigenvalues from the pole-lifting condition.

At x = n the summands of G± with index > n share the factor f_n(n), so the
pole disappears from both G+ and G- exactly when f_n(n) = 0.  The level then
sits at E = F(g)(n + q) - offset in both parity sectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ed import ed_spectrum
from .errors import DeltaZero, LiftingFailed, NoSolution
from .gfunction import eval_G
from .model import (DEFAULT_CONTROLS, Controls, Family, ModelParams, QLike,
                    as_bargmann, beta_of, check_sector, energy_from_x)
from .recurrence import f_at_pole

LIFT_STEPS = (1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class ExceptionalPoint:
    n: int
    q: str
    g: float
    delta: float
    energy: float
    residual: float
    solved_for: str = "g"
    family: str = Family.TWO_MODE.value

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.delta, self.g, self.family)


def f_n_at_pole(params: ModelParams, q: QLike, n: int) -> float:
    """f_n(x) at x = n (f_0 = 1 normalization)."""
    return f_at_pole(params, q, n)[0]


def lifting_residual(params: ModelParams, q: QLike, n: int) -> float:
    """|f_n(n)| / max_{k<=n} |f_k(n)|, a scale-free measure of the condition."""
    val, scale = f_at_pole(params, q, n)
    return abs(val) / scale


def _scaled_condition(params: ModelParams, q: QLike, n: int) -> float:
    val, scale = f_at_pole(params, q, n)
    return val / scale


def _bisect(fun, a: float, b: float, fa: float, tol: float) -> float:
    while b - a > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = fun(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _scan_roots(fun, lo: float, hi: float, points: int, tol: float) -> list[float]:
    xs = np.linspace(lo, hi, points)
    vals = [fun(float(x)) for x in xs]
    roots = []
    for i in range(points - 1):
        a, b = float(xs[i]), float(xs[i + 1])
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(_bisect(fun, a, b, fa, tol))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots


def solve_exceptional_g(n: int, q: QLike, delta: float,
                        bracket: Optional[tuple[float, float]] = None,
                        tol: float = 1e-14, family=Family.TWO_MODE,
                        controls: Controls = DEFAULT_CONTROLS) -> list[ExceptionalPoint]:
    """Couplings g in ``bracket`` where f_n(n) = 0 at fixed Δ.

    Scans ``controls.exc_grid`` points and bisects every sign change to ``tol``.
    An empty list is a legitimate answer.
    """
    family = Family.parse(family)
    fq = check_sector(family, q)
    if delta <= 0:
        raise DeltaZero("the lifting condition needs delta > 0")
    gc = family.g_critical
    lo, hi = bracket if bracket is not None else (1e-3 * gc, (1 - 1e-6) * gc)
    if not 0 < lo < hi < gc:
        raise ValueError(f"bracket must lie inside (0, {gc}), got ({lo}, {hi})")

    def cond(g):
        return _scaled_condition(ModelParams(delta, g, family), fq, n)

    out = []
    for g in _scan_roots(cond, lo, hi, controls.exc_grid, tol):
        p = ModelParams(delta, g, family)
        out.append(ExceptionalPoint(n=n, q=str(fq), g=g, delta=delta,
                                    energy=energy_from_x(p, fq, float(n)),
                                    residual=lifting_residual(p, fq, n),
                                    solved_for="g", family=family.value))
    return out


def solve_exceptional_delta(n: int, q: QLike, g: float,
                            bracket: tuple[float, float] = (1e-6, 4.0),
                            tol: float = 1e-14, family=Family.TWO_MODE,
                            controls: Controls = DEFAULT_CONTROLS) -> list[ExceptionalPoint]:
    """Qubit splittings Δ in ``bracket`` where f_n(n) = 0 at fixed g."""
    family = Family.parse(family)
    fq = check_sector(family, q)
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError("delta bracket must satisfy 0 < lo < hi")
    ModelParams(1.0, g, family).check_coupling()

    def cond(d):
        return _scaled_condition(ModelParams(d, g, family), fq, n)

    out = []
    for d in _scan_roots(cond, lo, hi, controls.exc_grid, tol):
        p = ModelParams(d, g, family)
        out.append(ExceptionalPoint(n=n, q=str(fq), g=g, delta=d,
                                    energy=energy_from_x(p, fq, float(n)),
                                    residual=lifting_residual(p, fq, n),
                                    solved_for="delta", family=family.value))
    return out


def closed_form_n1(q: QLike, delta: float) -> float:
    """Coupling with (2q+1) g² + Δ²/4 - 1 = 0 (two-mode family)."""
    fq = float(check_sector(Family.TWO_MODE, q))
    if delta >= 2.0:
        raise NoSolution(f"no real coupling solves the n=1 condition for delta={delta}")
    return math.sqrt((1.0 - delta * delta / 4.0) / (2.0 * fq + 1.0))


def condition_n1(q: QLike, g: float, delta: float) -> float:
    return (2.0 * float(as_bargmann(q)) + 1.0) * g * g + delta * delta / 4.0 - 1.0


def condition_n2(q: QLike, g: float, delta: float) -> float:
    """Closed-form n = 2 lifting polynomial in (g², Δ²) for the two-mode model.

    Equals 16 g² q (2q+1) f_2(2), so its sign matches f_2(2) for g > 0.
    """
    qf = float(as_bargmann(q))
    b2 = 1.0 - g * g
    d2 = delta * delta
    return ((4 * qf * g * g - 6 * b2 + 4 + d2 / 2)
            * (4 * qf - 4 * b2 * (1 + qf) + d2 / 4) - 8 * g * g * qf)


@dataclass
class LiftingReport:
    n: int
    q: str
    params: ModelParams
    energy: float
    samples: dict = field(default_factory=dict)
    antisym_growth: dict = field(default_factory=dict)
    bounded: dict = field(default_factory=dict)
    ed_matches: dict = field(default_factory=dict)
    degeneracy: Optional[int] = None
    passed: bool = False


def _lifting_samples(params, fq, n, controls):
    samples = {}
    for h in LIFT_STEPS:
        left = eval_G(params, fq, n - h, controls)
        right = eval_G(params, fq, n + h, controls)
        samples[h] = {1: (left.value_plus, right.value_plus),
                      -1: (left.value_minus, right.value_minus)}
    return samples


def verify_lifting(params: ModelParams, q: QLike, n: int,
                   controls: Controls = DEFAULT_CONTROLS,
                   ed_check: bool = True, ed_tol: float = 1e-6) -> LiftingReport:
    """Check that the pole of G± at x = n is gone and ED shows a parity doublet.

    The antisymmetric part (G(n+h) - G(n-h))/2 behaves like R/h next to a pole
    with residue R and like G'(n) h when the pole is lifted, so its growth
    between h = 1e-2 and h = 1e-4 separates the two cases by four decades.
    """
    fq = check_sector(params.family, q)
    e_exc = energy_from_x(params, fq, float(n))
    report = LiftingReport(n=n, q=str(fq), params=params, energy=e_exc)
    report.samples = _lifting_samples(params, fq, n, controls)
    h_big, h_small = LIFT_STEPS[0], LIFT_STEPS[-1]
    for sign in (1, -1):
        big = abs(report.samples[h_big][sign][1] - report.samples[h_big][sign][0]) / 2
        small = abs(report.samples[h_small][sign][1] - report.samples[h_small][sign][0]) / 2
        growth = small / big if big > 0 else (0.0 if small == 0 else math.inf)
        report.antisym_growth[sign] = growth
        report.bounded[sign] = growth < 1.0
    if not all(report.bounded.values()):
        raise LiftingFailed(
            f"pole at x={n} is not lifted (antisymmetric growth G+: "
            f"{report.antisym_growth[1]:.3g}, G-: {report.antisym_growth[-1]:.3g})",
            diagnostics=dict(report=report))
    if ed_check:
        n_levels = 2 * n + 8
        merged = []
        for parity in (1, -1):
            levels = ed_spectrum(params, fq, parity, n_levels, controls)
            energies = [lv.energy for lv in levels]
            if energies[-1] < e_exc + ed_tol:
                raise LiftingFailed("ED window does not reach the exceptional energy",
                                    diagnostics=dict(report=report))
            near = [e for e in energies if abs(e - e_exc) < ed_tol]
            report.ed_matches[parity] = near
            merged.extend(near)
        report.degeneracy = len(merged)
        if not (len(report.ed_matches[1]) == 1 and len(report.ed_matches[-1]) == 1):
            raise LiftingFailed(
                f"ED does not show one level per parity at E={e_exc!r} "
                f"(found {report.ed_matches})", diagnostics=dict(report=report))
    report.passed = True
    return report


def exceptional_energy(params: ModelParams, q: QLike, n: int) -> float:
    """F(g)(n + q) - offset at the current coupling."""
    return 2.0 * beta_of(params) * (n + float(as_bargmann(q))) - params.family.energy_offset
