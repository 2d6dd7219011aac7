"""Three-term recurrences for the expansion coefficients f_n(x).

Both families obey

    f_{n+1} = A_n(x) f_n - B_n f_{n-1},   f_{-1} = 0,  f_0 = 1,

and the G-function summand carries the weight L_n(g).  The raw f_n over- or
underflow long before the series has converged (L_n contains factorials), so
the solver works with the products t_n = f_n L_n directly:

    t_{n+1} = a_n t_n - b_n t_{n-1},  a_n = A_n ρ_n,  b_n = B_n ρ_n ρ_{n-1},

with ρ_n = L_{n+1}/L_n.  After cancelling the 1/g of A_n against the v/u
inside ρ_n every factor is O(1), so g = 0 is the continuous limit instead
of 0 * inf.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import CouplingOutOfRange, DeltaZero, NoConvergence, PoleProximity
from .model import (DEFAULT_CONTROLS, Controls, Family, ModelParams, QLike,
                    bogoliubov, check_sector)

RAW_F_LIMIT = 30


def nearest_pole(x: float) -> int:
    """Nonnegative integer closest to x (poles sit at x = 0, 1, 2, ...)."""
    return max(0, int(math.floor(x + 0.5)))


def check_pole(x: float, guard: float, n_max: Optional[int] = None) -> None:
    k = nearest_pole(x)
    if n_max is not None and k > n_max:
        return
    if abs(x - k) < guard:
        raise PoleProximity(k, x, guard)


class FamilyRecurrence:
    """Step coefficients, L-weights and pole scale for one (params, q) pair."""

    def __init__(self, params: ModelParams, q: QLike):
        self.params = params
        self.q = check_sector(params.family, q)
        self.bog = bogoliubov(params)
        fam = params.family
        g = params.g
        qf = float(self.q)
        beta = self.bog.beta
        self.family = fam
        self.delta = params.delta
        self.beta = beta
        self.qf = qf
        self.kappa = 1.0 / (1.0 + beta)
        self.F = 2.0 * beta
        self._d2 = params.delta * params.delta / 4.0
        self._b2 = beta * beta
        if fam is Family.TWO_MODE:
            self._diag = 1.0 + g * g
            # w = v/u
            self.w = self.bog.ratio
            self.L0 = math.gamma(2 * qf)
        else:
            self._diag = 1.0 + 4.0 * g * g
            # w = v/(2u)
            self.w = self.bog.ratio / 2.0
            self.L0 = math.gamma(2 * qf + 0.5)

    def numerator(self, n: int, x: float) -> float:
        return (self._diag * (n + self.qf) - self._b2 * (self.qf + x)
                + self._d2 / (x - n))

    def _a_den(self, n: int) -> float:
        q = self.qf
        if self.family is Family.TWO_MODE:
            return (n + 1) * (n + 2 * q)
        return 4.0 * (n + q + 0.75) * (n + q + 0.25)

    def A(self, n: int, x: float) -> float:
        g = self.params.g
        if g == 0:
            raise CouplingOutOfRange("the unscaled recurrence needs g > 0")
        return self.numerator(n, x) / (g * self._a_den(n))

    def B(self, n: int) -> float:
        return 1.0 / self._a_den(n)

    def rho(self, n: int) -> float:
        """L_{n+1} / L_n."""
        q = self.qf
        if self.family is Family.TWO_MODE:
            return (n + 2 * q) * self.w
        return 4.0 * (n + q + 0.25) * (n + q + 0.75) / (n + 1) * self.w

    def L(self, n: int) -> float:
        """Direct L_n; only sensible for small n."""
        q = self.qf
        if self.family is Family.TWO_MODE:
            return math.gamma(n + 2 * q) * self.w ** n
        return math.gamma(2 * n + 2 * q + 0.5) / math.factorial(n) * self.w ** n

    def a(self, n: int, x: float) -> float:
        return self.numerator(n, x) * self.kappa / (n + 1)

    def b(self, n: int) -> float:
        if n == 0:
            return 0.0
        q = self.qf
        w2 = self.w * self.w
        if self.family is Family.TWO_MODE:
            return (n + 2 * q - 1) * w2 / (n + 1)
        return 4.0 * (n + q - 0.75) * (n + q - 0.25) * w2 / (n * (n + 1))


def _require_delta(params: ModelParams) -> None:
    if params.delta == 0:
        raise DeltaZero(
            "delta = 0: the G-function route is undefined; use the ED oracle "
            "(levels 2β(n+q) - offset, each doubly degenerate)")


def f_sequence(params: ModelParams, q: QLike, x: float, n_max: int,
               controls: Controls = DEFAULT_CONTROLS) -> list[float]:
    """Unscaled f_0..f_{n_max} by plain forward recurrence (f_0 = 1)."""
    _require_delta(params)
    rec = FamilyRecurrence(params, q)
    check_pole(x, controls.pole_guard, n_max)
    f = [1.0]
    prev = 0.0
    for n in range(n_max):
        nxt = rec.A(n, x) * f[n] - rec.B(n) * prev
        prev = f[n]
        f.append(nxt)
    return f


@dataclass(frozen=True)
class CoefficientSequence:
    x: float
    terms: tuple
    raw_f: Optional[tuple]
    n_max: int
    converged: bool
    min_pole_distance: float
    max_term: float


def scaled_terms(params: ModelParams, q: QLike, x: float,
                 controls: Controls = DEFAULT_CONTROLS,
                 retain_raw: bool = False,
                 recurrence: Optional[FamilyRecurrence] = None) -> CoefficientSequence:
    """Summands t_n = f_n L_n up to the point where the tail is negligible.

    Stops once ``tail_window`` consecutive |t_n| fall below
    ``eps_tail * max_k |t_k|``, but never before n has passed x (the terms
    grow while n < x).
    """
    _require_delta(params)
    rec = recurrence or FamilyRecurrence(params, q)
    check_pole(x, controls.pole_guard)
    eps = controls.eps_tail
    window = controls.tail_window
    n_floor = max(0, math.ceil(x)) + window
    t_prev, t_cur = 0.0, rec.L0
    terms = [t_cur]
    biggest = abs(t_cur)
    quiet = 0
    n = 0
    converged = False
    while n < controls.n_max_hard:
        t_next = rec.a(n, x) * t_cur - rec.b(n) * t_prev
        t_prev, t_cur = t_cur, t_next
        n += 1
        terms.append(t_cur)
        mag = abs(t_cur)
        if mag > biggest:
            biggest = mag
        if mag <= eps * biggest:
            quiet += 1
            if quiet >= window and n >= n_floor:
                converged = True
                break
        else:
            quiet = 0
    if not converged:
        raise NoConvergence(
            f"series at x={x!r} did not meet the tail criterion within "
            f"n_max_hard={controls.n_max_hard} terms")
    if not all(math.isfinite(t) for t in terms):
        raise NoConvergence(f"non-finite term in the series at x={x!r}")
    raw = None
    if retain_raw:
        nr = min(n, RAW_F_LIMIT)
        raw = tuple(f_sequence(params, q, x, nr, controls)) if params.g > 0 else None
    min_dist = abs(x - min(n, nearest_pole(x)))
    return CoefficientSequence(x=x, terms=tuple(terms), raw_f=raw, n_max=n,
                               converged=converged, min_pole_distance=min_dist,
                               max_term=biggest)


def e_from_f(params: ModelParams, q: QLike, x: float, f_n: float, n: int,
             controls: Controls = DEFAULT_CONTROLS) -> float:
    """Upper-spinor coefficient e_n = Δ f_n / (F(g) (n - x))."""
    rec = FamilyRecurrence(params, q)
    if abs(x - n) < controls.pole_guard:
        raise PoleProximity(n, x, controls.pole_guard)
    return params.delta * f_n / (rec.F * (n - x))


def f_at_pole(params: ModelParams, q: QLike, n: int) -> tuple[float, float]:
    """f_n evaluated exactly at x = n, plus max_{k<=n} |f_k(n)|.

    Only f_k with k <= n enter, and their pole terms Δ²/(4(x-j)) have j < n,
    so everything is finite.
    """
    _require_delta(params)
    if n < 1:
        raise ValueError("the pole-lifting condition starts at n = 1 (f_0 = 1)")
    rec = FamilyRecurrence(params, q)
    x = float(n)
    prev, cur = 0.0, 1.0
    scale = 1.0
    for k in range(n):
        prev, cur = cur, rec.A(k, x) * cur - rec.B(k) * prev
        scale = max(scale, abs(cur))
    return cur, scale


__all__ = [
    "CoefficientSequence", "FamilyRecurrence", "f_sequence", "scaled_terms",
    "e_from_f", "f_at_pole", "nearest_pole", "check_pole",
]
