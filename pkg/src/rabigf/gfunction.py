"""G±(x) = Σ t_n [1 ± Δ/(F(g)(n - x))], both parities from one recurrence pass."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .model import DEFAULT_CONTROLS, Controls, ModelParams, QLike
from .recurrence import (CoefficientSequence, FamilyRecurrence, nearest_pole,
                         scaled_terms)


@dataclass(frozen=True)
class GEvaluation:
    x: float
    value_plus: float
    value_minus: float
    n_terms_used: int
    tail_estimate: float
    nearest_pole: int
    pole_distance: float

    def value(self, sign: int) -> float:
        return self.value_plus if sign > 0 else self.value_minus


def _tail_estimate(terms) -> float:
    """Geometric bound on the dropped tail from the last two summands."""
    last, before = abs(terms[-1]), abs(terms[-2]) if len(terms) > 1 else 0.0
    if last == 0.0:
        return 0.0
    r = last / before if before > 0 else 1.0
    r = min(r, 0.999)
    return last * r / (1.0 - r)


def sum_brackets(seq: CoefficientSequence, delta: float, F: float) -> tuple[float, float]:
    """Compensated sums of t_n [1 + c_n] and t_n [1 - c_n], c_n = Δ/(F(n-x))."""
    x = seq.x
    plus = []
    minus = []
    for n, t in enumerate(seq.terms):
        c = delta / (F * (n - x))
        plus.append(t * (1.0 + c))
        minus.append(t * (1.0 - c))
    return math.fsum(plus), math.fsum(minus)


def eval_G(params: ModelParams, q: QLike, x: float,
           controls: Controls = DEFAULT_CONTROLS,
           recurrence: Optional[FamilyRecurrence] = None) -> GEvaluation:
    rec = recurrence or FamilyRecurrence(params, q)
    seq = scaled_terms(params, q, x, controls, recurrence=rec)
    gp, gm = sum_brackets(seq, params.delta, rec.F)
    k = nearest_pole(x)
    return GEvaluation(x=x, value_plus=gp, value_minus=gm,
                       n_terms_used=len(seq.terms),
                       tail_estimate=_tail_estimate(seq.terms),
                       nearest_pole=k, pole_distance=abs(x - k))


def pole_positions(x_lo: float, x_hi: float) -> list[int]:
    """Nonnegative integers strictly inside (x_lo, x_hi)."""
    if not x_lo < x_hi:
        raise ValueError(f"need x_lo < x_hi, got ({x_lo}, {x_hi})")
    first = max(0, math.floor(x_lo) + 1)
    return [n for n in range(first, math.ceil(x_hi)) if x_lo < n < x_hi]
