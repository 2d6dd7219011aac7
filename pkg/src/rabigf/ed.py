"""Truncated exact diagonalization inside one (q, parity) sector.

Within a sector the spin is slaved to the boson label, σ_n = p(-1)^n, and the
Hamiltonian is a real symmetric tridiagonal matrix in the number basis:

two-mode    d_n = 2n + 2q - 1 + Δ p (-1)^n,   o_n = g sqrt((n+1)(n+2q))
two-photon  d_n = N_n + Δ p (-1)^n,            o_n = g sqrt((N_n+1)(N_n+2)),
            N_n = 2n (q = 1/4) or 2n + 1 (q = 3/4).

Eigenvalues come from Sturm-count bisection, which brackets every eigenvalue
and needs no dense workspace.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSector
from .model import (DEFAULT_CONTROLS, Controls, Family, ModelParams, QLike,
                    check_sector)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class TridiagonalMatrix:
    diag: np.ndarray
    offdiag: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        o = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or o.ndim != 1 or len(o) != max(len(d) - 1, 0):
            raise ValueError("need len(offdiag) == len(diag) - 1")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(o))):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", o)

    @property
    def N(self) -> int:
        """Truncation: the highest retained boson label."""
        return len(self.diag) - 1

    @property
    def size(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def _check_parity(parity: int) -> int:
    if parity not in (1, -1):
        raise InvalidSector(f"parity must be +1 or -1, got {parity!r}")
    return parity


def _check_g(params: ModelParams, allow_supercritical: bool) -> None:
    if not allow_supercritical:
        params.check_coupling()


def build_sector_matrix(params: ModelParams, q: QLike, parity: int, N: int,
                        allow_supercritical: bool = False) -> TridiagonalMatrix:
    if params.family is not Family.TWO_MODE:
        raise InvalidSector("build_sector_matrix is for the two-mode family; "
                            "use build_twophoton_matrix")
    if N < 1:
        raise ValueError("N must be >= 1")
    fq = check_sector(params.family, q)
    _check_parity(parity)
    _check_g(params, allow_supercritical)
    qf = float(fq)
    n = np.arange(N + 1, dtype=float)
    spin = parity * np.where(np.arange(N + 1) % 2 == 0, 1.0, -1.0)
    diag = 2.0 * n + 2.0 * qf - 1.0 + params.delta * spin
    m = n[:-1]
    off = params.g * np.sqrt((m + 1.0) * (m + 2.0 * qf))
    return TridiagonalMatrix(diag, off, dict(family=params.family.value, q=str(fq),
                                             parity=parity, delta=params.delta, g=params.g))


def build_twophoton_matrix(params: ModelParams, q: QLike, parity: int, N: int,
                           allow_supercritical: bool = False) -> TridiagonalMatrix:
    if params.family is not Family.TWO_PHOTON:
        raise InvalidSector("build_twophoton_matrix needs the two-photon family")
    if N < 1:
        raise ValueError("N must be >= 1")
    fq = check_sector(Family.TWO_PHOTON, q)
    _check_parity(parity)
    _check_g(params, allow_supercritical)
    shift = 0.0 if fq.numerator == 1 else 1.0
    idx = np.arange(N + 1)
    nph = 2.0 * idx + shift
    spin = parity * np.where(idx % 2 == 0, 1.0, -1.0)
    diag = nph + params.delta * spin
    m = nph[:-1]
    off = params.g * np.sqrt((m + 1.0) * (m + 2.0))
    return TridiagonalMatrix(diag, off, dict(family=params.family.value, q=str(fq),
                                             parity=parity, delta=params.delta, g=params.g))


def build_matrix(params: ModelParams, q: QLike, parity: int, N: int,
                 allow_supercritical: bool = False) -> TridiagonalMatrix:
    if params.family is Family.TWO_MODE:
        return build_sector_matrix(params, q, parity, N, allow_supercritical)
    return build_twophoton_matrix(params, q, parity, N, allow_supercritical)


def sturm_count(m: TridiagonalMatrix, lam) -> np.ndarray:
    """Number of eigenvalues strictly below each shift in ``lam``.

    Counts negative pivots of the LDLᵀ factorization of T - λ.  Exact zero
    pivots are nudged to -pivmin, as in LAPACK's dstebz.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    d = m.diag
    o2 = m.offdiag ** 2
    pivmin = np.finfo(float).tiny * max(1.0, float(o2.max()) if len(o2) else 1.0)
    piv = d[0] - lam
    piv[piv == 0.0] = -pivmin
    count = (piv < 0).astype(np.int64)
    for i in range(1, len(d)):
        piv = (d[i] - lam) - o2[i - 1] / piv
        piv[piv == 0.0] = -pivmin
        count += piv < 0
    return count


def gershgorin(m: TridiagonalMatrix) -> tuple[float, float]:
    r = np.zeros_like(m.diag)
    a = np.abs(m.offdiag)
    r[:-1] += a
    r[1:] += a
    return float(np.min(m.diag - r)), float(np.max(m.diag + r))


def eigenvalues_tridiagonal(m: TridiagonalMatrix, k: int) -> np.ndarray:
    """The k smallest eigenvalues in ascending order, by parallel bisection."""
    if not 1 <= k <= m.size:
        raise ValueError(f"k must lie in [1, {m.size}], got {k}")
    lo_b, hi_b = gershgorin(m)
    span = max(hi_b - lo_b, 1.0)
    lo_b -= 2 * _EPS * span
    hi_b += 2 * _EPS * span
    target = np.arange(k)
    lo = np.full(k, lo_b)
    hi = np.full(k, hi_b)
    for _ in range(200):
        width = hi - lo
        active = width > 2 * _EPS * np.maximum(np.maximum(np.abs(lo), np.abs(hi)), 1.0)
        if not active.any():
            break
        mid = 0.5 * (lo[active] + hi[active])
        c = sturm_count(m, mid)
        above = c > target[active]
        idx = np.flatnonzero(active)
        hi[idx[above]] = mid[above]
        lo[idx[~above]] = mid[~above]
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class EDLevel:
    energy: float
    truncation: int
    converged: bool


def _truncations(controls: Controls):
    N = controls.N0
    while N < controls.N_hard:
        yield N
        N *= 2
    yield controls.N_hard


def ed_spectrum(params: ModelParams, q: QLike, parity: int, n_levels: int,
                controls: Controls = DEFAULT_CONTROLS,
                allow_supercritical: bool = False) -> list[EDLevel]:
    """Lowest ``n_levels`` sector eigenvalues under truncation doubling.

    N doubles from ``controls.N0`` until successive truncations agree to
    ``tol_ed`` for every requested level, or ``N_hard`` is reached, in which
    case the unsettled levels come back with ``converged=False``.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    prev = None
    levels = None
    for N in _truncations(controls):
        N = max(N, n_levels)
        m = build_matrix(params, q, parity, N, allow_supercritical)
        ev = eigenvalues_tridiagonal(m, n_levels)
        if prev is not None:
            ok = np.abs(ev - prev) < controls.tol_ed
            levels = [EDLevel(float(e), N, bool(c)) for e, c in zip(ev, ok)]
            if ok.all():
                return levels
        prev = ev
    if levels is None:
        levels = [EDLevel(float(e), N, False) for e in prev]
    return levels
