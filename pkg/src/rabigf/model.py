"""Model parameters, symmetry sectors and the Bogoliubov quantities.

Two model families share one code path:

* ``Family.TWO_MODE``  -- H = Δσz + a1†a1 + a2†a2 + g(a1†a2† + a1a2)σx,
  critical coupling g = 1, β = sqrt(1 - g²).
* ``Family.TWO_PHOTON`` -- H = Δσz + a†a + g(a†² + a²)σx,
  critical coupling g = 1/2, β = sqrt(1 - 4g²).

The oscillator frequency is the unit of energy throughout.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from numbers import Real
from typing import Union

from .errors import CouplingOutOfRange, InvalidSector

QLike = Union[Fraction, int, float, str]


class Family(str, enum.Enum):
    TWO_MODE = "two-mode"
    TWO_PHOTON = "two-photon"

    @property
    def g_critical(self) -> float:
        return 1.0 if self is Family.TWO_MODE else 0.5

    @property
    def energy_offset(self) -> float:
        """Constant in E = F(g)(x + q) - offset."""
        return 1.0 if self is Family.TWO_MODE else 0.5

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"twomode": cls.TWO_MODE, "tm": cls.TWO_MODE,
                   "twophoton": cls.TWO_PHOTON, "2p": cls.TWO_PHOTON}
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class ModelParams:
    delta: float
    g: float
    family: Family = Family.TWO_MODE

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not (isinstance(self.delta, Real) and math.isfinite(self.delta)) or self.delta < 0:
            raise ValueError(f"delta must be finite and >= 0, got {self.delta!r}")
        if not (isinstance(self.g, Real) and math.isfinite(self.g)):
            raise CouplingOutOfRange(f"g must be finite, got {self.g!r}")
        if self.g < 0:
            raise CouplingOutOfRange(f"g must be >= 0, got {self.g!r}")

    @property
    def g_critical(self) -> float:
        return self.family.g_critical

    def with_g(self, g: float) -> "ModelParams":
        return replace(self, g=g)

    def with_delta(self, delta: float) -> "ModelParams":
        return replace(self, delta=delta)

    def check_coupling(self) -> None:
        """Raise unless 0 <= g < g_critical."""
        if self.g >= self.g_critical:
            raise CouplingOutOfRange(
                f"g={self.g!r} is at or beyond the critical coupling "
                f"{self.g_critical} of the {self.family.value} model; "
                "no normalizable states exist there")


def as_bargmann(q: QLike) -> Fraction:
    """Convert ``q`` to an exact quarter-integer Fraction.

    Floats are accepted only if they are exact multiples of 1/4.
    """
    if isinstance(q, Fraction):
        fq = q
    elif isinstance(q, str):
        fq = Fraction(q.strip())
    elif isinstance(q, float):
        fq = Fraction(q)
    else:
        fq = Fraction(q)
    if (fq * 4).denominator != 1:
        raise InvalidSector(f"Bargmann index must be a multiple of 1/4, got {q!r}")
    return fq


def check_sector(family: Family, q: QLike) -> Fraction:
    fq = as_bargmann(q)
    family = Family.parse(family)
    if family is Family.TWO_MODE:
        if fq <= 0 or (fq * 2).denominator != 1:
            raise InvalidSector(
                f"two-mode Bargmann index must be a positive multiple of 1/2, got {fq}")
    elif fq not in (Fraction(1, 4), Fraction(3, 4)):
        raise InvalidSector(f"two-photon Bargmann index must be 1/4 or 3/4, got {fq}")
    return fq


@dataclass(frozen=True)
class Sector:
    """Invariant subspace label: Bargmann index q and parity ±1."""

    q: Fraction
    parity: int
    family: Family = Family.TWO_MODE

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "q", check_sector(self.family, self.q))
        if self.parity not in (1, -1):
            raise InvalidSector(f"parity must be +1 or -1, got {self.parity!r}")

    @property
    def m(self) -> Fraction:
        """Eigenvalue 2q - 1 of the conserved charge (two-mode family)."""
        return 2 * self.q - 1


@dataclass(frozen=True)
class BogoliubovData:
    beta: float
    u: float
    v: float
    ratio: float


def _g_eff(params: ModelParams) -> float:
    return params.g if params.family is Family.TWO_MODE else 2.0 * params.g


def beta_of(params: ModelParams) -> float:
    """β = sqrt(1 - g_eff²) after validating the coupling range."""
    params.check_coupling()
    ge = _g_eff(params)
    return math.sqrt((1.0 - ge) * (1.0 + ge))


def bogoliubov(params: ModelParams) -> BogoliubovData:
    """Squeezing amplitudes u, v that remove the pair terms of the upper block.

    ``ratio`` is v/u, evaluated as g_eff/(1+β) which equals (1-β)/g_eff but
    stays exact at g = 0.
    """
    beta = beta_of(params)
    ge = _g_eff(params)
    one_minus_beta = ge * ge / (1.0 + beta)
    u = math.sqrt((1.0 + beta) / (2.0 * beta))
    v = math.sqrt(one_minus_beta / (2.0 * beta))
    return BogoliubovData(beta=beta, u=u, v=v, ratio=ge / (1.0 + beta))


def pole_scale(params: ModelParams) -> float:
    """F(g) = 2β: energy distance between neighbouring poles."""
    return 2.0 * beta_of(params)


def energy_from_x(params: ModelParams, q: QLike, x: float) -> float:
    check_sector(params.family, q)
    return 2.0 * beta_of(params) * (x + float(as_bargmann(q))) - params.family.energy_offset


def x_from_energy(params: ModelParams, q: QLike, energy: float) -> float:
    check_sector(params.family, q)
    return (energy + params.family.energy_offset) / (2.0 * beta_of(params)) - float(as_bargmann(q))


@dataclass(frozen=True)
class Controls:
    """Numeric knobs for every solver path; all have working defaults."""

    eps_tail: float = 1e-14
    tail_window: int = 4
    n_max_hard: int = 20000
    pole_guard: float = 1e-6
    grid_points: int = 64
    refine_factor: int = 4
    tol_x: float = 1e-12
    x_floor: float | None = None
    N0: int = 200
    N_hard: int = 8000
    tol_ed: float = 1e-10
    exc_grid: int = 512
    tol_exc: float = 1e-10

    def __post_init__(self):
        if self.eps_tail <= 0 or self.pole_guard <= 0 or self.tol_x <= 0:
            raise ValueError("eps_tail, pole_guard and tol_x must be positive")
        if self.tail_window < 1 or self.n_max_hard < 1:
            raise ValueError("tail_window and n_max_hard must be >= 1")
        if self.grid_points < 2 or self.refine_factor < 1:
            raise ValueError("grid_points must be >= 2 and refine_factor >= 1")
        if self.N0 < 1 or self.N_hard < self.N0:
            raise ValueError("need 1 <= N0 <= N_hard")

    def replace(self, **changes) -> "Controls":
        return replace(self, **changes)


DEFAULT_CONTROLS = Controls()
