import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rabigf.errors import CouplingOutOfRange, InvalidSector
from rabigf.model import (Family, ModelParams, Sector, as_bargmann, bogoliubov,
                          energy_from_x, x_from_energy)

TM = Family.TWO_MODE
TP = Family.TWO_PHOTON


def test_identity_at_zero_coupling():
    b = bogoliubov(ModelParams(0.35, 0.0))
    assert (b.beta, b.u, b.v, b.ratio) == (1.0, 1.0, 0.0, 0.0)


@pytest.mark.parametrize("g, beta", [(0.5, 0.8660254037844386), (0.95, 0.31224989991991997)])
def test_beta_two_mode(g, beta):
    assert bogoliubov(ModelParams(0.35, g)).beta == pytest.approx(beta, rel=1e-15)


def test_beta_two_photon():
    assert bogoliubov(ModelParams(0.35, 0.2, TP)).beta == pytest.approx(math.sqrt(0.84), rel=1e-15)


@pytest.mark.parametrize("family, g", [(TM, 1.0), (TM, 1.3), (TP, 0.5), (TP, 0.7)])
def test_critical_coupling_refused(family, g):
    with pytest.raises(CouplingOutOfRange):
        bogoliubov(ModelParams(0.35, g, family))


def test_negative_coupling_refused():
    with pytest.raises(CouplingOutOfRange):
        ModelParams(0.35, -0.1)


@given(st.floats(0.0, 0.9999), st.sampled_from([TM, TP]))
def test_bosonic_normalization(gfrac, family):
    p = ModelParams(0.35, gfrac * family.g_critical, family)
    b = bogoliubov(p)
    assert abs(b.u ** 2 - b.v ** 2 - 1.0) < 1e-12 * max(1.0, b.u ** 2)
    assert 0.0 <= b.ratio < 1.0
    # against the plain quotient of square roots, where v does not underflow
    if p.g > 1e-100:
        assert b.ratio == pytest.approx(b.v / b.u, rel=1e-12)


@pytest.mark.parametrize("family", [TM, TP])
def test_ratio_monotone(family):
    gs = [family.g_critical * k / 400 for k in range(400)]
    r = [bogoliubov(ModelParams(0.35, g, family)).ratio for g in gs]
    assert r[0] == 0.0
    assert all(b > a for a, b in zip(r, r[1:]))
    assert bogoliubov(ModelParams(0.35, family.g_critical * (1 - 1e-10), family)).ratio > 0.9999


def test_energy_examples():
    p = ModelParams(0.35, 0.5)
    assert energy_from_x(p, Fraction(1, 2), 0.0) == pytest.approx(-0.1339746, abs=1e-7)
    p0 = ModelParams(0.35, 0.0)
    assert energy_from_x(p0, "1/2", -0.175) == pytest.approx(-0.35, abs=1e-15)
    p95 = ModelParams(0.35, 0.95)
    assert energy_from_x(p95, 1, 3.0) == pytest.approx(1.4979992, abs=1e-7)


def test_x_from_energy_examples():
    p = ModelParams(0.35, 0.5)
    assert x_from_energy(p, "1/2", -0.1339746) == pytest.approx(0.0, abs=1e-7)
    beta = bogoliubov(p).beta
    assert x_from_energy(p, 2, 2 * beta * 2 - 1) == pytest.approx(0.0, abs=1e-14)
    tp = ModelParams(0.35, 0.2, TP)
    e = -0.5 + 2 * math.sqrt(1 - 0.16) * 0.25
    assert x_from_energy(tp, "1/4", e) == pytest.approx(0.0, abs=1e-15)


@given(st.floats(0.0, 0.999), st.floats(-5, 50), st.sampled_from(["1/2", "1", "3/2", "2", "7/2"]))
def test_energy_roundtrip(g, x, q):
    p = ModelParams(0.35, g)
    assert x_from_energy(p, q, energy_from_x(p, q, x)) == pytest.approx(x, abs=1e-12 * max(1, abs(x)))


def test_bargmann_is_exact_fraction():
    assert as_bargmann(0.25) == Fraction(1, 4)
    assert as_bargmann("3/2") == Fraction(3, 2)
    with pytest.raises(InvalidSector):
        as_bargmann(0.3)


@pytest.mark.parametrize("q, family, ok", [
    ("1/2", TM, True), ("1", TM, True), ("5/2", TM, True), ("1/4", TM, False),
    ("0", TM, False), ("-1/2", TM, False), ("1/4", TP, True), ("3/4", TP, True),
    ("1/2", TP, False)])
def test_sector_validation(q, family, ok):
    if ok:
        s = Sector(as_bargmann(q), 1, family)
        assert s.q == as_bargmann(q)
    else:
        with pytest.raises(InvalidSector):
            Sector(as_bargmann(q), 1, family)


def test_sector_parity_and_charge():
    assert Sector(Fraction(3, 2), -1).m == 2
    with pytest.raises(InvalidSector):
        Sector(Fraction(1, 2), 0)
