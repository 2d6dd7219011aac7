import math
import warnings

import numpy as np
import pytest

from rabigf.ed import ed_spectrum
from rabigf.errors import DeltaZero, GridResolutionExceeded
from rabigf.gfunction import eval_G
from rabigf.model import Controls, ModelParams, energy_from_x
from rabigf.solver import (collapse_spacing, default_x_floor, find_zeros_in_interval,
                           interval_root_counts, lowest_levels, pole_spacing,
                           regular_spectrum, sweep_g)

P = ModelParams(0.35, 0.5)


def test_interval_counts_bounded():
    counts = [len(find_zeros_in_interval(P, "1/2", s, float(n), float(n + 1)))
              for s in (1, -1) for n in range(8)]
    assert set(counts) <= {0, 1, 2}


def test_decoupled_ground_interval():
    p = ModelParams(0.35, 1e-6)
    assert find_zeros_in_interval(p, "1/2", -1, -1.0, 0.0) == [pytest.approx(-0.175, abs=1e-5)]
    assert find_zeros_in_interval(p, "1/2", 1, -1.0, 0.0) == []


def test_decoupled_two_lowest_levels():
    p = ModelParams(0.35, 1e-6)
    levels = sorted(lv.energy for s in (1, -1) for lv in lowest_levels(p, "1/2", s, 1))
    assert levels == [pytest.approx(-0.35, abs=1e-5), pytest.approx(0.35, abs=1e-5)]


@pytest.mark.parametrize("g, q, tol", [(0.5, "1/2", 1e-8), (0.95, "2", 1e-6)])
def test_merged_spectrum_matches_ed(g, q, tol):
    p = ModelParams(0.35, g)
    for sign in (1, -1):
        roots = [lv.energy for lv in lowest_levels(p, q, sign, 8)]
        ed = [lv.energy for lv in ed_spectrum(p, q, sign, 8)]
        assert np.allclose(roots, ed, atol=tol, rtol=0)


@pytest.mark.parametrize("sign", [1, -1])
def test_oracle_equivalence_both_directions(sign):
    p = ModelParams(0.35, 0.7)
    x_max = 6.0
    pts = regular_spectrum(p, "3/2", sign, x_max)
    ed = [lv.energy for lv in ed_spectrum(p, "3/2", sign, 2 * len(pts) + 4)]
    for pt in pts:
        assert min(abs(e - pt.energy) for e in ed) < 1e-8
    edge = energy_from_x(p, "3/2", x_max) - 2 * math.sqrt(1 - 0.49)
    for e in ed:
        if e < edge:
            assert min(abs(e - pt.energy) for pt in pts) < 1e-8


def test_point_invariants():
    for sign in (1, -1):
        pts = regular_spectrum(P, "1", sign, 8.0)
        assert [p.energy for p in pts] == sorted(p.energy for p in pts)
        for pt in pts:
            lo, hi = pt.bracket
            assert lo <= pt.x_root <= hi
            assert abs(pt.x_root - round(pt.x_root)) >= Controls().pole_guard
            assert pt.energy == energy_from_x(P, "1", pt.x_root)
            assert pt.residual < 1e-9 * pt.scale
            assert abs(eval_G(P, "1", pt.x_root).value(sign)) == pytest.approx(pt.residual)
            assert pt.classification == "regular"
        xs = [p.x_root for p in pts]
        assert all(b - a > 10 * Controls().tol_x for a, b in zip(xs[:-1], xs[1:]))


@pytest.mark.parametrize("delta", [0.1, 0.35])
@pytest.mark.parametrize("sign", [1, -1])
def test_zero_count_pattern(delta, sign):
    counts = interval_root_counts(ModelParams(delta, 0.5), "1/2", sign, 15)
    assert set(counts) <= {0, 1, 2}
    for a, b in zip(counts[:-1], counts[1:]):
        assert not (a == 0 and b == 0)
        assert not (a == 2 and b == 2)


def _levels_near(p, energy, sign):
    lv = lowest_levels(p, "1/2", sign, 4)
    return min((x.energy for x in lv), key=lambda e: abs(e - energy))


def test_parity_crossing_swaps_at_exceptional_point():
    g_star = math.sqrt((1 - 0.35 ** 2 / 4) / 2)
    order = []
    for g in (g_star - 0.01, g_star + 0.01):
        p = ModelParams(0.35, g)
        e_exc = energy_from_x(p, "1/2", 1.0)
        order.append(_levels_near(p, e_exc, 1) < _levels_near(p, e_exc, -1))
    assert order[0] != order[1]


def test_ed_ground_extends_floor():
    floor = default_x_floor(P, "1/2")
    fake_ground = energy_from_x(P, "1/2", floor - 0.5)
    with pytest.warns(RuntimeWarning, match="below the scan floor"):
        pts = regular_spectrum(P, "1/2", 1, 3.0, ed_ground=fake_ground)
    assert pts == regular_spectrum(P, "1/2", 1, 3.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        regular_spectrum(P, "1/2", 1, 3.0, ed_ground=ed_spectrum(P, "1/2", 1, 1)[0].energy)


def test_regular_spectrum_errors():
    with pytest.raises(DeltaZero):
        regular_spectrum(ModelParams(0.0, 0.5), "1/2", 1, 3.0)
    with pytest.raises(ValueError):
        regular_spectrum(P, "1/2", 1, 0.0)


class _Wiggly:
    """Stand-in for a G evaluation with three zeros per unit interval."""

    def __init__(self, x):
        self.x = x

    def value(self, sign):
        return math.sin(3 * math.pi * (self.x + 0.1))


def test_too_many_sign_changes_reported(monkeypatch):
    import rabigf.solver as solver
    monkeypatch.setattr(solver, "eval_G", lambda p, q, x, c, r: _Wiggly(x))
    with pytest.raises(GridResolutionExceeded) as info:
        regular_spectrum(P, "1/2", 1, 3.0)
    floor = default_x_floor(P, "1/2")
    assert info.value.interval == (floor, 0.0)
    assert f"interval ({floor}, 0.0)" in str(info.value)


def test_sweep_deterministic_and_sorted():
    grid = [0.3, 0.6]
    a = sweep_g(ModelParams(0.35, 0.3), ["1/2", "1"], grid, 4.0)
    b = sweep_g(ModelParams(0.35, 0.3), ["1", "1/2"], grid[::-1], 4.0)
    assert a.rows() == b.rows()
    keys = [(c.g, float(eval(c.q.replace("/", "/1.0/")) if "/" in c.q else c.q), -c.parity)
            for c in a.cells]
    assert keys == sorted(keys)
    for c in a.cells:
        es = [p.energy for p in c.levels]
        assert es == sorted(es) and c.status == "ok"


def test_sweep_parallel_matches_serial():
    grid = [0.2, 0.4, 0.6]
    serial = sweep_g(ModelParams(0.35, 0.2), ["1/2"], grid, 3.0)
    parallel = sweep_g(ModelParams(0.35, 0.2), ["1/2"], grid, 3.0, workers=2)
    assert serial.rows() == parallel.rows()


def test_single_g_matches_sweep_column():
    table = sweep_g(ModelParams(0.35, 0.4), ["1"], [0.4, 0.8], 5.0)
    single = regular_spectrum(ModelParams(0.35, 0.8), "1", -1, 5.0)
    assert table.cell(0.8, "1", -1).levels == single


def test_sweep_records_cell_failures(monkeypatch):
    import rabigf.solver as solver
    monkeypatch.setattr(solver, "eval_G", lambda p, q, x, c, r: _Wiggly(x))
    table = sweep_g(ModelParams(0.35, 0.5), ["1/2"], [0.5], 3.0)
    assert all(c.status == "GridResolutionExceeded" for c in table.cells)
    assert all(r["level_index"] is None for r in table.rows())
    assert len(table.cells) == 2


def test_sweep_delta_zero_falls_back_to_ed():
    table = sweep_g(ModelParams(0.0, 0.5), ["1/2"], [0.5], 3.0)
    beta = math.sqrt(0.75)
    for c in table.cells:
        assert c.status == "delta_zero"
        got = [p.energy for p in c.levels]
        assert np.allclose(got, [2 * beta * (n + 0.5) - 1 for n in range(len(got))], atol=1e-9)
        assert all(p.classification == "ed-fallback" for p in c.levels)
    refused = sweep_g(ModelParams(0.0, 0.5), ["1/2"], [0.5], 3.0, ed_fallback=False)
    assert all(c.levels == [] and c.status == "delta_zero" for c in refused.cells)


def test_pole_spacing_is_two_beta():
    for g in (0.1, 0.5, 0.9, 0.99):
        p = ModelParams(0.35, g)
        for n in range(5):
            assert pole_spacing(p, "1/2", n) == pytest.approx(2 * math.sqrt(1 - g * g),
                                                                rel=4e-16, abs=4e-16 * (n + 2))


def test_collapse_monotone():
    means = [collapse_spacing(P, "1/2", g, (10, 20)).mean_spacing for g in (0.5, 0.9, 0.99)]
    assert means[0] > means[1] > means[2]
    res = collapse_spacing(P, "1/2", 0.99, (10, 20))
    assert len(res.spacings) == 10 and res.level_indices == tuple(range(10, 21))
    assert all(0.75 <= r <= 1.25 for r in res.ratios)


def test_collapse_window_validation():
    with pytest.raises(ValueError):
        collapse_spacing(P, "1/2", 0.5, (5, 5))
