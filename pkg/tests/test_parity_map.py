"""Regression: zeros of G+ are the parity +1 ED levels, zeros of G- the parity -1 ones."""
import numpy as np
import pytest

from rabigf.ed import ed_spectrum
from rabigf.model import ModelParams
from rabigf.solver import G_SIGN_TO_PARITY, lowest_levels


def test_label_table():
    assert G_SIGN_TO_PARITY == {1: 1, -1: -1}


@pytest.mark.parametrize("sign", [1, -1])
def test_zero_sets_match_same_parity(sign):
    p = ModelParams(0.35, 0.5)
    roots = np.array([lv.energy for lv in lowest_levels(p, "1/2", sign, 6)])
    same = np.array([lv.energy for lv in ed_spectrum(p, "1/2", sign, 6)])
    other = np.array([lv.energy for lv in ed_spectrum(p, "1/2", -sign, 6)])
    assert np.allclose(roots, same, atol=1e-8, rtol=0)
    assert not np.allclose(roots, other, atol=1e-3, rtol=0)
