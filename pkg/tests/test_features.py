import math

import numpy as np
import pytest

from hashtag_dynamics.features import (FeatureTriple, compute_triple, in_excluded_region,
                                       min_peak_fraction, read_features, simplex_coordinates,
                                       ternary_xy, write_features)
from hashtag_dynamics.peaks import find_peak


def test_impulse_is_all_peak():
    counts = np.zeros(15)
    counts[7] = 100
    t = compute_triple(counts)
    assert t.as_tuple() == (0.0, 1.0, 0.0)


def test_hand_fractions():
    counts = np.array([1] * 7 + [6] + [0] * 7)
    t = compute_triple(counts)
    assert t.f_b == pytest.approx(7 / 13)
    assert t.f_p == pytest.approx(6 / 13)
    assert t.f_a == 0.0


def test_zero_window_rejected():
    with pytest.raises(ValueError):
        compute_triple(np.zeros(15))
    with pytest.raises(ValueError):
        compute_triple(np.ones(14))


@pytest.mark.parametrize("seed", range(20))
def test_sum_to_one(seed):
    counts = np.random.default_rng(seed).integers(0, 10_000, 15)
    counts[7] += 1
    t = compute_triple(counts)
    assert abs(sum(t.as_tuple()) - 1.0) <= 1e-12


def test_ternary_corners():
    assert ternary_xy(1, 0, 0) == (0.0, 0.0)
    assert ternary_xy(0, 0, 1) == (1.0, 0.0)
    x, y = ternary_xy(0, 1, 0)
    assert x == 0.5 and y == pytest.approx(math.sqrt(3) / 2)
    rows = simplex_coordinates([FeatureTriple("a", 0.2, 0.5, 0.3)])
    assert rows[0][4] == pytest.approx(0.55)


def test_excluded_region_bound():
    s = np.full(188, 10)
    s[100] = 250
    rec = find_peak(s)
    t = compute_triple(rec)
    # threshold 10 + 10 * 10 = 110 over a window total of 14 * 10 + 250
    assert min_peak_fraction(rec) == pytest.approx(110 / 390)
    assert not in_excluded_region(t, rec)
    assert in_excluded_region(FeatureTriple("x", 0.5, 0.2, 0.3), rec)


def test_roundtrip(tmp_path):
    ts = [FeatureTriple("a", 0.1, 0.7, 0.2), FeatureTriple("b", 1 / 3, 1 / 3, 1 / 3)]
    write_features(tmp_path / "f.csv", ts)
    assert read_features(tmp_path / "f.csv") == ts
