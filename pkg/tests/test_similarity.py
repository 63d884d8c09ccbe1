from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imsindex import similarity as sim
from imsindex.interference import SinrPair

FX = np.array([0.05, 0.25, 0.7])
FY = np.array([0.1, 0.45, 0.45])
FZ = np.array([0.25, 0.2, 0.55])


def test_error_probs_from_pairs():
    pairs = [SinrPair(0.5, 2.0), SinrPair(2.0, 2.0), SinrPair(2.0, 0.5), SinrPair(0.5, 0.5)]
    s = sim.error_probs(pairs, 1.0)
    assert (s.p_fa, s.p_md, s.xi) == (0.5, 0.5, 0.5)
    assert sim.similarity_index(s).value == 0.5


def test_error_probs_validation():
    with pytest.raises(ValueError):
        sim.error_probs(([], []), 1.0)
    with pytest.raises(ValueError):
        sim.error_probs(([1.0], [1.0]), 0.0)


def test_undefined_conditionals_warn():
    with pytest.warns(UserWarning):
        s = sim.error_probs(([2.0, 3.0], [2.0, 3.0]), 1.0)
    assert s.p_md == 0.0 and not s.md_defined


def test_counts_merge():
    a = sim.OutageCounts.from_arrays([0.5, 2.0], [2.0, 2.0], 1.0)
    b = sim.OutageCounts.from_arrays([2.0], [0.5], 1.0)
    m = sim.merge([a, b])
    assert m == sim.OutageCounts(2, 1, 1, 1) and m.total == 3


@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10)), min_size=1, max_size=200), st.floats(0.1, 9.0))
def test_index_equals_agreement_frequency(pairs, beta):
    gx = np.array([p[0] for p in pairs])
    gy = np.array([p[1] for p in pairs])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s = sim.error_probs((gx, gy), beta)
    idx = sim.similarity_index(s).value
    assert idx == pytest.approx(sim.agreement_fraction(gx, gy, beta), abs=1e-12)
    assert 0.0 <= idx <= 1.0


def test_index_with_fixed_xi():
    s = sim.ErrorStats(0.1, 0.2, 0.7, 70, 30, 0.01, 0.02)
    r = sim.similarity_index(s, xi_override=0.5)
    assert r.value == pytest.approx(1 - 0.05 - 0.1)
    with pytest.raises(ValueError):
        sim.similarity_index(s, xi_override=1.5)


def test_distribution_distances_example():
    assert sim.euclidean_distance(FX, FY) == pytest.approx(0.324, abs=1e-3)
    assert sim.euclidean_distance(FX, FZ) == pytest.approx(0.255, abs=1e-3)
    assert sim.bhattacharyya(FX, FY)[1] == pytest.approx(0.033, abs=1e-3)
    assert sim.bhattacharyya(FX, FZ)[1] == pytest.approx(0.045, abs=1e-3)
    assert sim.kl_divergence(FX, FY) == pytest.approx(0.059, abs=1e-3)
    assert sim.kl_divergence(FX, FZ) == pytest.approx(0.098, abs=1e-3)


def test_kl_natural_log_and_support():
    nat = sim.kl_divergence(FX, FY, base=math.e)
    assert nat == pytest.approx(float(np.sum(FY * np.log(FY / FX))))
    with pytest.warns(UserWarning):
        assert sim.kl_divergence([0.5, 0.5, 0.0], [0.4, 0.4, 0.2]) == math.inf


def test_distances_reject_bad_input():
    with pytest.raises(ValueError):
        sim.bhattacharyya([0.5, 0.5], [1.0])
    with pytest.raises(ValueError):
        sim.bhattacharyya([0.5, 0.6], [0.5, 0.5])
    h1 = sim.sinr_histogram(np.array([1.0, 10.0]))
    h2 = sim.sinr_histogram(np.array([1.0, 10.0]), bins=10)
    with pytest.raises(ValueError):
        sim.bhattacharyya(h1, h2)


@st.composite
def pmf(draw, n=5):
    w = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n)))
    return w / w.sum()


@given(pmf(), pmf())
def test_distance_properties(a, b):
    rho, bd = sim.bhattacharyya(a, b)
    assert 0.0 <= rho <= 1.0 and bd >= 0.0
    assert sim.bhattacharyya(a, a)[1] == pytest.approx(0.0, abs=1e-12)
    assert sim.kl_divergence(a, b) >= 0.0
    assert sim.euclidean_distance(a, b) == pytest.approx(sim.euclidean_distance(b, a))


@given(st.floats(0, 1), st.floats(0, 1))
def test_bhattacharyya_bounds_are_ordered(xi, rho):
    lo, hi = sim.bhattacharyya_index_bounds(xi, rho)
    assert 0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0


def test_histogram_clips_into_edge_bins():
    h = sim.sinr_histogram(np.array([0.0, 1e-9, 1.0, 1e12]))
    assert h.mass.sum() == pytest.approx(1.0)
    assert h.mass[0] == pytest.approx(0.5) and h.mass[-1] == pytest.approx(0.25)
