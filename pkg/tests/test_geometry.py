from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from imsindex import geometry as g


def test_annulus_sector_area_and_contains():
    s = g.AnnulusSector(math.pi / 2, 1.0, 3.0)
    assert s.area == pytest.approx(0.5 * math.pi / 2 * 8.0)
    assert s.contains(2.0, 0.1)
    assert not s.contains(2.0, math.pi)
    assert not s.contains(3.5, 0.0)


@pytest.mark.parametrize("theta, r_in, r_out", [(0.0, 0, 1), (7.0, 0, 1), (1.0, 2, 1), (1.0, -1, 1)])
def test_annulus_sector_rejects_bad_shapes(theta, r_in, r_out):
    with pytest.raises(ValueError):
        g.AnnulusSector(theta, r_in, r_out)


def test_unbounded_region_cannot_be_sampled(rng):
    with pytest.raises(ValueError):
        g.sample_homogeneous_ppp(1e-3, g.AnnulusSector(1.0, 0.0, math.inf), rng)


def test_ppp_count_mean_and_uniform_radius(rng):
    region = g.AnnulusSector(math.pi, 5.0, 50.0)
    lam = 0.01
    counts = [len(g.sample_homogeneous_ppp(lam, region, rng)) for _ in range(4000)]
    mean = lam * region.area
    assert np.mean(counts) == pytest.approx(mean, abs=4 * math.sqrt(mean / 4000))
    f = g.sample_homogeneous_ppp(1.0, region, rng)
    assert np.all(region.contains(f.radius, f.azimuth))
    # radial CDF of a uniform annulus: (r^2 - r_in^2) / (r_out^2 - r_in^2)
    u = (f.radius**2 - 25.0) / (2500.0 - 25.0)
    assert abs(np.mean(u) - 0.5) < 0.02


def test_thinned_ppp_matches_thinned_measure(rng):
    kappa, lam, theta = 0.01, 2e-3, math.radians(40)
    region = g.AnnulusSector(theta, 0.0, 1500.0)
    n = [len(g.sample_thinned_ppp(lam, lambda r: np.exp(-kappa * r), region, rng)) for _ in range(3000)]
    expected = g.exp_thinned_measure(lam, theta, kappa, 0.0, 1500.0)
    assert np.mean(n) == pytest.approx(expected, abs=4 * math.sqrt(expected / 3000))


def test_thinning_rejects_bad_probabilities(rng):
    with pytest.raises(ValueError):
        g.sample_thinned_ppp(1.0, lambda r: 2.0 + 0 * r, g.disk(5.0), rng)


def test_exp_thinned_measure_reduces_to_area():
    assert g.exp_thinned_measure(0.5, 1.0, 0.0, 1.0, 3.0) == pytest.approx(0.5 * 0.5 * 8.0)
    # large kappa, numerical integral as oracle
    r = np.linspace(2.0, 400.0, 400001)
    f = 0.3 * 1.2 * np.exp(-0.05 * r) * r
    assert g.exp_thinned_measure(0.3, 1.2, 0.05, 2.0, 400.0) == pytest.approx(trapezoid(f, r), rel=1e-7)


@given(st.floats(0.0, 1.0), st.floats(0.0, 0.2), st.floats(0.0, 100.0), st.floats(1.0, 500.0))
def test_radial_inverse_cdf_stays_in_range(u, kappa, r_in, width):
    r = g.radial_inverse_cdf(u, r_in, r_in + width, kappa)
    assert r_in - 1e-9 <= float(r) <= r_in + width + 1e-9


def test_radial_inverse_cdf_distribution(rng):
    kappa, lo, hi = 0.02, 10.0, 300.0
    r = g.radial_inverse_cdf(rng.random(200_000), lo, hi, kappa)
    grid = np.linspace(lo, hi, 200001)
    w = grid * np.exp(-kappa * grid)
    mean = trapezoid(grid * w, grid) / trapezoid(w, grid)
    assert r.mean() == pytest.approx(mean, rel=3e-3)


def test_ppp_batch_layout(rng):
    counts, idx, radius, az = g.sample_ppp_batch(3.0, 500, rng, 1.0, 10.0, 0.0, 1.0)
    assert counts.sum() == idx.size == radius.size == az.size
    assert np.all(np.diff(idx) >= 0)
    assert np.all(np.bincount(idx, minlength=500) == counts)
    assert np.all(np.abs(az) <= 0.5)


def test_los_probability(rng):
    d = np.full(100_000, 50.0)
    assert g.los_draws(d, 0.01, rng).mean() == pytest.approx(math.exp(-0.5), abs=0.005)
    with pytest.raises(ValueError):
        g.bernoulli_los(-1.0, 0.01, rng)


def test_segment_hits_axis_aligned_rect():
    # unit square at the origin
    assert g.segment_hits_rect(-2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0)
    assert not g.segment_hits_rect(-2.0, 1.0, 2.0, 1.0, 0.0, 0.0, 0.5, 0.5, 0.0)
    # touching a corner counts as a hit (closed sets)
    assert g.segment_hits_rect(-1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.5, 0.5, 0.0)
    # segment ending before the rectangle
    assert not g.segment_hits_rect(-3.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0)


def test_segment_hits_rotated_rect():
    # a thin 45-degree bar crossing the x axis at 0; a horizontal segment at y = 0.6 misses it
    bar = (0.0, 0.0, 0.05, 0.5, math.pi / 4)
    assert g.segment_hits_rect(-1.0, 0.0, 1.0, 0.0, *bar)
    assert not g.segment_hits_rect(-1.0, 0.6, 1.0, 0.6, *bar)


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-20, 20), st.floats(-20, 20),
       st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0, 2 * math.pi))
def test_segment_test_agrees_with_dense_sampling(x0, y0, x1, y1, hw, hl, ori):
    hit = g.segment_hits_rect(x0, y0, x1, y1, 1.0, -1.0, hw, hl, ori)
    t = np.linspace(0.0, 1.0, 4001)
    px, py = x0 + t * (x1 - x0) - 1.0, y0 + t * (y1 - y0) + 1.0
    c, s = math.cos(ori), math.sin(ori)
    lx, ly = px * c + py * s, -px * s + py * c
    inside = (np.abs(lx) <= hw) & (np.abs(ly) <= hl)
    if inside.any():
        assert hit
    # a miss by the slab test means the sampled points stay outside
    if not hit:
        assert not inside.any()


def test_count_blockers():
    obs = [g.Obstacle((5.0, 0.0), 1.0, 1.0, 0.0), g.Obstacle((8.0, 0.2), 2.0, 1.0, 0.3),
           g.Obstacle((5.0, 5.0), 1.0, 1.0, 0.0)]
    assert g.count_blockers((0.0, 0.0), (10.0, 0.0), obs) == 2
    assert g.count_blockers((0.0, 0.0), (10.0, 0.0), []) == 0
    with pytest.raises(ValueError):
        g.count_blockers((1.0, 1.0), (1.0, 1.0), obs)


def test_obstacle_sampling_ranges(rng):
    arr = g.sample_obstacle_arrays(1 / 400, g.disk(200.0), 0.1, rng)
    assert len(arr) > 0
    assert np.all(arr.half_w <= 2.0) and np.all(arr.half_l <= 1.5)
    with pytest.raises(ValueError):
        g.Obstacle((0.0, 0.0), 5.0, 1.0, 0.0)


def test_polar_round_trip():
    r, a = np.array([1.0, 2.0, 3.0]), np.array([0.1, -2.0, 3.0])
    r2, a2 = g.cartesian_to_polar(g.polar_to_cartesian(r, a))
    assert np.allclose(r, r2) and np.allclose(a, a2)
