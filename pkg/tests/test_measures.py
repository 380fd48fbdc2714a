import math

import numpy as np
import pytest

from semireg.errors import InsufficientSamples, MalformedInput, MBelowOne, TooManyIndeterminate
from semireg.measures import (GreenField, SliceSpec, dimension_report, green_field,
                              holder_diagnostic, laplacian_density, lyapunov_norm)
from semireg.preimage import equilibrium_sample


def _spec(n=64, width=4.0, z2=0.5):
    return SliceSpec(0, 0j, width, width, n, n, ((1, z2),))


def test_slice_validation():
    with pytest.raises(MalformedInput):
        SliceSpec(0, 0j, 1, 1, 1, 5)
    with pytest.raises(MalformedInput):
        SliceSpec(0, 0j, 0, 1, 4, 4)
    with pytest.raises(MalformedInput):
        SliceSpec(2, 0j, 1, 1, 4, 4).points(2)
    with pytest.raises(MalformedInput):
        SliceSpec(0, 0j, 1, 1, 4, 4, ((0, 1),)).points(2)


def test_small_grid_layout():
    s = SliceSpec(0, 1 + 1j, 2, 2, 2, 2, ((1, 3j),))
    P = s.points(2)
    np.testing.assert_allclose(P[:, 0], [2j, 2 + 2j, 0, 2])
    np.testing.assert_allclose(P[:, 1], 3j)
    assert s.spacing == (2.0, 2.0)


def test_square_map_field_is_log_plus(maps, reports):
    spec = _spec()
    g = green_field(maps["F0"], reports["F0"], 1, spec)
    X, Y = np.meshgrid(spec.xs, spec.ys)
    expected = np.maximum(np.log(np.abs(X + 1j * Y)), 0)
    np.testing.assert_allclose(g.values, expected, atol=1e-8)


def test_fast_map_field(maps, reports):
    spec = SliceSpec(0, 0j, 3, 3, 48, 48, ((1, 0.7 + 0.2j),))
    g = green_field(maps["F1"], reports["F1"], 1, spec)
    assert g.indeterminate == 0
    assert np.all(np.isfinite(g.values) | np.isinf(g.values))
    assert (g.values == 0).any() and (g.values > 0).any()
    assert np.all(g.values >= 0)


def test_density_of_a_harmonic_field_vanishes():
    spec = _spec(16)
    X, Y = np.meshgrid(spec.xs, spec.ys)
    for vals in (np.full((16, 16), 3.0), 2 * X - Y + 1):
        d = laplacian_density(GreenField(spec, vals, 1))
        np.testing.assert_allclose(d.values[1:-1, 1:-1], 0, atol=1e-9)
        assert d.masked == 4 * 15


def test_square_map_density_lives_on_the_circle(maps, reports):
    spec = _spec(128, width=3.0)
    d = laplacian_density(green_field(maps["F0"], reports["F0"], 1, spec))
    X, Y = np.meshgrid(spec.xs, spec.ys)
    r = np.abs(X + 1j * Y)
    h = spec.spacing[0]
    v = np.nan_to_num(d.values)
    off = np.abs(r - 1) > 2 * h
    # away from the circle only the O(h^2) truncation error of log|z| remains
    assert v[off].max() < 1e-4 * v.max()
    # dd^c log+|z| is the normalized arc length on the unit circle
    assert d.mass == pytest.approx(1.0, rel=0.05)


def test_negative_mass_shrinks_with_resolution(maps, reports):
    neg = []
    for n in (64, 128, 256):
        spec = SliceSpec(0, 0j, 3, 3, n, n, ((1, 0.5),))
        d = laplacian_density(green_field(maps["F0"], reports["F0"], 1, spec))
        assert d.min_raw < 0 and d.mass == pytest.approx(1, rel=1e-3)
        neg.append(d.negative_mass)
    assert neg[1] <= neg[0] / 2 and neg[2] <= neg[1] / 2


def test_fast_map_density_sits_next_to_the_filled_set(maps, reports):
    # K_1 meets the slice in a thin set that pixels mostly miss, so the
    # boundary is located through small values of G rather than labels
    spec = SliceSpec(0, 0j, 3, 3, 128, 128, ((1, 0.7 + 0.2j),))
    field = green_field(maps["F1"], reports["F1"], 1, spec)
    d = laplacian_density(field)
    G, v = field.values, np.nan_to_num(d.values)
    near = G <= 0.1
    assert near.mean() < 0.5
    assert v[near].sum() >= 0.99 * v.sum()
    assert d.mass == pytest.approx(1, abs=0.1)


def test_density_refuses_indeterminate_fields():
    spec = _spec(10)
    vals = np.zeros((10, 10))
    vals[:2] = np.nan
    with pytest.raises(TooManyIndeterminate):
        laplacian_density(GreenField(spec, vals, 1))


@pytest.fixture(scope="module")
def torus(maps):
    return equilibrium_sample(maps["F0"], 2000, seed=4)


def test_lyapunov_on_the_torus(maps, torus):
    assert lyapunov_norm(maps["F0"], torus, n=20) == pytest.approx(2, abs=0.05)


def test_lyapunov_ignores_order(maps):
    cloud = equilibrium_sample(maps["F1"], 500, seed=8).points
    a = lyapunov_norm(maps["F1"], cloud, n=10)
    b = lyapunov_norm(maps["F1"], cloud[::-1], n=10)
    assert a == b


def test_lyapunov_non_decreasing_in_n(maps, torus):
    a = lyapunov_norm(maps["F0"], torus, n=10)
    b = lyapunov_norm(maps["F0"], torus, n=20)
    assert b >= a * (1 - 0.02)


def test_lyapunov_lower_bound_for_the_triangular_map(maps):
    cloud = equilibrium_sample(maps["F2"], 1000, seed=9)
    assert lyapunov_norm(maps["F2"], cloud, n=20) >= 2 - 0.05


def test_lyapunov_needs_ten_steps(maps, torus):
    with pytest.raises(MalformedInput):
        lyapunov_norm(maps["F0"], torus, n=9)


def test_dimension_report_square_map(reports):
    r = dimension_report(reports["F0"], 2.0)
    assert r.a_bounds == (1.0,)
    assert r.mu_bound == pytest.approx(2.0, abs=1e-12)


def test_dimension_report_two_blocks(reports):
    M = 6.5
    r = dimension_report(reports["F1"], M)
    assert r.a_bounds == pytest.approx((math.log(6) / math.log(M), math.log(2) / math.log(M)))
    assert r.mu_bound == pytest.approx(math.log(12) / math.log(M), rel=1e-12)
    assert r.identity_residual <= 1e-9
    assert list(r.to_dict()) == ["M_hat", "a_bounds", "mu_bound", "identity_residual",
                                 "block_sizes", "samples", "n"]


def test_dimension_report_rejects_small_growth(reports):
    with pytest.raises(MBelowOne):
        dimension_report(reports["F0"], 1 + 1e-12)
    with pytest.raises(MBelowOne):
        dimension_report(reports["F0"], 0.5)


def test_holder_slope_near_the_torus(maps, reports, torus):
    fit = holder_diagnostic(maps["F0"], reports["F0"], 1, torus, n_samples=1500, seed=2)
    assert fit.samples > 100
    assert fit.ci[0] < fit.slope < fit.ci[1]
    assert fit.slope == pytest.approx(1.0, abs=0.15)


def test_holder_needs_a_cloud(maps, reports):
    with pytest.raises(InsufficientSamples):
        holder_diagnostic(maps["F0"], reports["F0"], 1, np.zeros((0, 2), complex))


def test_lyapunov_drops_orbits_that_drift_off_K(maps):
    # rounding pushes some forward orbits of the cloud into the basin of infinity
    cloud = equilibrium_sample(maps["F1"], 20_000, seed=1)
    M = lyapunov_norm(maps["F1"], cloud, n=20)
    assert np.isfinite(M) and M >= 6 * (1 - 0.05)
    with pytest.raises(InsufficientSamples):
        lyapunov_norm(maps["F0"], np.full((5, 2), 3 + 0j), n=10)
