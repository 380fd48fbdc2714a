import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semireg import eval_map, parse_map
from semireg import preimage as pre
from semireg.dynamics import escape_radius
from semireg.errors import DegenerateTarget, Inconsistent
from semireg.preimage import (eliminator, equilibrium_sample, preimages, pushforward_tv, roots,
                              solve_preimages, topological_degree)


def _as_set(points, digits=8):
    return sorted((round(p[0].real, digits) + 0.0, round(p[0].imag, digits) + 0.0,
                   round(p[1].real, digits) + 0.0, round(p[1].imag, digits) + 0.0)
                  for p in points)


def test_roots_examples():
    r = roots([1, 0, -1])
    assert sorted(r.roots.real) == pytest.approx([-1, 1])
    r = roots([1] + [0] * 11 + [-1])
    assert r.count == 12
    np.testing.assert_allclose(np.abs(r.roots), 1, atol=1e-12)
    assert np.all(r.residuals < 1e-10)
    np.testing.assert_allclose(np.sort(np.angle(r.roots)) / (2 * np.pi / 12),
                               np.arange(-5, 7), atol=1e-9)
    r = roots([1, -4, 4])
    assert list(r.multiplicities) == [2] and r.roots[0] == pytest.approx(2)


@pytest.mark.parametrize("zs,mult", [
    ([1.5, 1.5, 1.5, -2], [1, 3]),
    ([1j] * 4, [4]),
    ([0.3 + 0.1j] * 5 + [1], [1, 5]),
    ([1j, 1j, 0.0039 + 1j], [1, 2]),
])
def test_high_multiplicity(zs, mult):
    # the computed copies of an s-fold root scatter by about eps**(1/s)
    r = roots(np.poly(zs))
    assert sorted(r.multiplicities) == mult
    assert np.all(r.residuals < 1e-10)
    for z in set(zs):
        assert np.min(np.abs(r.roots - z)) < 1e-8


@settings(max_examples=100, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=2, max_size=9))
def test_vieta(zs):
    coeffs = np.poly(zs)
    r = roots(coeffs)
    assert r.count == len(zs)
    x = r.expanded()
    scale = 1 + np.abs(coeffs).max()
    assert abs(x.sum() + coeffs[1]) <= 1e-8 * scale
    assert abs(np.prod(x) - (-1) ** len(zs) * coeffs[-1]) <= 1e-8 * scale


def test_preimage_examples(maps):
    pts = preimages(maps["F0"], (4, 4))
    assert _as_set(pts) == _as_set([(a, b) for a in (2, -2) for b in (2, -2)])
    pts = preimages(maps["F3"], (17, 16))
    assert len(pts) == 8
    expected = [(z1, z2) for z1 in (1, -1, 1j, -1j) for z2 in (4, -4)]
    assert _as_set(pts) == _as_set(expected)
    pts = preimages(maps["F2"], (4, 10))
    assert _as_set(pts) == _as_set([(2, 4), (-2, 6)])


def test_residual_contract(maps):
    rng = np.random.default_rng(21)
    for name, d in (("F0", 4), ("F1", 12), ("F2", 2), ("F3", 8)):
        for _ in range(10):
            w = 2 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            s = solve_preimages(maps[name], w)
            assert s.count == d
            res = np.abs(eval_map(maps[name], s.points) - w).max(axis=1)
            assert np.all(res <= 1e-8 * (1 + np.abs(w).max()))


def test_eliminated_degree(maps):
    assert eliminator(maps["F1"]).degree == 12


def test_multiplicity_at_a_critical_value(maps):
    # w = (0, 0) is a critical value of F0: the single preimage has multiplicity 4
    s = solve_preimages(maps["F0"], (0, 0))
    assert s.count == 4


@pytest.mark.parametrize("name,d", [("F1", 12), ("F3", 8), ("F0", 4), ("F2", 2)])
def test_topological_degree(maps, name, d):
    assert topological_degree(maps[name], trials=20, seed=7) == d


def test_degenerate_target():
    f = parse_map("z1*z2 - 1, z2")
    _, _, degenerate = eliminator(f).solve([[3, 0], [3, 2]])
    assert list(degenerate) == [True, False]
    with pytest.raises(DegenerateTarget):
        solve_preimages(f, (3, 0))


def test_inconsistent_counts(monkeypatch, maps):
    calls = iter(range(10 ** 6))

    class Fake:
        def __init__(self, c):
            self.count = c

    monkeypatch.setattr(pre, "solve_preimages", lambda f, w: Fake(4 + next(calls) % 2))
    with pytest.raises(Inconsistent):
        topological_degree(maps["F0"], trials=5, retries=0)


def test_torus_cloud(maps):
    cloud = equilibrium_sample(maps["F0"], 5000, burn_in=30, seed=1)
    assert len(cloud) == 5000
    near = np.all(np.abs(np.abs(cloud.points) - 1) <= 0.01, axis=1)
    assert near.mean() >= 0.99


def test_cloud_is_reproducible(maps):
    a = equilibrium_sample(maps["F2"], 2000, seed=5)
    b = equilibrium_sample(maps["F2"], 2000, seed=5)
    c = equilibrium_sample(maps["F2"], 2000, seed=6)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)
    assert a.map_hash == b.map_hash and (a.seed, a.burn_in) == (5, 30)
    assert np.all(np.isfinite(a.points))


def test_fast_map_cloud_stays_inside_escape_radius(maps):
    R0 = escape_radius(maps["F1"])
    cloud = equilibrium_sample(maps["F1"], 3000, seed=2)
    assert np.abs(cloud.points).max() <= R0


def test_pushforward_is_close(maps):
    cloud = equilibrium_sample(maps["F2"], 20000, seed=3)
    assert np.abs(cloud.points).max() < 10
    assert pushforward_tv(maps["F2"], cloud) < 0.05


def test_pushforward_detects_a_non_invariant_cloud(maps):
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, (20000, 2)) + 0j
    assert pushforward_tv(maps["F0"], pts) > 0.3
