import math

import numpy as np
import pytest

from semireg import ScaledPoint, eval_map
from semireg.dynamics import (OrbitBatch, OrbitParams, classify, classify_batch, escape_degree,
                              green, green_points, increment_ratios, invariance_residual,
                              iterate, lojasiewicz_estimate, precise_ells)
from semireg.errors import MalformedInput, TooShort

# lim ell_n / 6^n for F1, from direct 300-bit iteration of the map (25 steps)
F1_GREEN_1 = {
    (10, 0): 2.302585092994045684,
    (2, 1): 0.69052245333187877038,
    (1.5, 0.3 + 0.2j): 0.40563716584329683507,
}


def test_params_validation():
    with pytest.raises(MalformedInput):
        OrbitParams(escape_ell=5.0, bound_ell=10.0)
    with pytest.raises(MalformedInput):
        OrbitParams(max_n=10, window=50)


def test_monomial_orbit_doubles_ell(maps):
    rec = iterate(maps["F0"], (2, 0.5))
    assert rec.status == "Escaped"
    assert len(rec.ells) == rec.steps + 1
    for n, ell in enumerate(rec.ells):
        assert ell == pytest.approx(2 ** n * math.log(2), rel=1e-13)
    assert rec.ells[-1] > 1e4
    assert escape_degree(rec) == pytest.approx(2, abs=1e-9)


def test_bounded_orbit(maps):
    rec = iterate(maps["F0"], (0.5, 0.5))
    assert rec.status == "Bounded"
    assert escape_degree(rec) == 0


def test_additive_escape(maps):
    rec = iterate(maps["F2"], (0, 4))
    assert rec.status == "Escaped"
    inc = np.diff(rec.ells[-10:])
    np.testing.assert_allclose(inc, math.log(2), rtol=1e-3)
    assert escape_degree(rec) == pytest.approx(1, abs=0.01)


def test_fast_escape_rate(maps):
    assert escape_degree(iterate(maps["F1"], (10, 0))) == pytest.approx(6, rel=1e-6)


def test_escape_degree_needs_a_tail(maps):
    rec = iterate(maps["F0"], (2, 0.5))
    rec.ells = rec.ells[:3]
    with pytest.raises(TooShort):
        escape_degree(rec)


def test_cancellation_start_reruns_at_higher_precision(maps):
    # (t^2, t^3) lies on z1^3 = z2^2 where the top-degree part of P1 cancels
    rec = iterate(maps["F1"], (1e10, 1e15))
    assert rec.precision > 53
    assert rec.status == "Escaped"
    assert escape_degree(rec) == pytest.approx(6, rel=1e-3)


def test_classify_examples(maps, reports):
    assert classify(maps["F1"], reports["F1"], (10, 0)) == "U1"
    assert classify(maps["F0"], reports["F0"], (0.5, 0.5)) == "K"
    assert classify(maps["F2"], reports["F2"], (0, 4)) == "U2"


def test_green_examples(maps, reports):
    g = green(maps["F0"], reports["F0"], 1, (2, 1))
    assert g.status == "finite" and g.value == pytest.approx(math.log(2), abs=1e-9)
    g = green(maps["F1"], reports["F1"], 2, (10, 0))
    assert g.status == "infinite" and g.value == math.inf
    for z, expected in F1_GREEN_1.items():
        g = green(maps["F1"], reports["F1"], 1, z)
        assert g.status == "finite"
        assert g.value == pytest.approx(expected, rel=1e-12)
        assert g.residual <= 1e-12 * max(1, g.value)


def test_green_of_linear_second_component(maps, reports):
    # orbits of (z1^2, z1 + 2 z2) with |z1| > 1 grow like |z1|^(2^n)
    g = green(maps["F2"], reports["F2"], 1, (3, 5))
    assert g.value == pytest.approx(math.log(3), rel=1e-12)


def test_green_zero_on_bounded_and_slower_points(maps, reports):
    assert green(maps["F0"], reports["F0"], 1, (0.5, 0.9)).value == 0
    assert green(maps["F2"], reports["F2"], 1, (0, 4)).value == 0


def _random_points(rng, n, scale):
    return scale * (rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2)))


def test_invariance_residuals(maps, reports):
    rng = np.random.default_rng(8)
    r, used = invariance_residual(maps["F0"], reports["F0"], 1, _random_points(rng, 100, 1.5))
    assert used > 50 and r < 1e-9
    pts = _random_points(rng, 300, 1.5)
    esc = classify_batch(maps["F1"], reports["F1"], pts).labels == 1
    r, used = invariance_residual(maps["F1"], reports["F1"], 1, pts[esc][:100])
    assert used >= 90 and r < 1e-6
    r, used = invariance_residual(maps["F2"], reports["F2"], 1, _random_points(rng, 100, 1.5))
    assert used > 50 and r < 1e-6


def test_green_is_nonnegative_and_zero_exactly_on_K(maps, reports):
    rng = np.random.default_rng(9)
    for name in ("F0", "F1", "F3"):
        pts = _random_points(rng, 400, 0.8)
        g = green_points(maps[name], reports[name], 1, pts)
        labels = classify_batch(maps[name], reports[name], pts).labels
        ok = np.isfinite(g.value)
        assert np.all(g.value[ok] >= 0)
        assert np.all(np.abs(g.value[labels == 0]) <= 1e-8)
        assert np.all(g.value[labels == 1] > 1e-8)


def test_increment_contraction_in_U1(maps, reports):
    rng = np.random.default_rng(10)
    pts = _random_points(rng, 200, 1.0)
    labels = classify_batch(maps["F1"], reports["F1"], pts).labels
    ratios = []
    for z in pts[labels == 1][:50]:
        ells = precise_ells(maps["F1"], z, 8, bits=1024)
        ratios += increment_ratios(ells, 6, noise=2.0 ** -1000, tail_ell=math.log(1e6), bits=1024)
    assert len(ratios) > 10
    assert max(ratios) <= 1.1 / 6


def test_double_precision_increments_hit_the_rounding_floor(maps):
    # in double precision the tail increments vanish below the noise floor
    ells = iterate(maps["F1"], (1.5, 0.2)).ells
    assert increment_ratios(ells, 6.0, tail_ell=math.log(1e6)) == []


def test_growth_window(maps, reports):
    # along the tail, log|f(z)| / log|z| approaches the basin's alpha
    rng = np.random.default_rng(12)
    for name, alpha in (("F1", 6.0), ("F0", 2.0), ("F3", 4.0)):
        for z in _random_points(rng, 20, 2.0):
            ells = iterate(maps[name], z).ells
            tail = [(b / a) for a, b in zip(ells, ells[1:]) if a > 20]
            assert tail and all(abs(t / alpha - 1) <= 0.1 for t in tail)


@pytest.mark.parametrize("name", ["F0", "F3"])
def test_green_minus_log_norm_is_bounded_for_regular_maps(maps, reports, name):
    # follow the same directions out to |z| = e^100: the difference settles
    rng = np.random.default_rng(13)
    u = _random_points(rng, 200, 1.0)
    u /= np.abs(u).max(axis=1)[:, None]
    diffs = []
    for ell in (10.0, 50.0, 100.0):
        g = green_points(maps[name], reports[name], 1, u * math.exp(ell))
        assert np.all(g.status == "finite")
        diffs.append(g.value - ell)
    C = np.abs(diffs[0]).max()
    assert C < 5
    assert np.abs(diffs[2]).max() <= C + 1e-6
    np.testing.assert_allclose(diffs[2], diffs[1], atol=1e-9)


def test_green_minus_log_norm_grows_along_the_cancellation_curve(maps, reports):
    # F1 is only pi-regular: on z1^3 = z2^2 the orbit loses a factor in the
    # first step, so G_1 / log|z| settles well below 1
    ratios = []
    for t in (1e5, 1e10, 1e20):
        g = green(maps["F1"], reports["F1"], 1, (t ** 2, t ** 3)).value
        ratios.append(g / math.log(t ** 3))
    assert all(0.4 < r < 0.8 for r in ratios)
    gaps = [math.log(t ** 3) * (1 - r) for t, r in zip((1e5, 1e10, 1e20), ratios)]
    assert gaps[0] < gaps[1] < gaps[2]


def test_rate_spectrum_on_random_points(maps, reports):
    rng = np.random.default_rng(14)
    for name in ("F0", "F1", "F2", "F3"):
        allowed = np.array([float(a) for a in reports[name].alpha] + [0.0, 1.0])
        pts = _random_points(rng, 1000, 1.2)
        batch = OrbitBatch.from_points(maps[name], pts).run()
        rates = batch.rates()
        done = np.isfinite(rates)
        assert done.mean() > 0.98
        rel = np.abs(rates[done, None] - allowed[None, :]) / np.maximum(allowed, 1)[None, :]
        assert np.all(rel.min(axis=1) <= 0.05)


def test_lojasiewicz(maps):
    assert lojasiewicz_estimate(maps["F0"]) == pytest.approx(2, abs=1e-6)
    # on z1^3 = z2^2 the first component vanishes identically
    z = np.array([1e4, 1e6])
    w = eval_map(maps["F1"], z)
    assert np.log(np.abs(w).max()) / np.log(1e6) == pytest.approx(2, abs=1e-4)
    w = eval_map(maps["F3"], np.array([0, 1e6]))
    assert np.log(np.abs(w).max()) / np.log(1e6) == pytest.approx(2, rel=1e-12)
    assert 1.9 <= lojasiewicz_estimate(maps["F3"]) <= 2.2


def test_scaled_and_plain_starts_agree(maps):
    a = iterate(maps["F1"], (1.5, 0.2))
    b = iterate(maps["F1"], ScaledPoint.from_point((1.5, 0.2)))
    assert a.ells == b.ells and a.status == b.status
