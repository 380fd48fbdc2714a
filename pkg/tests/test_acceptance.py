"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line with the measured
quantities, then asserts.  Run alone with ``pytest tests/test_acceptance.py -v -s``.
"""
import math
import time

import numpy as np
import pytest

from semireg import eval_map, format_map, parse_map
from semireg.dynamics import (classify_batch, green_points, increment_ratios,
                              invariance_residual, lojasiewicz_estimate, precise_ells)
from semireg.measures import SliceSpec, basin_grid, dimension_report, lyapunov_norm
from semireg.preimage import equilibrium_sample, pushforward_tv, solve_preimages
from semireg.regularity import analyze

from conftest import BUNDLED, bundled
from exprgen import random_map_text


@pytest.fixture
def report_line(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def test_criterion_01_example_verdicts(report_line):
    t0 = time.perf_counter()
    rf = analyze(bundled("example32_f"))
    rg = analyze(bundled("example32_g"))
    dt = time.perf_counter() - t0
    got = (rf.semi_regular, str(rf.newton.D1), str(rf.newton.D2), tuple(rf.pi),
           tuple(int(a) for a in rf.alpha), rg.semi_regular)
    want = (True, "2m + 3n = 12", "2m + 3n = 6", (2, 3), (6, 2), False)
    ok = got == want and dt < 1
    report_line(1, ok, f"f={got[:5]} g semi-regular={got[5]} time={dt:.2f}s")
    assert got == want
    assert dt < 1


def test_criterion_02_degree_formula(report_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst, mismatches = 0.0, []
    for name, d in (("F1", 12), ("F3", 8), ("F2", 2), ("F0", 4)):
        f = bundled(name)
        assert analyze(f).d_t == d
        for _ in range(20):
            w = 2 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            s = solve_preimages(f, w)
            if s.count != d:
                mismatches.append((name, s.count))
            res = np.abs(eval_map(f, s.points) - w).max() / (1 + np.abs(w).max())
            worst = max(worst, float(res))
    dt = time.perf_counter() - t0
    ok = not mismatches and worst < 1e-8 and dt < 30
    report_line(2, ok, f"mismatches={mismatches} max residual={worst:.2e} time={dt:.1f}s")
    assert not mismatches
    assert worst < 1e-8
    assert dt < 30


def test_criterion_03_lojasiewicz(report_line):
    l0 = lojasiewicz_estimate(bundled("F0"), R=1e6)
    l1 = lojasiewicz_estimate(bundled("F1"), R=1e6)
    l3 = lojasiewicz_estimate(bundled("F3"), R=1e6)
    ok = abs(l0 - 2) <= 1e-6 and 1.9 <= l1 <= 2.2 and 1.9 <= l3 <= 2.2
    report_line(3, ok, f"F0={l0:.9f} F1={l1:.6f} F3={l3:.6f}")
    assert abs(l0 - 2) <= 1e-6
    assert 1.9 <= l1 <= 2.2
    assert 1.9 <= l3 <= 2.2


def test_criterion_04_green_closed_form(report_line):
    f = bundled("F0")
    rng = np.random.default_rng(4)
    Z = 2 * (rng.standard_normal((10_000, 2)) + 1j * rng.standard_normal((10_000, 2)))
    g = green_points(f, analyze(f), 1, Z).value
    exact = np.maximum(np.log(np.abs(Z)), 0).max(axis=1)
    err = float(np.max(np.abs(g - exact)))
    ok = err < 1e-9
    report_line(4, ok, f"sup error={err:.2e}")
    assert err < 1e-9


def test_criterion_05_invariance(report_line):
    rng = np.random.default_rng(5)

    def sample(n, scale):
        return scale * (rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2)))

    out = {}
    for name, i in (("F0", 1), ("F1", 1), ("F2", 1)):
        f = bundled(name)
        out[(name, i)] = invariance_residual(f, analyze(f), i, sample(1000, 1.5))
    f = bundled("F1")
    rep = analyze(f)
    pts = sample(20_000, 0.7)
    on_k1 = classify_batch(f, rep, pts).labels != 1
    assert on_k1.sum() >= 1000
    out[("F1", 2)] = invariance_residual(f, rep, 2, pts[on_k1][:1000])
    worst = max(r for r, _ in out.values())
    ok = worst < 1e-6 and all(u >= 900 for _, u in out.values())
    detail = " ".join(f"{n}/G{i}={r:.1e}(n={u})" for (n, i), (r, u) in out.items())
    report_line(5, ok, detail)
    assert all(u >= 900 for _, u in out.values())
    assert worst < 1e-6


def _criterion6_grid():
    spec = SliceSpec(0, 0j, 3.0, 3.0, 512, 512, ((1, 0.7 + 0.2j),))
    f = bundled("F1")
    return spec, f, analyze(f)


def test_criterion_06_escape_rate_spectrum(report_line):
    spec, f, rep = _criterion6_grid()
    t0 = time.perf_counter()
    labels, rates, _ = basin_grid(f, rep, spec)
    dt = time.perf_counter() - t0
    indet = float(np.mean(labels == -1))
    r = rates[labels > 0]
    close = np.minimum(np.abs(r - 6) / 6, np.abs(r - 2) / 2) <= 0.05
    frac = float(close.mean()) if r.size else 0.0
    ok = r.size > 0 and frac >= 0.99 and indet < 0.02 and dt < 60
    report_line(6, ok, f"escaped={r.size} within 5%={frac:.4f} "
                       f"indeterminate={indet:.4f} time={dt:.1f}s")
    assert r.size > 0
    assert frac >= 0.99
    assert indet < 0.02
    assert dt < 60


def test_criterion_07_increment_contraction(report_line):
    spec = SliceSpec(0, 0j, 3.0, 3.0, 64, 64, ((1, 0.7 + 0.2j),))
    f = bundled("F1")
    rep = analyze(f)
    P = spec.points(2)
    labels = classify_batch(f, rep, P).labels
    rng = np.random.default_rng(7)
    pick = rng.choice(np.flatnonzero(labels == 1), 40, replace=False)
    ratios = []
    for z in P[pick]:
        # tail = orbit points past |z| = 1e6, arithmetic at 1024 bits
        ells = precise_ells(f, z, 8, bits=1024)
        ratios += increment_ratios(ells, 6, noise=2.0 ** -1000, tail_ell=math.log(1e6),
                                   bits=1024)
    worst = max(ratios) if ratios else math.inf
    ok = len(ratios) >= 10 and worst <= 1.1 / 6
    report_line(7, ok, f"ratios={len(ratios)} max={worst:.3e} bound={1.1 / 6:.4f}")
    assert len(ratios) >= 10
    assert worst <= 1.1 / 6


def test_criterion_08_measure_invariance(report_line):
    tv = {}
    clouds = {}
    for name in ("F0", "F2"):
        clouds[name] = equilibrium_sample(bundled(name), 100_000, seed=8)
        tv[name] = pushforward_tv(bundled(name), clouds[name], bins=32)
    A = np.abs(clouds["F0"].points)
    torus = float(np.mean(np.all((A >= 0.99) & (A <= 1.01), axis=1)))
    ok = max(tv.values()) < 0.05 and torus >= 0.99
    report_line(8, ok, f"TV F0={tv['F0']:.4f} F2={tv['F2']:.4f} torus fraction={torus:.4f}")
    assert max(tv.values()) < 0.05
    assert torus >= 0.99


def test_criterion_09_dimension(report_line):
    f = bundled("F0")
    cloud = equilibrium_sample(f, 10_000, seed=9)
    M = lyapunov_norm(f, cloud, n=20)
    d = dimension_report(analyze(f), M)
    resid = []
    for name in BUNDLED:
        rep = analyze(bundled(name))
        if rep.alpha is None:
            continue
        for M_hat in (1.5, 2.0, 6.5, 40.0):
            resid.append(dimension_report(rep, M_hat).identity_residual)
    worst = max(resid)
    ok = abs(M - 2) <= 0.05 and abs(d.mu_bound - 2) <= 0.05 and worst <= 1e-9
    report_line(9, ok, f"M_hat={M:.5f} mu_bound={d.mu_bound:.5f} identity residual={worst:.1e}")
    assert abs(M - 2) <= 0.05
    assert abs(d.mu_bound - 2) <= 0.05
    assert worst <= 1e-9


def test_criterion_10_parser_fuzz(report_line):
    bad = []
    for seed in range(1000):
        text = random_map_text(seed)
        once = parse_map(text)
        if parse_map(format_map(once)) != once:
            bad.append(seed)
    ok = not bad
    report_line(10, ok, f"maps=1000 round-trip failures={len(bad)}")
    assert not bad
