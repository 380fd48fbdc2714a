import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semireg import (GaussianRational, Polynomial, PolynomialMap, ScaledPoint, block_structure,
                     compose_monomial, eval_map, eval_scaled, homogeneous_decomposition,
                     jacobian, jacobian_norm_at, normalize_map, parse_map, top_part)
from semireg.errors import InvalidPi, MalformedInput, MalformedMap, PrecisionLoss


def P(text, k=2):
    return parse_map(f"vars: {' '.join(f'z{j + 1}' for j in range(k))}\n{text}" +
                     ", 0" * (k - 1))[0]


def test_gaussian_rational_field_ops():
    a = GaussianRational(Fraction(1, 2), 3)
    b = GaussianRational(2, -1)
    assert (a * b) / b == a
    assert a - a == 0
    assert (a ** 3) == a * a * a
    assert complex(GaussianRational(1, 1) ** 2) == 2j
    assert GaussianRational(0, 1).norm() == 1


def test_polynomial_arithmetic_is_exact():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    p = (x + y) ** 3
    assert p.coefficient((2, 1)) == 3
    assert (p - x ** 3 - y ** 3).coefficient((1, 2)) == 3
    assert ((x * y + 1) * (x - y)).exact_divide(x - y) == x * y + 1
    assert Polynomial.zero(2).is_zero


def test_block_structure_examples(maps):
    b = block_structure(maps["F1"])
    assert (b.m, b.d, b.l) == (2, (6, 3), (1, 2, 3))
    b0 = block_structure(maps["F0"])
    assert (b0.m, b0.d, b0.l) == (1, (2,), (1, 3))


def test_block_structure_swaps_coordinates():
    f = parse_map("z2^2, z1^3")
    g, b = normalize_map(f)
    assert b.permutation == (1, 0)
    assert b.d == (3, 2)
    assert g == parse_map("z2^3, z1^2")


def test_constant_component_rejected():
    with pytest.raises(MalformedMap):
        block_structure(parse_map("z1^2, 3"))


def test_top_part_examples():
    assert top_part(P("z1^3 - 2*z2^2 + z2")) == P("z1^3")
    assert top_part(P("z1^6 - z2^4")) == P("z1^6")
    h = P("z1^2 + 3*z1*z2")
    assert top_part(h) == h
    with pytest.raises(MalformedInput):
        top_part(Polynomial.zero(2))


def test_homogeneous_decomposition_examples():
    parts = homogeneous_decomposition(P("z1^6 - z2^4"))
    assert parts == [(4, P("-z2^4")), (6, P("z1^6"))]
    assert homogeneous_decomposition(Polynomial.zero(2)) == []
    parts = homogeneous_decomposition(P("z1^3 - 2*z2^2 + z2"))
    assert [d for d, _ in parts] == [1, 2, 3]
    assert parts[1][1] == P("-2*z2^2")


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 5), st.integers(0, 5)),
                       st.integers(-9, 9), max_size=8))
def test_decomposition_sums_back(terms):
    p = Polynomial(2, terms)
    total = Polynomial.zero(2)
    for _, part in homogeneous_decomposition(p):
        assert part.is_homogeneous
        total = total + part
    assert total == p


def test_compose_monomial_examples(maps):
    assert compose_monomial(maps["F1"], (2, 3)) == parse_map(
        "z1^12 - z2^12, z1^6 - 2*z2^6 + z2^3")
    assert compose_monomial(maps["F3"], (1, 1)) == maps["F3"]
    assert compose_monomial(PolynomialMap([P("z1^3 - 2*z2^2"), P("z2")]), (2, 3))[0] == \
        P("z1^6 - 2*z2^6")
    with pytest.raises(InvalidPi):
        compose_monomial(maps["F1"], (3, 2))


def test_eval_examples(maps):
    np.testing.assert_allclose(eval_map(maps["F0"], [2, 3]), [4, 9])
    np.testing.assert_allclose(eval_map(maps["F1"], [1, 1]), [0, 0])
    np.testing.assert_allclose(eval_map(maps["F1"], [0, 1]), [-1, -1])


def test_eval_scaled_examples(maps):
    q, _ = eval_scaled(maps["F0"], ScaledPoint((1, 0), 10.0))
    assert q.u == (1, 0) and q.ell == pytest.approx(20.0, rel=1e-15)
    q, _ = eval_scaled(maps["F1"], ScaledPoint.from_point((10, 0)))
    np.testing.assert_allclose(q.to_point(), [1e6, 1e3], rtol=1e-13)
    assert q.ell == pytest.approx(6 * math.log(10), rel=1e-14)


def test_eval_scaled_on_cancellation_curve(maps):
    # z1^3 = z2^2 wipes out the degree-6 part of the first component
    q, ratio = eval_scaled(maps["F1"], ScaledPoint.from_point((1e2, 1e3)))
    np.testing.assert_allclose(q.to_point(), [0, -1e6 + 1e3], atol=1e-3)
    assert q.ell == pytest.approx(math.log(1e6 - 1e3), rel=1e-12)
    assert ratio > 1


def test_eval_scaled_reports_precision_loss():
    # on z2 = z1^2 the degree-2 and degree-1 parts cancel to many digits
    f = parse_map("z1^2 - z2, z1^2 - z2 + 1")
    p = ScaledPoint((math.exp(-20.0), 1.0), 40.0)
    with pytest.raises(PrecisionLoss):
        eval_scaled(f, p)
    q, ratio = eval_scaled(f, p, precision=256)
    assert ratio > 1e15


def test_eval_scaled_matches_eval(maps):
    rng = np.random.default_rng(11)
    for name in ("F0", "F1", "F2", "F3"):
        f = maps[name]
        Z = (rng.standard_normal((2000, 2)) + 1j * rng.standard_normal((2000, 2))) \
            * 10 ** rng.uniform(-3, 3, (2000, 1))
        W = eval_map(f, Z)
        for z, w in zip(Z[:200], W[:200]):
            q, ratio = eval_scaled(f, ScaledPoint.from_point(z))
            if ratio > 1e3:
                continue
            np.testing.assert_allclose(q.to_point(), w, rtol=1e-12,
                                       atol=1e-12 * np.abs(w).max())


def test_jacobian_examples(maps):
    J = jacobian(maps["F0"])
    assert J[0][0] == P("2*z1") and J[0][1].is_zero and J[1][1] == P("2*z2")
    J = jacobian(maps["F2"])
    assert J[0][0] == P("2*z1") and J[1][0] == P("1") and J[1][1] == P("2")
    assert jacobian_norm_at(maps["F0"], (1, 1)) == pytest.approx(2.0, rel=1e-15)


def test_jacobian_matches_finite_differences(maps):
    rng = np.random.default_rng(5)
    f = maps["F1"]
    h = 1e-6
    for _ in range(100):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        J = f.numeric.jacobian(z)
        for j in range(2):
            e = np.zeros(2, complex)
            e[j] = h
            fd = (eval_map(f, z + e) - eval_map(f, z - e)) / (2 * h)
            np.testing.assert_allclose(J[:, j], fd, rtol=1e-6, atol=1e-6)
