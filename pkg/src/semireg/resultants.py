"""Exact resultants and gcds used by the regularity and preimage modules.

Univariate polynomials here are plain lists of coefficients, highest power
first.  Binary forms are represented the same way: ``[c_0, ..., c_d]`` stands
for ``sum_j c_j x^(d-j) y^j`` and keeps leading zeros, which is what makes the
homogeneous resultant see common zeros at ``[1:0]``.
"""
from __future__ import annotations

from typing import Sequence

from .poly_core import ZERO, GaussianRational, Polynomial


def sylvester_matrix(f: Sequence, g: Sequence, zero=ZERO) -> list:
    """Sylvester matrix of two coefficient lists (highest power first)."""
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    rows = []
    for i in range(n):
        rows.append([zero] * i + list(f) + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + list(g) + [zero] * (size - n - 1 - i))
    return rows


def det_field(matrix) -> GaussianRational:
    """Determinant over the Gaussian rationals by Gaussian elimination."""
    a = [list(map(GaussianRational.coerce, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return GaussianRational(1)
    det = GaussianRational(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if a[r][c]), None)
        if pivot is None:
            return GaussianRational(0)
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            det = -det
        piv = a[c][c]
        det = det * piv
        for r in range(c + 1, n):
            if a[r][c]:
                factor = a[r][c] / piv
                a[r] = [x - factor * y for x, y in zip(a[r], a[c])]
    return det


def det_bareiss(matrix) -> Polynomial:
    """Determinant of a matrix of :class:`Polynomial` (fraction-free Bareiss)."""
    a = [list(row) for row in matrix]
    n = len(a)
    k = a[0][0].k
    if n == 0:
        return Polynomial.constant(k, 1)
    sign = 1
    prev = Polynomial.constant(k, 1)
    for c in range(n - 1):
        pivot = next((r for r in range(c, n) if not a[r][c].is_zero), None)
        if pivot is None:
            return Polynomial(k)
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            sign = -sign
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                num = a[r][j] * a[c][c] - a[r][c] * a[c][j]
                a[r][j] = num.exact_divide(prev)
            a[r][c] = Polynomial(k)
        prev = a[c][c]
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def resultant(f: Sequence, g: Sequence) -> GaussianRational:
    """Homogeneous (Sylvester) resultant of two coefficient lists."""
    return det_field(sylvester_matrix([GaussianRational.coerce(c) for c in f],
                                      [GaussianRational.coerce(c) for c in g]))


# -- univariate polynomials over Q(i) -------------------------------------------

def _trim(p):
    i = 0
    while i < len(p) and not p[i]:
        i += 1
    return list(p[i:])


def poly_rem(a, b):
    a, b = _trim(a), _trim(b)
    if not b:
        raise ZeroDivisionError("remainder by zero polynomial")
    while len(a) >= len(b) and a:
        q = a[0] / b[0]
        a = [x - q * y for x, y in zip(a, b + [ZERO] * (len(a) - len(b)))][1:]
        a = _trim(a)
    return a


def poly_gcd(a, b) -> list:
    """Monic gcd of two univariate coefficient lists (``[]`` if both zero)."""
    a = _trim([GaussianRational.coerce(c) for c in a])
    b = _trim([GaussianRational.coerce(c) for c in b])
    while b:
        a, b = b, poly_rem(a, b)
    if not a:
        return []
    lead = a[0]
    return [c / lead for c in a]


# -- binary forms ---------------------------------------------------------------

def binary_form(p: Polynomial, x: int, y: int) -> list:
    """Coefficients of a homogeneous polynomial in variables ``x``, ``y``.

    All other variables must be absent.  Returns ``[c_0..c_d]`` with
    ``c_j`` the coefficient of ``x^(d-j) y^j``.
    """
    if p.is_zero:
        return []
    d = p.degree
    out = [ZERO] * (d + 1)
    for e, c in p.items():
        if sum(e) != d:
            raise ValueError("binary_form needs a homogeneous polynomial")
        if any(a for j, a in enumerate(e) if j not in (x, y)):
            raise ValueError("binary_form: polynomial involves other variables")
        out[e[y]] = c
    return out


def binary_gcd_degree(f: Sequence, g: Sequence) -> int:
    """Degree of the gcd of two binary forms, counting the factor ``y``."""
    f, g = list(f), list(g)
    if not any(f):
        return len(_trim(g)) and len(g) - 1
    if not any(g):
        return len(f) - 1
    # powers of y dividing both forms show up as trailing zeros
    tz = min(_trailing_zeros(f), _trailing_zeros(g))
    f1, g1 = f[:len(f) - tz], g[:len(g) - tz]
    # dehomogenize at y = 1: a root at infinity shows up as a leading zero
    lz = min(_leading_zeros(f1), _leading_zeros(g1))
    return tz + lz + max(len(poly_gcd(f1, g1)) - 1, 0)


def _trailing_zeros(p):
    n = 0
    for c in reversed(p):
        if c:
            break
        n += 1
    return n


def _leading_zeros(p):
    n = 0
    for c in p:
        if c:
            break
        n += 1
    return n


def binary_forms_have_common_zero(forms: Sequence[Sequence]) -> bool:
    """True iff the binary forms share a zero in ``P^1``.

    Zero forms impose no condition; a nonzero constant form has no zeros.
    With two forms this is the vanishing of their resultant.
    """
    live = [list(f) for f in forms if any(f)]
    if not live:
        return True
    if any(len(f) == 1 for f in live):
        return False
    if len(live) == 1:
        return True
    if len(live) == 2:
        return not resultant(live[0], live[1])
    acc = live[0]
    for f in live[1:]:
        acc = _binary_gcd(acc, f)
        if len(acc) == 1:
            return False
    return True


def _binary_gcd(f, g):
    """Gcd of two binary forms as a coefficient list (``[1]`` if coprime)."""
    tz = min(_trailing_zeros(f), _trailing_zeros(g))
    lz = min(_leading_zeros(f[:len(f) - tz]), _leading_zeros(g[:len(g) - tz]))
    h = poly_gcd(f[:len(f) - tz], g[:len(g) - tz])
    return [ZERO] * lz + h + [ZERO] * tz
