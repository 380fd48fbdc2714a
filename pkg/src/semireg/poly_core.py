"""Exact multivariate polynomials with Gaussian-rational coefficients.

The exact layer (:class:`GaussianRational`, :class:`Polynomial`,
:class:`PolynomialMap`) is what regularity verdicts are computed on.  The
numerical layer (:class:`NumericPolys`, :class:`ScaledPoint`,
:func:`eval_scaled`) evaluates the same maps in floating point, including a
direction-plus-log-magnitude representation that survives doubly exponential
growth of orbits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import mpmath
import numpy as np

from .errors import InvalidPi, MalformedInput, MalformedMap, PrecisionLoss

# Bits of agreement kept in reserve before a scaled evaluation is declared lost.
GUARD_BITS = 20
DOUBLE_BITS = 53


class GaussianRational:
    """Exact complex rational ``re + im*i``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    # arithmetic
    def __add__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re * other.re - self.im * other.im,
                                self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return other
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * other.conjugate()
        return GaussianRational(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return GaussianRational(1) / (self ** -e)
        result = GaussianRational(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        """Squared modulus, exact."""
        return self.re * self.re + self.im * self.im

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        other = _as_gr(other)
        if other is NotImplemented:
            return False
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def to_mpc(self):
        return mpmath.mpc(_mpf(self.re), _mpf(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re} {sign} {abs(self.im)}*i"


def _mpf(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def _as_gr(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    if isinstance(x, (float, complex)):
        return GaussianRational.coerce(x)
    return NotImplemented


ONE = GaussianRational(1)
ZERO = GaussianRational(0)
I_UNIT = GaussianRational(0, 1)


class Term(NamedTuple):
    coeff: GaussianRational
    exponents: tuple


def graded_lex_key(exponents: Sequence[int]):
    """Sort key putting higher total degree first, then lex-larger first."""
    return (-sum(exponents), tuple(-e for e in exponents))


class Polynomial:
    """Immutable polynomial in ``k`` variables ``z1..zk``.

    ``terms`` maps exponent tuples to coefficients; zero coefficients are
    dropped so the zero polynomial has no terms.
    """

    __slots__ = ("k", "_terms", "_hash")

    def __init__(self, k: int, terms: Mapping | Iterable = ()):
        if k < 1:
            raise MalformedInput("a polynomial needs at least one variable")
        self.k = k
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for exps, c in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != k or any(e < 0 for e in exps):
                raise MalformedInput(f"bad exponent tuple {exps} for k={k}")
            acc[exps] = acc.get(exps, ZERO) + GaussianRational.coerce(c)
        self._terms = {e: c for e, c in acc.items() if c}
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, k):
        return cls(k)

    @classmethod
    def constant(cls, k, c):
        return cls(k, {(0,) * k: c})

    @classmethod
    def variable(cls, k, j):
        """The coordinate ``z_{j+1}`` (``j`` is 0-based)."""
        exps = [0] * k
        exps[j] = 1
        return cls(k, {tuple(exps): 1})

    @classmethod
    def monomial(cls, exps, c=1):
        return cls(len(exps), {tuple(exps): c})

    @classmethod
    def _raw(cls, k, terms):
        p = cls.__new__(cls)
        p.k = k
        p._terms = terms
        p._hash = None
        return p

    # inspection
    def __iter__(self):
        for e in sorted(self._terms, key=graded_lex_key):
            yield Term(self._terms[e], e)

    def __len__(self):
        return len(self._terms)

    def items(self):
        return [(t.exponents, t.coeff) for t in self]

    def coefficient(self, exps) -> GaussianRational:
        return self._terms.get(tuple(exps), ZERO)

    @property
    def support(self) -> frozenset:
        return frozenset(self._terms)

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree_in(self, j: int) -> int:
        if not self._terms:
            return -1
        return max(e[j] for e in self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    @property
    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.k != self.k:
                raise MalformedInput("variable count mismatch")
            return other
        if isinstance(other, (int, Fraction, float, complex, GaussianRational)):
            return Polynomial.constant(self.k, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for e, c in other._terms.items():
            s = terms.get(e, ZERO) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return Polynomial._raw(self.k, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.k, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, ZERO) + c1 * c2
        return Polynomial._raw(self.k, {e: c for e, c in terms.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise MalformedInput("polynomial powers must be nonnegative integers")
        result = Polynomial.constant(self.k, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.k == other.k and self._terms == other._terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == Polynomial.constant(self.k, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.k, frozenset(self._terms.items())))
        return self._hash

    def scale(self, c) -> "Polynomial":
        c = GaussianRational.coerce(c)
        if not c:
            return Polynomial(self.k)
        return Polynomial._raw(self.k, {e: v * c for e, v in self._terms.items()})

    # structure
    def homogeneous_part(self, d: int) -> "Polynomial":
        return Polynomial._raw(self.k, {e: c for e, c in self._terms.items() if sum(e) == d})

    def derivative(self, j: int) -> "Polynomial":
        terms = {}
        for e, c in self._terms.items():
            if e[j]:
                ne = list(e)
                ne[j] -= 1
                terms[tuple(ne)] = c * e[j]
        return Polynomial._raw(self.k, terms)

    def substitute_powers(self, powers: Sequence[int]) -> "Polynomial":
        """Apply ``z_j -> z_j**powers[j]``."""
        return Polynomial._raw(self.k, {tuple(a * p for a, p in zip(e, powers)): c
                                        for e, c in self._terms.items()})

    def permute(self, perm: Sequence[int]) -> "Polynomial":
        """Rename variables so that new variable ``j`` is old variable ``perm[j]``."""
        return Polynomial._raw(self.k, {tuple(e[perm[j]] for j in range(self.k)): c
                                        for e, c in self._terms.items()})

    def restrict_zero(self, indices) -> "Polynomial":
        """Set the listed variables to zero."""
        idx = tuple(indices)
        return Polynomial._raw(self.k, {e: c for e, c in self._terms.items()
                                        if all(e[j] == 0 for j in idx)})

    def coefficients_in(self, j: int) -> dict:
        """Map power of ``z_j`` to the cofactor polynomial (``z_j`` removed)."""
        out: dict = {}
        for e, c in self._terms.items():
            ne = list(e)
            ne[j] = 0
            out.setdefault(e[j], {})[tuple(ne)] = c
        return {p: Polynomial._raw(self.k, t) for p, t in out.items()}

    def evaluate(self, values: Sequence) -> GaussianRational:
        """Exact evaluation at Gaussian-rational (or int/Fraction) values."""
        vals = [GaussianRational.coerce(v) for v in values]
        total = ZERO
        for e, c in self._terms.items():
            t = c
            for v, a in zip(vals, e):
                if a:
                    t = t * v ** a
            total = total + t
        return total

    def exact_divide(self, other: "Polynomial") -> "Polynomial":
        """Quotient of an exact division; raises if ``other`` does not divide."""
        if other.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        lead_e = max(other._terms)
        lead_c = other._terms[lead_e]
        rem = dict(self._terms)
        quot: dict = {}
        while rem:
            e = max(rem)
            shift = tuple(a - b for a, b in zip(e, lead_e))
            if any(s < 0 for s in shift):
                raise MalformedInput("polynomial division is not exact")
            q = rem[e] / lead_c
            quot[shift] = quot.get(shift, ZERO) + q
            for oe, oc in other._terms.items():
                te = tuple(a + b for a, b in zip(oe, shift))
                v = rem.get(te, ZERO) - q * oc
                if v:
                    rem[te] = v
                else:
                    rem.pop(te, None)
        return Polynomial._raw(self.k, {e: c for e, c in quot.items() if c})

    def __repr__(self):
        return f"Polynomial({self.k}, {str(self)!r})"

    def __str__(self):
        from .map_parser import format_polynomial
        return format_polynomial(self)


def top_part(p: Polynomial) -> Polynomial:
    """Homogeneous part of highest total degree."""
    if p.is_zero:
        raise MalformedInput("the zero polynomial has no top part")
    return p.homogeneous_part(p.degree)


def homogeneous_decomposition(p: Polynomial) -> list:
    """``[(degree, part), ...]`` with distinct degrees in ascending order."""
    degrees = sorted({sum(e) for e, _ in p.items()})
    return [(d, p.homogeneous_part(d)) for d in degrees]


# ---------------------------------------------------------------------------
# Maps and block structure
# ---------------------------------------------------------------------------

class PolynomialMap:
    """A map ``C^k -> C^k`` given by ``k`` exact polynomials."""

    def __init__(self, components: Sequence[Polynomial]):
        comps = tuple(components)
        if not comps:
            raise MalformedMap("a map needs at least one component")
        k = len(comps)
        for c in comps:
            if not isinstance(c, Polynomial):
                raise MalformedMap("components must be Polynomial instances")
            if c.k != k:
                raise MalformedMap(f"component has {c.k} variables, map has {k} components")
        self.k = k
        self.components = comps

    @property
    def degrees(self) -> tuple:
        return tuple(c.degree for c in self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return self.k

    def __eq__(self, other):
        return isinstance(other, PolynomialMap) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    @cached_property
    def numeric(self) -> "NumericMap":
        return NumericMap(self)

    def __call__(self, z):
        return eval_map(self, z)

    def __repr__(self):
        return f"PolynomialMap({str(self)!r})"

    def __str__(self):
        from .map_parser import format_map
        return format_map(self)


@dataclass(frozen=True)
class BlockStructure:
    """Coordinate blocks of equal degree.

    ``l`` follows the 1-based convention ``1 = l_0 < l_1 < ... < l_m = k+1``;
    block ``i`` (1-based) holds coordinates ``l_{i-1}..l_i - 1``.
    ``permutation[j]`` is the original index of sorted coordinate ``j``.
    """

    m: int
    l: tuple
    d: tuple
    permutation: tuple

    @property
    def k(self) -> int:
        return self.l[-1] - 1

    @property
    def sizes(self) -> tuple:
        return tuple(self.l[i] - self.l[i - 1] for i in range(1, self.m + 1))

    def indices(self, i: int) -> range:
        """0-based coordinate indices of block ``i`` (1-based)."""
        return range(self.l[i - 1] - 1, self.l[i] - 1)

    def block_of(self, j: int) -> int:
        for i in range(1, self.m + 1):
            if j in self.indices(i):
                return i
        raise IndexError(j)

    @property
    def is_identity(self) -> bool:
        return self.permutation == tuple(range(self.k))


def block_structure(pmap: PolynomialMap) -> BlockStructure:
    degs = pmap.degrees
    for j, d in enumerate(degs):
        if d < 1:
            raise MalformedMap(f"component {j + 1} is constant")
    perm = tuple(sorted(range(pmap.k), key=lambda j: -degs[j]))
    sorted_degs = [degs[j] for j in perm]
    d = []
    l = [1]
    for j, deg in enumerate(sorted_degs):
        if not d or deg != d[-1]:
            if d:
                l.append(j + 1)
            d.append(deg)
    l.append(pmap.k + 1)
    return BlockStructure(m=len(d), l=tuple(l), d=tuple(d), permutation=perm)


def permute_map(pmap: PolynomialMap, perm: Sequence[int]) -> PolynomialMap:
    """Conjugate by the coordinate permutation: new ``j`` is old ``perm[j]``."""
    return PolynomialMap([pmap[perm[i]].permute(perm) for i in range(pmap.k)])


def normalize_map(pmap: PolynomialMap):
    """Return ``(conjugated map in block order, BlockStructure)``."""
    blocks = block_structure(pmap)
    if blocks.is_identity:
        return pmap, blocks
    return permute_map(pmap, blocks.permutation), blocks


def coordinate_powers(blocks: BlockStructure, pexp: Sequence[int]) -> tuple:
    if len(pexp) != blocks.m:
        raise InvalidPi(f"expected {blocks.m} block exponents, got {len(pexp)}")
    powers = [0] * blocks.k
    for i, p in enumerate(pexp, start=1):
        for j in blocks.indices(i):
            powers[j] = p
    return tuple(powers)


def compose_monomial(pmap: PolynomialMap, pexp: Sequence[int],
                     blocks: BlockStructure | None = None) -> PolynomialMap:
    """Exact ``f o pi`` for ``pi`` raising block ``i`` coordinates to ``pexp[i]``."""
    if blocks is None:
        blocks = block_structure(pmap)
        if not blocks.is_identity:
            raise MalformedMap("map is not in block order; normalize it first")
    pexp = tuple(pexp)
    if any((not isinstance(p, int)) or p < 1 for p in pexp):
        raise InvalidPi(f"block exponents must be positive integers: {pexp}")
    if any(a > b for a, b in zip(pexp, pexp[1:])):
        raise InvalidPi(f"block exponents must be non-decreasing: {pexp}")
    powers = coordinate_powers(blocks, pexp)
    return PolynomialMap([c.substitute_powers(powers) for c in pmap])


def jacobian(pmap: PolynomialMap) -> list:
    """Exact ``k x k`` matrix of partial derivatives ``dP_i/dz_j``."""
    return [[c.derivative(j) for j in range(pmap.k)] for c in pmap]


def jacobian_norm_at(pmap: PolynomialMap, z) -> float:
    """Operator 2-norm of the Jacobian at ``z``."""
    J = pmap.numeric.jacobian(np.asarray(z, dtype=complex))
    return float(np.linalg.norm(J, 2))


# ---------------------------------------------------------------------------
# Numerical evaluation
# ---------------------------------------------------------------------------

class NumericPolys:
    """Floating-point evaluator for a list of polynomials in ``k`` variables."""

    def __init__(self, polys: Sequence[Polynomial], k: int | None = None):
        polys = list(polys)
        self.k = k if k is not None else polys[0].k
        self.n = len(polys)
        owners, coeffs, exps = [], [], []
        for i, p in enumerate(polys):
            for e, c in p.items():
                owners.append(i)
                coeffs.append(complex(c))
                exps.append(e)
        self.owners = np.array(owners, dtype=np.intp)
        self.coeffs = np.array(coeffs, dtype=complex)
        self.exps = np.array(exps, dtype=np.intp).reshape(-1, self.k)

    def __call__(self, Z):
        """Evaluate at ``Z`` of shape ``(..., k)``; returns ``(..., n)``."""
        Z = np.asarray(Z, dtype=complex)
        shape = Z.shape[:-1]
        flat = Z.reshape(-1, self.k)
        out = np.zeros((flat.shape[0], self.n), dtype=complex)
        if len(self.coeffs):
            vals = _monomials(flat, self.exps) * self.coeffs
            for t, owner in enumerate(self.owners):
                out[:, owner] += vals[:, t]
        return out.reshape(shape + (self.n,))


def _monomials(Z, exps):
    """Monomial values ``prod_j Z[:, j]**exps[t, j]`` as an ``(N, T)`` array."""
    N = Z.shape[0]
    T = exps.shape[0]
    out = np.ones((N, T), dtype=complex)
    cache = {}
    for t in range(T):
        for j, e in enumerate(exps[t]):
            if e:
                key = (j, int(e))
                if key not in cache:
                    cache[key] = Z[:, j] ** int(e)
                out[:, t] *= cache[key]
    return out


class NumericMap(NumericPolys):
    """Evaluator for a :class:`PolynomialMap`, including scaled evaluation."""

    def __init__(self, pmap: PolynomialMap):
        super().__init__(pmap.components, pmap.k)
        self.map = pmap
        sums = self.exps.sum(axis=1) if len(self.exps) else np.zeros(0, dtype=np.intp)
        self.part_degrees = sorted(set(int(s) for s in sums))
        self.parts = []
        for d in self.part_degrees:
            sel = np.nonzero(sums == d)[0]
            self.parts.append((d, self.owners[sel], self.coeffs[sel], self.exps[sel]))
        self._jac = None
        self._mp_parts = {}

    def jacobian(self, z):
        """Numeric Jacobian matrix at ``z`` (shape ``(..., k, k)``)."""
        if self._jac is None:
            J = jacobian(self.map)
            self._jac = NumericPolys([J[i][j] for i in range(self.k) for j in range(self.k)], self.k)
        z = np.asarray(z, dtype=complex)
        vals = self._jac(z)
        return vals.reshape(z.shape[:-1] + (self.k, self.k))

    def scaled_batch(self, U, L, bits: int = DOUBLE_BITS):
        """Scaled evaluation of ``f(U * exp(L))`` for arrays of points.

        Returns ``(U', L', lost)`` where ``lost`` flags points whose
        cancellation exceeded the precision budget (their outputs are
        unreliable).  Exact-zero results have ``U' = 0`` and ``L' = 0``.
        """
        U = np.asarray(U, dtype=complex)
        L = np.asarray(L, dtype=float)
        N = U.shape[0]
        logw = np.full((len(self.parts), N), -np.inf)
        dirs = []
        with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
            for p, (d, owners, coeffs, exps) in enumerate(self.parts):
                vals = _monomials(U, exps) * coeffs
                H = np.zeros((N, self.k), dtype=complex)
                for t, owner in enumerate(owners):
                    H[:, owner] += vals[:, t]
                h = np.abs(H).max(axis=1)
                nz = h > 0
                logw[p, nz] = d * L[nz] + np.log(h[nz])
                # lift tiny rows out of the subnormal range before normalizing
                tiny = nz & (h < 1e-250)
                H[tiny] *= 2.0 ** 600
                h = np.where(tiny, np.abs(H).max(axis=1), h)
                Hn = np.zeros_like(H)
                Hn[nz] = H[nz] / h[nz, None]
                Hn[~np.isfinite(Hn)] = 0
                dirs.append(Hn)
            W = logw.max(axis=0)
            has = np.isfinite(W)
            S = np.zeros((N, self.k), dtype=complex)
            for p, Hn in enumerate(dirs):
                w = np.where(has, np.exp(logw[p] - np.where(has, W, 0.0)), 0.0)
                S += w[:, None] * Hn
            m = np.abs(S).max(axis=1)
            eff = np.maximum(m, np.exp(-np.where(has, W, 0.0)))
            lost = has & (eff < 2.0 ** -(bits - GUARD_BITS))
            nonzero = has & (m > 0)
            U2 = np.zeros_like(S)
            U2[nonzero] = S[nonzero] / m[nonzero, None]
            L2 = np.zeros(N)
            L2[nonzero] = W[nonzero] + np.log(m[nonzero])
        return U2, L2, lost, m

    def _mp_compiled(self):
        prec = mpmath.mp.prec
        if prec not in self._mp_parts:
            parts = []
            for d in self.part_degrees:
                terms = []
                for c, comp in zip(self.map.components, range(self.k)):
                    for e, coeff in c.items():
                        if sum(e) == d:
                            terms.append((comp, coeff.to_mpc(), e))
                parts.append((d, terms))
            self._mp_parts[prec] = parts
        return self._mp_parts[prec]

    def scaled_mp(self, u, ell, bits: int):
        """Arbitrary-precision scaled evaluation of a single point.

        Returns ``(u', ell', ratio)``; raises :class:`PrecisionLoss`.
        """
        with mpmath.workprec(bits):
            u = [mpmath.mpc(x) for x in u]
            ell = mpmath.mpf(ell)
            summands = []
            for d, terms in self._mp_compiled():
                H = [mpmath.mpc(0)] * self.k
                for comp, c, e in terms:
                    t = c
                    for x, a in zip(u, e):
                        if a:
                            t = t * x ** a
                    H[comp] = H[comp] + t
                h = max(abs(x) for x in H)
                if h > 0:
                    summands.append((d * ell + mpmath.log(h), [x / h for x in H]))
            if not summands:
                return [mpmath.mpc(0)] * self.k, mpmath.mpf(0), 1.0
            W = max(s[0] for s in summands)
            S = [mpmath.mpc(0)] * self.k
            for lw, Hn in summands:
                w = mpmath.exp(lw - W)
                S = [a + w * b for a, b in zip(S, Hn)]
            m = max(abs(x) for x in S)
            eff = max(m, mpmath.exp(-W))
            ratio = float(1 / m) if m > 0 else math.inf
            if eff < mpmath.mpf(2) ** -(bits - GUARD_BITS):
                raise PrecisionLoss(ratio, bits)
            if m == 0:
                return [mpmath.mpc(0)] * self.k, mpmath.mpf(0), ratio
            return [x / m for x in S], W + mpmath.log(m), ratio


def eval_map(pmap: PolynomialMap, z):
    """Evaluate the map in double precision at ``z`` (shape ``(k,)`` or ``(N, k)``)."""
    return pmap.numeric(z)


@dataclass(frozen=True)
class ScaledPoint:
    """The point ``u * exp(ell)`` with ``max|u_j| = 1`` (or ``u = 0``).

    ``u`` holds Python complex numbers at double precision or ``mpmath.mpc``
    values at higher precision; ``ell`` is the matching real type.
    """

    u: tuple
    ell: float

    @classmethod
    def from_point(cls, z) -> "ScaledPoint":
        z = [complex(x) for x in z]
        m = max(abs(x) for x in z)
        if m == 0:
            return cls(tuple(z), 0.0)
        return cls(tuple(x / m for x in z), math.log(m))

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for x in self.u)

    @property
    def log_norm(self) -> float:
        """``log |z|`` in the max norm (``-inf`` at the origin)."""
        return -math.inf if self.is_zero else float(self.ell)

    def to_point(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            scale = math.exp(float(self.ell)) if float(self.ell) < 709.0 else math.inf
            return np.array([complex(x) for x in self.u]) * scale


def eval_scaled(pmap: PolynomialMap, p: ScaledPoint, precision: int = DOUBLE_BITS):
    """Evaluate ``f`` at a scaled point.

    Returns ``(ScaledPoint, cancellation_ratio)`` where the ratio is the
    largest homogeneous summand divided by the result (max norms).  Raises
    :class:`PrecisionLoss` when cancellation eats into the working precision.
    """
    nm = pmap.numeric
    if precision <= DOUBLE_BITS:
        U = np.array([[complex(x) for x in p.u]])
        L = np.array([float(p.ell)])
        U2, L2, lost, m = nm.scaled_batch(U, L, DOUBLE_BITS)
        ratio = float(1.0 / m[0]) if m[0] > 0 else math.inf
        if lost[0]:
            raise PrecisionLoss(ratio, DOUBLE_BITS)
        return ScaledPoint(tuple(complex(x) for x in U2[0]), float(L2[0])), ratio
    u, ell, ratio = nm.scaled_mp(p.u, p.ell, precision)
    return ScaledPoint(tuple(u), ell), ratio
