"""Regularity hierarchy of polynomial maps.

A map in block order is *s-regular* when, for every level ``i <= s``, the
homogeneous system formed by the top-degree parts of the first ``i`` blocks,
restricted to the coordinates of those blocks, has only the trivial zero.
Level 1 is algebraic stability.  A map is *(pi, s)-regular* when ``f o pi``
is s-regular for a blockwise power map ``pi`` with non-decreasing exponents.

In two variables the existence of such a ``pi`` is decided exactly from the
Newton diagrams of the two components (:func:`semi_regularity_2d`).  In three
or more free variables the zero-set test is replaced by a numerical
certificate on the unit sphere; every verdict records how it was obtained.

Examples
--------
>>> from semireg import parse_map
>>> report = analyze(parse_map("z1^6 - z2^4, z1^3 - 2*z2^2 + z2"))
>>> report.semi_regular, report.pi, [int(a) for a in report.alpha], int(report.d_t)
(True, (2, 3), [6, 2], 12)
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import (Indeterminate, MalformedInput, NotAlgebraicallyStable,
                     RegularityFailure, SharedComponent, SlopeZero)
from .map_parser import format_polynomial
from .poly_core import (BlockStructure, NumericPolys, Polynomial, PolynomialMap,
                        compose_monomial, normalize_map)
from .resultants import binary_form, binary_forms_have_common_zero, resultant

EXACT = "exact"
CERTIFICATE = "numerical-certificate"


# ---------------------------------------------------------------------------
# Level verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertificateParams:
    """Settings of the sphere-minimum certificate used with 3+ free variables."""

    eps: float = 1e-6       # sphere minimum above this: no nontrivial zero
    delta: float = 1e-10    # residual below this: witness of a nontrivial zero
    starts: int = 64
    max_nfev: int = 200
    seed: int = 0


@dataclass(frozen=True)
class LevelVerdict:
    """Outcome of the zero-set test at one level.

    Attributes
    ----------
    level : int
        1-based block level.
    passed : bool or None
        ``None`` when the numerical certificate was inconclusive.
    method : str
        ``"exact-univariate"``, ``"exact-resultant"``, ``"exact-dimension"``
        or ``"numerical-certificate"``.
    confidence : str
        ``"exact"`` or ``"numerical"``.
    system : tuple of Polynomial
        Restricted top-degree parts whose common zeros are tested.
    zero_coordinates : tuple of int
        0-based coordinates set to zero.
    sphere_min : float or None
        Smallest ``max_j |F_j|`` found on the unit sphere (certificate only).
    witness : tuple of complex or None
        Unit vector with ``max_j |F_j| < delta`` when the certificate fails.
    """

    level: int
    passed: Optional[bool]
    method: str
    confidence: str
    system: tuple
    zero_coordinates: tuple
    sphere_min: Optional[float] = None
    witness: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "verdict": {True: "pass", False: "fail", None: "indeterminate"}[self.passed],
            "method": self.method,
            "confidence": self.confidence,
            "system": [format_polynomial(p) for p in self.system],
            "zero_coordinates": [f"z{j + 1}" for j in self.zero_coordinates],
            "sphere_min": self.sphere_min,
            "witness": None if self.witness is None
            else [[c.real, c.imag] for c in self.witness],
        }


def _block_degrees(pmap: PolynomialMap, blocks: BlockStructure) -> tuple:
    return tuple(max(pmap[j].degree for j in blocks.indices(i))
                 for i in range(1, blocks.m + 1))


def level_system(pmap: PolynomialMap, blocks: BlockStructure, i: int):
    """Forms tested at level ``i`` and the number of free coordinates.

    The top part of each component is taken at its block degree, so a
    component of lower degree than its block contributes the zero form.
    """
    degs = _block_degrees(pmap, blocks)
    free = blocks.l[i] - 1
    zeroed = tuple(range(free, blocks.k))
    forms = []
    for b in range(1, i + 1):
        for j in blocks.indices(b):
            forms.append(pmap[j].homogeneous_part(degs[b - 1]).restrict_zero(zeroed))
    return forms, free, zeroed


def _level_verdict(pmap, blocks, i, cert: CertificateParams) -> LevelVerdict:
    forms, free, zeroed = level_system(pmap, blocks, i)
    live = [f for f in forms if not f.is_zero]
    base = dict(level=i, system=tuple(forms), zero_coordinates=zeroed)
    if len(live) < free:
        # fewer equations than projective dimension + 1 always leaves a zero
        return LevelVerdict(passed=False, method="exact-dimension", confidence=EXACT, **base)
    if free == 1:
        # each live form is c * z1^d with c != 0
        return LevelVerdict(passed=True, method="exact-univariate", confidence=EXACT, **base)
    if free == 2:
        common = binary_forms_have_common_zero([binary_form(f, 0, 1) for f in live])
        return LevelVerdict(passed=not common, method="exact-resultant", confidence=EXACT, **base)
    passed, smin, witness = sphere_certificate(live, free, blocks.k, cert)
    return LevelVerdict(passed=passed, method=CERTIFICATE, confidence="numerical",
                        sphere_min=smin, witness=witness, **base)


def sphere_certificate(forms: Sequence[Polynomial], free: int, k: int,
                       params: CertificateParams = CertificateParams()):
    """Search the unit sphere of ``C^free`` for a common zero of ``forms``.

    Runs ``params.starts`` local least-squares descents from seeded random
    starts.  Returns ``(passed, sphere_min, witness)`` where ``passed`` is
    True if the smallest ``max_j |F_j|`` found exceeds ``eps``, False if it
    is below ``delta`` (the minimizer is returned as witness), else None.
    """
    ev = NumericPolys(forms, k)

    def point(v):
        z = v[:free] + 1j * v[free:]
        z = z / np.linalg.norm(z)
        return np.concatenate([z, np.zeros(k - free, dtype=complex)])

    def residual(v):
        vals = ev(point(v))
        return np.concatenate([vals.real, vals.imag])

    best, best_z = math.inf, None
    streams = np.random.SeedSequence(params.seed).spawn(params.starts)
    for ss in streams:
        v0 = np.random.default_rng(ss).standard_normal(2 * free)
        with warnings.catch_warnings(), np.errstate(all="ignore"):
            warnings.simplefilter("ignore", RuntimeWarning)
            try:
                sol = least_squares(residual, v0, max_nfev=params.max_nfev,
                                    xtol=1e-15, ftol=1e-15, gtol=None)
                v = sol.x
            except (ValueError, np.linalg.LinAlgError):
                v = v0
        if not np.all(np.isfinite(v)) or np.linalg.norm(v) == 0:
            continue
        z = point(v)
        val = float(np.max(np.abs(ev(z))))
        if val < best:
            best, best_z = val, z
        if best < params.delta:
            break       # a witness settles the verdict
    if best > params.eps:
        return True, best, None
    if best < params.delta:
        return False, best, tuple(complex(c) for c in best_z[:free])
    return None, best, None


def check_s_regularity(pmap: PolynomialMap, blocks: BlockStructure | None = None,
                       s: int | None = None,
                       cert: CertificateParams = CertificateParams()) -> list:
    """Per-level verdicts for levels ``1..s`` (default all levels).

    ``pmap`` must already be in block order when ``blocks`` is given; with
    ``blocks=None`` the map is normalized first.
    """
    if blocks is None:
        pmap, blocks = normalize_map(pmap)
    s = blocks.m if s is None else s
    if not 1 <= s <= blocks.m:
        raise MalformedInput(f"level s={s} outside 1..{blocks.m}")
    return [_level_verdict(pmap, blocks, i, cert) for i in range(1, s + 1)]


def check_algebraic_stability(pmap: PolynomialMap, blocks: BlockStructure | None = None,
                              cert: CertificateParams = CertificateParams()) -> bool:
    """True iff the map is 1-regular.

    In two variables with two blocks this is the nonvanishing of the
    ``z1^d1`` coefficient of the first component.  An inconclusive
    certificate raises :class:`Indeterminate`.
    """
    if blocks is None:
        pmap, blocks = normalize_map(pmap)
    if blocks.k == 2 and blocks.m == 2:
        return bool(pmap[0].coefficient((blocks.d[0], 0)))
    v = _level_verdict(pmap, blocks, 1, cert)
    if v.passed is None:
        raise Indeterminate("algebraic stability certificate inconclusive", v.sphere_min)
    return v.passed


# ---------------------------------------------------------------------------
# Newton diagrams (two variables)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NewtonDiagram:
    """Exponent pairs ``(m, n)`` of the nonzero monomials of each component."""

    sigma: tuple            # (frozenset, frozenset)

    @property
    def union(self) -> frozenset:
        return frozenset().union(*self.sigma)


@dataclass(frozen=True)
class SupportLine:
    """The line ``p*m + q*n = r`` with coprime positive ``p``, ``q``."""

    p: int
    q: int
    r: int

    @property
    def slope(self) -> Fraction:
        return Fraction(-self.p, self.q)

    def value(self, point) -> int:
        return self.p * point[0] + self.q * point[1]

    def __str__(self):
        lhs = " + ".join(f"{c}{v}" if c != 1 else v for c, v in ((self.p, "m"), (self.q, "n")))
        return f"{lhs} = {self.r}"

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "r": self.r, "slope": str(self.slope),
                "equation": str(self)}


def newton_diagram(pmap: PolynomialMap) -> NewtonDiagram:
    if pmap.k != 2:
        raise MalformedInput("Newton diagrams are defined for maps of C^2")
    return NewtonDiagram(tuple(frozenset(c.support) for c in pmap))


def support_line_D1(diagram: NewtonDiagram, d1: int) -> SupportLine:
    """Line of largest slope through ``(d1, 0)`` with all points on or below it."""
    if (d1, 0) not in diagram.sigma[0]:
        raise NotAlgebraicallyStable(f"z1^{d1} is missing from the first component")
    t = Fraction(0)
    for m, n in diagram.union:
        if n > 0:
            if m >= d1:
                raise MalformedInput(f"point ({m},{n}) lies beyond degree {d1}")
            t = max(t, Fraction(n, d1 - m))
    if t == 0:
        raise SlopeZero("every monomial is a pure power of z1; the support line is horizontal")
    p, q = t.numerator, t.denominator
    return SupportLine(p, q, p * d1)


def support_line_D2(diagram: NewtonDiagram, slope: Fraction) -> SupportLine:
    """Line of the given slope supporting the second diagram from above."""
    slope = Fraction(slope)
    p, q = -slope.numerator, slope.denominator
    if p <= 0:
        raise MalformedInput("support slope must be negative")
    if not diagram.sigma[1]:
        raise MalformedInput("second component is zero")
    r = max(p * m + q * n for m, n in diagram.sigma[1])
    return SupportLine(p, q, r)


def restrict_to_line(poly: Polynomial, line: SupportLine) -> Polynomial:
    """Sum of the terms of ``poly`` whose exponents lie on ``line``."""
    return Polynomial(poly.k, {e: c for e, c in poly.items() if line.value(e) == line.r})


@dataclass(frozen=True)
class NewtonData:
    D1: SupportLine
    D2: SupportLine
    P1_D1: Polynomial
    P2_D2: Polynomial
    resultant: object       # GaussianRational of the pulled-back forms
    verdict: bool

    def to_dict(self) -> dict:
        return {
            "D1": self.D1.to_dict(),
            "D2": self.D2.to_dict(),
            "P1_D1": format_polynomial(self.P1_D1),
            "P2_D2": format_polynomial(self.P2_D2),
            "resultant": str(self.resultant),
            "verdict": "pass" if self.verdict else "fail",
        }


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class RegularityReport:
    """Everything :func:`analyze` learns about a map.

    ``map`` is the conjugated map in block order; ``blocks.permutation``
    relates it to the input.  ``levels`` are the verdicts for ``map`` itself
    and ``pi_levels`` those for ``f o pi`` when a ``pi`` was tested.
    """

    map: PolynomialMap
    blocks: BlockStructure
    alg_stable: Optional[bool]
    levels: list
    newton: Optional[NewtonData] = None
    pi: Optional[tuple] = None
    pi_levels: list = field(default_factory=list)
    alpha: Optional[tuple] = None
    semi_regular: bool = False
    reason: Optional[str] = None
    d_t: Optional[object] = None
    lam: Optional[object] = None
    prediction: Optional[str] = None
    pullback_factors: Optional[tuple] = None

    @property
    def s_max(self) -> int:
        """Largest ``s`` such that levels ``1..s`` all pass."""
        s = 0
        for v in self.levels:
            if v.passed is not True:
                break
            s = v.level
        return s

    @property
    def regular(self) -> bool:
        return self.s_max == self.blocks.m

    @property
    def method(self) -> str:
        all_levels = list(self.levels) + list(self.pi_levels)
        return CERTIFICATE if any(v.method == CERTIFICATE for v in all_levels) else EXACT

    def to_dict(self) -> dict:
        b = self.blocks
        return {
            "map": [format_polynomial(c) for c in self.map],
            "k": b.k,
            "blocks": {"m": b.m, "l": list(b.l), "d": list(b.d),
                       "permutation": [j + 1 for j in b.permutation]},
            "alg_stable": self.alg_stable,
            "s_max": self.s_max,
            "regular": self.regular,
            "method": self.method,
            "levels": [v.to_dict() for v in self.levels],
            "newton": None if self.newton is None else self.newton.to_dict(),
            "semi_regular": self.semi_regular,
            "reason": self.reason,
            "pi": None if self.pi is None else list(self.pi),
            "pi_levels": [v.to_dict() for v in self.pi_levels],
            "alpha": None if self.alpha is None else [_num(a) for a in self.alpha],
            "d_t": _num(self.d_t),
            "lambda": _num(self.lam),
            "prediction": self.prediction,
            "pullback_factors": None if self.pullback_factors is None
            else [_num(x) for x in self.pullback_factors],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _num(x):
    """JSON-friendly number: int when integral, float otherwise."""
    if x is None:
        return None
    x = Fraction(x)
    return int(x) if x.denominator == 1 else float(x)


def _alpha(pmap_pi: PolynomialMap, blocks: BlockStructure, pexp) -> tuple:
    degs = _block_degrees(pmap_pi, blocks)
    return tuple(Fraction(d, p) for d, p in zip(degs, pexp))


def _family_degree(pmap: PolynomialMap) -> Optional[int]:
    """``deg P`` if the map is ``(P, a z1 + b z2)`` with ``|b| > 1`` and ``z1^d`` in ``P``."""
    if pmap.k != 2:
        return None
    P, L = pmap[0], pmap[1]
    if not L.is_homogeneous or L.degree != 1:
        return None
    b = L.coefficient((0, 1))
    d = P.degree
    if d < 2 or b.norm() <= 1 or not P.coefficient((d, 0)):
        return None
    return d


def predict_invariants(report: RegularityReport) -> dict:
    """Predicted ``alpha``, ``d_t``, Lojasiewicz exponent and pullback factors.

    The product formula ``d_t = prod alpha_i^(l_i - l_{i-1})`` with
    ``lambda = alpha_m`` is used when ``alpha_m > 1``.  When ``alpha_m = 1``
    only maps ``(P, a z1 + b z2)`` with ``|b| > 1`` are predicted
    (``d_t = deg P``, ``lambda = 1``); anything else is ``"unpredicted"``.
    """
    out = {"alpha": report.alpha, "d_t": None, "lambda": None,
           "prediction": "unpredicted", "pullback_factors": None}
    if not report.semi_regular or report.alpha is None:
        return out
    alpha, b = report.alpha, report.blocks
    if alpha[-1] > 1:
        out["prediction"] = "product-formula"
    elif alpha[-1] == 1:
        d = _family_degree(report.map)
        if d is None:
            return out
        out["prediction"] = "linear-second-component"
    else:
        return out
    d_t = Fraction(1)
    for a, size in zip(alpha, b.sizes):
        d_t *= a ** size
    out["d_t"] = d_t
    out["lambda"] = alpha[-1]
    # factor by which f^* scales the j-th Green current
    factors = []
    for j in range(1, b.k + 1):
        i = b.block_of(j - 1)
        f = alpha[i - 1] ** (j - b.l[i - 1] + 1)
        for r in range(1, i):
            f *= alpha[r - 1] ** b.sizes[r - 1]
        factors.append(f)
    out["pullback_factors"] = tuple(factors)
    return out


def _finish(report: RegularityReport) -> RegularityReport:
    pred = predict_invariants(report)
    report.d_t = pred["d_t"]
    report.lam = pred["lambda"]
    report.prediction = pred["prediction"]
    report.pullback_factors = pred["pullback_factors"]
    return report


def check_pi_regularity(pmap: PolynomialMap, pexp: Sequence[int], s: int | None = None,
                        cert: CertificateParams = CertificateParams()) -> RegularityReport:
    """Test whether ``f o pi`` is s-regular for blockwise exponents ``pexp``.

    The block partition is that of ``f``; block degrees of ``f o pi`` are the
    largest component degree in each block.  ``semi_regular`` is set when all
    levels ``1..s`` pass and the ``alpha_i`` are strictly decreasing.
    """
    pmap, blocks = normalize_map(pmap)
    s = blocks.m if s is None else s
    pexp = tuple(int(p) for p in pexp)
    composed = compose_monomial(pmap, pexp, blocks)
    pi_levels = check_s_regularity(composed, blocks, s, cert)
    alpha = _alpha(composed, blocks, pexp)
    report = RegularityReport(map=pmap, blocks=blocks, alg_stable=None,
                              levels=check_s_regularity(pmap, blocks, None, cert),
                              pi=pexp, pi_levels=pi_levels, alpha=alpha)
    report.alg_stable = report.levels[0].passed
    ok = all(v.passed is True for v in pi_levels)
    decreasing = all(a > b for a, b in zip(alpha, alpha[1:]))
    if ok and decreasing:
        report.semi_regular = True
    elif not decreasing:
        report.reason = "AlphaNotDecreasing"
    else:
        bad = next(v for v in pi_levels if v.passed is not True)
        report.reason = ("Indeterminate" if bad.passed is None
                         else f"LevelFailure:{bad.level}")
    return _finish(report)


def semi_regularity_2d(pmap: PolynomialMap,
                       cert: CertificateParams = CertificateParams()) -> RegularityReport:
    """Decide semi-regularity of a map of ``C^2`` from its Newton diagrams.

    Raises
    ------
    NotAlgebraicallyStable, SlopeZero, SharedComponent
        The failing condition.  The partial report is attached as the
        exception's ``report`` attribute.
    """
    pmap, blocks = normalize_map(pmap)
    if blocks.k != 2:
        raise MalformedInput("semi_regularity_2d needs a map of C^2")
    levels = check_s_regularity(pmap, blocks, None, cert)
    report = RegularityReport(map=pmap, blocks=blocks, alg_stable=levels[0].passed,
                              levels=levels)
    if blocks.m == 1:
        # equal degrees: semi-regular exactly when regular, with trivial pi
        if not report.regular:
            report.reason = "SharedComponent"
            _raise(SharedComponent("top-degree parts share a nontrivial zero"), report)
        report.pi, report.pi_levels = (1,), levels
        report.alpha = (Fraction(blocks.d[0]),)
        report.semi_regular = True
        return _finish(report)
    if not report.alg_stable:
        report.reason = "NotAlgebraicallyStable"
        _raise(NotAlgebraicallyStable(f"z1^{blocks.d[0]} is missing from the first component"),
               report)
    diagram = newton_diagram(pmap)
    try:
        D1 = support_line_D1(diagram, blocks.d[0])
    except SlopeZero as exc:
        report.reason = "SlopeZero"
        _raise(exc, report)
    D2 = support_line_D2(diagram, D1.slope)
    P1, P2 = restrict_to_line(pmap[0], D1), restrict_to_line(pmap[1], D2)
    pexp = (D1.p, D1.q)
    powers = pexp
    f1 = binary_form(P1.substitute_powers(powers), 0, 1)
    f2 = binary_form(P2.substitute_powers(powers), 0, 1)
    res = resultant(f1, f2)
    report.newton = NewtonData(D1, D2, P1, P2, res, bool(res))
    if not res:
        report.reason = "SharedComponent"
        _raise(SharedComponent(
            f"{format_polynomial(P1)} and {format_polynomial(P2)} share a nontrivial zero"),
            report)
    composed = compose_monomial(pmap, pexp, blocks)
    report.pi = pexp
    report.pi_levels = check_s_regularity(composed, blocks, None, cert)
    report.alpha = _alpha(composed, blocks, pexp)
    report.semi_regular = True
    return _finish(report)


def _raise(exc: RegularityFailure, report: RegularityReport):
    exc.report = _finish(report)
    raise exc


def analyze(pmap: PolynomialMap, pi: Sequence[int] | None = None,
            cert: CertificateParams = CertificateParams()) -> RegularityReport:
    """Full classification of a map; never raises on a negative verdict.

    Maps of ``C^2`` with two blocks go through the Newton-diagram test.
    Otherwise the map is tested for regularity and, if ``pi`` is given, for
    ``(pi, m)``-regularity.  Failures are recorded in ``report.reason``.
    """
    if pi is not None:
        return check_pi_regularity(pmap, pi, None, cert)
    _, blocks = normalize_map(pmap)
    if blocks.k == 2:
        try:
            return semi_regularity_2d(pmap, cert)
        except RegularityFailure as exc:
            return exc.report
    report = check_pi_regularity(pmap, (1,) * blocks.m, None, cert)
    if not report.semi_regular:
        report.pi = None
        report.alpha = None
        report.pi_levels = []
        if report.reason and report.reason.startswith("LevelFailure"):
            report.reason = "NotRegular" if report.alg_stable else "NotAlgebraicallyStable"
    return report
