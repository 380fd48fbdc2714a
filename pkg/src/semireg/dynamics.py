"""Orbits, escape rates, basins and partial Green functions.

Orbits are followed in scaled coordinates (``z = u * exp(ell)``) so that
doubly exponential growth never overflows.  One engine, :class:`OrbitBatch`,
runs any number of starting points with the same stopping rules; the scalar
helpers below are thin wrappers around it.

Stopping rules
--------------
* **Escaped**: ``ell_n > escape_ell`` once at least five values exist,
  the last five all exceed ``bound_ell`` and their four ratios agree to 5%
  (the agreement is waived past ``ell = 1e250``); or, at ``max_n``, the last ``window`` increments are positive, ``ell`` is
  above ``bound_ell`` and the last ten increments have settled (slow,
  additive growth at rate 1).
* **Bounded**: at ``max_n``, ``ell < bound_ell`` for the last ``window`` steps.
* **MaxedOut**: neither of the above at ``max_n``.
* **Indeterminate**: cancellation exceeded the precision cap.

A point whose double-precision step loses too many bits is re-run from its
start with ``mpmath`` at twice the precision, doubling up to the cap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath
import numpy as np
from scipy.optimize import minimize

from .errors import MalformedInput, NonConvergent, PrecisionLoss, TooShort
from .poly_core import DOUBLE_BITS, PolynomialMap, ScaledPoint

RUNNING, ESCAPED, BOUNDED, MAXED_OUT, INDETERMINATE = 0, 1, 2, 3, 4
STATUS_NAMES = {ESCAPED: "Escaped", BOUNDED: "Bounded", MAXED_OUT: "MaxedOut",
                INDETERMINATE: "Indeterminate"}

TAIL = 4            # ratios used by the escape-rate estimate
SETTLE = 10         # increments that must agree for additive escape
SETTLE_TOL = 0.05   # relative spread allowed among those increments
MATCH_TOL = 0.25    # relative tolerance when matching a rate to alpha_i
SATURATE = 1e250    # ell beyond which an escaping orbit is stopped regardless
K_LABEL, INDETERMINATE_LABEL = 0, -1


@dataclass(frozen=True)
class OrbitParams:
    max_n: int = 200
    escape_ell: float = 1e4
    bound_ell: float = math.log(1e6)
    window: int = 50
    precision_cap: int = 1024

    def __post_init__(self):
        if not self.escape_ell > self.bound_ell > 0:
            raise MalformedInput("need escape_ell > bound_ell > 0")
        if self.max_n < 1 or self.window < 1 or self.window > self.max_n:
            raise MalformedInput("need 1 <= window <= max_n")
        if self.precision_cap < DOUBLE_BITS:
            raise MalformedInput("precision cap below double precision")


@dataclass
class OrbitRecord:
    """Log-magnitudes ``ell_n = log|f^n(z)|`` of one orbit and how it ended."""

    ells: list
    status: str
    steps: int
    precision: int
    rate: Optional[float] = None     # escape-rate estimate when Escaped

    @property
    def escaped(self) -> bool:
        return self.status == "Escaped"


@dataclass(frozen=True)
class GreenValue:
    """Value of a partial Green function at one point.

    ``status`` is ``"finite"``, ``"infinite"`` (the orbit escapes strictly
    faster than ``alpha_i``), ``"zero"`` (bounded or strictly slower) or
    ``"indeterminate"``.  ``residual`` is the last increment
    ``|G_n - G_{n-1}|``.
    """

    value: float
    iterations: int
    residual: float
    status: str


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

def _to_scaled(Z):
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim == 1:
        Z = Z[None, :]
    m = np.abs(Z).max(axis=1)
    nz = m > 0
    U = np.zeros_like(Z)
    U[nz] = Z[nz] / m[nz, None]
    with np.errstate(divide="ignore"):
        L = np.where(nz, np.log(np.where(nz, m, 1.0)), -np.inf)
    return U, L


class _MpOrbit:
    """State of one orbit followed at ``bits`` of precision."""

    def __init__(self, nm, u, ell, bits):
        self.nm, self.bits = nm, bits
        with mpmath.workprec(bits):
            self.u = [mpmath.mpc(x) for x in u]
            self.ell = mpmath.mpf(ell) if math.isfinite(ell) else mpmath.mpf(0)
        self.zero = not math.isfinite(ell)

    def step(self) -> float:
        if self.zero:
            return -math.inf
        u, ell, _ = self.nm.scaled_mp(self.u, self.ell, self.bits)
        self.u, self.ell = u, ell
        if all(x == 0 for x in u):
            self.zero = True
            return -math.inf
        return float(ell)

    @property
    def point(self) -> ScaledPoint:
        return ScaledPoint(tuple(complex(x) for x in self.u),
                           -math.inf if self.zero else float(self.ell))


class OrbitBatch:
    """Orbits of ``N`` starting points under one map.

    Parameters
    ----------
    pmap : PolynomialMap
    U0, L0 : ndarray
        Scaled starting points: directions ``(N, k)`` with max modulus 1 and
        log-magnitudes ``(N,)`` (``-inf`` for the origin).
    params : OrbitParams
    history : bool
        Keep every ``ell_n`` instead of a short ring buffer.
    """

    def __init__(self, pmap: PolynomialMap, U0, L0, params: OrbitParams = OrbitParams(),
                 history: bool = False):
        self.map = pmap
        self.nm = pmap.numeric
        self.params = params
        self.U0 = np.array(U0, dtype=complex)
        self.L0 = np.array(L0, dtype=float)
        N = self.N = self.L0.shape[0]
        self.H = params.max_n + 1 if history else max(TAIL, SETTLE) + 2
        self.ring = np.full((N, self.H), np.nan)
        self.ring[:, 0] = self.L0
        self.U = self.U0.copy()
        self.L = self.L0.copy()
        self.n = np.zeros(N, dtype=np.int64)
        self.status = np.zeros(N, dtype=np.int8)
        self.bits = np.full(N, DOUBLE_BITS, dtype=np.int64)
        self.pos = np.zeros(N, dtype=np.int64)
        self.low = (self.L0 < params.bound_ell).astype(np.int64)
        self.mp = {}            # index -> _MpOrbit for points beyond double precision

    @classmethod
    def from_points(cls, pmap, Z, params=OrbitParams(), history=False):
        U, L = _to_scaled(Z)
        return cls(pmap, U, L, params, history)

    # -- stepping -----------------------------------------------------------

    def _step_double(self, idx):
        U2, L2, lost, m = self.nm.scaled_batch(self.U[idx], self.L[idx], DOUBLE_BITS)
        L2 = np.where(m > 0, L2, -np.inf)
        zero_in = ~np.isfinite(self.L[idx])
        L2[zero_in] = -np.inf
        U2[zero_in] = 0
        self.U[idx] = U2
        self.L[idx] = L2
        return L2, lost

    def _record(self, idx, Lnew):
        p = self.params
        n = self.n[idx] + 1
        self.n[idx] = n
        prev = self.ring[idx, (n - 1) % self.H]
        self.ring[idx, n % self.H] = Lnew
        with np.errstate(invalid="ignore"):
            inc = Lnew - prev
            self.pos[idx] = np.where(inc > 0, self.pos[idx] + 1, 0)
        self.low[idx] = np.where(Lnew < p.bound_ell, self.low[idx] + 1, 0)

    def tail(self, idx, count):
        """Last ``count`` values of ``ell`` for points ``idx`` (oldest first)."""
        idx = np.atleast_1d(idx)
        n = self.n[idx]
        cols = (n[:, None] - np.arange(count - 1, -1, -1)[None, :]) % self.H
        out = self.ring[idx[:, None], cols]
        out[n[:, None] - np.arange(count - 1, -1, -1)[None, :] < 0] = np.nan
        return out

    def _decide(self, idx):
        """Apply the stopping rules to points ``idx`` that just stepped."""
        p = self.params
        n = self.n[idx]
        L = self.ring[idx, n % self.H]
        t5 = self.tail(idx, TAIL + 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            above = np.nanmin(np.where(np.isnan(t5), -np.inf, t5), axis=1) > p.bound_ell
            # the tail ratios must agree so that early transients do not bias the rate
            ratios = t5[:, 1:] / t5[:, :-1]
            mean = ratios.mean(axis=1)
            settled = (ratios.max(axis=1) - ratios.min(axis=1)) <= SETTLE_TOL * mean
            esc = (L > p.escape_ell) & (n >= TAIL) & above & (settled | (L > SATURATE))
        self.status[idx[esc]] = ESCAPED
        last = (n >= p.max_n) & ~esc
        if np.any(last):
            j = idx[last]
            bounded = self.low[j] >= p.window
            self.status[j[bounded]] = BOUNDED
            rest = j[~bounded]
            if rest.size:
                settled = self._additive(rest)
                self.status[rest[settled]] = ESCAPED
                self.status[rest[~settled]] = MAXED_OUT

    def _additive(self, idx):
        p = self.params
        L = self.ring[idx, self.n[idx] % self.H]
        incs = np.diff(self.tail(idx, SETTLE + 1), axis=1)
        with np.errstate(invalid="ignore"):
            mean = incs.mean(axis=1)
            spread = incs.max(axis=1) - incs.min(axis=1)
            return ((self.pos[idx] >= p.window) & (L > p.bound_ell) & (mean > 0)
                    & (spread <= SETTLE_TOL * mean))

    def run(self):
        """Iterate every point until it stops; returns ``self``."""
        active = np.arange(self.N)
        lost_all = []
        for _ in range(self.params.max_n):
            if not active.size:
                break
            L2, lost = self._step_double(active)
            lost_all.append(active[lost])
            keep = active[~lost]
            self._record(keep, L2[~lost])
            self._decide(keep)
            active = keep[self.status[keep] == RUNNING]
        for i in np.concatenate(lost_all) if lost_all else []:
            self._rerun(int(i), 2 * DOUBLE_BITS)
        return self

    def _reset(self, i):
        self.ring[i] = np.nan
        self.ring[i, 0] = self.L0[i]
        self.n[i] = 0
        self.pos[i] = 0
        self.low[i] = int(self.L0[i] < self.params.bound_ell)
        self.status[i] = RUNNING

    def _rerun(self, i, bits):
        """Follow point ``i`` from its start at increasing precision."""
        idx = np.array([i])
        while bits <= self.params.precision_cap:
            self._reset(i)
            orbit = _MpOrbit(self.nm, self.U0[i], self.L0[i], bits)
            self.bits[i] = bits
            try:
                while self.status[i] == RUNNING:
                    self._record(idx, np.array([orbit.step()]))
                    self._decide(idx)
            except PrecisionLoss:
                bits *= 2
                continue
            self.mp[i] = orbit
            return
        self.status[i] = INDETERMINATE

    def advance(self, i) -> float:
        """One step beyond the stopping point for point ``i``; returns ``ell``.

        Raises PrecisionLoss when the step is not trustworthy.
        """
        idx = np.array([i])
        if i in self.mp:
            Lnew = self.mp[i].step()
        else:
            L2, lost = self._step_double(idx)
            if lost[0]:
                raise PrecisionLoss(math.inf, DOUBLE_BITS)
            Lnew = float(L2[0])
        self._record(idx, np.array([Lnew]))
        return Lnew

    # -- summaries ----------------------------------------------------------

    def rates(self):
        """Escape-rate estimates: geometric mean of the last four ratios.

        ``0`` for bounded orbits and ``nan`` for orbits that are neither
        escaped nor bounded.
        """
        idx = np.arange(self.N)
        t = self.tail(idx, TAIL + 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = (t[:, -1] / t[:, 0]) ** (1.0 / TAIL)
        r = np.where(self.status == ESCAPED, r, np.nan)
        r[self.status == BOUNDED] = 0.0
        return r

    def final_ell(self):
        return self.ring[np.arange(self.N), self.n % self.H]

    def record(self, i) -> OrbitRecord:
        n = int(self.n[i])
        if self.H <= n:
            raise ValueError("history was not kept for this batch")
        ells = [float(x) for x in self.ring[i, :n + 1]]
        status = STATUS_NAMES.get(int(self.status[i]), "MaxedOut")
        rate = float(self.rates()[i]) if status == "Escaped" else None
        return OrbitRecord(ells, status, n, int(self.bits[i]), rate)


# ---------------------------------------------------------------------------
# Single orbits
# ---------------------------------------------------------------------------

def _params(params, **overrides):
    params = params or OrbitParams()
    kw = {k: v for k, v in overrides.items() if v is not None}
    if kw:
        params = OrbitParams(**{**params.__dict__, **kw})
    return params


def iterate(pmap: PolynomialMap, z0, max_n: int | None = None, escape_ell: float | None = None,
            bound_ell: float | None = None, precision_cap: int | None = None,
            params: OrbitParams | None = None) -> OrbitRecord:
    """Follow the orbit of ``z0`` (a point or a :class:`ScaledPoint`).

    Examples
    --------
    >>> from semireg import parse_map
    >>> rec = iterate(parse_map("z1^2, z2^2"), (2, 0.5))
    >>> rec.status, round(rec.ells[3] / math.log(2), 9)
    ('Escaped', 8.0)
    """
    params = _params(params, max_n=max_n, escape_ell=escape_ell, bound_ell=bound_ell,
                     precision_cap=precision_cap)
    if isinstance(z0, ScaledPoint):
        U = np.array([[complex(x) for x in z0.u]])
        L = np.array([z0.log_norm])
    else:
        U, L = _to_scaled(np.asarray(z0, dtype=complex))
    batch = OrbitBatch(pmap, U, L, params, history=True).run()
    return batch.record(0)


def escape_degree(orbit: OrbitRecord) -> float:
    """Multiplicative escape rate: geometric mean of the last four ratios.

    Returns 0 for bounded orbits.
    """
    if orbit.status == "Bounded":
        return 0.0
    if orbit.status != "Escaped":
        raise TooShort(f"orbit ended as {orbit.status}; no escape rate")
    if len(orbit.ells) < TAIL + 1:
        raise TooShort(f"need {TAIL + 1} values of ell, have {len(orbit.ells)}")
    a, b = orbit.ells[-TAIL - 1], orbit.ells[-1]
    if not a > 0:
        raise TooShort("tail starts at or below |z| = 1")
    return (b / a) ** (1.0 / TAIL)


# ---------------------------------------------------------------------------
# Basins
# ---------------------------------------------------------------------------

def _alphas(report) -> np.ndarray:
    alpha = getattr(report, "alpha", None)
    if alpha is None:
        raise MalformedInput("report carries no alpha list (map not semi-regular)")
    return np.array([float(a) for a in alpha])


def match_rates(rates, alphas) -> np.ndarray:
    """Basin labels: ``i`` for ``U_i``, 0 for ``K``, -1 for Indeterminate."""
    rates = np.asarray(rates, dtype=float)
    labels = np.full(rates.shape, INDETERMINATE_LABEL, dtype=np.int64)
    labels[rates == 0] = K_LABEL
    esc = np.isfinite(rates) & (rates > 0)
    if np.any(esc):
        rel = np.abs(rates[esc, None] - alphas[None, :]) / alphas[None, :]
        best = rel.argmin(axis=1)
        ok = rel[np.arange(best.size), best] <= MATCH_TOL
        labels[np.nonzero(esc)[0][ok]] = best[ok] + 1
    return labels


def label_name(label: int) -> str:
    return {K_LABEL: "K", INDETERMINATE_LABEL: "Indeterminate"}.get(int(label), f"U{label}")


@dataclass
class BasinResult:
    labels: np.ndarray
    rates: np.ndarray
    status: np.ndarray
    bits: np.ndarray

    @property
    def indeterminate_fraction(self) -> float:
        return float(np.mean(self.labels == INDETERMINATE_LABEL)) if self.labels.size else 0.0


def classify_batch(pmap: PolynomialMap, report, Z, params: OrbitParams | None = None) -> BasinResult:
    """Basin labels for an ``(N, k)`` array of points."""
    alphas = _alphas(report)
    batch = OrbitBatch.from_points(pmap, Z, params or OrbitParams()).run()
    rates = batch.rates()
    return BasinResult(match_rates(rates, alphas), rates, batch.status.copy(), batch.bits.copy())


def classify(pmap: PolynomialMap, report, z, params: OrbitParams | None = None) -> str:
    """Basin of ``z``: ``"U1"``, ..., ``"Um"``, ``"K"`` or ``"Indeterminate"``."""
    res = classify_batch(pmap, report, np.asarray(z, dtype=complex)[None, :], params)
    return label_name(res.labels[0])


# ---------------------------------------------------------------------------
# Green functions
# ---------------------------------------------------------------------------

@dataclass
class GreenBatch:
    """Partial Green function values for a batch of points.

    ``value`` holds ``inf`` for the infinite marker and ``nan`` where the
    result is indeterminate.
    """

    value: np.ndarray
    residual: np.ndarray
    iterations: np.ndarray
    status: np.ndarray          # strings, see GreenValue
    orbit_status: np.ndarray
    rates: np.ndarray

    def __getitem__(self, j) -> GreenValue:
        return GreenValue(float(self.value[j]), int(self.iterations[j]),
                          float(self.residual[j]), str(self.status[j]))


def green_batch(pmap: PolynomialMap, report, i: int, U, L, tol: float = 1e-12,
                params: OrbitParams | None = None, extra_steps: int = 200,
                raise_nonconvergent: bool = False) -> GreenBatch:
    """``G_i`` at scaled points ``(U, L)``.

    The value is ``ell_n / alpha_i^n`` at the first ``n`` where the increment
    ``|G_n - G_{n-1}|`` is at most ``tol * max(1, G_n)``.  Orbits escaping
    more than 25% faster than ``alpha_i`` get ``inf``; bounded or slower
    ones get 0.
    """
    alphas = _alphas(report)
    if not 1 <= i <= len(alphas):
        raise MalformedInput(f"index {i} outside 1..{len(alphas)}")
    a = float(alphas[i - 1])
    if a <= 1:
        raise MalformedInput("Green functions need alpha_i > 1")
    batch = OrbitBatch(pmap, U, L, params or OrbitParams()).run()
    N = batch.N
    rates = batch.rates()
    value = np.full(N, np.nan)
    residual = np.full(N, np.nan)
    status = np.full(N, "indeterminate", dtype=object)
    value[batch.status == BOUNDED] = 0.0
    residual[batch.status == BOUNDED] = 0.0
    status[batch.status == BOUNDED] = "zero"
    esc = batch.status == ESCAPED
    with np.errstate(invalid="ignore"):
        fast = esc & (rates / a > 1 + MATCH_TOL)
        slow = esc & (rates / a < 1 - MATCH_TOL)
    value[fast], residual[fast], status[fast] = np.inf, 0.0, "infinite"
    value[slow], residual[slow], status[slow] = 0.0, 0.0, "zero"
    same = np.nonzero(esc & ~fast & ~slow)[0]
    if same.size:
        n = batch.n[same].astype(float)
        t = batch.tail(same, 2)
        G = t[:, 1] / a ** n
        inc = np.abs(t[:, 1] - a * t[:, 0]) / a ** n
        for j, idx in enumerate(same):
            g, r = G[j], inc[j]
            steps = 0
            try:
                while r > tol * max(1.0, g) and steps < extra_steps:
                    prev = batch.final_ell()[idx]
                    ell = batch.advance(idx)
                    steps += 1
                    nn = float(batch.n[idx])
                    g = ell / a ** nn
                    r = abs(ell - a * prev) / a ** nn
            except PrecisionLoss:
                r = math.inf
            if r <= tol * max(1.0, g):
                value[idx], residual[idx], status[idx] = g, r, "finite"
            else:
                residual[idx] = r
                if raise_nonconvergent:
                    raise NonConvergent(f"increments of G_{i} did not contract (last {r:.3g})")
    return GreenBatch(value, residual, batch.n.copy(), status, batch.status.copy(), rates)


def green(pmap: PolynomialMap, report, i: int, z, tol: float = 1e-12,
          max_n: int | None = None, params: OrbitParams | None = None) -> GreenValue:
    """Partial Green function ``G_i`` at one point.

    Raises NonConvergent when increments fail to contract.

    Examples
    --------
    >>> from semireg import parse_map
    >>> from semireg.regularity import analyze
    >>> f = parse_map("z1^2, z2^2")
    >>> g = green(f, analyze(f), 1, (2, 1))
    >>> abs(g.value - math.log(2)) < 1e-12, g.status
    (True, 'finite')
    """
    params = _params(params, max_n=max_n)
    if isinstance(z, ScaledPoint):
        U, L = np.array([[complex(x) for x in z.u]]), np.array([z.log_norm])
    else:
        U, L = _to_scaled(np.asarray(z, dtype=complex))
    return green_batch(pmap, report, i, U, L, tol, params, raise_nonconvergent=True)[0]


def green_points(pmap, report, i, Z, tol=1e-12, params=None) -> GreenBatch:
    U, L = _to_scaled(Z)
    return green_batch(pmap, report, i, U, L, tol, params)


def invariance_residual(pmap: PolynomialMap, report, i: int, sample_points,
                        tol: float = 1e-12, params: OrbitParams | None = None):
    """Largest ``|G_i(f(z)) - alpha_i G_i(z)|`` over the samples.

    ``G_i(f(z))`` is computed from an independently evaluated ``f(z)``, not
    by shifting the orbit of ``z``.  Points where either value is
    indeterminate or infinite are skipped; returns ``(residual, used)``.
    """
    from .poly_core import eval_scaled
    a = float(_alphas(report)[i - 1])
    Z = np.asarray(sample_points, dtype=complex)
    U, L = _to_scaled(Z)
    g0 = green_batch(pmap, report, i, U, L, tol, params)
    fU, fL = [], []
    for z in Z:
        try:
            p, _ = eval_scaled(pmap, ScaledPoint.from_point(z))
            fU.append(p.u)
            fL.append(p.log_norm)
        except PrecisionLoss:
            fU.append((0j,) * pmap.k)
            fL.append(math.nan)
    fU, fL = np.array(fU, dtype=complex), np.array(fL, dtype=float)
    ok_f = ~np.isnan(fL)
    g1 = green_batch(pmap, report, i, fU[ok_f], fL[ok_f], tol, params)
    v1 = np.full(len(Z), np.nan)
    v1[ok_f] = g1.value
    v0 = g0.value
    use = np.isfinite(v0) & np.isfinite(v1)
    if not np.any(use):
        return math.nan, 0
    return float(np.max(np.abs(v1[use] - a * v0[use]))), int(use.sum())


def precise_ells(pmap: PolynomialMap, z, steps: int, bits: int = 512) -> list:
    """``ell_0..ell_steps`` of one orbit as ``mpmath`` numbers at ``bits`` precision.

    Stops early (shorter list) if even ``bits`` cannot resolve a step.
    """
    U, L = _to_scaled(np.asarray(z, dtype=complex))
    orbit = _MpOrbit(pmap.numeric, U[0], float(L[0]), bits)
    with mpmath.workprec(bits):
        # exact log-norm of the represented start (max |u_j| may miss 1 by an ulp)
        ells = [orbit.ell + mpmath.log(max(abs(x) for x in orbit.u))]
    for _ in range(steps):
        try:
            orbit.step()
        except PrecisionLoss:
            break
        if orbit.zero:
            break
        ells.append(orbit.ell)
    return ells


def increment_ratios(ells: Sequence, alpha, noise: float = 64 * 2.0 ** -52,
                     tail_ell: float = -math.inf, bits: int | None = None) -> list:
    """Ratios of successive Green increments along an orbit.

    The increment ``G_n - G_{n-1}`` equals ``c_{n-1} / alpha^n`` with
    ``c_n = ell_{n+1} - alpha * ell_n``, so the ratio of consecutive
    increments is ``|c_n| / (alpha |c_{n-1}|)``.  Only pairs whose ``c``
    values both stand above the rounding floor ``noise * ell`` and whose
    first orbit point has ``ell > tail_ell`` are returned.

    For ``mpmath`` input (see :func:`precise_ells`) pass ``bits`` so the
    differences are formed at that precision, with a matching ``noise``.
    """
    if bits is not None:
        with mpmath.workprec(bits):
            return increment_ratios(ells, mpmath.mpf(alpha), noise, tail_ell)
    c = [b - alpha * a for a, b in zip(ells, ells[1:])]
    floor = [noise * abs(b) for b in ells[1:]]
    out = []
    for n in range(1, len(c)):
        if ells[n - 1] <= tail_ell or not ells[n] > 0:
            continue
        if abs(c[n - 1]) > floor[n - 1] and abs(c[n]) > floor[n]:
            out.append(float(abs(c[n]) / (alpha * abs(c[n - 1]))))
    return out


# ---------------------------------------------------------------------------
# Growth at infinity
# ---------------------------------------------------------------------------

def _sphere_points(k, R, params, j):
    """Points of the max-norm sphere ``|z| = R`` with coordinate ``j`` dominant.

    ``params`` packs the dominant phase and, for every other coordinate, a
    log-modulus exponent ``t`` (modulus ``R^t`` clipped to ``t <= 1``) and a
    phase.
    """
    params = np.atleast_2d(params)
    Z = np.empty((params.shape[0], k), dtype=complex)
    Z[:, j] = R * np.exp(1j * params[:, 0])
    logR = math.log(R)
    c = 1
    for jj in range(k):
        if jj == j:
            continue
        t = np.minimum(params[:, c], 1.0)
        Z[:, jj] = np.exp(t * logR + 1j * params[:, c + 1])
        c += 2
    return Z


def _log_ratio(pmap, Z, logR):
    U, L = _to_scaled(Z)
    _, L2, _, m = pmap.numeric.scaled_batch(U, L)
    return np.where(m > 0, L2, -np.inf) / logR


def lojasiewicz_estimate(pmap: PolynomialMap, R: float = 1e6, n_samples: int = 512,
                         descent_steps: int = 200, seed: int = 0, refine: int = 8) -> float:
    """Smallest ``log|f(z)| / log|z|`` found on the sphere ``|z| = R``.

    Samples put one coordinate at modulus ``R`` and draw the others with
    log-uniform modulus in ``[1/R, R]``; the ``refine`` best samples are
    then improved by Nelder-Mead.
    """
    if R < 1e4:
        raise MalformedInput("radius must be at least 1e4")
    k = pmap.k
    rng = np.random.default_rng(seed)
    logR = math.log(R)
    best = math.inf
    for j in range(k):
        P = np.empty((n_samples, 1 + 2 * (k - 1)))
        P[:, 0] = rng.uniform(0, 2 * math.pi, n_samples)
        P[:, 1::2] = rng.uniform(-1, 1, (n_samples, k - 1))
        P[:, 2::2] = rng.uniform(0, 2 * math.pi, (n_samples, k - 1))
        vals = _log_ratio(pmap, _sphere_points(k, R, P, j), logR)
        best = min(best, float(vals.min()))
        if descent_steps <= 0 or k == 1:
            continue
        for start in P[np.argsort(vals)[:refine]]:
            res = minimize(lambda x: float(_log_ratio(pmap, _sphere_points(k, R, x, j), logR)[0]),
                           start, method="Nelder-Mead",
                           options={"maxiter": descent_steps, "xatol": 1e-12, "fatol": 1e-14})
            best = min(best, float(res.fun))
    return best


def escape_radius(pmap: PolynomialMap, factor: float = 1.5, n_samples: int = 256,
                  seed: int = 0, start: float = 2.0, rungs: int = 40) -> float:
    """Smallest radius ``R`` on a doubling ladder with ``|f(z)| >= factor |z|``.

    The condition is checked by sphere sampling (with descent) at ``R`` and
    at the next four rungs; beyond such a radius orbits escape.
    """
    R = start
    for _ in range(rungs):
        if all(_min_growth(pmap, R * 2 ** j, n_samples, seed) >= factor for j in range(5)):
            return R
        R *= 2
    return math.inf


def _min_growth(pmap, R, n_samples, seed):
    k = pmap.k
    rng = np.random.default_rng(seed)
    best = math.inf
    for j in range(k):
        P = np.empty((n_samples, 1 + 2 * (k - 1)))
        P[:, 0] = rng.uniform(0, 2 * math.pi, n_samples)
        P[:, 1::2] = rng.uniform(-3, 1, (n_samples, k - 1))
        P[:, 2::2] = rng.uniform(0, 2 * math.pi, (n_samples, k - 1))
        Z = _sphere_points(k, R, P, j)
        vals = np.abs(pmap.numeric(Z)).max(axis=1) / R
        best = min(best, float(vals.min()))
        for s in P[np.argsort(vals)[:4]]:
            res = minimize(lambda x: float(np.abs(pmap.numeric(_sphere_points(k, R, x, j))).max() / R),
                           s, method="Nelder-Mead", options={"maxiter": 200})
            best = min(best, float(res.fun))
    return best
