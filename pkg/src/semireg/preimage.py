"""Preimages, topological degree and equilibrium-measure sampling in C^2.

Solving ``f(z) = w`` eliminates ``z2`` once and for all: the resultant of
``P1 - w1`` and ``P2 - w2`` with respect to ``z2`` is computed exactly as a
polynomial in ``(z1, w1, w2)`` and only specialized numerically for each
target.  Its roots give the ``z1`` coordinates of the preimages; ``z2`` is
recovered from the component of lower ``z2``-degree and every candidate is
polished by two-dimensional Newton steps and checked against ``f(z) = w``.

All solvers are vectorized over many targets at once, which is what makes
inverse-iteration sampling of the equilibrium measure affordable.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.cluster.hierarchy import linkage, to_tree
from scipy.spatial.distance import pdist

from .errors import DegenerateTarget, Inconsistent, MalformedInput, MalformedMap, NonConvergent
from .poly_core import NumericPolys, Polynomial, PolynomialMap
from .resultants import det_bareiss, sylvester_matrix

EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# Univariate roots
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootSet:
    """Distinct roots with multiplicities and relative residuals.

    ``residuals[j]`` is ``|p(r)| / sum_i |a_i| |r|^i``, the backward error
    of root ``j``.
    """

    roots: np.ndarray
    multiplicities: np.ndarray
    residuals: np.ndarray

    @property
    def count(self) -> int:
        return int(self.multiplicities.sum())

    def expanded(self) -> np.ndarray:
        return np.repeat(self.roots, self.multiplicities)


def _trim(coeffs):
    c = np.asarray(coeffs, dtype=complex)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        raise MalformedInput("zero polynomial has no roots")
    return c[nz[0]:]


def _horner(C, X):
    """Values and derivatives of polynomials ``C`` (rows, highest first) at ``X``."""
    p = np.zeros(X.shape, dtype=complex)
    dp = np.zeros(X.shape, dtype=complex)
    for j in range(C.shape[1]):
        dp = dp * X + p
        p = p * X + C[:, j:j + 1]
    return p, dp


def _scale(C, X):
    """``sum_i |a_i| |x|^i`` for the backward-error estimate."""
    A = np.abs(C)
    ax = np.abs(X)
    s = np.zeros(X.shape)
    for j in range(C.shape[1]):
        s = s * ax + A[:, j:j + 1]
    return s


def _initial_guesses(C: np.ndarray) -> np.ndarray:
    """Starting points on circles read off the Newton polygon of ``|a_i|``.

    The upper convex hull of ``(i, log |a_i|)`` has slope ``s_t`` on
    ``[t, t + 1]``, and about one root has modulus ``exp(-s_t)`` for each
    ``t``.  The slope is ``min_{j <= t} max_{k > t}`` of the chord slopes,
    which vectorizes over rows.  Angles follow the golden ratio so that any
    run of points on one circle is spread out.
    """
    n = C.shape[1] - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.log(np.abs(C[:, ::-1]))                  # y[:, i] for x^i
        i = np.arange(n + 1)
        S = (y[:, None, :] - y[:, :, None]) / (i[None, :] - i[:, None])  # S[j, k]
    S = np.where(i[None, None, :] > i[None, :, None], np.nan_to_num(S, nan=-np.inf), -np.inf)
    # R[j, t] = max over k > t of S[j, k]
    R = np.maximum.accumulate(S[:, :, ::-1], axis=2)[:, :, ::-1][:, :, 1:]
    # slope[t] = min over j <= t of R[j, t]
    R = np.where(i[None, :-1, None] <= i[None, None, :-1], R[:, :-1, :], np.inf)
    slope = R.min(axis=1)
    with np.errstate(over="ignore"):
        u = np.exp(-slope)
    pos = np.where(u > 0, u, np.inf).min(axis=1, keepdims=True)
    u = np.where(u > 0, u, 1e-3 * np.where(np.isfinite(pos), pos, 1.0))
    ang = 2 * np.pi * 0.6180339887498949 * np.arange(n) + 0.4
    return u * np.exp(1j * ang)[None, :]


def aberth_batch(C, tol: float = 1e-14, max_iter: int = 500):
    """All roots of each row of ``C`` (leading coefficients nonzero).

    Aberth-Ehrlich simultaneous iteration from Newton-polygon starting
    circles (:func:`_initial_guesses`).  A root stops moving once its
    correction falls below ``tol * (1 + |x|)`` or its value is at the
    rounding floor.  Returns ``(roots, converged)`` with shapes ``(B, n)``
    and ``(B,)``.
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    C = C / C[:, :1]
    B, n = C.shape[0], C.shape[1] - 1
    if n == 0:
        return np.zeros((B, 0), dtype=complex), np.ones(B, dtype=bool)
    X = _initial_guesses(C)
    done = np.zeros((B, n), dtype=bool)
    eye = np.eye(n, dtype=bool)
    for _ in range(max_iter):
        p, dp = _horner(C, X)
        floor = 4 * EPS * _scale(C, X)
        at_floor = np.abs(p) <= floor
        with np.errstate(all="ignore"):
            ratio = p / dp
            diff = X[:, :, None] - X[:, None, :]
            inv = np.where(eye[None], 0, 1.0 / diff)
            corr = ratio / (1 - ratio * inv.sum(axis=2))
        corr = np.where(at_floor | ~np.isfinite(corr), 0, corr)
        X = X - corr
        done = at_floor | (np.abs(corr) <= tol * (1 + np.abs(X)))
        if done.all():
            break
    return X, done.all(axis=1)


def _clusters(x: np.ndarray, radius: float) -> list:
    """Index groups of single-linkage clusters at distance ``radius * (1 + |x|)``."""
    n = len(x)
    near = np.abs(x[:, None] - x[None, :]) <= radius * (1 + np.abs(x))[:, None]
    label = np.arange(n)
    changed = True
    while changed:
        new = np.where(near, label[None, :], n).min(axis=1)
        changed = bool(np.any(new != label))
        label = new
    return [np.flatnonzero(label == lab) for lab in np.unique(label)]


def _unresolved_groups(c: np.ndarray, x: np.ndarray) -> list:
    """Maximal single-linkage subtrees of roots that double precision cannot separate.

    A root's forward error is bounded by the rounding floor of ``p`` over
    ``|p'|``.  Members of a resolved cluster have bounds far below the
    cluster's spread; for the scattered copies of a multiple zero the bound
    is comparable to the spread.
    """
    if len(x) < 2:
        return []
    C = c[None, :]
    _, dp = _horner(C, x[None, :])
    with np.errstate(divide="ignore"):
        err = 4 * EPS * _scale(C, x[None, :])[0] / np.abs(dp[0])
    tree = to_tree(linkage(pdist(np.column_stack([x.real, x.imag])), "single"))
    groups, stack = [], [tree]
    while stack:
        node = stack.pop()
        if node.is_leaf():
            continue
        g = np.array(node.pre_order())
        spread = np.abs(x[g] - x[g].mean()).max()
        if err[g].min() >= 0.1 * spread:
            groups.append(g)
        else:
            stack += [node.get_left(), node.get_right()]
    return groups


def _recenter(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Collapse unresolved clusters of ``x`` onto their well-conditioned centroid.

    The ``s`` computed roots of an ``s``-fold zero scatter over a disc of
    radius about ``eps**(1/s)`` on which ``p`` sits at the rounding floor, so
    their individual positions carry no information.  The centroid is the
    simple zero of ``p^(s-1)`` nearby.
    """
    x = x.copy()
    for g in _unresolved_groups(c, x):
        s = g.size
        m = x[g].mean()
        spread = np.abs(x[g] - m).max()
        d = c.copy()
        for _ in range(s - 1):
            d = np.polyder(d)
        t = m
        for _ in range(3):
            p, dp = _horner(d[None, :], np.array([[t]]))
            if dp[0, 0] == 0 or not np.isfinite(p[0, 0] / dp[0, 0]):
                break
            t = t - p[0, 0] / dp[0, 0]
        if abs(t - m) <= spread:
            x[g] = t
    return x


def _refine_structure(c: np.ndarray, reps: np.ndarray, mult: np.ndarray,
                      iters: int = 6) -> np.ndarray:
    """Gauss-Newton fit of ``prod (x - r_j)^(m_j)`` to ``p`` with fixed multiplicities.

    Polishing roots one at a time leaves an ill-conditioned root (one close
    to a multiple root, say) off by ``eps / |p'|``, and the roots then
    disagree with the coefficients.  Fitting all of them against the
    weighted coefficient vector keeps sum, product and the other symmetric
    functions at rounding level.  A step is kept only if it lowers the fit.
    Returns the roots and the final weighted coefficient gap.
    """
    a = c / c[0]
    n = len(a) - 1
    w = 1 / np.maximum(1, np.abs(a[1:]))

    def gap(r):
        return (np.poly(np.repeat(r, mult)) - a)[1:]

    r = reps.copy()
    res = gap(r)
    best = np.linalg.norm(w * res)
    for _ in range(iters):
        if not best > 0:
            break
        full = np.repeat(r, mult)
        starts = np.concatenate([[0], np.cumsum(mult)[:-1]])
        J = np.empty((n, len(r)), dtype=complex)
        for j, i in enumerate(starts):
            # d/dr_j prod (x - r)^m = -m_j prod / (x - r_j)
            J[:, j] = -mult[j] * np.poly(np.delete(full, i))
        step = np.linalg.lstsq(w[:, None] * J, w * res, rcond=None)[0]
        trial = r - step
        res_t = gap(trial)
        fit = np.linalg.norm(w * res_t)
        if not fit < best:
            break
        r, res, best = trial, res_t, fit
    return r, float(best)


def roots(coeffs, tol: float = 1e-10, max_iter: int = 500) -> RootSet:
    """Roots of one polynomial given by coefficients (highest power first).

    Computed roots that double precision cannot separate are first
    collapsed onto their centroid (see :func:`_recenter`); roots closer than
    ``tol**0.5 * (1 + |x|)`` are then merged into one root with multiplicity.
    The distinct roots are finally polished together against the
    coefficients (see :func:`_refine_structure`).

    Examples
    --------
    >>> rs = roots([1, 0, -1])
    >>> sorted(np.round(rs.roots.real, 12).tolist()), rs.multiplicities.tolist()
    ([-1.0, 1.0], [1, 1])
    """
    c = _trim(coeffs)
    n = len(c) - 1
    if n < 1:
        raise MalformedInput("polynomial must have degree at least 1")
    zeros = n - int(np.flatnonzero(c)[-1])      # exact roots at the origin
    if zeros == n:
        return RootSet(np.zeros(1, dtype=complex), np.array([n]), np.zeros(1))
    if zeros:
        inner = roots(c[:n + 1 - zeros], tol, max_iter)
        at0 = np.abs(inner.roots) == 0
        return RootSet(np.concatenate([inner.roots[~at0], [0j]]),
                       np.concatenate([inner.multiplicities[~at0],
                                       [zeros + int(inner.multiplicities[at0].sum())]]),
                       np.concatenate([inner.residuals[~at0], [0.0]]))
    X, ok = aberth_batch(c[None, :], tol=min(tol, 1e-14), max_iter=max_iter)
    if not ok[0]:
        raise NonConvergent(f"root finder did not converge in {max_iter} iterations")
    best = None
    # the collapsed candidate wins unless the raw roots fit p clearly better
    for x, slack in ((_recenter(c, X[0]), 10.0), (X[0], 1.0)):
        groups = _clusters(x, math.sqrt(tol))
        mult = np.array([g.size for g in groups], dtype=np.int64)
        reps, fit = _refine_structure(c, np.array([x[g].mean() for g in groups]), mult)
        if best is None or fit * slack < best[2]:
            best = (reps, mult, fit * slack)
    reps, mult, _ = best
    C = c[None, :]
    p, _ = _horner(C, reps[None, :])
    unit = np.maximum(np.abs(reps), 1)[None, :]
    res = np.abs(p[0]) / _scale(C, unit)[0]
    return RootSet(reps, mult, res)


# ---------------------------------------------------------------------------
# Elimination
# ---------------------------------------------------------------------------

def _lift(p: Polynomial) -> Polynomial:
    """``P(z1, z2)`` as a polynomial in ``(z1, z2, w1, w2)``."""
    return Polynomial(4, {(e[0], e[1], 0, 0): c for e, c in p.items()})


def _drop_z2(p: Polynomial) -> Polynomial:
    return Polynomial(3, {(e[0], e[2], e[3]): c for e, c in p.items()})


class Eliminator:
    """Exact elimination of ``z2`` from ``f(z) = w`` for a map of ``C^2``.

    Attributes
    ----------
    resultant : Polynomial
        ``Res_{z2}(P1 - w1, P2 - w2)`` in variables ``(z1, w1, w2)``.
    degree : int
        Its degree in ``z1``.
    """

    def __init__(self, pmap: PolynomialMap):
        if pmap.k != 2:
            raise MalformedInput("preimages are computed for maps of C^2 only")
        self.map = pmap
        eqs = [_lift(pmap[j]) - Polynomial.variable(4, 2 + j) for j in range(2)]
        degs = [e.degree_in(1) for e in eqs]
        if max(degs) < 1:
            raise MalformedMap("map does not depend on z2; it is not proper")
        cols = []
        for e, d in zip(eqs, degs):
            cof = e.coefficients_in(1)
            cols.append([_drop_z2(cof.get(p, Polynomial(4))) for p in range(d, -1, -1)])
        M = sylvester_matrix(cols[0], cols[1], Polynomial(3))
        self.resultant = det_bareiss(M) if M else Polynomial.constant(3, 1)
        if self.resultant.is_zero:
            raise MalformedMap("components share a factor; the map is not proper")
        self.degree = self.resultant.degree_in(0)
        if self.degree < 1:
            raise MalformedMap("resultant does not involve z1; the map is not proper")
        cof = self.resultant.coefficients_in(0)
        self._rcoef = NumericPolys([cof.get(p, Polynomial(3)) for p in range(self.degree, -1, -1)])
        # component used to recover z2: lowest positive z2-degree
        order = sorted((d, j) for j, d in enumerate(degs) if d >= 1)
        self.zdeg = [degs[j] for _, j in order]
        self.order = [j for _, j in order]
        self._zcoef = []
        for j in self.order:
            cof = pmap[j].coefficients_in(1)
            self._zcoef.append(NumericPolys([cof.get(p, Polynomial(2))
                                             for p in range(degs[j], -1, -1)]))
        self.numeric = pmap.numeric

    def specialize(self, W):
        """Coefficients of the resultant in ``z1`` at targets ``W`` (shape ``(B, 2)``)."""
        W = np.atleast_2d(np.asarray(W, dtype=complex))
        Z3 = np.concatenate([np.zeros((W.shape[0], 1), dtype=complex), W], axis=1)
        return self._rcoef(Z3)

    def solve(self, W, tol: float = 1e-8):
        """Candidate preimages for each target.

        Returns ``(points, valid, degenerate)``: ``points`` has shape
        ``(B, M, 2)``; ``valid`` flags candidates with
        ``|f(z) - w| <= tol * (1 + |w|)``; ``degenerate`` flags targets
        whose resultant loses degree in ``z1``.
        """
        W = np.atleast_2d(np.asarray(W, dtype=complex))
        B = W.shape[0]
        C = self.specialize(W)
        scale = np.abs(C).max(axis=1)
        degenerate = np.abs(C[:, 0]) <= 1e-12 * scale
        C = np.where(degenerate[:, None], np.eye(1, C.shape[1], dtype=complex), C)
        Z1, _ = aberth_batch(C)
        D = self.degree
        pts, valid = None, None
        for j, e, zc in zip(self.order, self.zdeg, self._zcoef):
            # coefficients in z2 at every z1 root
            flat = Z1.reshape(-1)
            cz = zc(np.stack([flat, np.zeros_like(flat)], axis=1))
            cz[:, -1] -= np.repeat(W[:, j], D)
            lead_ok = np.abs(cz[:, 0]) > 1e-12 * np.abs(cz).max(axis=1)
            cz = np.where(lead_ok[:, None], cz, np.eye(1, cz.shape[1], dtype=complex))
            Z2, _ = aberth_batch(cz)
            P = np.empty((B * D, e, 2), dtype=complex)
            P[:, :, 0] = flat[:, None]
            P[:, :, 1] = Z2
            P[~lead_ok] = np.nan
            P = P.reshape(B, D * e, 2)
            P = self._polish(P, W)
            ok = self._residual_ok(P, W, tol)
            if pts is None:
                pts, valid = P, ok
            else:
                pts = np.concatenate([pts, P], axis=1)
                valid = np.concatenate([valid, ok], axis=1)
            if np.all(ok.any(axis=1) | degenerate):
                break
        return pts, valid, degenerate

    def _polish(self, P, W, steps: int = 3):
        flat = P.reshape(-1, 2)
        Wr = np.repeat(W, P.shape[1], axis=0)
        good = np.all(np.isfinite(flat), axis=1)
        x = flat[good]
        w = Wr[good]
        for _ in range(steps):
            F = self.numeric(x) - w
            J = self.numeric.jacobian(x)
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            with np.errstate(all="ignore"):
                d0 = (J[:, 1, 1] * F[:, 0] - J[:, 0, 1] * F[:, 1]) / det
                d1 = (-J[:, 1, 0] * F[:, 0] + J[:, 0, 0] * F[:, 1]) / det
            step = np.stack([d0, d1], axis=1)
            ok = np.all(np.isfinite(step), axis=1) & (np.abs(step).max(axis=1) < 1 + np.abs(x).max(axis=1))
            x = np.where(ok[:, None], x - step, x)
        out = flat.copy()
        out[good] = x
        return out.reshape(P.shape)

    def _residual_ok(self, P, W, tol):
        flat = P.reshape(-1, 2)
        good = np.all(np.isfinite(flat), axis=1)
        res = np.full(flat.shape[0], np.inf)
        Wr = np.repeat(W, P.shape[1], axis=0)
        res[good] = np.abs(self.numeric(flat[good]) - Wr[good]).max(axis=1)
        lim = tol * (1 + np.abs(Wr).max(axis=1))
        return (res <= lim).reshape(P.shape[:2])


@lru_cache(maxsize=32)
def eliminator(pmap: PolynomialMap) -> Eliminator:
    return Eliminator(pmap)


def _distinct(points, valid, tol=1e-6):
    """Indices of distinct valid candidates and how often each repeats."""
    idx = np.nonzero(valid)[0]
    keep, counts = [], []
    for j in idx:
        p = points[j]
        for t, q in enumerate(keep):
            if np.max(np.abs(points[q] - p)) <= tol * (1 + np.max(np.abs(p))):
                counts[t] += 1
                break
        else:
            keep.append(j)
            counts.append(1)
    return keep, counts


@dataclass(frozen=True)
class PreimageSet:
    """Preimages of one target with multiplicities and residuals."""

    target: tuple
    points: np.ndarray
    multiplicities: np.ndarray
    residuals: np.ndarray

    @property
    def count(self) -> int:
        return int(self.multiplicities.sum())


def solve_preimages(pmap: PolynomialMap, w, tol: float = 1e-8) -> PreimageSet:
    """Preimages of ``w`` with multiplicities.

    A ``z1`` value that is a ``mu``-fold root of the resultant and carries
    ``c`` distinct points contributes ``mu`` in total: each point counts
    once and the first absorbs any excess.

    Raises DegenerateTarget when the resultant drops degree at ``w``.
    """
    el = eliminator(pmap)
    W = np.asarray(w, dtype=complex).reshape(1, 2)
    P, valid, degenerate = el.solve(W, tol)
    if degenerate[0]:
        raise DegenerateTarget("resultant loses degree in z1 at this target")
    keep, _ = _distinct(P[0], valid[0])
    pts = P[0, keep] if keep else np.zeros((0, 2), dtype=complex)
    # multiplicity from the z1 root structure
    rs = roots(el.specialize(W)[0])
    mult = np.ones(len(pts), dtype=np.int64)
    for r, mu in zip(rs.roots, rs.multiplicities):
        on = [j for j, p in enumerate(pts) if abs(p[0] - r) <= 1e-5 * (1 + abs(r))]
        if on and mu > len(on):
            mult[on[0]] += mu - len(on)
    res = np.abs(pmap.numeric(pts) - W).max(axis=1) if len(pts) else np.zeros(0)
    return PreimageSet(tuple(complex(x) for x in W[0]), pts, mult, res)


def preimages(pmap: PolynomialMap, w, tol: float = 1e-8) -> np.ndarray:
    """Preimages of ``w`` as an ``(n, 2)`` array, repeated by multiplicity.

    Examples
    --------
    >>> from semireg import parse_map
    >>> pts = preimages(parse_map("z1^2, z1 + 2*z2"), (4, 10))
    >>> sorted(np.round(pts.real, 9).tolist())
    [[-2.0, 6.0], [2.0, 4.0]]
    """
    s = solve_preimages(pmap, w, tol)
    return np.repeat(s.points, s.multiplicities, axis=0)


def _random_targets(rng, n, scale=2.0):
    return scale * (rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2)))


def topological_degree(pmap: PolynomialMap, trials: int = 20, seed: int = 0,
                       retries: int = 3, return_counts: bool = False):
    """Preimage count of random targets (modal value).

    A target whose count disagrees with the first one is replaced by a fresh
    target up to ``retries`` times; persistent disagreement raises
    Inconsistent.
    """
    rng = np.random.default_rng(seed)
    counts = []
    for _ in range(trials):
        for attempt in range(retries + 1):
            w = _random_targets(rng, 1)[0]
            try:
                c = solve_preimages(pmap, w).count
            except DegenerateTarget:
                continue
            if not counts or c == counts[0] or attempt == retries:
                break
        else:
            raise Inconsistent("every retry hit a degenerate target")
        counts.append(c)
    values, freq = np.unique(counts, return_counts=True)
    if len(values) > 1:
        raise Inconsistent(f"preimage counts disagree across targets: {sorted(set(counts))}")
    degree = int(values[freq.argmax()])
    return (degree, counts) if return_counts else degree


# ---------------------------------------------------------------------------
# Equilibrium measure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureCloud:
    """Points approximating the equilibrium measure, with provenance."""

    points: np.ndarray
    seed: int
    burn_in: int
    chain_length: int
    chains: int
    map_hash: str

    def __len__(self):
        return len(self.points)


def map_hash(pmap: PolynomialMap) -> str:
    from .map_parser import format_map
    return hashlib.sha256(format_map(pmap).encode()).hexdigest()[:16]


def inverse_step(el: Eliminator, X, rng, tol: float = 1e-8, max_restarts: int = 8):
    """Move every state to a uniformly chosen preimage.

    Duplicated candidates (a repeated ``z1`` root seen twice) are weighted
    by the inverse of their copy count so that the choice is uniform over
    distinct preimages.  States with a degenerate target or no valid
    candidate are restarted from a random point.
    """
    X = np.array(X, dtype=complex)
    B = X.shape[0]
    out = np.empty_like(X)
    todo = np.arange(B)
    for _ in range(max_restarts):
        P, valid, degenerate = el.solve(X[todo], tol)
        M = P.shape[1]
        # weights: 1/(copies within the same target)
        w = valid.astype(float)
        flat = P
        diff = np.abs(flat[:, :, None, :] - flat[:, None, :, :]).max(axis=3)
        size = 1 + np.abs(flat).max(axis=2)
        same = (diff <= 1e-6 * size[:, :, None]) & valid[:, None, :] & valid[:, :, None]
        copies = np.maximum(same.sum(axis=2), 1)
        w = w / copies
        w[degenerate] = 0
        tot = w.sum(axis=1)
        ok = tot > 0
        u = rng.random(todo.size) * np.where(ok, tot, 1)
        cum = np.cumsum(w, axis=1)
        pick = np.minimum((cum < u[:, None]).sum(axis=1), M - 1)
        chosen = P[np.arange(todo.size), pick]
        out[todo[ok]] = chosen[ok]
        todo = todo[~ok]
        if not todo.size:
            return out
        X[todo] = _random_targets(rng, todo.size, 1.0)
    raise DegenerateTarget(f"{todo.size} chains found no valid preimage")


def equilibrium_sample(pmap: PolynomialMap, n_points: int = 10_000, burn_in: int = 30,
                       seed: int = 0, chains: int = 256, tol: float = 1e-8) -> MeasureCloud:
    """Sample the equilibrium measure by random inverse orbits.

    ``chains`` independent chains start from random points, take
    ``burn_in`` discarded steps and then record one state per step until
    ``n_points`` states are collected.  Each chain draws from its own
    stream spawned from ``seed``; only the first chains' last states are
    dropped to hit ``n_points`` exactly, so results are reproducible.
    """
    if n_points < 1:
        raise MalformedInput("n_points must be positive")
    el = eliminator(pmap)
    chains = max(1, min(chains, n_points))
    length = -(-n_points // chains)
    ss = np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss.spawn(1)[0])
    X = _random_targets(rng, chains, 1.0)
    for _ in range(burn_in):
        X = inverse_step(el, X, rng, tol)
    states = np.empty((length, chains, 2), dtype=complex)
    for t in range(length):
        X = inverse_step(el, X, rng, tol)
        states[t] = X
    # chain-major order keeps each chain contiguous
    pts = states.transpose(1, 0, 2).reshape(-1, 2)[:n_points]
    return MeasureCloud(pts, seed, burn_in, length, chains, map_hash(pmap))


def pushforward_tv(pmap: PolynomialMap, cloud, bins: int = 32) -> float:
    """Total-variation distance between a cloud and its image under ``f``.

    Both are projected to ``(Re z1, Re z2)`` and binned on a ``bins x bins``
    grid over their common bounding box.
    """
    P = np.asarray(getattr(cloud, "points", cloud), dtype=complex)
    Q = pmap.numeric(P)
    A = np.stack([P[:, 0].real, P[:, 1].real], axis=1)
    Bq = np.stack([Q[:, 0].real, Q[:, 1].real], axis=1)
    finite = np.all(np.isfinite(Bq), axis=1)
    lo = np.minimum(A.min(axis=0), Bq[finite].min(axis=0))
    hi = np.maximum(A.max(axis=0), Bq[finite].max(axis=0))
    rng = [(lo[0], hi[0]), (lo[1], hi[1])]
    h1, _, _ = np.histogram2d(A[:, 0], A[:, 1], bins=bins, range=rng)
    h2, _, _ = np.histogram2d(Bq[finite, 0], Bq[finite, 1], bins=bins, range=rng)
    h1 /= len(A)
    h2 /= len(Bq)      # points sent out of range count as lost mass
    return 0.5 * float(np.abs(h1 - h2).sum() + (1 - h2.sum()))
