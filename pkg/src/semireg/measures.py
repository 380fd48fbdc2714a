"""Green fields on complex slices, Laplacian trace densities and dimension bounds.

A slice varies one coordinate over a rectangle of the complex plane and
holds the others fixed.  Grids are stored image-style: shape ``(ny, nx)``,
row 0 at the top (largest imaginary part), columns left to right.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from .dynamics import OrbitParams, classify_batch, green_points
from .errors import InsufficientSamples, MalformedInput, MBelowOne, TooManyIndeterminate
from .poly_core import PolynomialMap


@dataclass(frozen=True)
class SliceSpec:
    """Rectangle ``center +- (width/2, height/2)`` in coordinate ``coord``.

    ``coord`` is 0-based; ``fixed`` gives the values of the other
    coordinates as ``{index: value}``, missing ones being 0.
    """

    coord: int
    center: complex
    width: float
    height: float
    nx: int
    ny: int
    fixed: tuple = ()           # ((index, value), ...)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise MalformedInput("slice resolution must be at least 2 x 2")
        if not (self.width > 0 and self.height > 0):
            raise MalformedInput("slice width and height must be positive")

    @property
    def xs(self) -> np.ndarray:
        c = complex(self.center)
        return np.linspace(c.real - self.width / 2, c.real + self.width / 2, self.nx)

    @property
    def ys(self) -> np.ndarray:
        """Imaginary parts, top row first."""
        c = complex(self.center)
        return np.linspace(c.imag + self.height / 2, c.imag - self.height / 2, self.ny)

    @property
    def spacing(self) -> tuple:
        return self.width / (self.nx - 1), self.height / (self.ny - 1)

    def points(self, k: int) -> np.ndarray:
        """All pixel points, row-major, as an ``(ny * nx, k)`` array."""
        if not 0 <= self.coord < k:
            raise MalformedInput(f"slice coordinate outside z1..z{k}")
        X, Y = np.meshgrid(self.xs, self.ys)
        Z = np.zeros((self.nx * self.ny, k), dtype=complex)
        for j, v in self.fixed:
            if not 0 <= j < k or j == self.coord:
                raise MalformedInput(f"invalid fixed coordinate z{j + 1}")
            Z[:, j] = complex(v)
        Z[:, self.coord] = (X + 1j * Y).ravel()
        return Z


@dataclass
class GreenField:
    """``G_i`` on a slice: finite values, ``inf`` marker, 0, or ``nan`` (indeterminate)."""

    slice: SliceSpec
    values: np.ndarray
    index: int
    status: np.ndarray = field(repr=False, default=None)

    @property
    def indeterminate(self) -> int:
        return int(np.isnan(self.values).sum())


def green_field(pmap: PolynomialMap, report, i: int, spec: SliceSpec, tol: float = 1e-12,
                params: OrbitParams | None = None) -> GreenField:
    g = green_points(pmap, report, i, spec.points(pmap.k), tol, params)
    shape = (spec.ny, spec.nx)
    return GreenField(spec, g.value.reshape(shape), i, g.status.reshape(shape))


def basin_grid(pmap: PolynomialMap, report, spec: SliceSpec, params: OrbitParams | None = None):
    """Basin labels and escape rates on a slice (both shaped ``(ny, nx)``)."""
    res = classify_batch(pmap, report, spec.points(pmap.k), params)
    shape = (spec.ny, spec.nx)
    return res.labels.reshape(shape), res.rates.reshape(shape), res


@dataclass
class Density:
    """Discrete trace density of ``dd^c G`` on a slice.

    ``values`` is clamped at zero with ``nan`` on masked pixels (borders and
    stencils touching infinite or indeterminate values); ``min_raw`` is the
    most negative value before clamping and ``mass`` the integral of the
    clamped density.
    """

    values: np.ndarray
    min_raw: float
    mass: float
    negative_mass: float
    masked: int


def laplacian_density(field: GreenField, max_indeterminate: float = 0.05) -> Density:
    """Five-point Laplacian of ``G`` divided by ``2 pi``."""
    G = np.asarray(field.values, dtype=float)
    if np.isnan(G).mean() >= max_indeterminate:
        raise TooManyIndeterminate(
            f"{np.isnan(G).mean():.1%} of pixels are indeterminate")
    hx, hy = field.slice.spacing
    out = np.full(G.shape, np.nan)
    c = G[1:-1, 1:-1]
    lap = ((G[1:-1, 2:] + G[1:-1, :-2] - 2 * c) / hx ** 2
           + (G[2:, 1:-1] + G[:-2, 1:-1] - 2 * c) / hy ** 2) / (2 * math.pi)
    ok = (np.isfinite(c) & np.isfinite(G[1:-1, 2:]) & np.isfinite(G[1:-1, :-2])
          & np.isfinite(G[2:, 1:-1]) & np.isfinite(G[:-2, 1:-1]))
    with np.errstate(invalid="ignore"):
        inner = np.where(ok, lap, np.nan)
    out[1:-1, 1:-1] = inner
    finite = np.isfinite(out)
    min_raw = float(out[finite].min()) if finite.any() else 0.0
    neg = float(-np.where(finite & (out < 0), out, 0).sum() * hx * hy)
    clamped = np.where(finite, np.maximum(out, 0), np.nan)
    mass = float(np.nansum(clamped) * hx * hy)
    return Density(clamped, min_raw, mass, neg, int((~finite).sum()))


# ---------------------------------------------------------------------------
# Dimension diagnostics
# ---------------------------------------------------------------------------

def lyapunov_norm(pmap: PolynomialMap, cloud, n: int = 20, bound: float | None = None) -> float:
    """Largest ``||Df^n(z)||^(1/n)`` over the cloud (2-norm).

    The Jacobian product is renormalized after every step and the log
    norms are accumulated, so long products never overflow.  ``K`` is
    forward invariant, so an orbit that leaves the ball of radius ``bound``
    (default twice the cloud radius, at least 2) has drifted off ``K``
    through rounding and is dropped.
    """
    if n < 10:
        raise MalformedInput("need n >= 10")
    Z = np.asarray(getattr(cloud, "points", cloud), dtype=complex)
    if Z.size == 0:
        raise MalformedInput("empty cloud")
    N, k = Z.shape
    if bound is None:
        bound = 2 * max(1.0, float(np.abs(Z).max()))
    M = np.broadcast_to(np.eye(k, dtype=complex), (N, k, k)).copy()
    logs = np.zeros(N)
    alive = np.all(np.isfinite(Z), axis=1)
    z = np.where(alive[:, None], Z, 0)
    nm = pmap.numeric
    for _ in range(n):
        J = nm.jacobian(z)
        M = J @ M
        alive &= np.all(np.isfinite(M), axis=(1, 2))
        M[~alive] = np.eye(k)
        s = np.linalg.norm(M, ord=2, axis=(1, 2))
        alive &= s > 0
        s[~alive] = 1.0
        logs += np.log(s)
        M /= s[:, None, None]
        with np.errstate(over="ignore", invalid="ignore"):
            z = nm(z)
        alive &= np.all(np.abs(z) <= bound, axis=1)
        z[~alive] = 0
    if not alive.any():
        raise InsufficientSamples("every orbit left the bounding ball")
    return float(np.exp((logs[alive] / n).max()))


@dataclass(frozen=True)
class DimensionReport:
    """Holder and dimension bounds derived from the growth constant ``M_hat``."""

    M_hat: float
    a_bounds: tuple
    mu_bound: float
    identity_residual: float
    sizes: tuple
    samples: int = 0
    n: int = 0

    def to_dict(self) -> dict:
        return {"M_hat": self.M_hat, "a_bounds": list(self.a_bounds),
                "mu_bound": self.mu_bound, "identity_residual": self.identity_residual,
                "block_sizes": list(self.sizes), "samples": self.samples, "n": self.n}


def dimension_report(report, M_hat: float, samples: int = 0, n: int = 0) -> DimensionReport:
    """``a_i = log alpha_i / log M`` and ``mu_bound = log d_t / log M``.

    ``d_t`` is the product ``prod alpha_i^(l_i - l_{i-1})``, so
    ``mu_bound = sum (l_i - l_{i-1}) a_i``; the residual of that identity is
    attached.
    """
    if not M_hat - 1 > 1e-9:
        raise MBelowOne(f"M_hat = {M_hat!r} does not exceed 1")
    if report.alpha is None:
        raise MalformedInput("report carries no alpha list")
    logM = math.log(M_hat)
    sizes = report.blocks.sizes
    a = tuple(math.log(float(x)) / logM for x in report.alpha)
    d_t = Fraction(1)
    for x, s in zip(report.alpha, sizes):
        d_t *= Fraction(x) ** s
    mu = math.log(d_t.numerator) - math.log(d_t.denominator)
    mu /= logM
    resid = abs(mu - sum(s * x for s, x in zip(sizes, a)))
    return DimensionReport(M_hat, a, mu, resid, tuple(sizes), samples, n)


@dataclass(frozen=True)
class HolderFit:
    slope: float
    stderr: float
    ci: tuple
    samples: int


def holder_diagnostic(pmap: PolynomialMap, report, i: int, cloud, n_samples: int = 2000,
                      seed: int = 0, shell: tuple = (1e-4, 1e-1), tol: float = 1e-12) -> HolderFit:
    """Regression slope of ``log G_i`` against ``log`` (distance to the cloud).

    Samples are cloud points pushed off in a random direction by a distance
    drawn log-uniformly from ``shell``.  Only samples with ``0 < G_i < 1``
    enter the fit; the 95% interval uses the normal quantile.
    """
    P = np.asarray(getattr(cloud, "points", cloud), dtype=complex)
    if len(P) == 0 or n_samples < 1:
        raise InsufficientSamples("empty cloud or shell sample")
    rng = np.random.default_rng(seed)
    base = P[rng.integers(0, len(P), n_samples)]
    d = rng.standard_normal(base.shape) + 1j * rng.standard_normal(base.shape)
    d /= np.linalg.norm(d, axis=1)[:, None]
    r = np.exp(rng.uniform(math.log(shell[0]), math.log(shell[1]), n_samples))
    Z = base + r[:, None] * d
    g = green_points(pmap, report, i, Z, tol).value
    tree = cKDTree(np.concatenate([P.real, P.imag], axis=1))
    dist, _ = tree.query(np.concatenate([Z.real, Z.imag], axis=1))
    use = np.isfinite(g) & (g > 0) & (g < 1) & (dist > 0)
    if use.sum() < 10:
        raise InsufficientSamples(f"only {int(use.sum())} usable shell samples")
    fit = stats.linregress(np.log(dist[use]), np.log(g[use]))
    half = 1.96 * fit.stderr
    return HolderFit(float(fit.slope), float(fit.stderr),
                     (float(fit.slope - half), float(fit.slope + half)), int(use.sum()))
