"""Command-line interface: ``semireg <subcommand> MAP [options]``.

Subcommands
-----------
analyze    regularity report as JSON
classify   basin labels on a slice, PPM image plus JSON summary
green      partial Green function on a slice, CSV or PGM
measure    equilibrium-measure cloud as CSV, optional density PGM
degree     topological degree from preimage counts (JSON)
loja       Lojasiewicz exponent estimate (JSON)
dimension  growth constant and dimension bounds (JSON)

``MAP`` is a map file, or the name of a bundled example (``F0`` ... ``F3``,
``example32_f``, ``example32_g``, with or without ``.map``).

Exit codes: 0 success, 1 computation failed, 2 invalid input,
3 more than half of the results are Indeterminate.

Randomness
----------
Stochastic subcommands (``measure``, ``degree``, ``loja``, ``dimension``)
need ``--seed S`` with ``0 <= S < 2**64``, or ``--entropy`` to draw one from
the OS (the drawn seed is echoed in the output).  Every random stream is a
PCG64 generator spawned from ``numpy.random.SeedSequence(S)``.

Image formats
-------------
PGM is binary ``P5`` with maxval 255, rows top to bottom.  Green values map
to gray as: 0 for ``G = 0``, ``1 + round(252 * G / Gmax)`` for finite
positive ``G``, 254 for the infinite marker and 255 for Indeterminate.
PPM is binary ``P6``; ``U_i`` uses ``PALETTE[(i - 1) % 8]``, ``K`` is black
and Indeterminate white.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (INDETERMINATE_LABEL, K_LABEL, OrbitParams, lojasiewicz_estimate,
                       label_name)
from .errors import (DegenerateTarget, InsufficientSamples, MalformedInput, MalformedMap,
                     SemiregError, TooManyIndeterminate, InvalidPi, ParseError, MBelowOne)
from .map_parser import format_map, parse_map
from .measures import SliceSpec, basin_grid, dimension_report, green_field, lyapunov_norm
from .preimage import equilibrium_sample, topological_degree
from .regularity import analyze, _num

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_INDETERMINATE = 0, 1, 2, 3

# Okabe-Ito colors, U_1 first
PALETTE = (
    (230, 159, 0),
    (86, 180, 233),
    (0, 158, 115),
    (240, 228, 66),
    (0, 114, 178),
    (213, 94, 0),
    (204, 121, 167),
    (128, 128, 128),
)
K_COLOR = (0, 0, 0)
INDETERMINATE_COLOR = (255, 255, 255)

STOCHASTIC = {"measure", "degree", "loja", "dimension"}
SEED_LIMIT = 2 ** 64

_INVALID = (MalformedInput, MalformedMap, InvalidPi, ParseError, MBelowOne)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def parse_complex(text: str) -> complex:
    """``"a+bi"`` style literal (``i`` or ``j``) to a complex number."""
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise MalformedInput(f"not a complex number: {text!r}") from None


def parse_fix(text: str) -> tuple:
    """``"zj=a+bi"`` to ``(j - 1, value)``."""
    name, sep, value = text.partition("=")
    name = name.strip()
    if not sep or not name.startswith("z") or not name[1:].isdigit() or int(name[1:]) < 1:
        raise MalformedInput(f"--fix expects zj=a+bi, got {text!r}")
    return int(name[1:]) - 1, parse_complex(value)


@dataclass
class RunConfig:
    """Validated settings of one run."""

    command: str
    map_path: str
    seed: int | None = None
    entropy: bool = False
    precision_cap: int = 1024
    max_n: int = 200
    escape_ell: float = 1e4
    bound_ell: float = math.log(1e6)
    tol: float | None = None
    res: tuple = (256, 256)
    coord: int = 1
    center: complex = 0j
    width: float = 4.0
    height: float | None = None
    fix: tuple = ()
    index: int = 1
    trials: int = 20
    samples: int = 10_000
    burn: int = 30
    pi: tuple | None = None
    radius: float = 1e6
    n: int = 20
    out: str | None = None
    json: str | None = None
    density: str | None = None

    def __post_init__(self):
        positive = {"precision_cap": self.precision_cap, "max_n": self.max_n,
                    "escape_ell": self.escape_ell, "bound_ell": self.bound_ell,
                    "width": self.width, "trials": self.trials, "samples": self.samples,
                    "radius": self.radius, "n": self.n, "index": self.index,
                    "coord": self.coord}
        if self.tol is not None:
            positive["tol"] = self.tol
        if self.height is not None:
            positive["height"] = self.height
        for name, v in positive.items():
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise MalformedInput(f"--{name.replace('_', '-')} must be positive, got {v}")
        if self.burn < 0:
            raise MalformedInput("--burn must be non-negative")
        if min(self.res) < 2:
            raise MalformedInput("--res needs at least 2 x 2 pixels")
        if self.seed is not None and not 0 <= self.seed < SEED_LIMIT:
            raise MalformedInput("--seed must lie in [0, 2**64)")
        if self.command in STOCHASTIC and self.seed is None:
            if not self.entropy:
                raise MalformedInput(f"'{self.command}' is stochastic: pass --seed S or --entropy")
            self.seed = int(np.random.SeedSequence().entropy % SEED_LIMIT)

    @property
    def orbit_params(self) -> OrbitParams:
        return OrbitParams(max_n=self.max_n, escape_ell=self.escape_ell,
                           bound_ell=self.bound_ell, window=min(50, self.max_n),
                           precision_cap=self.precision_cap)

    def slice_spec(self) -> SliceSpec:
        fixed = tuple(sorted(self.fix))
        return SliceSpec(self.coord - 1, self.center, self.width,
                         self.height if self.height is not None else self.width,
                         self.res[0], self.res[1], fixed)


def _arg(fn):
    """Adapt a parser raising MalformedInput to an argparse ``type``."""
    def wrapped(text):
        try:
            return fn(text)
        except MalformedInput as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    wrapped.__name__ = fn.__name__
    return wrapped


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="semireg", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("map", help="map file or bundled example name")
        p.add_argument("--json", metavar="PATH", help="write the JSON result here instead of stdout")
        p.add_argument("--out", metavar="PATH", help="output file (image, CSV)")
        p.add_argument("--seed", type=int)
        p.add_argument("--entropy", action="store_true", help="draw a fresh seed from the OS")
        p.add_argument("--tol", type=float)
        p.add_argument("--max-n", type=int, default=200)
        p.add_argument("--precision-cap", type=int, default=1024)
        p.add_argument("--escape-ell", type=float, default=1e4)
        p.add_argument("--bound-ell", type=float, default=math.log(1e6))

    def slice_args(p):
        p.add_argument("--res", type=int, nargs=2, metavar=("NX", "NY"), default=[256, 256])
        p.add_argument("--coord", type=int, default=1, help="varying coordinate j of zj")
        p.add_argument("--center", type=_arg(parse_complex), default=0j)
        p.add_argument("--width", type=float, default=4.0)
        p.add_argument("--height", type=float)
        p.add_argument("--fix", type=_arg(parse_fix), action="append", default=[],
                       metavar="zj=a+bi")

    p = sub.add_parser("analyze", help="regularity report")
    common(p)
    p.add_argument("--pi", type=int, nargs="+", help="blockwise exponents to test")

    p = sub.add_parser("classify", help="basin grid on a slice")
    common(p)
    slice_args(p)

    p = sub.add_parser("green", help="partial Green function on a slice")
    common(p)
    slice_args(p)
    p.add_argument("--index", type=int, default=1)

    p = sub.add_parser("measure", help="equilibrium measure sample")
    common(p)
    slice_args(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--burn", type=int, default=30)
    p.add_argument("--density", metavar="PATH", help="histogram PGM of the cloud on the slice")

    p = sub.add_parser("degree", help="topological degree")
    common(p)
    p.add_argument("--trials", type=int, default=20)

    p = sub.add_parser("loja", help="Lojasiewicz exponent")
    common(p)
    p.add_argument("--radius", type=float, default=1e6)
    p.add_argument("--samples", type=int, default=512)

    p = sub.add_parser("dimension", help="dimension diagnostics")
    common(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--burn", type=int, default=30)
    p.add_argument("--n", type=int, default=20, help="Jacobian product length")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    keys = RunConfig.__dataclass_fields__
    kw = {k: v for k, v in vars(ns).items() if k in keys and v is not None}
    kw["map_path"] = ns.map
    if "res" in kw:
        kw["res"] = tuple(kw["res"])
    if "fix" in kw:
        kw["fix"] = tuple(kw["fix"])
    if "pi" in kw:
        kw["pi"] = tuple(kw["pi"])
    return RunConfig(**kw)


def resolve_map(name: str):
    """Load a map from a path, falling back to the bundled examples."""
    path = Path(name)
    if path.is_file():
        return parse_map(path.read_text(encoding="utf-8"))
    stem = path.name if path.suffix == ".map" else path.name + ".map"
    bundled = resources.files("semireg").joinpath("data", stem)
    if bundled.is_file():
        return parse_map(bundled.read_text(encoding="utf-8"))
    raise MalformedInput(f"no map file {name!r} (and no bundled example of that name)")


# ---------------------------------------------------------------------------
# Output formats
# ---------------------------------------------------------------------------

def _clean(x):
    """JSON-safe copy: non-finite floats become strings, numpy scalars plain."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def fmt(x: float) -> str:
    """17 significant digits (``inf`` and ``nan`` spelled out)."""
    return format(float(x), ".17g")


def write_pgm(path, gray: np.ndarray) -> None:
    gray = np.ascontiguousarray(gray, dtype=np.uint8)
    ny, nx = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(gray.tobytes())


def write_ppm(path, rgb: np.ndarray) -> None:
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    ny, nx, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def basin_colors(labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels)
    rgb = np.empty(labels.shape + (3,), dtype=np.uint8)
    rgb[...] = INDETERMINATE_COLOR
    rgb[labels == K_LABEL] = K_COLOR
    esc = labels > 0
    table = np.array(PALETTE, dtype=np.uint8)
    rgb[esc] = table[(labels[esc] - 1) % len(PALETTE)]
    return rgb


def green_gray(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    gray = np.full(v.shape, 255, dtype=np.uint8)
    finite = np.isfinite(v)
    pos = finite & (v > 0)
    gray[finite & (v <= 0)] = 0
    gray[np.isposinf(v)] = 254
    if pos.any():
        top = v[pos].max()
        gray[pos] = 1 + np.rint(252 * v[pos] / top).astype(np.uint8)
    return gray


def _emit(cfg: RunConfig, obj, stdout) -> None:
    text = dumps(obj)
    if cfg.json:
        Path(cfg.json).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)


def _slice_dict(spec: SliceSpec) -> dict:
    return {"coord": spec.coord + 1, "center": [spec.center.real, spec.center.imag],
            "width": spec.width, "height": spec.height, "res": [spec.nx, spec.ny],
            "fixed": {f"z{j + 1}": [complex(v).real, complex(v).imag] for j, v in spec.fixed}}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _analysis(pmap, cfg):
    report = analyze(pmap)
    if report.alpha is None:
        raise MalformedInput(f"map is not semi-regular ({report.reason})")
    return report


def cmd_analyze(pmap, cfg: RunConfig, stdout) -> int:
    report = analyze(pmap, cfg.pi)
    _emit(cfg, report.to_dict(), stdout)
    return EXIT_OK


def cmd_classify(pmap, cfg: RunConfig, stdout) -> int:
    report = _analysis(pmap, cfg)
    spec = cfg.slice_spec()
    labels, rates, _ = basin_grid(pmap, report, spec, cfg.orbit_params)
    if cfg.out:
        write_ppm(cfg.out, basin_colors(labels))
    counts = {label_name(i): int((labels == i).sum()) for i in range(1, len(report.alpha) + 1)}
    counts["K"] = int((labels == K_LABEL).sum())
    counts["Indeterminate"] = int((labels == INDETERMINATE_LABEL).sum())
    medians = {}
    for i in range(1, len(report.alpha) + 1):
        r = rates[labels == i]
        medians[label_name(i)] = float(np.median(r)) if r.size else None
    frac = counts["Indeterminate"] / labels.size
    _emit(cfg, {"map": format_map(pmap), "slice": _slice_dict(spec),
                "alpha": [float(a) for a in report.alpha], "counts": counts,
                "indeterminate_fraction": frac, "median_rate": medians}, stdout)
    return EXIT_INDETERMINATE if frac > 0.5 else EXIT_OK


def cmd_green(pmap, cfg: RunConfig, stdout) -> int:
    report = _analysis(pmap, cfg)
    spec = cfg.slice_spec()
    tol = cfg.tol if cfg.tol is not None else 1e-12
    gf = green_field(pmap, report, cfg.index, spec, tol, cfg.orbit_params)
    if cfg.out and cfg.out.lower().endswith(".pgm"):
        write_pgm(cfg.out, green_gray(gf.values))
    else:
        xs, ys = spec.xs, spec.ys
        lines = ["row,col,re,im,value,status"]
        for r in range(spec.ny):
            for c in range(spec.nx):
                lines.append(f"{r},{c},{fmt(xs[c])},{fmt(ys[r])},{fmt(gf.values[r, c])},"
                             f"{gf.status[r, c]}")
        text = "\n".join(lines) + "\n"
        if cfg.out:
            Path(cfg.out).write_text(text, encoding="utf-8")
        else:
            stdout.write(text)
    frac = gf.indeterminate / gf.values.size
    if cfg.json:
        v = gf.values
        Path(cfg.json).write_text(dumps({
            "map": format_map(pmap), "index": cfg.index, "slice": _slice_dict(spec),
            "finite": int(np.isfinite(v).sum() - (v == 0).sum()),
            "zero": int((v == 0).sum()), "infinite": int(np.isposinf(v).sum()),
            "indeterminate": gf.indeterminate, "indeterminate_fraction": frac,
            "max_finite": float(v[np.isfinite(v)].max()) if np.isfinite(v).any() else None,
        }), encoding="utf-8")
    return EXIT_INDETERMINATE if frac > 0.5 else EXIT_OK


def cmd_measure(pmap, cfg: RunConfig, stdout) -> int:
    tol = cfg.tol if cfg.tol is not None else 1e-8
    cloud = equilibrium_sample(pmap, cfg.samples, cfg.burn, cfg.seed, tol=tol)
    P = cloud.points
    lines = ["index," + ",".join(f"re_z{j + 1},im_z{j + 1}" for j in range(P.shape[1]))]
    for t, z in enumerate(P):
        lines.append(f"{t}," + ",".join(f"{fmt(c.real)},{fmt(c.imag)}" for c in z))
    text = "\n".join(lines) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    elif not cfg.json:
        stdout.write(text)
    if cfg.density:
        spec = cfg.slice_spec()
        x0, x1 = spec.center.real - spec.width / 2, spec.center.real + spec.width / 2
        y0, y1 = spec.center.imag - spec.height / 2, spec.center.imag + spec.height / 2
        w = P[:, spec.coord]
        h, _, _ = np.histogram2d(w.imag, w.real, bins=(spec.ny, spec.nx),
                                 range=[(y0, y1), (x0, x1)])
        h = h[::-1]  # top row is the largest imaginary part
        gray = np.zeros(h.shape, dtype=np.uint8)
        if h.max() > 0:
            gray = np.rint(255 * h / h.max()).astype(np.uint8)
        write_pgm(cfg.density, gray)
    if cfg.json:
        Path(cfg.json).write_text(dumps({
            "map": format_map(pmap), "map_hash": cloud.map_hash, "seed": cloud.seed,
            "samples": len(cloud), "burn_in": cloud.burn_in, "chains": cloud.chains,
            "chain_length": cloud.chain_length,
            "max_abs": [float(np.abs(P[:, j]).max()) for j in range(P.shape[1])]}),
            encoding="utf-8")
    return EXIT_OK


def cmd_degree(pmap, cfg: RunConfig, stdout) -> int:
    degree, counts = topological_degree(pmap, cfg.trials, cfg.seed, return_counts=True)
    report = analyze(pmap)
    _emit(cfg, {"map": format_map(pmap), "degree": degree, "predicted": _num(report.d_t),
                "trials": cfg.trials, "seed": cfg.seed, "counts": counts}, stdout)
    return EXIT_OK


def cmd_loja(pmap, cfg: RunConfig, stdout) -> int:
    lam = lojasiewicz_estimate(pmap, R=cfg.radius, n_samples=cfg.samples, seed=cfg.seed)
    report = analyze(pmap)
    _emit(cfg, {"map": format_map(pmap), "lambda_hat": lam, "predicted": _num(report.lam),
                "radius": cfg.radius, "samples": cfg.samples, "seed": cfg.seed}, stdout)
    return EXIT_OK


def cmd_dimension(pmap, cfg: RunConfig, stdout) -> int:
    report = _analysis(pmap, cfg)
    tol = cfg.tol if cfg.tol is not None else 1e-8
    cloud = equilibrium_sample(pmap, cfg.samples, cfg.burn, cfg.seed, tol=tol)
    M = lyapunov_norm(pmap, cloud, cfg.n)
    dim = dimension_report(report, M, len(cloud), cfg.n)
    _emit(cfg, {"map": format_map(pmap), "seed": cfg.seed, **dim.to_dict()}, stdout)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "classify": cmd_classify, "green": cmd_green,
            "measure": cmd_measure, "degree": cmd_degree, "loja": cmd_loja,
            "dimension": cmd_dimension}


def run(argv=None, stdout=None, stderr=None) -> int:
    """Run the CLI on ``argv`` and return the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:       # argparse reports usage errors itself
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = config_from_args(ns)
        pmap = resolve_map(cfg.map_path)
        return COMMANDS[cfg.command](pmap, cfg, stdout)
    except _INVALID as exc:
        stderr.write(f"semireg: invalid input: {exc}\n")
        return EXIT_INVALID
    except TooManyIndeterminate as exc:
        stderr.write(f"semireg: {exc}\n")
        return EXIT_INDETERMINATE
    except (SemiregError, DegenerateTarget, InsufficientSamples) as exc:
        stderr.write(f"semireg: {type(exc).__name__}: {exc}\n")
        return EXIT_FAILED
    except OSError as exc:
        stderr.write(f"semireg: {exc}\n")
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
