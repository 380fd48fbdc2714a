"""Escape rates and the first Green function on a complex line.

Fix z2 = 0.7 + 0.2i and let z1 run over a 3 x 3 square.  Orbits of the map
(z1^6 - z2^4, z1^3 - 2 z2^2 + z2) either stay bounded or escape, and an
escaping orbit's log-norm grows by a factor close to 6 or 2 per step.  The
script writes a basin picture and a Green-function picture next to itself.

    python3 demos/02_escape_rates_on_a_slice.py [resolution]
"""
import sys
import time
from pathlib import Path

import numpy as np

from semireg.cli import basin_colors, green_gray, resolve_map, write_pgm, write_ppm
from semireg.measures import SliceSpec, basin_grid, green_field, laplacian_density
from semireg.regularity import analyze

n = int(sys.argv[1]) if len(sys.argv) > 1 else 256
here = Path(__file__).parent
f = resolve_map("F1")
report = analyze(f)
spec = SliceSpec(0, 0j, 3.0, 3.0, n, n, ((1, 0.7 + 0.2j),))

t0 = time.perf_counter()
labels, rates, _ = basin_grid(f, report, spec)
print(f"{n}x{n} slice classified in {time.perf_counter() - t0:.1f}s")
for lab, name in ((1, "U1"), (2, "U2"), (0, "K"), (-1, "Indeterminate")):
    sel = labels == lab
    extra = f"  median rate {np.median(rates[sel]):.4f}" if lab > 0 and sel.any() else ""
    print(f"  {name:14s} {sel.mean():7.2%}{extra}")
write_ppm(here / "basins.ppm", basin_colors(labels))

field = green_field(f, report, 1, spec)
write_pgm(here / "green1.pgm", green_gray(field.values))
dens = laplacian_density(field)
print(f"G1 on the slice: max {np.nanmax(field.values):.3f}, "
      f"zero on {np.mean(field.values == 0):.2%} of pixels")
print(f"discrete dd^c G1: mass {dens.mass:.3f} in the window, "
      f"clamped negative mass {dens.negative_mass:.2e}")
print("wrote basins.ppm and green1.pgm")
