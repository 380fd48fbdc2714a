"""Counting preimages and sampling the equilibrium measure.

For a semi-regular map the number of preimages of a generic point is the
product of the escape rates over the blocks.  Pulling a random point back
along random preimage branches samples the equilibrium measure; the sample
should be (nearly) invariant under the map, and the growth of the
derivative along it bounds the dimension of the measure from below.
"""
import numpy as np

from semireg.cli import resolve_map
from semireg.measures import dimension_report, lyapunov_norm
from semireg.preimage import equilibrium_sample, pushforward_tv, topological_degree
from semireg.regularity import analyze

for name in ("F0", "F1", "F2", "F3"):
    f = resolve_map(name)
    r = analyze(f)
    d = topological_degree(f, trials=20, seed=1)
    print(f"{name}: {f}")
    print(f"  alpha = {[str(a) for a in r.alpha]}, predicted degree {r.d_t}, counted {d}")
    cloud = equilibrium_sample(f, 20_000, seed=1)
    print(f"  pushforward TV distance {pushforward_tv(f, cloud):.4f}, "
          f"cloud radius {np.abs(cloud.points).max():.3f}")
    M = lyapunov_norm(f, cloud, n=20)
    dim = dimension_report(r, M)
    a = ", ".join(f"{x:.3f}" for x in dim.a_bounds)
    print(f"  M_hat = {M:.4f}; Holder exponents below ({a}); dimension bound {dim.mu_bound:.3f}")
