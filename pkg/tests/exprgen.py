"""Random map texts for round-trip fuzzing (shared by the tests)."""
import numpy as np

COEFFS = ("1", "2", "-3", "1/2", "-7/3", "0.25", "i", "-2i", "(1+2i)", "(3-i)/4", "1.5")


def random_expr(rng, k, depth=0):
    r = rng.random()
    if depth > 2 or r < 0.45:
        coeff = COEFFS[rng.integers(len(COEFFS))]
        exps = rng.integers(0, 4, k)
        mono = " ".join(f"z{j + 1}" + (f"^{e}" if e > 1 else "") for j, e in enumerate(exps) if e)
        if not mono:
            return coeff
        return f"{coeff}*{mono}" if rng.random() < 0.5 else f"{coeff} {mono}"
    if r < 0.7:
        return f"{random_expr(rng, k, depth + 1)} + {random_expr(rng, k, depth + 1)}"
    if r < 0.85:
        return f"{random_expr(rng, k, depth + 1)} - ({random_expr(rng, k, depth + 1)})"
    if r < 0.95:
        return f"({random_expr(rng, k, depth + 1)})*({random_expr(rng, k, depth + 1)})"
    return f"({random_expr(rng, k, depth + 1)})^{int(rng.integers(0, 3))}"


def random_map_text(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 4))
    header = "vars: " + " ".join(f"z{j + 1}" for j in range(k))
    return header + "\n" + ",\n".join(random_expr(rng, k) for _ in range(k))
