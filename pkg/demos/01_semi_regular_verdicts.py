"""Two maps that share their top degree part and differ in one coefficient.

Both have the block structure (6, 3) and both fail plain 2-regularity: the
top parts z1^6 and z1^3 vanish together on the line z1 = 0 at infinity.
Weighting z1 -> z1^2, z2 -> z2^3 repairs the first map.  In the second, the
weighted leading parts share the factor z1^3 - z2^2, so no weight works.
"""
from importlib.resources import files

from semireg import load_map
from semireg.regularity import analyze

for name in ("example32_f", "example32_g"):
    f = load_map(files("semireg") / "data" / f"{name}.map")
    r = analyze(f)
    print(f"--- {name}: {f}")
    doc = r.to_dict()
    print("block degrees", list(r.blocks.d), " regular:", doc["regular"])
    for lv in doc["levels"]:
        print(f"  level {lv['level']}: {lv['verdict']} ({lv['method']})  top system {lv['system']}")
    nd = r.newton
    print("  D1:", nd.D1, "  restricted P1:", nd.P1_D1)
    print("  D2:", nd.D2, "  restricted P2:", nd.P2_D2)
    print("  resultant of the restricted parts:", nd.resultant)
    if r.semi_regular:
        print(f"  semi-regular with pi = {tuple(r.pi)}; alpha = {tuple(str(a) for a in r.alpha)}, "
              f"d_t = {r.d_t}, lambda = {r.lam}")
    else:
        print("  not semi-regular:", r.reason)
