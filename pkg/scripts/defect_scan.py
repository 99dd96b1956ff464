"""Unitarity defect of the truncated series across order, coupling and expansion mode.

Writes ``defect_scan.csv`` and prints a table. Usage: ``python3 scripts/defect_scan.py [outdir]``.
"""

import csv
import sys
from pathlib import Path

import numpy as np

from timemachine import hammat

DT = 0.5


def row(alpha, beta, K, M, mode="compose"):
    p = hammat.ModelParams(alpha=alpha, beta=beta, g=1.0, M=M)
    U = hammat.evolve(p, DT, K, mode)
    h1 = hammat.power_kernels(p, 1)[1]
    norm_h = float(np.linalg.norm(h1.joint_matrix(M), 2))
    return {"alpha": alpha, "beta": beta, "K": K, "M": M, "mode": mode,
            "defect": hammat.unitarity_defect(U),
            "remainder_bound": hammat.series_remainder_bound(norm_h, DT, K)}


def main(outdir="."):
    rows = [row(0.3, 0.3, 4, 4, mode) for mode in ("compose", "symbolic")]
    rows += [row(a, a, K, K + 1) for a in (0.0, 0.3) for K in (4, 8, 12, 16, 20)]
    rows += [row(a, 0.0, 20, 21) for a in (0.3, 0.03, 0.003)]
    out = Path(outdir) / "defect_scan.csv"
    with out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    print(f"{'alpha':>6} {'beta':>6} {'K':>3} {'M':>3} {'mode':>9} {'defect':>12} {'bound':>10}")
    for r in rows:
        print(f"{r['alpha']:6.3f} {r['beta']:6.3f} {r['K']:3d} {r['M']:3d} {r['mode']:>9} "
              f"{r['defect']:12.4e} {r['remainder_bound']:10.2e}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])
