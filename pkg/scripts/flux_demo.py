"""Occupation flow through a one-way and a two-way machine, checked against the dense oracle.

Usage: ``python3 scripts/flux_demo.py``.
"""

import numpy as np

from timemachine import hammat, oracles

DT, K, M, NMAX = 0.5, 4, 4, 2
START = (1, 1, 1)


def main():
    for alpha, beta in [(0.3, 0.0), (0.0, 0.3), (0.3, 0.3)]:
        p = hammat.ModelParams(alpha=alpha, beta=beta, g=1.0, n_max=NMAX, M=M)
        f = hammat.flux_asymmetry(hammat.evolve(p, DT, K), START)
        Ud = oracles.dense_series(oracles.dense_hamiltonian(alpha, beta, 1.0, 3, NMAX, M), DT, K)
        ref = oracles.dense_flux(Ud, 3, NMAX, M, {START: 1.0})
        diff = float(np.max(np.abs(np.array(f.change) - ref)))
        print(f"alpha={alpha} beta={beta}: change per region {np.round(f.change, 9).tolist()}, "
              f"leak {f.probability_leak:+.6f}, dense diff {diff:.1e}")


if __name__ == "__main__":
    main()
