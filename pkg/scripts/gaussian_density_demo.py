"""Reconstruct the bi-free Gaussian density from its R-transform and compare with the closed form.

Usage: python3 scripts/gaussian_density_demo.py [c] [y] [out.csv]
"""
import sys
import time

import numpy as np

from bifree import GaussianParams, gaussian_closed_form, invert2d, reconstruct_g
from bifree.transform2d import write_grid_csv
from bifree.transform2d import GEvaluator2D, Provenance


def main(argv):
    c = float(argv[0]) if argv else 0.5
    y = float(argv[1]) if len(argv) > 1 else 0.05
    law = gaussian_closed_form(GaussianParams(0.0, 0.0, 1.0, 1.0, c))
    G1, G2 = law.marginal_g(1), law.marginal_g(2)
    ident = lambda z: np.asarray(z, dtype=complex)
    g = GEvaluator2D(lambda a, b: reconstruct_g(ident, ident, law.r, G1(a), G2(b)), Provenance.FROM_R)
    t0 = time.perf_counter()
    grid = invert2d(g, (-2.5, 2.5), (-2.5, 2.5), 101, 101, y)
    dt = time.perf_counter() - t0
    X, U = np.meshgrid(grid.x, grid.u, indexing="ij")
    err = np.abs(grid.values - law.density(X, U))
    i, j = np.unravel_index(err.argmax(), err.shape)
    print(f"c = {c}, y = {y}, 101x101 grid in {dt:.3f} s")
    print(f"sup error {err.max():.5f} at ({grid.x[i]:.2f}, {grid.u[j]:.2f})")
    print(f"Riemann mass {grid.riemann_mass():.5f}")
    if len(argv) > 2:
        write_grid_csv(grid, argv[2])
        print(f"wrote {argv[2]}")


if __name__ == "__main__":
    main(sys.argv[1:])
