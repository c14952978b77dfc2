"""Convergence tables for the central limit and Poisson arrays plus the derivative probe."""
import numpy as np

from bifree import GaussianParams, gaussian_quintuple
from bifree.limits import (
    accompaniment_residual,
    check_limit_theorem,
    clt_array,
    derivative_probe,
    poisson_array,
)
from bifree.measure import dirac

NS = [100, 1000, 10000]


def table(rep):
    print(f"\n{rep.array}")
    print(f"{'n':>8} {'scaled R':>12} {'D_n':>12} {'rho moments':>12}")
    errs = [rep.error(k) for k in ("scaled_r", "d_functional", "rho_moments")]
    for i, n in enumerate(rep.ns):
        print(f"{n:>8d} " + " ".join(f"{e[i]:12.4e}" for e in errs))
    print(f"fitted order {rep.order('scaled_r'):.4f}; cross residuals "
          + ", ".join(f"{k} {v:.2e}" for k, v in rep.cross.items()))


def main():
    table(check_limit_theorem(clt_array(0.5), NS))
    arr = poisson_array(1.0, dirac(1.0, 1.0))
    table(check_limit_theorem(arr, NS))
    print("accompaniment residuals: "
          + ", ".join(f"n={n}: {accompaniment_residual(arr, n):.2e}" for n in NS))
    q = gaussian_quintuple(GaussianParams(0.0, 0.0, 1.0, 1.0, 0.5))
    rep = derivative_probe(q, [1e-2, 1e-3, 1e-4], 0.1 - 0.1j, -0.05j, masses_at=1e-3)
    print("\nderivative probe deviations " + ", ".join(f"{d:.2e}" for d in rep.deviation)
          + f"; order {rep.order:.4f}")
    m = rep.rescaled
    print(f"rescaled masses at eps=1e-3: s2 {m['s2']:.4f}, t2 {m['t2']:.4f}, st {m['st']:.4f}")


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    main()
