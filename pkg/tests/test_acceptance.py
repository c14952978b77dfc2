"""Acceptance criteria, one test per check, each printing a PASS/FAIL line."""

import time

import numpy as np
import pytest

from bifree.bifree_conv import (
    GaussianParams,
    LKQuintupleGeneral,
    compound_poisson_quintuple,
    gaussian_closed_form,
    gaussian_quintuple,
    lambda_combine,
    lk_convert,
    lk_convert_inverse,
    lk_decompose,
    lk_r_general,
    lk_validate,
    product_semicircle_density,
)
from bifree.bifree_r import LawSum, marginal_r_limit, partial_r, reconstruct_g
from bifree.limits import (
    DEFAULT_PROBES,
    check_limit_theorem,
    clt_array,
    derivative_probe,
    poisson_array,
    verify_functional_eq,
)
from bifree.measure import Kernel, Measure1D, Measure2D, SignedMeasure2D, dirac, weight_transform
from bifree.rtransform1d import free_convolve_power, r1_from_measure
from bifree.transform2d import (
    GEvaluator2D,
    Provenance,
    g1,
    g_free_poisson,
    g_semicircle,
    invert2d,
    marginal_g_limit,
)

from conftest import random_valid_quintuple

PROBE_Z = np.array([p[0] for p in DEFAULT_PROBES])
PROBE_W = np.array([p[1] for p in DEFAULT_PROBES])


# 1. Gaussian density reproduction --------------------------------------------


def _gaussian_pipeline(c):
    law = gaussian_closed_form(GaussianParams(0.0, 0.0, 1.0, 1.0, c))
    G1, G2 = law.marginal_g(1), law.marginal_g(2)

    def r_marg(z):
        return np.asarray(z, dtype=complex)

    def g(l1, l2):
        return reconstruct_g(r_marg, r_marg, law.r, G1(l1), G2(l2))

    t0 = time.perf_counter()
    grid = invert2d(GEvaluator2D(g, Provenance.FROM_R), (-2.5, 2.5), (-2.5, 2.5), 101, 101, 0.05)
    elapsed = time.perf_counter() - t0
    X, U = np.meshgrid(grid.x, grid.u, indexing="ij")
    return law, grid, law.density(X, U), elapsed


@pytest.fixture(scope="module", params=[0.0, 0.5], ids=["c0", "c0.5"])
def gaussian_run(request):
    return request.param, _gaussian_pipeline(request.param)


def test_c1_gaussian_sup_error(gaussian_run, record_criterion):
    c, (_, grid, exact, _) = gaussian_run
    err = float(np.abs(grid.values - exact).max())
    assert record_criterion(f"C1 sup-error c={c}", err <= 2e-2, f"{err:.5f} (tol 2e-2)")


def test_c1_gaussian_riemann_mass(gaussian_run, record_criterion):
    c, (_, grid, _, _) = gaussian_run
    mass = grid.riemann_mass()
    assert record_criterion(f"C1 Riemann mass c={c}", abs(mass - 1) <= 2e-2, f"{mass:.5f} (1 +- 2e-2)")


def test_c1_gaussian_runtime(gaussian_run, record_criterion):
    c, (_, _, _, elapsed) = gaussian_run
    assert record_criterion(f"C1 runtime c={c}", elapsed <= 60.0, f"{elapsed:.3f} s (<= 60 s)")


def test_c1_c0_equals_product_semicircle(record_criterion):
    law = gaussian_closed_form(GaussianParams(0.0, 0.0, 1.0, 1.0, 0.0))
    x = np.linspace(-2.5, 2.5, 401)
    X, U = np.meshgrid(x, x, indexing="ij")
    err = float(np.abs(law.density(X, U) - product_semicircle_density(X, U)).max())
    assert record_criterion("C1 c=0 density = product semicircle", err <= 1e-12, f"{err:.2e}")


# 2-4. limit theorems -------------------------------------------------------------

NS = [100, 1000, 10000]


@pytest.fixture(scope="module")
def clt_report():
    return check_limit_theorem(clt_array(0.5), NS)


@pytest.fixture(scope="module")
def poisson_report():
    return check_limit_theorem(poisson_array(1.0, dirac(1.0, 1.0)), NS)


def test_c2_clt_error(record_criterion):
    mu = clt_array(0.5).measure(10_000)
    val = 10_000 * np.asarray(partial_r(mu, PROBE_Z, PROBE_W))
    err = float(np.abs(val - (PROBE_Z**2 + PROBE_W**2 + 0.5 * PROBE_Z * PROBE_W)).max())
    assert record_criterion("C2 CLT |nR - limit| at n=1e4", err <= 5e-3, f"{err:.2e} (tol 5e-3)")


def test_c2_clt_order(clt_report, record_criterion):
    order = clt_report.order("scaled_r")
    assert record_criterion("C2 CLT convergence order", order >= 0.9, f"{order:.4f} (>= 0.9)")


def test_c3_poisson_accompaniment(record_criterion):
    mu = poisson_array(1.0, dirac(1.0, 1.0)).measure(10_000)
    val = 10_000 * np.asarray(partial_r(mu, PROBE_Z, PROBE_W))
    limit = -1 + 1 / ((1 - PROBE_Z) * (1 - PROBE_W))
    err = float(np.abs(val - limit).max())
    assert record_criterion("C3 Poisson |nR - limit| at n=1e4", err <= 5e-3, f"{err:.2e} (tol 5e-3)")


@pytest.mark.parametrize("which", ["clt_report", "poisson_report"])
def test_c4_equivalence(which, request, record_criterion):
    rep = request.getfixturevalue(which)
    worst = max(rep.cross.values())
    converged = all(rep.converged(k) for k in ("scaled_r", "d_functional", "rho_moments"))
    ok = rep.equivalent and converged and worst <= 1e-2
    assert record_criterion(f"C4 equivalence {rep.array}", ok,
                            f"co-converge={converged}, max cross-residual {worst:.2e} (tol 1e-2)")


# 5. functional equation ------------------------------------------------------------

FE_POINTS = [(complex(x, -y), complex(u, -v)) for x, y, u, v in [
    (0.3, 0.5, -0.2, 0.7), (1.0, 0.3, 0.5, 0.4), (-1.5, 0.2, 2.0, 0.6), (0.0, 1.0, 0.0, 1.0),
    (2.5, 0.5, -2.5, 0.5), (0.7, 2.0, 1.1, 0.1), (-0.4, 0.05, 0.3, 1.5), (3.0, 1.0, 1.0, 3.0),
    (-1.0, 0.8, -1.0, 0.8), (0.1, 0.1, -0.1, 0.2)]]


def test_c5_functional_eq_gaussian(record_criterion):
    q = gaussian_quintuple(GaussianParams(0.0, 0.0, 1.0, 1.0, 0.5))
    law = q.law()
    rep = verify_functional_eq(law.g, g_semicircle, g_semicircle, q.rho, FE_POINTS)
    ok = rep.max_residual <= 1e-6 and len(rep.residuals) == 10
    assert record_criterion("C5 functional eq, Gaussian c=0.5", ok, f"{rep.max_residual:.2e} (tol 1e-6)")


def test_c5_functional_eq_poisson(record_criterion):
    jump = dirac(1.0, 1.0)
    q = compound_poisson_quintuple(1.0, jump)
    law = q.law()
    rho = weight_transform(jump, Kernel.RHO, 1.0)
    g_fp = lambda z: g_free_poisson(z, 1.0, 1.0)
    rep = verify_functional_eq(law.g, g_fp, g_fp, rho, FE_POINTS)
    ok = rep.max_residual <= 1e-6 and len(rep.residuals) == 10
    assert record_criterion("C5 functional eq, Poisson delta(1,1)", ok, f"{rep.max_residual:.2e} (tol 1e-6)")


# 6. LK calculus -------------------------------------------------------------------------

ZW = (np.array([0.1 - 0.2j, -0.15 - 0.05j, 0.05 + 0.1j]), np.array([-0.1j, 0.2 - 0.1j, -0.05 + 0.05j]))


def _fixed_quintuples():
    from bifree.bifree_conv import product_quintuple
    from bifree.rtransform1d import FreeLKPair

    return [
        gaussian_quintuple(GaussianParams(0.3, -0.2, 1.0, 2.0, 0.7)),
        compound_poisson_quintuple(1.0, dirac(1.0, 1.0)),
        compound_poisson_quintuple(2.5, Measure2D([1.0, -0.5, 2.0], [0.5, 1.0, -1.0], [0.2, 0.3, 0.5])),
        product_quintuple(FreeLKPair(0.1, Measure1D([1.0, -1.0], [0.5, 0.5])),
                          FreeLKPair(-0.3, Measure1D([2.0], [1.0]))),
    ]


def test_c6a_validate(record_criterion):
    reps = [lk_validate(q) for q in _fixed_quintuples()]
    origin = ([0.0], [0.0])
    bad = lk_validate(LKQuintupleGeneral(0.0, 0.0, Measure2D(*origin, [1.0]), Measure2D(*origin, [1.0]),
                                         SignedMeasure2D(*origin, [1.2])))
    worst = max(r.max_residual for r in reps)
    ok = all(r.valid for r in reps) and worst == 0.0 and not bad.valid
    assert record_criterion("C6a lk_validate accepts constructions, rejects c=1.2", ok,
                            f"max residual {worst:.2e} (required 0), c=1.2 valid={bad.valid}")


def test_c6b_decompose_resums(record_criterion):
    rng = np.random.default_rng(20)
    rng_quints = [random_valid_quintuple(rng) for _ in range(20)]
    worst = 0.0
    for q in rng_quints:
        dec = lk_decompose(q)
        worst = max(worst, float(np.abs(dec.r(*ZW) - lk_r_general(q, *ZW)).max()))
    assert record_criterion("C6b lk_decompose re-sums (20 random)", worst <= 1e-10, f"{worst:.2e} (tol 1e-10)")


def test_c6c_convert_roundtrip(record_criterion):
    worst = 0.0
    for q in _fixed_quintuples():
        q2 = lk_convert(lk_convert_inverse(q))
        worst = max(worst, float(np.abs(lk_r_general(q2, *ZW) - lk_r_general(q, *ZW)).max()))
    assert record_criterion("C6c lk_convert round trip", worst <= 1e-12, f"{worst:.2e} (tol 1e-12)")


def test_c6d_additivity_and_scaling(record_criterion):
    qs = _fixed_quintuples()
    worst = 0.0
    for q1, q2 in zip(qs, qs[1:] + qs[:1]):
        for t1, t2 in [(1.0, 1.0), (0.25, 3.0), (2.0, 0.5)]:
            lhs = lk_r_general(lambda_combine(q1, q2, t1, t2), *ZW)
            rhs = t1 * lk_r_general(q1, *ZW) + t2 * lk_r_general(q2, *ZW)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
        worst = max(worst, float(np.abs(lk_r_general(q1.scaled(0.375), *ZW)
                                        - 0.375 * lk_r_general(q1, *ZW)).max()))
    assert record_criterion("C6d Lambda-additivity and t-scaling", worst <= 1e-12, f"{worst:.2e} (tol 1e-12)")


# 7. marginal recovery -----------------------------------------------------------------------

MARGINAL_LAWS = [
    Measure2D([0.0, 1.0, -1.0], [1.0, 0.5, -2.0], [0.5, 0.25, 0.25]),
    Measure2D([2.0, -1.5], [0.3, 0.3], [0.4, 0.6]),
    Measure2D([0.5, 0.5, -0.5, 1.5], [1.0, -1.0, 0.0, 2.0], [0.1, 0.2, 0.3, 0.4]),
]


def test_c7_marginal_g_limit(record_criterion):
    z = np.array([0.3 - 1.0j, -1.0 - 0.5j, 2.0 + 0.7j])
    worst = 0.0
    for mu in MARGINAL_LAWS:
        ev = GEvaluator2D.from_measure(mu)
        for axis in (1, 2):
            approx = marginal_g_limit(ev, z, axis, 1e4)
            worst = max(worst, float(np.abs(approx - g1(mu.marginal(axis), z)).max()))
    assert record_criterion("C7 marginal_g_limit M=1e4", worst <= 1e-3, f"{worst:.2e} (tol 1e-3)")


def test_c7_marginal_r_limit(record_criterion):
    z = np.array([0.05 - 0.1j, -0.1 - 0.05j, 0.02 + 0.08j])
    worst = 0.0
    for mu in MARGINAL_LAWS:
        for axis in (1, 2):
            approx = marginal_r_limit(mu, z, axis, 1e-4)
            exact = z * r1_from_measure(mu.marginal(axis), z)
            worst = max(worst, float(np.abs(approx - exact).max()))
    assert record_criterion("C7 marginal_r_limit eps=1e-4", worst <= 1e-3, f"{worst:.2e} (tol 1e-3)")


# 8. derivative probe ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def probe_report():
    q = gaussian_quintuple(GaussianParams(0.0, 0.0, 1.0, 1.0, 0.5))
    return derivative_probe(q, [1e-2, 1e-3, 1e-4], 0.1 - 0.1j, -0.05j, masses_at=1e-3)


def test_c8_derivative_order(probe_report, record_criterion):
    ok = probe_report.order >= 0.9 and np.all(np.diff(probe_report.deviation) < 0)
    dev = ", ".join(f"{d:.2e}" for d in probe_report.deviation)
    assert record_criterion("C8 derivative probe order", ok, f"order {probe_report.order:.4f}; deviations {dev}")


def test_c8_rescaled_st_mass(probe_report, record_criterion):
    st = probe_report.rescaled["st"]
    err = abs(st - 0.5)
    assert record_criterion("C8 rescaled st/eps mass at eps=1e-3", err <= 5e-2, f"{st:.4f} vs 0.5, err {err:.2e}")


# 9. oracle suite ---------------------------------------------------------------------------


def test_c9_arcsine_oracle(record_criterion):
    res = free_convolve_power(Measure1D([-1.0, 1.0], [0.5, 0.5]), 2, x=np.array([0.0]), y=1e-4)
    val = float(res.density[0])
    err = abs(val - 1 / (2 * np.pi))
    assert record_criterion("C9 Bernoulli^2 density at 0", err <= 2e-3, f"{val:.6f} vs 1/(2pi), err {err:.1e}")


def test_c9_semicircle_r(record_criterion):
    z = np.array([0.05 * np.exp(-1j * a) for a in np.linspace(0.3, 2.8, 10)])
    r = r1_from_measure(lambda lam: g_semicircle(lam), z, mean=0.0)
    err = float(np.abs(r - z).max())
    assert record_criterion("C9 semicircle R(z) = z", err <= 1e-10, f"{err:.2e} (tol 1e-10)")
