"""Limit-theorem laboratory for infinitesimal triangular arrays.

An array is a pair of generators ``n -> μ_n`` and ``n -> k_n``.  For each ``n``
the laboratory evaluates four indicators on a grid of probe points:

(a) the scaled partial R-transform ``k_n R_{μ_n}(z, w)``;
(b) the functional ``D_n(z, w) = k_n ∫ zwst / ((1-zs)(1-wt)) dμ_n``;
(c) low moments of the signed measure ``ρ′_n = k_n st dμ_n``;
(d) the marginal drift ``γ_{jn}`` and Lévy masses ``σ_{jn}``.

Convergence is reported through Cauchy residuals between consecutive
``n``, Richardson extrapolation and a fitted order in ``n``; nothing here
certifies a mathematical limit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bifree_conv import (
    LKQuintupleGeneral,
    compound_poisson_r,
    lk_convert_inverse,
    lk_r_general,
)
from .bifree_r import LawSum, OmegaDomain, extract_cumulants, partial_r
from .errors import InputError, NumericalError, PoleError
from .measure import Kernel, Measure2D, SignedMeasure2D, _Atomic2D, kernel_sqrt, weight_transform
from .rtransform1d import FreeLKPair
from .transform2d import g2, invert2d

_PROBE_VALUES = (-0.1j, -0.05j, 0.05 - 0.05j)
DEFAULT_PROBES = tuple((a, b) for a in _PROBE_VALUES for b in _PROBE_VALUES)
CONVERGED_TOL = 1e-2


def d_functional(mu: _Atomic2D, k: float, z, w):
    """``k Σ w_i zw s_i t_i / ((1 - z s_i)(1 - w t_i))``."""
    if not k > 0:
        raise InputError("k must be positive")
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    zz, ww = z[..., None], w[..., None]
    d = (1 - zz * mu.s) * (1 - ww * mu.t)
    if np.any(d == 0):
        raise PoleError("probe point on a pole z s = 1 or w t = 1")
    out = k * np.sum(mu.w * zz * ww * mu.s * mu.t / d, axis=-1)
    return out[()] if out.ndim else complex(out)


def d_from_rho(rho: SignedMeasure2D, z, w):
    """``∫ zw √(1+s²)√(1+t²) / ((1-zs)(1-wt)) dρ``."""
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    zz, ww = z[..., None], w[..., None]
    ker = kernel_sqrt(rho.s, rho.t)
    out = np.sum(rho.w * ker * zz * ww / ((1 - zz * rho.s) * (1 - ww * rho.t)), axis=-1)
    return out[()] if out.ndim else complex(out)


def clt_sequence(c: float, n: int) -> Measure2D:
    """Law of ``(αZ₁ - βZ₂, αZ₁ + βZ₂)`` with ``α = √((1+c)/2n)``, ``β = √((1-c)/2n)``.

    ``Z₁, Z₂`` are independent signs, so the law has four atoms of weight 1/4
    (two when ``|c| = 1``), variances ``1/n`` and covariance ``c/n``.
    """
    if abs(c) > 1:
        raise InputError("c must lie in [-1, 1]")
    if n < 1:
        raise InputError("n must be at least 1")
    al = np.sqrt((1 + c) / (2 * n))
    be = np.sqrt((1 - c) / (2 * n))
    z1 = np.array([1, 1, -1, -1], dtype=float)
    z2 = np.array([1, -1, 1, -1], dtype=float)
    return Measure2D(al * z1 - be * z2, al * z1 + be * z2, np.full(4, 0.25))


def poisson_sequence(lam: float, jump: Measure2D, n: int) -> Measure2D:
    """``(1 - λ/n) δ₀ + (λ/n) jump``."""
    if not lam > 0:
        raise InputError("rate must be positive")
    if not n > lam:
        raise InputError("need n > lambda")
    p = lam / n
    return Measure2D(np.r_[0.0, jump.s], np.r_[0.0, jump.t], np.r_[1 - p, p * jump.w])


@dataclass(frozen=True)
class TriangularArray:
    """Generators of an infinitesimal array and, optionally, its known limits.

    Attributes
    ----------
    measure : callable
        ``n -> μ_n``.
    k : callable
        ``n -> k_n``.
    limit_r, limit_d : callable, optional
        Limits of indicators (a) and (b) as functions of ``(z, w)``.
    limit_rho_moments : dict, optional
        Limits of ``M_{p,q}(ρ′_n)`` keyed by ``(p, q)``.
    """

    name: str
    measure: Callable[[int], Measure2D]
    k: Callable[[int], float]
    limit_r: Optional[Callable] = None
    limit_d: Optional[Callable] = None
    limit_rho_moments: Optional[dict] = None


def clt_array(c: float) -> TriangularArray:
    return TriangularArray(
        name=f"clt(c={c:g})",
        measure=lambda n: clt_sequence(c, n),
        k=float,
        limit_r=lambda z, w: z * z + w * w + c * z * w,
        limit_d=lambda z, w: c * z * w,
        limit_rho_moments={(0, 0): c, (1, 0): 0.0, (0, 1): 0.0, (2, 0): 0.0, (1, 1): 0.0, (0, 2): 0.0},
    )


def poisson_array(lam: float, jump: Measure2D) -> TriangularArray:
    s, t, w = jump.s, jump.t, jump.w
    moments = {(p, q): lam * float(np.sum(w * s ** (p + 1) * t ** (q + 1)))
               for p in range(3) for q in range(3) if p + q <= 2}
    return TriangularArray(
        name=f"poisson(lambda={lam:g})",
        measure=lambda n: poisson_sequence(lam, jump, n),
        k=float,
        limit_r=lambda z, w_: compound_poisson_r(lam, jump, z, w_),
        limit_d=lambda z, w_: d_functional(jump, lam, z, w_),
        limit_rho_moments=moments,
    )


def constant_array() -> TriangularArray:
    return TriangularArray(
        name="constant-origin",
        measure=lambda n: Measure2D([0.0], [0.0], [1.0]),
        k=float,
        limit_r=lambda z, w: np.zeros(np.broadcast(z, w).shape, dtype=complex),
        limit_d=lambda z, w: np.zeros(np.broadcast(z, w).shape, dtype=complex),
        limit_rho_moments={(p, q): 0.0 for p in range(3) for q in range(3) if p + q <= 2},
    )


RHO_ORDERS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


@dataclass
class IndicatorSeries:
    """Values of one indicator across the n-list (rows) and probes (columns)."""

    name: str
    values: np.ndarray
    limit: Optional[np.ndarray] = None

    def cauchy(self) -> np.ndarray:
        return np.abs(np.diff(self.values, axis=0)).max(axis=1) if len(self.values) > 1 else np.zeros(0)

    def errors(self) -> Optional[np.ndarray]:
        if self.limit is None:
            return None
        return np.abs(self.values - self.limit).max(axis=1)


def richardson(ns: Sequence[float], vals: np.ndarray) -> np.ndarray:
    """Extrapolate ``f(n) = L + C/n`` from the last two entries."""
    n1, n2 = float(ns[-2]), float(ns[-1])
    return (n2 * vals[-1] - n1 * vals[-2]) / (n2 - n1)


def fitted_order(ns: Sequence[float], errs: Sequence[float]) -> float:
    """Least-squares slope of ``-log err`` against ``log n``."""
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    keep = errs > 0
    if keep.sum() < 2:
        return float("inf")
    slope = np.polyfit(np.log(ns[keep]), np.log(errs[keep]), 1)[0]
    return float(-slope)


@dataclass
class LimitReport:
    """Per-n indicator values, residuals and convergence verdicts."""

    array: str
    ns: list
    probes: list
    indicators: dict
    cross: dict
    outside_omega: list
    params: dict = field(default_factory=dict)

    def error(self, name: str) -> Optional[np.ndarray]:
        return self.indicators[name].errors()

    def order(self, name: str) -> float:
        errs = self.error(name)
        if errs is None:
            errs = np.r_[self.indicators[name].cauchy(), np.nan]
        return fitted_order(self.ns, errs)

    def converged(self, name: str, tol: float = CONVERGED_TOL) -> bool:
        errs = self.error(name)
        if errs is not None:
            return bool(errs[-1] <= tol)
        c = self.indicators[name].cauchy()
        return bool(len(c) and c[-1] <= tol)

    @property
    def equivalent(self) -> bool:
        """True when (a), (b) and (c) all converge or all fail to."""
        flags = {self.converged(k) for k in ("scaled_r", "d_functional", "rho_moments")}
        return len(flags) == 1

    def extrapolated(self, name: str) -> np.ndarray:
        return richardson(self.ns, self.indicators[name].values)

    def to_dict(self) -> dict:
        def cplx(a):
            a = np.asarray(a)
            return [[float(v.real), float(v.imag)] for v in a.ravel()]

        out = {
            "array": self.array,
            "params": self.params,
            "n": list(self.ns),
            "probes": [[[p.real, p.imag], [q.real, q.imag]] for p, q in self.probes],
            "outside_omega": self.outside_omega,
            "equivalent": self.equivalent,
            "indicators": {},
            "cross_residuals": {k: float(v) for k, v in self.cross.items()},
        }
        for name, ser in self.indicators.items():
            entry = {
                "values": [cplx(row) for row in ser.values],
                "cauchy": ser.cauchy().tolist(),
                "converged": self.converged(name),
            }
            errs = ser.errors()
            if errs is not None:
                entry["error"] = errs.tolist()
                entry["order"] = self.order(name)
            out["indicators"][name] = entry
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _marginal_lk_r(mu: _Atomic2D, k: float, axis: int, z):
    # z [γ_n + ∫ (z+s)/(1-zs) dσ_n] with γ_n, σ_n the Kernel.GAMMA/SIGMA reweightings
    coord = mu.s if axis == 1 else mu.t
    gamma = k * float(np.sum(mu.w * coord / (1 + coord**2)))
    sigma_w = k * mu.w * coord**2 / (1 + coord**2)
    zz = np.asarray(z, dtype=complex)[..., None]
    return gamma + np.sum(sigma_w * (zz + coord) / (1 - zz * coord), axis=-1)


def check_limit_theorem(array: TriangularArray, ns: Sequence[int],
                        probes: Sequence[tuple] = DEFAULT_PROBES) -> LimitReport:
    """Evaluate the four indicators of an array along ``ns``.

    Parameters
    ----------
    array : TriangularArray
    ns : sequence of int
        Increasing row indices.
    probes : sequence of (z, w)
        Probe points; those outside the auto-sized domain of ``μ_n`` are
        listed in ``outside_omega`` but still evaluated.

    Returns
    -------
    LimitReport
        ``cross`` holds, at the last ``n``, the residuals between indicators:
        ``a-b`` compares ``k_n R_{μ_n}`` with ``z R₁ + w R₂ + D_n`` built from
        the marginal data (d); ``b-c`` compares ``D_n`` with its ``ρ_n``
        integral form; ``a-c`` compares the coefficients ``κ_{p+1,q+1}`` of
        ``k_n R_{μ_n}`` with the moments ``M_{p,q}(ρ′_n)``.
    """
    ns = [int(n) for n in ns]
    zs = np.array([p[0] for p in probes], dtype=complex)
    ws = np.array([p[1] for p in probes], dtype=complex)
    vals_a, vals_b, vals_c, vals_d = [], [], [], []
    outside = []
    cross = {}
    for idx, n in enumerate(ns):
        try:
            mu = array.measure(n)
            k = float(array.k(n))
        except Exception as exc:  # generator failure is reported with its row
            raise InputError(f"array generator failed at n={n}: {exc}") from exc
        dom = OmegaDomain.for_support(mu.support_radius)
        for j, (z, w) in enumerate(probes):
            if not bool(dom.contains(z, w)):
                outside.append({"n": n, "probe": j})
        a = k * np.asarray(partial_r(mu, zs, ws))
        b = np.asarray(d_functional(mu, k, zs, ws))
        rho_prime = mu.reweighted(k * mu.s * mu.t)
        c = np.array([rho_prime.moment(p, q) for p, q in RHO_ORDERS], dtype=complex)
        gam = [weight_transform(mu, Kernel.GAMMA1, k), weight_transform(mu, Kernel.GAMMA2, k)]
        sig = [weight_transform(mu, Kernel.SIGMA1, k).mass, weight_transform(mu, Kernel.SIGMA2, k).mass]
        vals_a.append(a)
        vals_b.append(b)
        vals_c.append(c)
        vals_d.append(np.array(gam + sig, dtype=complex))
        if idx == len(ns) - 1:
            marg = zs * _marginal_lk_r(mu, k, 1, zs) + ws * _marginal_lk_r(mu, k, 2, ws)
            cross["a-b"] = float(np.abs(a - marg - b).max())
            rho_n = weight_transform(mu, Kernel.RHO, k)
            cross["b-c"] = float(np.abs(b - d_from_rho(rho_n, zs, ws)).max())
            tab = extract_cumulants(mu, 4)
            cross["a-c"] = float(max(abs(k * tab[p + 1, q + 1] - c[i].real)
                                     for i, (p, q) in enumerate(RHO_ORDERS)))
    indicators = {
        "scaled_r": IndicatorSeries("scaled_r", np.array(vals_a)),
        "d_functional": IndicatorSeries("d_functional", np.array(vals_b)),
        "rho_moments": IndicatorSeries("rho_moments", np.array(vals_c)),
        "marginals": IndicatorSeries("marginals", np.array(vals_d)),
    }
    if array.limit_r is not None:
        indicators["scaled_r"].limit = np.asarray(array.limit_r(zs, ws))
    if array.limit_d is not None:
        indicators["d_functional"].limit = np.asarray(array.limit_d(zs, ws))
    if array.limit_rho_moments is not None:
        indicators["rho_moments"].limit = np.array(
            [array.limit_rho_moments[o] for o in RHO_ORDERS], dtype=complex)
    return LimitReport(array.name, ns, [tuple(p) for p in probes], indicators, cross, outside,
                       {"n": ns})


def accompaniment_residual(array: TriangularArray, n: int,
                           probes: Sequence[tuple] = DEFAULT_PROBES) -> float:
    """``max |R_{ν_{k_n, μ_n}} - k_n R_{μ_n}|`` over the probes."""
    mu = array.measure(n)
    k = float(array.k(n))
    zs = np.array([p[0] for p in probes], dtype=complex)
    ws = np.array([p[1] for p in probes], dtype=complex)
    return float(np.abs(compound_poisson_r(k, mu, zs, ws) - k * np.asarray(partial_r(mu, zs, ws))).max())


# functional equation ------------------------------------------------------


@dataclass
class FunctionalEqReport:
    residuals: list
    skipped: list

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def verify_functional_eq(g: Callable, g1: Callable, g2_: Callable, rho: SignedMeasure2D,
                         points: Sequence[tuple]) -> FunctionalEqReport:
    """Residual of ``G(z,w) [1 - G_ρ̃(1/G₁(z), 1/G₂(w))] - G₁(z) G₂(w)``.

    ``ρ̃ = √(1+s²)√(1+t²) ρ``; the marginal transforms ``g1, g2_`` are passed in
    separately so they can come from an independent closed form.
    """
    res, skipped = [], []
    rho_t = rho.reweighted(kernel_sqrt(rho.s, rho.t))
    for j, (z, w) in enumerate(points):
        G1 = complex(np.asarray(g1(np.array([z])))[0])
        G2 = complex(np.asarray(g2_(np.array([w])))[0])
        if abs(G1) < 1e-14 or abs(G2) < 1e-14:
            skipped.append(j)
            continue
        F1, F2 = 1 / G1, 1 / G2
        Gr = complex(np.sum(rho_t.w / ((F1 - rho_t.s) * (F2 - rho_t.t)))) if len(rho_t) else 0.0
        G = complex(np.asarray(g(np.array([z]), np.array([w])))[0])
        res.append(abs(G * (1 - Gr) - G1 * G2))
    return FunctionalEqReport(res, skipped)


# infinitesimal probes -------------------------------------------------------


@dataclass
class DerivativeProbeReport:
    eps: list
    deviation: list
    quotients: list
    target: complex
    flagged: list
    rescaled: dict = field(default_factory=dict)
    expected_masses: dict = field(default_factory=dict)

    @property
    def order(self) -> float:
        return fitted_order(1.0 / np.asarray(self.eps), self.deviation)


def rescaled_masses(q: LKQuintupleGeneral, eps: float, n: int = 201, y_frac: float = 0.002,
                    width: float = 3.0) -> dict:
    """``(1/ε) ∫ {s², t², st} dν_ε`` from an inverted grid of ``ν_ε``.

    The grid covers ``width`` times the support bound of ``ν_ε`` around the
    drift and uses smoothing ``y = y_frac · √ε``.
    """
    law = q.law().scaled(eps)
    half = width * max(law.support_radius, 1e-12)
    y = y_frac * np.sqrt(eps)
    cx, cy = eps * q.gamma1, eps * q.gamma2
    grid = invert2d(law.g_evaluator(), (cx - half, cx + half), (cy - half, cy + half), n, n, y)
    return {"s2": grid.moment(2, 0) / eps, "t2": grid.moment(0, 2) / eps, "st": grid.moment(1, 1) / eps,
            "mass": grid.riemann_mass(), "y": y}


def derivative_probe(q: LKQuintupleGeneral, eps_list: Sequence[float], z: complex, w: complex,
                     masses_at: Optional[float] = None) -> DerivativeProbeReport:
    """Difference quotients ``[G_{ν_ε}(1/z, 1/w) - zw]/ε`` against ``zw R(z, w)``.

    ``G_{ν_ε}`` is reconstructed from ``ε R`` through subordination.  When
    ``masses_at`` is given, the rescaled masses at that ``ε`` are compared
    with the masses of the compact triple of ``q``.
    """
    target = z * w * complex(lk_r_general(q, z, w))
    devs, quots, flagged = [], [], []
    for eps in eps_list:
        law = q.law().scaled(eps)
        try:
            G = complex(np.asarray(law.g(np.array([1 / z]), np.array([1 / w])))[0])
        except NumericalError:
            flagged.append(eps)
            devs.append(float("nan"))
            quots.append(complex("nan"))
            continue
        qt = (G - z * w) / eps
        quots.append(qt)
        devs.append(abs(qt - target))
    rep = DerivativeProbeReport(list(eps_list), devs, quots, target, flagged)
    if masses_at is not None:
        rep.rescaled = rescaled_masses(q, masses_at)
        c = lk_convert_inverse(q)
        rep.expected_masses = {"s2": c.rho1.mass, "t2": c.rho2.mass, "st": c.rho.mass}
    return rep


__all__ = [
    "DEFAULT_PROBES",
    "DerivativeProbeReport",
    "FunctionalEqReport",
    "IndicatorSeries",
    "LimitReport",
    "TriangularArray",
    "accompaniment_residual",
    "check_limit_theorem",
    "clt_array",
    "clt_sequence",
    "constant_array",
    "d_from_rho",
    "d_functional",
    "derivative_probe",
    "fitted_order",
    "poisson_array",
    "poisson_sequence",
    "rescaled_masses",
    "richardson",
    "verify_functional_eq",
]
