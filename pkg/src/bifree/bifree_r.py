"""The bi-free partial R-transform and its inverse.

For a planar law ``μ`` with marginal R-transforms ``R₁, R₂`` the partial
R-transform near the origin is

    R(z, w) = z R₁(z) + w R₂(w) + 1 - zw / G(K₁(z), K₂(w)),

with ``K_j(z) = 1/z + R_j(z)``.  Reading the identity backwards gives
``G(K₁(z), K₂(w)) = zw / (1 + z R₁(z) + w R₂(w) - R(z, w))``.

:class:`LawSum` carries a law specified by a sum of R-transforms, either of
finitely atomic laws (possibly raised to a power ``k``) or of closed-form
Lévy-Khintchine parts, and evaluates its Cauchy transform anywhere off the
real axes through subordination.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    AnalyticityRadiusError,
    DegenerateDomainError,
    DomainError,
    InputError,
)
from .measure import Measure1D, Measure2D, SignedMeasure2D, _Atomic2D
from .rtransform1d import (
    ClosedPart,
    FreeLKPair,
    REvaluator1D,
    RProvenance,
    StolzAngle,
    r1_from_g,
    r1_from_measure,
    solve_subordination,
)
from .transform2d import GEvaluator2D, Provenance, g1, g2

H_TOL = 1e-10
TORUS_NODES = 64


@dataclass(frozen=True)
class OmegaDomain:
    """Product ``(Δ ∪ Δ̄) × (Δ ∪ Δ̄)`` of a shared Stolz angle."""

    angle: StolzAngle

    def contains(self, z, w):
        return np.logical_and(self.angle.contains(z), self.angle.contains(w))

    @classmethod
    def for_support(cls, radius: float) -> "OmegaDomain":
        return cls(StolzAngle.for_support(radius, factor=8.0))


@dataclass(frozen=True)
class PartialREvaluator:
    """A partial R-transform with its marginal R-transforms and joint G."""

    func: Callable
    r1: REvaluator1D
    r2: REvaluator1D
    g: Optional[GEvaluator2D]
    domain: OmegaDomain
    support_radius: Optional[float] = None

    def __call__(self, z, w):
        return self.func(z, w)


def _marginal_r(mu_or_g, axis: int) -> Callable:
    if isinstance(mu_or_g, _Atomic2D):
        marg = mu_or_g.marginal(axis)
        return lambda z: r1_from_measure(marg, z)
    g = mu_or_g
    marg = g.marginal(axis)
    return lambda z: _r_from_callable(marg, z)


def _r_from_callable(gfunc, z):
    z = np.asarray(z, dtype=complex)
    out = r1_from_g(gfunc, np.atleast_1d(z).ravel()).reshape(z.shape)
    return out[()] if z.ndim else complex(out)


def _h_atomic(mu: _Atomic2D, z, w, R1, R2):
    # h = G(K1, K2)/(zw) written without the large numbers K_j
    d1 = 1.0 + z[..., None] * (R1[..., None] - mu.s)
    d2 = 1.0 + w[..., None] * (R2[..., None] - mu.t)
    return np.sum(mu.w / (d1 * d2), axis=-1)


def partial_r(mu, z, w):
    """Partial R-transform of a planar law.

    Parameters
    ----------
    mu : Measure2D or GEvaluator2D
        A finitely atomic law, or a Cauchy transform with marginal
        transforms attached.
    z, w : complex or ndarray
        Points near the origin off the real axes; broadcast together.

    Returns
    -------
    complex or ndarray

    Raises
    ------
    DegenerateDomainError
        If ``|h| < 1e-10`` at some point, meaning the domain should shrink.
    """
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    if np.any(z.imag == 0) or np.any(w.imag == 0):
        raise DomainError("partial R-transform needs non-real z and w")
    if isinstance(mu, _Atomic2D):
        R1 = np.asarray(r1_from_measure(mu.marginal(1), z))
        R2 = np.asarray(r1_from_measure(mu.marginal(2), w))
        h = _h_atomic(mu, z, w, R1, R2)
    elif isinstance(mu, GEvaluator2D):
        R1 = np.asarray(_r_from_callable(mu.marginal(1), z))
        R2 = np.asarray(_r_from_callable(mu.marginal(2), w))
        h = np.asarray(mu(1.0 / z + R1, 1.0 / w + R2)) / (z * w)
    else:
        raise InputError(f"cannot take the partial R-transform of {type(mu).__name__}")
    if np.any(np.abs(h) < H_TOL):
        raise DegenerateDomainError("h vanishes; shrink the domain", stage="partial_r")
    out = z * R1 + w * R2 + 1.0 - 1.0 / h
    return out[()] if out.ndim else complex(out)


def partial_r_evaluator(mu) -> PartialREvaluator:
    """Bundle :func:`partial_r` of ``mu`` with its marginal pieces."""
    if isinstance(mu, _Atomic2D):
        radius = mu.support_radius
        g = GEvaluator2D.from_measure(mu)
    else:
        radius = mu.support_radius
        g = mu
    dom = OmegaDomain.for_support(radius or 0.0)
    angle = StolzAngle.for_support(radius or 0.0)
    return PartialREvaluator(
        func=lambda z, w: partial_r(mu, z, w),
        r1=REvaluator1D(_marginal_r(mu, 1), RProvenance.FROM_MEASURE, angle),
        r2=REvaluator1D(_marginal_r(mu, 2), RProvenance.FROM_MEASURE, angle),
        g=g,
        domain=dom,
        support_radius=radius,
    )


def reconstruct_g(R1: Callable, R2: Callable, R: Callable, z, w):
    """``G(K₁(z), K₂(w)) = zw / (1 + z R₁(z) + w R₂(w) - R(z, w))``.

    Raises
    ------
    DegenerateDomainError
        When the denominator vanishes.
    """
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    den = 1.0 + z * np.asarray(R1(z)) + w * np.asarray(R2(w)) - np.asarray(R(z, w))
    if np.any(np.abs(den) < H_TOL):
        raise DegenerateDomainError("denominator vanishes; domain too large",
                                    stage="reconstruct_g")
    out = z * w / den
    return out[()] if out.ndim else complex(out)


# laws given by sums of R-transforms ---------------------------------------


@dataclass(frozen=True)
class ClosedLaw2D:
    """Closed-form summand ``R(z,w) = z R₁(z) + w R₂(w) + D(z,w)``.

    ``R₁, R₂`` are free Lévy-Khintchine pairs and the coupling term is
    ``D(z, w) = Σ c_i zw / ((1 - z s_i)(1 - w t_i))`` for the atoms
    ``(s_i, t_i, c_i)`` of ``coupling``.
    """

    pair1: FreeLKPair
    pair2: FreeLKPair
    coupling: SignedMeasure2D = field(default_factory=SignedMeasure2D.zero)

    def coupling_r(self, z, w):
        c = self.coupling
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        zz, ww = z[..., None], w[..., None]
        d = (1.0 - zz * c.s) * (1.0 - ww * c.t)
        if np.any(d == 0):
            raise DomainError("evaluation point on a pole of the coupling measure")
        out = np.sum(c.w * zz * ww / d, axis=-1)
        return out

    def r(self, z, w):
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        return z * self.pair1.r(z) + w * self.pair2.r(w) + self.coupling_r(z, w)

    def coupling_of_f(self, f1, f2):
        # D(1/f1, 1/f2) = Σ c / ((f1 - s)(f2 - t))
        c = self.coupling
        if len(c) == 0:
            return np.zeros(np.broadcast(f1, f2).shape, dtype=complex)
        f1, f2 = np.broadcast_arrays(f1, f2)
        return np.sum(c.w / ((f1[..., None] - c.s) * (f2[..., None] - c.t)), axis=-1)

    def scaled(self, t: float) -> "ClosedLaw2D":
        return ClosedLaw2D(self.pair1.scaled(t), self.pair2.scaled(t), self.coupling.scaled(t))

    @property
    def pole_radius(self) -> float:
        vals = [self.pair1.sigma.support_radius, self.pair2.sigma.support_radius,
                self.coupling.support_radius]
        return max(vals)


@dataclass(frozen=True)
class LawSum:
    """A planar law whose R-transform is a finite sum of known pieces.

    Attributes
    ----------
    atomic : tuple of (k, Measure2D)
        Contributes ``k R_μ``; requires ``k ≥ 1``.
    closed : tuple of ClosedLaw2D
        Closed-form contributions.
    """

    atomic: tuple = ()
    closed: tuple = ()

    def __post_init__(self):
        for k, mu in self.atomic:
            if not k >= 1:
                raise InputError("atomic summands need a power k >= 1")
            if not mu.is_probability:
                raise InputError("atomic summands must be probability laws")

    def __add__(self, other: "LawSum") -> "LawSum":
        return LawSum(self.atomic + other.atomic, self.closed + other.closed)

    @classmethod
    def of_measure(cls, mu: Measure2D, k: float = 1.0) -> "LawSum":
        return cls(atomic=((float(k), mu),))

    @property
    def support_radius(self) -> float:
        """Radius of a square holding the support of the law (a bound)."""
        r = 0.0
        for k, mu in self.atomic:
            rho = mu.support_radius
            r += k * rho + 2 * np.sqrt(k) * rho
        for c in self.closed:
            r += max(_pair_support_bound(c.pair1), _pair_support_bound(c.pair2))
        return float(r)

    @property
    def pole_radius(self) -> float:
        """Largest atom coordinate entering the R-transform."""
        vals = [mu.support_radius for _, mu in self.atomic] + [c.pole_radius for c in self.closed]
        return max(vals, default=0.0)

    def _parts(self, axis: int):
        closed = [ClosedPart.from_pair(c.pair1 if axis == 1 else c.pair2) for c in self.closed]
        atomic = [(k, mu.marginal(axis)) for k, mu in self.atomic]
        return closed, atomic

    def marginal_r(self, axis: int, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for c in self.closed:
            out = out + (c.pair1 if axis == 1 else c.pair2).r(z)
        for k, mu in self.atomic:
            out = out + k * np.asarray(r1_from_measure(mu.marginal(axis), z))
        return out

    def r(self, z, w):
        """Partial R-transform ``Σ k_i R_{μ_i} + Σ R_c`` at ``(z, w)``."""
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        out = np.zeros(z.shape, dtype=complex)
        for c in self.closed:
            out = out + c.r(z, w)
        for k, mu in self.atomic:
            out = out + k * np.asarray(partial_r(mu, z, w))
        return out

    def _solve(self, lam, axis: int, stage: str):
        closed, atomic = self._parts(axis)
        return solve_subordination(lam, closed, atomic, stage=stage)

    def marginal_g(self, axis: int) -> Callable:
        def g(lam):
            lam = np.asarray(lam, dtype=complex)
            return 1.0 / self._solve(lam, axis, f"marginal_g{axis}").f

        return g

    def g(self, z, w):
        """Joint Cauchy transform at ``(z, w)`` off the real axes."""
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        s1 = self._solve(z, 1, "reconstruct_g:axis1")
        s2 = self._solve(w, 2, "reconstruct_g:axis2")
        f1, f2 = np.broadcast_arrays(s1.f, s2.f)
        den = np.ones(f1.shape, dtype=complex)
        for i, (k, mu) in enumerate(self.atomic):
            o1, o2 = np.broadcast_arrays(s1.omega[..., i], s2.omega[..., i])
            h = np.asarray(g2(mu, o1, o2)) * f1 * f2
            den = den + k * (1.0 / h - 1.0)
        for c in self.closed:
            den = den - c.coupling_of_f(f1, f2)
        if np.any(np.abs(den) < H_TOL):
            raise DegenerateDomainError("vanishing denominator", stage="reconstruct_g")
        out = 1.0 / (f1 * f2 * den)
        return out[()] if out.ndim else complex(out)

    def g_evaluator(self) -> GEvaluator2D:
        return GEvaluator2D(
            func=self.g,
            provenance=Provenance.FROM_R,
            signed=False,
            marginal1=self.marginal_g(1),
            marginal2=self.marginal_g(2),
            support_radius=self.support_radius,
        )

    def r_evaluator(self) -> PartialREvaluator:
        angle = StolzAngle.for_support(self.pole_radius)
        return PartialREvaluator(
            func=self.r,
            r1=REvaluator1D(lambda z: self.marginal_r(1, z), RProvenance.CLOSED_FORM, angle),
            r2=REvaluator1D(lambda z: self.marginal_r(2, z), RProvenance.CLOSED_FORM, angle),
            g=self.g_evaluator(),
            domain=OmegaDomain.for_support(self.pole_radius),
            support_radius=self.pole_radius,
        )

    def scaled(self, t: float) -> "LawSum":
        return LawSum(tuple((k * t, mu) for k, mu in self.atomic),
                      tuple(c.scaled(t) for c in self.closed))


def _pair_support_bound(p: FreeLKPair) -> float:
    # semicircle part at the origin plus one free Poisson law per atom
    x, w = p.sigma.x, p.sigma.w
    r = abs(p.gamma)
    at0 = x == 0
    r += 2 * np.sqrt(w[at0].sum())
    x, w = x[~at0], w[~at0]
    lam = w * (1 + x * x) / (x * x)
    r += float(np.sum(np.abs(x) * (1 + np.sqrt(lam)) ** 2 + lam * np.abs(x)))
    return r


# cumulants ------------------------------------------------------------------


@dataclass(frozen=True)
class CumulantTable:
    """Coefficients ``κ_{m,n}`` of ``R(z, w) = Σ κ_{m,n} z^m w^n`` for ``m + n ≤ maxdeg``."""

    maxdeg: int
    kappa: np.ndarray
    max_imag: float = 0.0

    def __getitem__(self, mn) -> float:
        m, n = mn
        if m < 0 or n < 0 or m + n > self.maxdeg:
            raise KeyError(mn)
        return float(self.kappa[m, n])

    def items(self):
        for m in range(self.maxdeg + 1):
            for n in range(self.maxdeg + 1 - m):
                yield (m, n), float(self.kappa[m, n])

    def __add__(self, other: "CumulantTable") -> "CumulantTable":
        d = min(self.maxdeg, other.maxdeg)
        k = self.kappa[: d + 1, : d + 1] + other.kappa[: d + 1, : d + 1]
        return CumulantTable(d, _mask(k, d), max(self.max_imag, other.max_imag))

    def max_diff(self, other: "CumulantTable", maxdeg: int | None = None) -> float:
        d = min(self.maxdeg, other.maxdeg) if maxdeg is None else maxdeg
        return max(abs(self[mn] - other[mn]) for mn, _ in CumulantTable(d, np.zeros((d + 1, d + 1))).items())

    def to_dict(self) -> dict:
        return {"maxdeg": self.maxdeg, "kappa": [[m, n, v] for (m, n), v in self.items()]}

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=None)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "CumulantTable":
        d = int(data["maxdeg"])
        k = np.zeros((d + 1, d + 1))
        for m, n, v in data["kappa"]:
            k[int(m), int(n)] = float(v)
        return cls(d, k)


def _mask(k: np.ndarray, d: int) -> np.ndarray:
    m, n = np.indices(k.shape)
    return np.where(m + n <= d, k, 0.0)


def torus_coefficients(R: Callable, maxdeg: int, r: float, n: int = TORUS_NODES) -> np.ndarray:
    """Complex Taylor coefficients of ``R`` by trapezoid averaging on ``|z| = |w| = r``.

    The nodes ``r e^{2πi(j+1/2)/n}`` avoid the real axis.
    """
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    z = r * np.exp(1j * theta)
    vals = np.asarray(R(z[:, None], z[None, :]), dtype=complex)
    F = np.fft.fft2(vals) / n**2
    idx = np.arange(maxdeg + 1)
    phase = np.exp(-1j * np.pi * (idx[:, None] + idx[None, :]) / n)
    scale = r ** (-(idx[:, None] + idx[None, :]).astype(float))
    return F[: maxdeg + 1, : maxdeg + 1] * phase * scale


def extract_cumulants(R, maxdeg: int, r: float | None = None, n: int = TORUS_NODES) -> CumulantTable:
    """Power-series coefficients of a partial R-transform.

    Parameters
    ----------
    R : Measure2D, LawSum, PartialREvaluator or callable
        The law or its R-transform.  Bare callables need ``r``.
    maxdeg : int
        Largest total degree ``m + n`` returned.
    r : float, optional
        Torus radius; defaults to ``1 / (8 max(ρ, 1))`` with ``ρ`` the largest
        atom coordinate entering the R-transform.
    n : int
        Trapezoid nodes per circle.

    Returns
    -------
    CumulantTable

    Raises
    ------
    AnalyticityRadiusError
        If some coefficient has imaginary part above ``1e-6``.
    """
    if isinstance(R, _Atomic2D):
        rho, func = R.support_radius, (lambda z, w, mu=R: partial_r(mu, z, w))
    elif isinstance(R, LawSum):
        rho, func = R.pole_radius, R.r
    elif isinstance(R, PartialREvaluator):
        rho, func = R.support_radius, R.func
    elif callable(R):
        rho, func = None, R
    else:
        raise InputError(f"cannot extract cumulants from {type(R).__name__}")
    if r is None:
        if rho is None or not np.isfinite(rho):
            raise InputError("extract_cumulants needs a compactly supported law or an explicit radius")
        r = 1.0 / (8.0 * max(rho, 1.0))
    if maxdeg < 0 or maxdeg >= n // 2:
        raise InputError("maxdeg must lie in [0, n/2)")
    coef = torus_coefficients(func, maxdeg, r, n)
    coef = np.where(np.add.outer(np.arange(maxdeg + 1), np.arange(maxdeg + 1)) <= maxdeg, coef, 0)
    max_imag = float(np.abs(coef.imag).max())
    if max_imag > 1e-6:
        raise AnalyticityRadiusError(
            f"imaginary residue {max_imag:.3g} exceeds 1e-6; shrink r", stage="extract_cumulants",
            radius=r,
        )
    return CumulantTable(maxdeg, coef.real.copy(), max_imag)


def marginal_r_limit(R, z, axis: int, eps: float):
    """``R(z, -iε)`` (axis 1) or ``R(-iε, z)`` (axis 2), close to ``z R_j(z)``."""
    if not eps > 0:
        raise InputError("eps must be positive")
    func = R.r if isinstance(R, LawSum) else R
    if isinstance(R, _Atomic2D):
        func = lambda a, b: partial_r(R, a, b)  # noqa: E731
    z = np.asarray(z, dtype=complex)
    other = np.full(z.shape, -1j * eps)
    out = func(z, other) if axis == 1 else func(other, z)
    return np.asarray(out)[()] if z.ndim == 0 else np.asarray(out)


__all__ = [
    "ClosedLaw2D",
    "CumulantTable",
    "LawSum",
    "OmegaDomain",
    "PartialREvaluator",
    "extract_cumulants",
    "marginal_r_limit",
    "partial_r",
    "partial_r_evaluator",
    "reconstruct_g",
    "torus_coefficients",
]
