"""Bi-free convolution and Lévy-Khintchine parameters.

Infinitely divisible laws are stored through the general quintuple
``(γ₁, γ₂, ρ₁, ρ₂, ρ)`` with R-transform

    γ₁z + γ₂w + ∫ (z²+zs)/(1-zs) dρ₁ + ∫ (w²+wt)/(1-wt) dρ₂
        + ∫ zw √(1+s²)√(1+t²) / ((1-zs)(1-wt)) dρ,

or through the compact triple ``(κ₁₀, κ₀₁, ρ′₁, ρ′₂, ρ′)`` with kernels
``z²/(1-zs)``, ``w²/(1-wt)`` and ``zw/((1-zs)(1-wt))``.  All measures are
finitely atomic, so every constraint is checked atom by atom.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .bifree_r import ClosedLaw2D, CumulantTable, LawSum, extract_cumulants, partial_r
from .errors import InputError, NumericalError, PoleError, SingularLawError
from .measure import (
    GridDensity2D,
    Measure1D,
    Measure2D,
    SignedMeasure2D,
    _Atomic2D,
    kernel_sqrt,
    measure_from_dict,
    measure_to_dict,
)
from .rtransform1d import FreeLKPair
from .transform2d import GEvaluator2D, Provenance, g_semicircle, invert2d, semicircle_density

CONSTRAINT_TOL = 1e-9


class ConstraintViolationError(InputError):
    """Lévy-Khintchine data violate the atomwise constraint system."""


# parameter types ------------------------------------------------------------


@dataclass(frozen=True)
class GaussianParams:
    """Bi-free Gaussian with ``R = γ₁z + γ₂w + az² + bw² + czw``."""

    gamma1: float = 0.0
    gamma2: float = 0.0
    a: float = 1.0
    b: float = 1.0
    c: float = 0.0

    def __post_init__(self):
        vals = (self.gamma1, self.gamma2, self.a, self.b, self.c)
        if not all(np.isfinite(v) for v in vals):
            raise InputError("Gaussian parameters must be finite")
        if self.a < 0 or self.b < 0:
            raise InputError("variances a and b must be non-negative")
        if abs(self.c) > np.sqrt(self.a * self.b) * (1 + 1e-12):
            raise InputError(f"|c| = {abs(self.c)} exceeds sqrt(ab) = {np.sqrt(self.a * self.b)}")

    @property
    def singular(self) -> bool:
        return abs(self.c) >= np.sqrt(self.a * self.b) or self.a == 0 or self.b == 0


@dataclass(frozen=True)
class LKQuintupleGeneral:
    """General Lévy-Khintchine data ``(γ₁, γ₂, ρ₁, ρ₂, ρ)``."""

    gamma1: float
    gamma2: float
    rho1: Measure2D = field(default_factory=Measure2D.zero)
    rho2: Measure2D = field(default_factory=Measure2D.zero)
    rho: SignedMeasure2D = field(default_factory=SignedMeasure2D.zero)

    def __post_init__(self):
        if not (np.isfinite(self.gamma1) and np.isfinite(self.gamma2)):
            raise InputError("gamma must be finite")
        if self.rho1.signed or self.rho2.signed:
            raise InputError("rho1 and rho2 must be positive measures")
        if not self.rho.signed:
            object.__setattr__(self, "rho", SignedMeasure2D(self.rho.s, self.rho.t, self.rho.w))

    def r(self, z, w):
        return lk_r_general(self, z, w)

    def scaled(self, t: float) -> "LKQuintupleGeneral":
        return LKQuintupleGeneral(t * self.gamma1, t * self.gamma2, self.rho1.scaled(t),
                                  self.rho2.scaled(t), self.rho.scaled(t))

    def __add__(self, other: "LKQuintupleGeneral") -> "LKQuintupleGeneral":
        return LKQuintupleGeneral(self.gamma1 + other.gamma1, self.gamma2 + other.gamma2,
                                  self.rho1 + other.rho1, self.rho2 + other.rho2,
                                  self.rho + other.rho)

    def closed_part(self) -> ClosedLaw2D:
        return ClosedLaw2D(
            FreeLKPair(self.gamma1, self.rho1.marginal(1)),
            FreeLKPair(self.gamma2, self.rho2.marginal(2)),
            self.rho.reweighted(kernel_sqrt(self.rho.s, self.rho.t)),
        )

    def law(self) -> LawSum:
        return LawSum(closed=(self.closed_part(),))

    def equals(self, other: "LKQuintupleGeneral", tol: float = 0.0) -> bool:
        if abs(self.gamma1 - other.gamma1) > tol or abs(self.gamma2 - other.gamma2) > tol:
            return False
        for a, b in ((self.rho1, other.rho1), (self.rho2, other.rho2), (self.rho, other.rho)):
            diff = SignedMeasure2D(np.r_[a.s, b.s], np.r_[a.t, b.t], np.r_[a.w, -b.w])
            if len(diff) and np.abs(diff.w).max() > tol:
                return False
        return True

    def to_dict(self) -> dict:
        return {"gamma": [self.gamma1, self.gamma2], "rho1": measure_to_dict(self.rho1),
                "rho2": measure_to_dict(self.rho2), "rho": measure_to_dict(self.rho)}

    @classmethod
    def from_dict(cls, data: dict) -> "LKQuintupleGeneral":
        try:
            g1, g2 = (float(v) for v in data["gamma"])
            parts = [data.get(k, {"atoms": []}) for k in ("rho1", "rho2", "rho")]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed quintuple: {exc}") from None
        r1 = measure_from_dict(parts[0], signed=False)
        r2 = measure_from_dict(parts[1], signed=False)
        r = measure_from_dict(parts[2], signed=True)
        if not all(isinstance(m, _Atomic2D) for m in (r1, r2, r)):
            raise InputError("quintuple measures must be planar")
        return cls(g1, g2, r1, r2, r)


@dataclass(frozen=True)
class LKTripleCompact:
    """Compact Lévy-Khintchine data ``(κ₁₀, κ₀₁, ρ′₁, ρ′₂, ρ′)``."""

    k10: float
    k01: float
    rho1: Measure2D = field(default_factory=Measure2D.zero)
    rho2: Measure2D = field(default_factory=Measure2D.zero)
    rho: SignedMeasure2D = field(default_factory=SignedMeasure2D.zero)

    def __post_init__(self):
        if not self.rho.signed:
            object.__setattr__(self, "rho", SignedMeasure2D(self.rho.s, self.rho.t, self.rho.w))

    def r(self, z, w):
        return lk_r_compact(self, z, w)


@dataclass
class ValidationReport:
    """Outcome of :func:`lk_validate`.

    ``checks`` holds every evaluated identity as ``{check, location,
    residual}``; ``violations`` the subset above tolerance.
    """

    checks: list
    violations: list
    tol: float = CONSTRAINT_TOL

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def max_residual(self) -> float:
        return max((c["residual"] for c in self.checks), default=0.0)

    def to_json(self) -> str:
        return json.dumps({"valid": self.valid, "max_residual": self.max_residual,
                           "violations": self.violations})


# R-transforms ---------------------------------------------------------------


def _poles(z, x, label: str, what):
    d = 1.0 - z[..., None] * x
    if np.any(d == 0):
        idx = np.argwhere(d == 0)[0][-1]
        raise PoleError(f"pole at atom {label}={x[idx]:g} of {what}")
    return d


def lk_r_general(q: LKQuintupleGeneral, z, w):
    """R-transform of the general quintuple at ``(z, w)``.

    Raises
    ------
    PoleError
        If ``z s = 1`` or ``w t = 1`` at an atom; the message names it.
    """
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    zz, ww = z[..., None], w[..., None]
    out = q.gamma1 * z + q.gamma2 * w
    r1, r2, r = q.rho1, q.rho2, q.rho
    d = _poles(z, r1.s, "s", "rho1")
    out = out + np.sum(r1.w * (zz * zz + zz * r1.s) / d, axis=-1)
    d = _poles(w, r2.t, "t", "rho2")
    out = out + np.sum(r2.w * (ww * ww + ww * r2.t) / d, axis=-1)
    ds = _poles(z, r.s, "s", "rho")
    dt = _poles(w, r.t, "t", "rho")
    out = out + np.sum(r.w * kernel_sqrt(r.s, r.t) * zz * ww / (ds * dt), axis=-1)
    return out[()] if out.ndim else complex(out)


def lk_r_compact(c: LKTripleCompact, z, w):
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    zz, ww = z[..., None], w[..., None]
    out = c.k10 * z + c.k01 * w
    d = _poles(z, c.rho1.s, "s", "rho1")
    out = out + np.sum(c.rho1.w * zz * zz / d, axis=-1)
    d = _poles(w, c.rho2.t, "t", "rho2")
    out = out + np.sum(c.rho2.w * ww * ww / d, axis=-1)
    ds = _poles(z, c.rho.s, "s", "rho")
    dt = _poles(w, c.rho.t, "t", "rho")
    out = out + np.sum(c.rho.w * zz * ww / (ds * dt), axis=-1)
    return out[()] if out.ndim else complex(out)


def compound_poisson_r(lam: float, jump: _Atomic2D, z, w):
    """``-λ + λ Σ w_i / ((1 - z s_i)(1 - w t_i))``."""
    if not lam > 0:
        raise InputError("rate must be positive")
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    ds = _poles(z, jump.s, "s", "jump law")
    dt = _poles(w, jump.t, "t", "jump law")
    out = -lam * jump.mass + lam * np.sum(jump.w / (ds * dt), axis=-1)
    return out[()] if out.ndim else complex(out)


# validation -----------------------------------------------------------------


def _aligned(*measures):
    keys = np.unique(np.concatenate([np.stack([m.s, m.t], 1).reshape(-1, 2) for m in measures]), axis=0)
    out = []
    for m in measures:
        w = np.zeros(len(keys))
        if len(m):
            pos = {(a, b): i for i, (a, b) in enumerate(map(tuple, keys))}
            for a, b, x in zip(m.s, m.t, m.w):
                w[pos[(a, b)]] += x
        out.append(w)
    return keys, out


def _excess_over_rounding(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """``|lhs - rhs|`` minus a forward rounding bound, floored at zero.

    Both sides are products of a few correctly rounded operations, so a gap
    below ``16 u (|lhs| + |rhs|)`` carries no information and reads as 0.
    """
    bound = 16 * np.finfo(float).eps * (np.abs(lhs) + np.abs(rhs))
    return np.maximum(np.abs(lhs - rhs) - bound, 0.0)


def lk_validate(q: Union[LKQuintupleGeneral, LKTripleCompact], tol: float = CONSTRAINT_TOL) -> ValidationReport:
    """Check the atomwise constraint system of a Lévy-Khintchine datum.

    For the general form, at every atom location

        t/√(1+t²) ρ₁ = s/√(1+s²) ρ,   s/√(1+s²) ρ₂ = t/√(1+t²) ρ,

    and ``|ρ{0}|² ≤ ρ₁{0} ρ₂{0}`` at the origin.  The compact form uses
    ``t ρ′₁ = s ρ′`` and ``s ρ′₂ = t ρ′``.
    """
    general = isinstance(q, LKQuintupleGeneral)
    keys, (w1, w2, w) = _aligned(q.rho1, q.rho2, q.rho)
    s, t = keys[:, 0], keys[:, 1]
    if general:
        fs, ft = s / np.sqrt(1 + s * s), t / np.sqrt(1 + t * t)
        names = ("t/sqrt(1+t^2) rho1 = s/sqrt(1+s^2) rho", "s/sqrt(1+s^2) rho2 = t/sqrt(1+t^2) rho")
    else:
        fs, ft = s, t
        names = ("t rho1 = s rho", "s rho2 = t rho")
    checks, bad = [], []
    res1 = _excess_over_rounding(ft * w1, fs * w)
    res2 = _excess_over_rounding(fs * w2, ft * w)
    for i in range(len(keys)):
        loc = [float(s[i]), float(t[i])]
        for name, res in ((names[0], res1[i]), (names[1], res2[i])):
            entry = {"check": name, "location": loc, "residual": float(res)}
            checks.append(entry)
            if res > tol:
                bad.append(entry)
    origin = (s == 0) & (t == 0)
    a = float(w1[origin].sum())
    b = float(w2[origin].sum())
    c = float(w[origin].sum())
    excess = float(_excess_over_rounding(np.array(c * c), np.array(a * b))) if c * c > a * b else 0.0
    entry = {"check": "|rho(0)|^2 <= rho1(0) rho2(0)", "location": [0.0, 0.0], "residual": excess}
    checks.append(entry)
    if excess > tol:
        bad.append(entry)
    return ValidationReport(checks, bad, tol)


def _require_valid(q, what: str = "quintuple"):
    rep = lk_validate(q)
    if not rep.valid:
        v = rep.violations[0]
        raise ConstraintViolationError(
            f"invalid {what}: {v['check']} fails at {tuple(v['location'])} "
            f"(residual {v['residual']:.3g})")
    return rep


def lambda_combine(q1: LKQuintupleGeneral, q2: LKQuintupleGeneral, t1: float, t2: float) -> LKQuintupleGeneral:
    """Componentwise ``t₁ q₁ + t₂ q₂`` for ``t₁, t₂ ≥ 0``."""
    if t1 < 0 or t2 < 0:
        raise InputError("combination weights must be non-negative")
    _require_valid(q1)
    _require_valid(q2)
    out = q1.scaled(t1) + q2.scaled(t2)
    _require_valid(out, "combination")
    return out


# conversions ----------------------------------------------------------------


def lk_convert(c: LKTripleCompact) -> LKQuintupleGeneral:
    """Compact triple to general quintuple (``dρ₁ = dρ′₁/(1+s²)`` and so on)."""
    r1 = Measure2D(c.rho1.s, c.rho1.t, c.rho1.w / (1 + c.rho1.s**2))
    r2 = Measure2D(c.rho2.s, c.rho2.t, c.rho2.w / (1 + c.rho2.t**2))
    r = SignedMeasure2D(c.rho.s, c.rho.t, c.rho.w / kernel_sqrt(c.rho.s, c.rho.t))
    g1 = c.k10 - float(np.sum(r1.w * r1.s))
    g2 = c.k01 - float(np.sum(r2.w * r2.t))
    return LKQuintupleGeneral(g1, g2, r1, r2, r)


def lk_convert_inverse(q: LKQuintupleGeneral) -> LKTripleCompact:
    """General quintuple to compact triple; atomic data are always compact."""
    r1 = Measure2D(q.rho1.s, q.rho1.t, q.rho1.w * (1 + q.rho1.s**2))
    r2 = Measure2D(q.rho2.s, q.rho2.t, q.rho2.w * (1 + q.rho2.t**2))
    r = SignedMeasure2D(q.rho.s, q.rho.t, q.rho.w * kernel_sqrt(q.rho.s, q.rho.t))
    k10 = q.gamma1 + float(np.sum(q.rho1.w * q.rho1.s))
    k01 = q.gamma2 + float(np.sum(q.rho2.w * q.rho2.t))
    return LKTripleCompact(k10, k01, r1, r2, r)


# constructors ---------------------------------------------------------------


def gaussian_quintuple(p: GaussianParams) -> LKQuintupleGeneral:
    o = ([0.0], [0.0])
    return LKQuintupleGeneral(p.gamma1, p.gamma2, Measure2D(*o, [p.a]), Measure2D(*o, [p.b]),
                              SignedMeasure2D(*o, [p.c]))


def compound_poisson_quintuple(lam: float, jump: Measure2D) -> LKQuintupleGeneral:
    """Quintuple of the bi-free compound Poisson law with rate ``λ``."""
    if not lam > 0:
        raise InputError("rate must be positive")
    s, t, w = jump.s, jump.t, jump.w
    g1 = lam * float(np.sum(w * s / (1 + s * s)))
    g2 = lam * float(np.sum(w * t / (1 + t * t)))
    r1 = Measure2D(s, t, lam * w * s * s / (1 + s * s))
    r2 = Measure2D(s, t, lam * w * t * t / (1 + t * t))
    r = SignedMeasure2D(s, t, lam * w * s * t / kernel_sqrt(s, t))
    return LKQuintupleGeneral(g1, g2, r1, r2, r)


def product_quintuple(p1: FreeLKPair, p2: FreeLKPair) -> LKQuintupleGeneral:
    """Quintuple of the product of two freely infinitely divisible laws."""
    x1, x2 = p1.sigma.x, p2.sigma.x
    r1 = Measure2D(x1, np.zeros_like(x1), p1.sigma.w)
    r2 = Measure2D(np.zeros_like(x2), x2, p2.sigma.w)
    return LKQuintupleGeneral(p1.gamma, p2.gamma, r1, r2, SignedMeasure2D.zero())


def point_mass_quintuple(a: float, b: float) -> LKQuintupleGeneral:
    return LKQuintupleGeneral(float(a), float(b))


# Gaussian closed form ------------------------------------------------------


def gaussian_density_standard(s, t, c: float):
    """Density of the bi-free Gaussian with unit variances and covariance ``|c| < 1``.

    ``(1-c²)/(4π²) √(4-s²)√(4-t²) / [(1-c²)² - c(1+c²) st + c²(s²+t²)]`` on
    ``[-2, 2]²``, zero outside.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    s, t = np.broadcast_arrays(s, t)
    inside = (np.abs(s) < 2) & (np.abs(t) < 2)
    si, ti = np.where(inside, s, 0.0), np.where(inside, t, 0.0)
    roots = np.sqrt(4 - si * si) * np.sqrt(4 - ti * ti)
    den = 2 * (1 - c * c) ** 2 - 2 * c * (1 + c * c) * si * ti + 2 * c * c * (si * si + ti * ti)
    return np.where(inside, (1 - c * c) / (2 * np.pi**2) * roots / den, 0.0)


@dataclass(frozen=True)
class GaussianLaw:
    """Closed-form pieces of a bi-free Gaussian law."""

    params: GaussianParams

    def r(self, z, w):
        p = self.params
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        return p.gamma1 * z + p.gamma2 * w + p.a * z * z + p.b * w * w + p.c * z * w

    def marginal_g(self, axis: int):
        p = self.params
        mean, var = (p.gamma1, p.a) if axis == 1 else (p.gamma2, p.b)
        return lambda z: g_semicircle(z, var, mean)

    def g(self, z, w):
        G1 = self.marginal_g(1)(z)
        G2 = self.marginal_g(2)(w)
        return G1 * G2 / (1.0 - self.params.c * G1 * G2)

    def g_evaluator(self) -> GEvaluator2D:
        p = self.params
        return GEvaluator2D(self.g, Provenance.CLOSED_FORM, False, self.marginal_g(1),
                            self.marginal_g(2), support_radius=self.support_radius)

    @property
    def support_radius(self) -> float:
        p = self.params
        return float(max(abs(p.gamma1) + 2 * np.sqrt(p.a), abs(p.gamma2) + 2 * np.sqrt(p.b)))

    def density(self, s, t):
        """Lebesgue density; raises :class:`SingularLawError` when none exists."""
        p = self.params
        if p.singular:
            raise SingularLawError("|c| = sqrt(ab): the law is singular", stage="gaussian_density")
        sa, sb = np.sqrt(p.a), np.sqrt(p.b)
        cs = p.c / (sa * sb)
        s = (np.asarray(s, dtype=float) - p.gamma1) / sa
        t = (np.asarray(t, dtype=float) - p.gamma2) / sb
        return gaussian_density_standard(s, t, cs) / (sa * sb)

    def quintuple(self) -> LKQuintupleGeneral:
        return gaussian_quintuple(self.params)

    def law(self) -> LawSum:
        return self.quintuple().law()


def gaussian_closed_form(p: GaussianParams) -> GaussianLaw:
    return GaussianLaw(p)


def product_semicircle_density(s, t):
    return semicircle_density(s) * semicircle_density(t)


# decomposition --------------------------------------------------------------


@dataclass(frozen=True)
class PoissonPart:
    """``ν_{λ, jump}`` translated by ``shift``."""

    lam: float
    jump: Measure2D
    shift: tuple

    def r(self, z, w):
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        return compound_poisson_r(self.lam, self.jump, z, w) + self.shift[0] * z + self.shift[1] * w

    def quintuple(self) -> LKQuintupleGeneral:
        q = compound_poisson_quintuple(self.lam, self.jump)
        return q + point_mass_quintuple(*self.shift)


@dataclass(frozen=True)
class Decomposition:
    gaussian: GaussianParams
    product: tuple
    poisson: Optional[PoissonPart]

    def r(self, z, w):
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        p1, p2 = self.product
        out = gaussian_closed_form(self.gaussian).r(z, w) + z * p1.r(z) + w * p2.r(w)
        if self.poisson is not None:
            out = out + self.poisson.r(z, w)
        return out

    def to_dict(self) -> dict:
        g = self.gaussian
        p1, p2 = self.product
        out = {
            "gaussian": {"gamma1": g.gamma1, "gamma2": g.gamma2, "a": g.a, "b": g.b, "c": g.c},
            "product": [{"gamma": p.gamma, "sigma": measure_to_dict(p.sigma)} for p in (p1, p2)],
            "poisson": None,
        }
        if self.poisson is not None:
            out["poisson"] = {"lambda": self.poisson.lam, "jump": measure_to_dict(self.poisson.jump),
                              "shift": list(self.poisson.shift)}
        return out


def lk_decompose(q: LKQuintupleGeneral) -> Decomposition:
    """Split a quintuple into Gaussian, product and Poisson parts.

    Atoms at the origin give the Gaussian part; atoms on the punctured
    s-axis (of ``ρ₁``) and t-axis (of ``ρ₂``) give the free Lévy measures of
    the product part, which also carries ``γ₁, γ₂``; atoms off both axes give
    a compound Poisson law with Lévy measure ``τ = (1+s²)/s² ρ₁`` and the
    compensating shift ``-∫ s/(1+s²) dτ``.
    """
    _require_valid(q)
    keys, (w1, w2, w) = _aligned(q.rho1, q.rho2, q.rho)
    s, t = keys[:, 0], keys[:, 1]
    origin = (s == 0) & (t == 0)
    on_s = (t == 0) & ~origin
    on_t = (s == 0) & ~origin
    off = (s != 0) & (t != 0)

    gauss = GaussianParams(0.0, 0.0, float(w1[origin].sum()), float(w2[origin].sum()),
                           float(w[origin].sum()))
    sig1 = Measure1D(s[on_s], w1[on_s])
    sig2 = Measure1D(t[on_t], w2[on_t])
    product = (FreeLKPair(q.gamma1, sig1), FreeLKPair(q.gamma2, sig2))

    poisson = None
    if np.any(off):
        su, tu = s[off], t[off]
        tau1 = (1 + su**2) / su**2 * w1[off]
        tau2 = (1 + tu**2) / tu**2 * w2[off]
        tau3 = kernel_sqrt(su, tu) / (su * tu) * w[off]
        scale = 1 + np.abs(tau1)
        resid = max(np.max(np.abs(tau1 - tau2) / scale), np.max(np.abs(tau1 - tau3) / scale))
        if resid > CONSTRAINT_TOL:
            raise ConstraintViolationError(f"inconsistent Poisson Lévy measure (residual {resid:.3g})")
        keep = tau1 > 0
        if np.any(keep):
            lam = float(tau1[keep].sum())
            jump = Measure2D(su[keep], tu[keep], tau1[keep] / lam)
            shift = (-float(np.sum(tau1[keep] * su[keep] / (1 + su[keep] ** 2))),
                     -float(np.sum(tau1[keep] * tu[keep] / (1 + tu[keep] ** 2))))
            poisson = PoissonPart(lam, jump, shift)
    return Decomposition(gauss, product, poisson)


# convolution ----------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid ``x_range × u_range`` with ``n_x × n_u`` points and smoothing ``y``."""

    x_range: tuple = (-2.5, 2.5)
    u_range: tuple = (-2.5, 2.5)
    n_x: int = 101
    n_u: int = 101
    y: float = 0.05

    @classmethod
    def around(cls, radius: float, y: float = 0.05, n: int = 101) -> "GridSpec":
        half = radius + 3 * y
        return cls((-half, half), (-half, half), n, n, y)


def as_law(obj) -> LawSum:
    """Coerce a measure, quintuple, compact triple, Gaussian or law sum to :class:`LawSum`."""
    if isinstance(obj, LawSum):
        return obj
    if isinstance(obj, Measure2D):
        return LawSum.of_measure(obj)
    if isinstance(obj, LKQuintupleGeneral):
        return obj.law()
    if isinstance(obj, LKTripleCompact):
        return lk_convert(obj).law()
    if isinstance(obj, GaussianParams):
        return gaussian_quintuple(obj).law()
    raise InputError(f"cannot convolve a {type(obj).__name__}")


@dataclass(frozen=True)
class ConvolutionResult:
    """Density grid and cumulants of a bi-free convolution.

    ``cumulants`` are extracted from the reconstructed Cauchy transform and
    ``expected`` is the sum of the inputs' tables; ``deviation`` is their
    largest difference for ``m + n ≤ 4``.
    """

    grid: GridDensity2D
    cumulants: CumulantTable
    expected: CumulantTable
    deviation: float
    law: LawSum


def bifree_convolve(mu1, mu2, grid: GridSpec | None = None, maxdeg: int = 4,
                    check_tol: float = 1e-6) -> ConvolutionResult:
    """Bi-free convolution of two compactly supported laws.

    Parameters
    ----------
    mu1, mu2 : Measure2D, LKQuintupleGeneral, LKTripleCompact, GaussianParams or LawSum
    grid : GridSpec, optional
        Defaults to a 101×101 grid over the support bound inflated by ``3y``.
    maxdeg : int
        Degree of the returned cumulant table.
    check_tol : float
        Tolerance for the internal cumulant-additivity check.

    Returns
    -------
    ConvolutionResult

    Raises
    ------
    NumericalError
        With ``stage`` naming the failing step.
    """
    for mu in (mu1, mu2):
        if isinstance(mu, Measure2D) and not mu.is_probability:
            raise InputError("bi-free convolution needs probability laws")
    law1, law2 = as_law(mu1), as_law(mu2)
    law = law1 + law2
    if grid is None:
        grid = GridSpec.around(law.support_radius)
    try:
        exp1 = extract_cumulants(law1, maxdeg)
        exp2 = extract_cumulants(law2, maxdeg)
    except NumericalError as exc:
        raise type(exc)(str(exc), stage="input cumulants") from exc
    expected = exp1 + exp2
    g = law.g_evaluator()
    try:
        density = invert2d(g, grid.x_range, grid.u_range, grid.n_x, grid.n_u, grid.y)
    except NumericalError as exc:
        raise type(exc)(str(exc), stage="invert2d") from exc
    r = 1.0 / (8.0 * max(law.pole_radius, 1.0))
    try:
        got = extract_cumulants(lambda z, w: partial_r(g, z, w), maxdeg, r=r)
    except NumericalError as exc:
        raise type(exc)(str(exc), stage="round-trip cumulants") from exc
    dev = got.max_diff(expected, min(4, maxdeg))
    if dev > check_tol:
        raise NumericalError(f"cumulant additivity off by {dev:.3g}", stage="cumulant check")
    return ConvolutionResult(density, got, expected, dev, law)


def load_quintuple(path: str | Path) -> LKQuintupleGeneral:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return LKQuintupleGeneral.from_dict(data)


__all__ = [
    "ConstraintViolationError",
    "ConvolutionResult",
    "Decomposition",
    "GaussianLaw",
    "GaussianParams",
    "GridSpec",
    "LKQuintupleGeneral",
    "LKTripleCompact",
    "PoissonPart",
    "ValidationReport",
    "as_law",
    "bifree_convolve",
    "compound_poisson_quintuple",
    "compound_poisson_r",
    "gaussian_closed_form",
    "gaussian_density_standard",
    "gaussian_quintuple",
    "lambda_combine",
    "lk_convert",
    "lk_convert_inverse",
    "lk_decompose",
    "lk_r_compact",
    "lk_r_general",
    "lk_validate",
    "load_quintuple",
    "point_mass_quintuple",
    "product_quintuple",
    "product_semicircle_density",
]
