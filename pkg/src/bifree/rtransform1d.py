"""One-variable R-transforms, free Lévy-Khintchine pairs and free convolution.

Free convolution powers and sums are evaluated through subordination: for
``ν = ⊞_c ν_c ⊞ (⊞_i μ_i^{⊞ k_i})`` with closed-form R-transforms ``R_c`` and
finitely atomic ``μ_i`` the reciprocal Cauchy transform ``f = F_ν(λ)`` and the
subordination points ``ω_i`` solve

    f + Σ_c R_c(1/f) + Σ_i k_i (ω_i - f) = λ,      F_{μ_i}(ω_i) = f.

This is the same equation as ``K_ν(G) = λ`` written in variables that stay in
the upper half-plane, which keeps Newton's method on a convex-like domain.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, InputError, NonConvergenceError, PoleError
from .measure import Measure1D, SignedMeasure1D
from .transform2d import g1, g1_prime

MAX_NEWTON = 100
R_TOL = 1e-13


class RProvenance(str, enum.Enum):
    FROM_MEASURE = "from-measure"
    FREE_LK = "free-LK"
    CLOSED_FORM = "closed-form"


@dataclass(frozen=True)
class StolzAngle:
    """Truncated cone ``{x + iy : |x| < -α y, -β < y < 0}`` at zero.

    Membership tests cover the cone and its mirror image in the upper
    half-plane.
    """

    alpha: float = 1.0
    beta: float = 0.25

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise InputError("Stolz angle parameters must be positive")

    def contains(self, z) -> np.ndarray | bool:
        z = np.asarray(z, dtype=complex)
        y = np.abs(z.imag)
        inside = (np.abs(z.real) < self.alpha * y) & (y < self.beta) & (y > 0)
        return inside[()] if z.ndim else bool(inside)

    @classmethod
    def for_support(cls, radius: float, factor: float = 4.0, alpha: float = 1.0) -> "StolzAngle":
        """Default cone ``β = 1/(factor·ρ + factor)`` for support radius ``ρ``."""
        return cls(alpha=alpha, beta=1.0 / (factor * radius + factor))


@dataclass(frozen=True)
class REvaluator1D:
    """A one-variable R-transform with provenance and nominal domain."""

    func: Callable
    provenance: RProvenance
    angle: StolzAngle = field(default_factory=StolzAngle)
    deriv: Optional[Callable] = None

    def __call__(self, z):
        return self.func(z)


@dataclass(frozen=True)
class FreeLKPair:
    """Free Lévy-Khintchine pair ``(γ, σ)`` with ``R(z) = γ + ∫ (z+x)/(1-zx) dσ``."""

    gamma: float
    sigma: Measure1D = field(default_factory=Measure1D.zero)

    def __post_init__(self):
        if not np.isfinite(self.gamma):
            raise InputError("gamma must be finite")
        if self.sigma.signed:
            raise InputError("the Lévy measure of a free LK pair must be positive")

    def r(self, z):
        return free_lk_r(self, z)

    def dr(self, z):
        z = np.asarray(z, dtype=complex)
        x, w = self.sigma.x, self.sigma.w
        d = 1.0 - z[..., None] * x
        out = np.sum(w * (1.0 + x * x) / d**2, axis=-1)
        return out[()] if z.ndim else complex(out)

    def r_of_f(self, f):
        """``R(1/f)`` written in ``f`` to avoid the division at large ``f``."""
        f = np.asarray(f, dtype=complex)
        x, w = self.sigma.x, self.sigma.w
        return self.gamma + np.sum(w * (1.0 + x * f[..., None]) / (f[..., None] - x), axis=-1)

    def dr_of_f(self, f):
        f = np.asarray(f, dtype=complex)
        x, w = self.sigma.x, self.sigma.w
        return -np.sum(w * (1.0 + x * x) / (f[..., None] - x) ** 2, axis=-1)

    def scaled(self, t: float) -> "FreeLKPair":
        return FreeLKPair(t * self.gamma, self.sigma.scaled(t))

    def as_evaluator(self) -> REvaluator1D:
        return REvaluator1D(self.r, RProvenance.FREE_LK, StolzAngle.for_support(
            self.sigma.support_radius), self.dr)


def free_lk_r(p: FreeLKPair, z):
    """Evaluate ``γ + Σ w_i (z + x_i)/(1 - z x_i)``.

    Raises
    ------
    PoleError
        If ``z x_i = 1`` for an atom.
    """
    z = np.asarray(z, dtype=complex)
    x, w = p.sigma.x, p.sigma.w
    d = 1.0 - z[..., None] * x
    if np.any(d == 0):
        raise PoleError("z * x = 1 at an atom of the Lévy measure")
    out = p.gamma + np.sum(w * (z[..., None] + x) / d, axis=-1)
    return out[()] if z.ndim else complex(out)


def r1_from_measure(sigma, z, *, mean: float | None = None, angle: StolzAngle | None = None,
                    strict: bool = False):
    """R-transform ``R(z) = K(z) - 1/z`` of a line law by Newton inversion.

    Parameters
    ----------
    sigma : Measure1D or callable
        A finitely atomic law, or a callable Cauchy transform ``G(λ)``.
    z : complex or ndarray
        Points near zero off the real axis.
    mean : float, optional
        First moment used for the initial guess when ``sigma`` is a callable.
    angle : StolzAngle, optional
        Nominal domain; defaults to ``StolzAngle.for_support(ρ)``.
    strict : bool
        Raise :class:`DomainError` for points outside ``angle`` instead of
        evaluating them anyway.

    Returns
    -------
    complex or ndarray
        With ``|G(1/z + R) - z| ≤ 1e-13``.

    Notes
    -----
    For atomic laws the unknown is ``R`` itself: ``G(1/z + R) = z`` is
    equivalent to ``Σ w_i / (1 + z (R - x_i)) = 1``, which is well scaled as
    ``z → 0`` and is started from ``R = m₁``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag == 0):
        raise DomainError("R-transform evaluation needs non-real z")
    if isinstance(sigma, (Measure1D, SignedMeasure1D)):
        if angle is None:
            angle = StolzAngle.for_support(sigma.support_radius)
        if strict and not np.all(angle.contains(z)):
            raise DomainError(f"point outside the Stolz angle {angle}")
        out = _r_atomic(sigma, z.ravel()).reshape(z.shape)
    else:
        if strict and angle is not None and not np.all(angle.contains(z)):
            raise DomainError(f"point outside the Stolz angle {angle}")
        out = r1_from_g(sigma, z.ravel(), mean=mean or 0.0).reshape(z.shape)
    return out[()] if z.ndim else complex(out)


def _r_atomic(sigma, z: np.ndarray) -> np.ndarray:
    x, w = sigma.x, sigma.w
    R = np.full(z.shape, sigma.moment(1) / sigma.mass, dtype=complex)
    active = np.ones(z.shape, dtype=bool)
    for it in range(MAX_NEWTON):
        zz = z[active][:, None]
        d = 1.0 + zz * (R[active][:, None] - x)
        F = np.sum(w / d, axis=1) - 1.0
        dF = -np.sum(w * zz / d**2, axis=1)
        res = np.abs(zz[:, 0] * F)
        idx = np.flatnonzero(active)
        done = res <= R_TOL
        step = F / dF
        Rn = R[active] - step
        # keep K = 1/z + R on the half-plane opposite to z
        for _ in range(40):
            bad = np.imag(1.0 / zz[:, 0] + Rn) * np.sign(zz[:, 0].imag) >= 0
            if not np.any(bad):
                break
            step = np.where(bad, step / 2, step)
            Rn = R[active] - step
        # converged points also take this step: the residual test bounds |z F|,
        # the error in R is about |F/F'| and one more step squares it
        R[idx] = Rn
        active[idx[done]] = False
        if not np.any(active):
            return R
    raise NonConvergenceError(
        "Newton inversion of G did not converge", stage="r1_from_measure",
        points=z[active].tolist()[:5],
    )


def r1_from_g(gfunc: Callable, z: np.ndarray, mean: float = 0.0,
              dgfunc: Callable | None = None) -> np.ndarray:
    """R-transform of a law given only through its Cauchy transform.

    Solves ``G(K) = z`` by Newton from ``K₀ = 1/z + mean``; the derivative is
    ``dgfunc`` when supplied and a central difference otherwise.
    """
    z = np.asarray(z, dtype=complex)
    K = 1.0 / z + mean
    active = np.ones(z.shape, dtype=bool)
    for it in range(MAX_NEWTON):
        Ka, za = K[active], z[active]
        F = np.asarray(gfunc(Ka)) - za
        idx = np.flatnonzero(active)
        done = np.abs(F) <= R_TOL
        if dgfunc is not None:
            dF = np.asarray(dgfunc(Ka))
        else:
            h = 1e-6 * np.maximum(1.0, np.abs(Ka))
            dF = (np.asarray(gfunc(Ka + h)) - np.asarray(gfunc(Ka - h))) / (2 * h)
        step = F / dF
        Kn = Ka - step
        for _ in range(40):
            bad = (Kn.imag * np.sign(za.imag) >= 0) & ~done
            if not np.any(bad):
                break
            step = np.where(bad, step / 2, step)
            Kn = Ka - step
        K[idx[~done]] = Kn[~done]
        active[idx[done]] = False
        if not np.any(active):
            return K - 1.0 / z
    raise NonConvergenceError(
        "Newton inversion of G did not converge", stage="r1_from_g",
        points=z[active].tolist()[:5],
    )


# subordination ------------------------------------------------------------


@dataclass(frozen=True)
class ClosedPart:
    """A summand with closed-form R-transform, written as ``R(1/f)``."""

    r_of_f: Callable
    dr_of_f: Callable

    @classmethod
    def from_pair(cls, p: FreeLKPair) -> "ClosedPart":
        return cls(p.r_of_f, p.dr_of_f)


@dataclass(frozen=True)
class Subordination:
    f: np.ndarray
    omega: np.ndarray  # shape (P, m)


def solve_subordination(lam, closed: Sequence[ClosedPart] = (),
                        atomic: Sequence[tuple[float, Measure1D]] = (),
                        *, y_start: float | None = None, ratio: float = 0.5,
                        tol: float = 1e-14, stage: str = "subordination") -> Subordination:
    """Solve the subordination system at every point of ``lam``.

    Parameters
    ----------
    lam : ndarray of complex
        Target points, none real.  Lower half-plane points are handled by
        conjugation.
    closed : sequence of ClosedPart
        Summands with closed-form R-transforms.
    atomic : sequence of (k, μ)
        Free convolution powers ``μ^{⊞ k}`` of finitely atomic laws, ``k ≥ 1``.
    y_start : float, optional
        Starting height of the continuation path ``Re λ + iY``; chosen from
        the data when omitted.
    ratio : float
        Geometric factor between continuation heights.

    Returns
    -------
    Subordination
        ``f = F_ν(λ) = 1/G_ν(λ)`` and the subordination points ``ω``.
    """
    lam = np.asarray(lam, dtype=complex)
    shape = lam.shape
    lam = lam.ravel()
    if np.any(lam.imag == 0):
        raise DomainError("subordination needs non-real points")
    lower = lam.imag < 0
    target = np.where(lower, np.conj(lam), lam)
    m = len(atomic)
    ks = np.array([float(k) for k, _ in atomic])
    if np.any(ks < 1):
        raise InputError("free convolution powers need k >= 1")
    laws = [mu for _, mu in atomic]
    if y_start is None:
        spread = 1.0 + sum(k * (mu.support_radius + 1) for k, mu in atomic)
        spread += sum(abs(complex(np.asarray(c.r_of_f(np.array([1e3j])))[0])) for c in closed)
        y_start = 10.0 * spread
    Y = np.maximum(y_start, target.imag)
    path = [Y]
    while np.any(path[-1] > target.imag):
        path.append(np.maximum(path[-1] * ratio, target.imag))
    x = target.real
    f = x + 1j * Y
    om = np.repeat(f[:, None], m, axis=1)
    for level in path:
        l = x + 1j * level
        f, om = _newton_system(l, f, om, closed, laws, ks, tol, stage)
    f = np.where(lower, np.conj(f), f)
    om = np.where(lower[:, None], np.conj(om), om)
    return Subordination(f.reshape(shape), om.reshape(shape + (m,)))


def _residual(l, f, om, closed, laws, ks):
    E0 = f - l + sum(c.r_of_f(f) for c in closed)
    if len(laws):
        E0 = E0 + np.sum(ks * (om - f[:, None]), axis=1)
    Ei = [1.0 / g1(mu, om[:, i]) - f for i, mu in enumerate(laws)]
    return E0, Ei


def _newton_system(l, f, om, closed, laws, ks, tol, stage):
    m = len(laws)
    scale = 1.0 + np.abs(l)
    for it in range(MAX_NEWTON):
        E0, Ei = _residual(l, f, om, closed, laws, ks)
        err = np.abs(E0) + sum(np.abs(e) for e in Ei)
        if np.all(err <= tol * scale * 10):
            return f, om
        d0 = 1.0 + sum(c.dr_of_f(f) for c in closed) - ks.sum()
        if m == 0:
            df = -E0 / d0
            dom = om
        else:
            P = len(f)
            J = np.zeros((P, m + 1, m + 1), dtype=complex)
            J[:, 0, 0] = d0
            J[:, 0, 1:] = ks
            rhs = np.empty((P, m + 1), dtype=complex)
            rhs[:, 0] = -E0
            for i, mu in enumerate(laws):
                g = g1(mu, om[:, i])
                J[:, i + 1, 0] = -1.0
                J[:, i + 1, i + 1] = -g1_prime(mu, om[:, i]) / g**2
                rhs[:, i + 1] = -Ei[i]
            sol = np.linalg.solve(J, rhs[..., None])[..., 0]
            df, dom = sol[:, 0], sol[:, 1:]
        t = np.ones(len(f))
        for _ in range(60):
            fn = f + t * df
            omn = om + t[:, None] * dom if m else om
            ok = fn.imag > 0
            if m:
                ok &= np.all(omn.imag > 0, axis=1)
            if np.any(ok):
                E0n, Ein = _residual(l, np.where(ok, fn, f), np.where(ok[:, None], omn, om) if m else om,
                                     closed, laws, ks)
                errn = np.abs(E0n) + sum(np.abs(e) for e in Ein)
                ok &= (errn < err) | (err <= tol * scale * 10) | (t < 1e-3)
            if np.all(ok):
                break
            t = np.where(ok, t, t / 2)
        f = fn
        om = omn
    E0, Ei = _residual(l, f, om, closed, laws, ks)
    err = np.abs(E0) + sum(np.abs(e) for e in Ei)
    if np.all(err <= 1e-10 * scale):
        return f, om
    bad = np.flatnonzero(err > 1e-10 * scale)
    raise NonConvergenceError(
        "subordination Newton did not converge", stage=stage,
        points=l[bad].tolist()[:5], residual=float(err.max()),
    )


# free convolution powers ----------------------------------------------------


@dataclass(frozen=True)
class FreeConvolution:
    """Output of :func:`free_convolve_power`.

    Attributes
    ----------
    x : ndarray
        Grid.
    density : ndarray
        Smoothed density ``-Im G(x + iy)/π``.
    y : float
    moments : ndarray
        Moments of orders 1 to 4.
    g : callable
        Cauchy transform of the convolution power.
    """

    x: np.ndarray
    density: np.ndarray
    y: float
    moments: np.ndarray
    g: Callable
    k: float
    support_radius: float

    def r(self, z, mean: float | None = None):
        m1 = self.moments[0] if mean is None else mean
        return r1_from_g(self.g, np.atleast_1d(np.asarray(z, dtype=complex)), mean=m1)


def free_power_g(sigma: Measure1D, k: float) -> Callable:
    def g(lam):
        lam = np.asarray(lam, dtype=complex)
        sol = solve_subordination(lam, atomic=[(k, sigma)], stage="free_convolve_power")
        return 1.0 / sol.f

    return g


def contour_moments(g: Callable, radius: float, orders: Sequence[int], n: int = 256) -> np.ndarray:
    """Moments ``(1/2πi) ∮ λ^p G(λ) dλ`` on the circle ``|λ| = radius``.

    Half-offset trapezoid nodes keep every node off the real axis.
    """
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    lam = radius * np.exp(1j * theta)
    G = g(lam)
    return np.array([np.real(np.mean(lam ** (p + 1) * G)) for p in orders])


def free_convolve_power(sigma: Measure1D, k: float, x=None, y: float = 0.01,
                        n: int = 401) -> FreeConvolution:
    """Free convolution power ``σ^{⊞k}`` of an atomic law, ``k ≥ 1``.

    Parameters
    ----------
    sigma : Measure1D
        Compactly supported probability law.
    k : float
        Power, at least one.
    x : ndarray, optional
        Density grid; defaults to ``n`` points over the support bound.
    y : float
        Smoothing width for the density.

    Returns
    -------
    FreeConvolution
    """
    if not k >= 1:
        raise InputError("free convolution power needs k >= 1")
    if not sigma.is_probability:
        raise InputError("free convolution power needs a probability law")
    rho = sigma.support_radius
    radius = k * rho + 2 * np.sqrt(k) * rho
    if x is None:
        half = radius + 3 * y + 1e-3
        x = np.linspace(-half, half, n)
    x = np.asarray(x, dtype=float)
    g = free_power_g(sigma, k)
    density = -np.imag(g(x + 1j * y)) / np.pi
    moments = contour_moments(g, 2 * radius + 1.0, [1, 2, 3, 4])
    return FreeConvolution(x, density, float(y), moments, g, float(k), float(radius))


def free_cumulants(sigma: Measure1D, order: int) -> np.ndarray:
    """Free cumulants ``κ_1..κ_order`` from moments by the non-crossing recursion.

    Uses ``m_n = Σ_{s=1}^{n} κ_s Σ_{i_1+...+i_s = n-s} m_{i_1} ... m_{i_s}``.
    """
    m = np.array([sigma.moment(p) / sigma.mass for p in range(order + 1)])
    # coef[s][j] = coefficient of t^j in (Σ m_i t^i)^s
    kappa = np.zeros(order + 1)
    powers = [np.zeros(order + 1) for _ in range(order + 1)]
    powers[0][0] = 1.0
    for s in range(1, order + 1):
        powers[s] = np.convolve(powers[s - 1], m)[: order + 1]
    for n in range(1, order + 1):
        acc = sum(kappa[s] * powers[s][n - s] for s in range(1, n))
        kappa[n] = m[n] - acc
    return kappa[1:]


__all__ = [
    "ClosedPart",
    "FreeConvolution",
    "FreeLKPair",
    "REvaluator1D",
    "RProvenance",
    "StolzAngle",
    "Subordination",
    "contour_moments",
    "free_convolve_power",
    "free_cumulants",
    "free_lk_r",
    "free_power_g",
    "r1_from_g",
    "r1_from_measure",
    "solve_subordination",
]
