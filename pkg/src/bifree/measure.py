"""Finitely atomic measures on the line and the plane.

Every integral appearing in the transforms of this package is taken against a
measure with finitely many atoms, so quadrature is exact.  Continuous laws
only enter through :class:`GridDensity2D` (the output of Stieltjes inversion)
or through closed-form density evaluators.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

PROB_TOL = 1e-12
MAX_MOMENT_ORDER = 20


class MeasureError(InputError):
    """Raised for malformed atom lists or invalid measure arguments."""


def _as_float_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise MeasureError("atom coordinates and weights must be finite")
    return arr


def _dedup(keys: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # exact equality only; fuzzy merging would change moments
    if len(w) == 0:
        return keys, w
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inv.ravel(), w)
    keep = merged != 0.0
    return uniq[keep], merged[keep]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


class _Atomic1D:
    signed = False

    def __init__(self, x: Iterable[float], w: Iterable[float]):
        x = _as_float_array(x)
        w = _as_float_array(w)
        if x.shape != w.shape:
            raise MeasureError("x and w must have the same length")
        if not self.signed and np.any(w < 0):
            raise MeasureError("negative weight in a positive measure")
        keys, merged = _dedup(x[:, None], w)
        self.x = _frozen(keys[:, 0] if len(keys) else keys.reshape(0))
        self.w = _frozen(merged)

    def __len__(self) -> int:
        return len(self.w)

    def __repr__(self) -> str:
        atoms = ", ".join(f"({a:g}, {b:g})" for a, b in zip(self.x[:6], self.w[:6]))
        more = ", ..." if len(self) > 6 else ""
        return f"{type(self).__name__}([{atoms}{more}])"

    def __eq__(self, other) -> bool:
        return (
            type(other) is type(self)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.w, other.w)
        )

    __hash__ = None

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.w.tolist()))

    @property
    def mass(self) -> float:
        return float(self.w.sum())

    @property
    def total_variation(self) -> float:
        return float(np.abs(self.w).sum())

    @property
    def is_probability(self) -> bool:
        return not np.any(self.w < 0) and abs(self.mass - 1.0) <= PROB_TOL

    @property
    def support_radius(self) -> float:
        return float(np.abs(self.x).max()) if len(self) else 0.0

    def moment(self, m: int) -> float:
        if m < 0 or m > MAX_MOMENT_ORDER:
            raise MeasureError(f"moment order must lie in [0, {MAX_MOMENT_ORDER}]")
        return float(np.sum(self.w * self.x**m))

    def scaled(self, k: float):
        return type(self)(self.x, k * self.w)

    def tail_mass(self, m: float) -> float:
        if m <= 0:
            raise MeasureError("tail radius must be positive")
        return float(np.abs(self.w[np.abs(self.x) > m]).sum())


class Measure1D(_Atomic1D):
    """Positive finitely atomic measure on the real line."""

    def __add__(self, other: "Measure1D") -> "Measure1D":
        cls = SignedMeasure1D if other.signed else Measure1D
        return cls(np.r_[self.x, other.x], np.r_[self.w, other.w])

    @classmethod
    def zero(cls) -> "Measure1D":
        return cls([], [])


class SignedMeasure1D(_Atomic1D):
    """Finitely atomic signed measure on the real line."""

    signed = True

    def __add__(self, other: _Atomic1D) -> "SignedMeasure1D":
        return SignedMeasure1D(np.r_[self.x, other.x], np.r_[self.w, other.w])


class _Atomic2D:
    signed = False

    def __init__(
        self,
        s: Iterable[float],
        t: Iterable[float],
        w: Iterable[float],
        radius_hint: float | None = None,
    ):
        s = _as_float_array(s)
        t = _as_float_array(t)
        w = _as_float_array(w)
        if not (s.shape == t.shape == w.shape):
            raise MeasureError("s, t and w must have the same length")
        if not self.signed and np.any(w < 0):
            raise MeasureError("negative weight in a positive measure")
        keys, merged = _dedup(np.stack([s, t], axis=1), w)
        keys = keys.reshape(-1, 2)
        self.s = _frozen(keys[:, 0])
        self.t = _frozen(keys[:, 1])
        self.w = _frozen(merged)
        self.radius_hint = radius_hint

    @classmethod
    def from_atoms(cls, atoms: Iterable[Sequence[float]]):
        atoms = [tuple(a) for a in atoms]
        if any(len(a) != 3 for a in atoms):
            raise MeasureError("planar atoms are (s, t, w) triples")
        if not atoms:
            return cls([], [], [])
        s, t, w = zip(*atoms)
        return cls(s, t, w)

    def __len__(self) -> int:
        return len(self.w)

    def __repr__(self) -> str:
        atoms = ", ".join(
            f"({a:g}, {b:g}, {c:g})" for a, b, c in zip(self.s[:6], self.t[:6], self.w[:6])
        )
        more = ", ..." if len(self) > 6 else ""
        return f"{type(self).__name__}([{atoms}{more}])"

    def __eq__(self, other) -> bool:
        return (
            type(other) is type(self)
            and np.array_equal(self.s, other.s)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.w, other.w)
        )

    __hash__ = None

    @property
    def atoms(self) -> list[tuple[float, float, float]]:
        return list(zip(self.s.tolist(), self.t.tolist(), self.w.tolist()))

    @property
    def mass(self) -> float:
        return float(self.w.sum())

    @property
    def total_variation(self) -> float:
        return float(np.abs(self.w).sum())

    @property
    def is_probability(self) -> bool:
        return not np.any(self.w < 0) and abs(self.mass - 1.0) <= PROB_TOL

    @property
    def support_radius(self) -> float:
        """max(|s|, |t|) over atoms, or the radius hint when that is larger."""
        r = float(max(np.abs(self.s).max(), np.abs(self.t).max())) if len(self) else 0.0
        if self.radius_hint is not None:
            r = max(r, float(self.radius_hint))
        return r

    def weight_at(self, s: float, t: float) -> float:
        hit = (self.s == s) & (self.t == t)
        return float(self.w[hit].sum())

    def moment(self, m: int, n: int) -> float:
        if m < 0 or n < 0 or m + n > MAX_MOMENT_ORDER:
            raise MeasureError(f"need m, n >= 0 and m + n <= {MAX_MOMENT_ORDER}")
        return float(np.sum(self.w * self.s**m * self.t**n))

    def covariance(self) -> float:
        m = self.mass
        return self.moment(1, 1) / m - self.moment(1, 0) * self.moment(0, 1) / m**2

    def scaled(self, k: float):
        return type(self)(self.s, self.t, k * self.w, self.radius_hint)

    def reweighted(self, factor: np.ndarray) -> "SignedMeasure2D":
        """The signed measure ``factor(s, t) dμ`` for per-atom factors."""
        return SignedMeasure2D(self.s, self.t, self.w * np.asarray(factor, dtype=float))

    def restrict(self, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        return type(self)(self.s[mask], self.t[mask], self.w[mask])

    def marginal(self, axis: int):
        if axis not in (1, 2):
            raise MeasureError("axis must be 1 or 2")
        coord = self.s if axis == 1 else self.t
        cls = SignedMeasure1D if self.signed else Measure1D
        return cls(coord, self.w)

    def tail_mass(self, m: float) -> float:
        if m <= 0:
            raise MeasureError("tail radius must be positive")
        out = (np.abs(self.s) > m) | (np.abs(self.t) > m)
        return float(np.abs(self.w[out]).sum())


class Measure2D(_Atomic2D):
    """Positive finitely atomic measure on the plane.

    Atoms with bit-identical coordinates are merged by adding weights; atoms
    whose merged weight is exactly zero are dropped.
    """

    def __add__(self, other: _Atomic2D) -> _Atomic2D:
        cls = SignedMeasure2D if other.signed else Measure2D
        return cls(np.r_[self.s, other.s], np.r_[self.t, other.t], np.r_[self.w, other.w])

    @classmethod
    def zero(cls) -> "Measure2D":
        return cls([], [], [])


class SignedMeasure2D(_Atomic2D):
    """Finitely atomic signed measure on the plane."""

    signed = True

    def __add__(self, other: _Atomic2D) -> "SignedMeasure2D":
        return SignedMeasure2D(
            np.r_[self.s, other.s], np.r_[self.t, other.t], np.r_[self.w, other.w]
        )

    @classmethod
    def zero(cls) -> "SignedMeasure2D":
        return cls([], [], [])

    def jordan(self) -> tuple[Measure2D, Measure2D]:
        pos = self.w > 0
        return (
            Measure2D(self.s[pos], self.t[pos], self.w[pos]),
            Measure2D(self.s[~pos], self.t[~pos], -self.w[~pos]),
        )


def make_discrete_2d(atoms: Iterable[Sequence[float]]) -> Measure2D:
    """Build a positive planar measure from ``(s, t, w)`` triples."""
    atoms = list(atoms)
    if not atoms:
        raise MeasureError("at least one atom is required")
    return Measure2D.from_atoms(atoms)


def make_discrete_1d(atoms: Iterable[Sequence[float]]) -> Measure1D:
    atoms = list(atoms)
    if not atoms:
        raise MeasureError("at least one atom is required")
    x, w = zip(*atoms)
    return Measure1D(x, w)


def dirac(s: float, t: float, w: float = 1.0) -> Measure2D:
    return Measure2D([s], [t], [w])


def marginal(mu: _Atomic2D, axis: int):
    """Push-forward of ``mu`` under the projection onto coordinate ``axis``."""
    return mu.marginal(axis)


def moment(mu, m: int, n: int = 0) -> float:
    if isinstance(mu, _Atomic1D):
        if n:
            raise MeasureError("line measures take a single moment order")
        return mu.moment(m)
    return mu.moment(m, n)


class Kernel(enum.Enum):
    RHO = "rho"
    SIGMA1 = "sigma1"
    SIGMA2 = "sigma2"
    GAMMA1 = "gamma1"
    GAMMA2 = "gamma2"


def weight_transform(mu: _Atomic2D, kernel: Kernel | str, k: float):
    """Reweight ``mu`` by one of the kernels used in the limit theorems.

    ``RHO`` gives the signed measure ``k st / (sqrt(1+s^2) sqrt(1+t^2)) dμ``,
    ``SIGMA1``/``SIGMA2`` give ``k s^2/(1+s^2) dμ`` and ``k t^2/(1+t^2) dμ``,
    and ``GAMMA1``/``GAMMA2`` return the scalars ``k ∫ s/(1+s^2) dμ`` and
    ``k ∫ t/(1+t^2) dμ``.
    """
    kernel = Kernel(kernel)
    if not k > 0:
        raise MeasureError("scale k must be positive")
    s, t, w = mu.s, mu.t, mu.w
    if kernel is Kernel.RHO:
        f = k * s * t / (np.sqrt(1 + s * s) * np.sqrt(1 + t * t))
        return SignedMeasure2D(s, t, w * f)
    if kernel is Kernel.SIGMA1:
        return Measure2D(s, t, w * k * s * s / (1 + s * s))
    if kernel is Kernel.SIGMA2:
        return Measure2D(s, t, w * k * t * t / (1 + t * t))
    if kernel is Kernel.GAMMA1:
        return float(k * np.sum(w * s / (1 + s * s)))
    return float(k * np.sum(w * t / (1 + t * t)))


def product_measure(sigma: Measure1D, tau: Measure1D) -> Measure2D:
    s = np.repeat(sigma.x, len(tau))
    t = np.tile(tau.x, len(sigma))
    w = np.outer(sigma.w, tau.w).ravel()
    return Measure2D(s, t, w)


def tail_mass(mu, m: float) -> float:
    """Total variation of ``mu`` outside the closed square ``[-m, m]^2``."""
    return mu.tail_mass(m)


@dataclass(frozen=True, eq=False)
class GridDensity2D:
    """Density values on a uniform rectangular grid.

    ``values[i, j]`` is the density at ``(x[i], u[j])``.  Each grid point is
    the centre of a ``dx * du`` cell, so :meth:`riemann_mass` is the
    cell-centred Riemann sum.
    """

    x: np.ndarray
    u: np.ndarray
    values: np.ndarray
    y: float

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def du(self) -> float:
        return float(self.u[1] - self.u[0])

    def riemann_mass(self) -> float:
        return float(self.values.sum() * self.dx * self.du)

    def moment(self, m: int, n: int) -> float:
        X, U = np.meshgrid(self.x, self.u, indexing="ij")
        return float(np.sum(self.values * X**m * U**n) * self.dx * self.du)

    def to_measure(self) -> SignedMeasure2D:
        X, U = np.meshgrid(self.x, self.u, indexing="ij")
        return SignedMeasure2D(X.ravel(), U.ravel(), (self.values * self.dx * self.du).ravel())


# JSON measure files -------------------------------------------------------


def measure_to_dict(mu) -> dict:
    if isinstance(mu, _Atomic1D):
        return {"atoms": [[x, w] for x, w in mu.atoms]}
    return {"atoms": [[s, t, w] for s, t, w in mu.atoms]}


def measure_from_dict(data: dict, *, signed: bool | None = None):
    """Parse ``{"atoms": [[s, t, w], ...]}`` or ``{"atoms": [[x, w], ...]}``.

    Signedness is inferred from the weights unless ``signed`` is given.
    """
    if not isinstance(data, dict) or "atoms" not in data:
        raise MeasureError('measure JSON needs an "atoms" list')
    atoms = data["atoms"]
    if not isinstance(atoms, list):
        raise MeasureError('"atoms" must be a list')
    widths = {len(a) if isinstance(a, list) else -1 for a in atoms}
    if widths - {2, 3} or len(widths) > 1:
        raise MeasureError("atoms must all be [x, w] pairs or all [s, t, w] triples")
    try:
        arr = np.array(atoms, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MeasureError(f"non-numeric atom entry: {exc}") from None
    if arr.size and not np.all(np.isfinite(arr)):
        raise MeasureError("NaN or Inf in measure file")
    width = widths.pop() if widths else 3
    arr = arr.reshape(-1, width)
    if signed is None:
        signed = bool(np.any(arr[:, -1] < 0))
    if width == 2:
        cls = SignedMeasure1D if signed else Measure1D
        return cls(arr[:, 0], arr[:, 1])
    cls = SignedMeasure2D if signed else Measure2D
    return cls(arr[:, 0], arr[:, 1], arr[:, 2])


def dumps_measure(mu) -> str:
    return json.dumps(measure_to_dict(mu))


def load_measure(path: str | Path, *, signed: bool | None = None):
    text = Path(path).read_text()
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MeasureError(f"{path}: invalid JSON ({exc})") from None
    return measure_from_dict(data, signed=signed)


def _reject_constant(name: str):
    raise MeasureError(f"non-finite constant {name} in measure file")


def radius_of(*measures) -> float:
    return max((m.support_radius for m in measures), default=0.0)


def kernel_sqrt(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``sqrt(1+s^2) sqrt(1+t^2)``, the weight linking ρ to its Cauchy-transform form."""
    return np.sqrt(1 + np.asarray(s) ** 2) * np.sqrt(1 + np.asarray(t) ** 2)


__all__ = [
    "GridDensity2D",
    "Kernel",
    "Measure1D",
    "Measure2D",
    "MeasureError",
    "SignedMeasure1D",
    "SignedMeasure2D",
    "dirac",
    "dumps_measure",
    "kernel_sqrt",
    "load_measure",
    "make_discrete_1d",
    "make_discrete_2d",
    "marginal",
    "measure_from_dict",
    "measure_to_dict",
    "moment",
    "product_measure",
    "radius_of",
    "tail_mass",
    "weight_transform",
]
