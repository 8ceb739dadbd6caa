"""Model spacetimes, time profiles and the product-structure check.

Every spacetime here is ``R x Sigma`` with metric ``dt^2 - g_t``: a flat
cylinder with a time-dependent gauge potential, Bianchi-I (flat 3-torus
slices), Bianchi-II (Heisenberg nilmanifold slices) and a reference-only
sphere model whose charge is a registered constant.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .errors import ParameterError

SMOOTHSTEP_ORDER = 5
VALIDATION_SAMPLES = 65


@dataclass(frozen=True)
class TimeWindow:
    t1: float
    t2: float

    def __post_init__(self):
        if not (math.isfinite(self.t1) and math.isfinite(self.t2)):
            raise ParameterError("time window endpoints must be finite")
        if not self.t1 < self.t2:
            raise ParameterError(f"time window needs t1 < t2, got [{self.t1}, {self.t2}]")

    @property
    def duration(self) -> float:
        return self.t2 - self.t1


class CircleSpin(enum.Enum):
    """Spin structures on S^1: periodic (trivial) and antiperiodic spinors."""

    TRIVIAL = "trivial"
    NONTRIVIAL = "nontrivial"

    @property
    def sigma(self) -> float:
        return 0.0 if self is CircleSpin.TRIVIAL else 0.5


TORUS_SPIN_STRUCTURES = 8
HEISENBERG_SPIN_STRUCTURES = 4


def smoothstep_polynomial(order: int = SMOOTHSTEP_ORDER) -> Polynomial:
    """Generalized smoothstep of the given order on [0, 1].

    Degree ``2*order + 1``; the first ``order`` derivatives vanish at both ends.
    """
    coef = np.zeros(2 * order + 2)
    for n in range(order + 1):
        coef[order + 1 + n] = (
            (-1) ** n * math.comb(order + n, n) * math.comb(2 * order + 1, order - n)
        )
    return Polynomial(coef)


class Profile:
    """Scalar function of time on a window, evaluable with two derivatives.

    Outside the window the profile is continued by its end values with zero
    derivatives. Subclasses implement ``_eval(t, nu)`` for t inside.
    """

    window: TimeWindow

    def value(self, t):
        return self._dispatch(t, 0)

    def derivative(self, t):
        return self._dispatch(t, 1)

    def second_derivative(self, t):
        return self._dispatch(t, 2)

    def jet(self, t) -> tuple:
        return self.value(t), self.derivative(t), self.second_derivative(t)

    def end_segments(self) -> tuple[tuple[float, float], tuple[float, float]]:
        raise NotImplementedError

    def knots(self) -> tuple[float, ...]:
        """Interior times where the profile is only finitely smooth."""
        return ()

    def _dispatch(self, t, nu: int):
        scalar = np.ndim(t) == 0
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, self.window.t1, self.window.t2)
        out = np.asarray(self._eval(tc, nu), dtype=float)
        if nu > 0:
            out = np.where(tc == t, out, 0.0)
        return float(out) if scalar else out

    def _eval(self, t: np.ndarray, nu: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class PlateauProfile(Profile):
    """Constant ``v_start``, polynomial smoothstep ramp, constant ``v_end``.

    The plateaus are ``[t1, t1 + r*dt]`` and ``[t2 - r*dt, t2]`` with
    ``r = ramp_fraction``; on them the derivatives are exactly zero.
    """

    v_start: float
    v_end: float
    window: TimeWindow
    ramp_fraction: float = 0.1
    order: int = SMOOTHSTEP_ORDER
    _poly: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.ramp_fraction < 0.5:
            raise ParameterError(
                f"ramp_fraction must lie in (0, 1/2), got {self.ramp_fraction}"
            )
        if self.order < SMOOTHSTEP_ORDER:
            raise ParameterError(f"smoothstep order must be >= {SMOOTHSTEP_ORDER}")
        if not (math.isfinite(self.v_start) and math.isfinite(self.v_end)):
            raise ParameterError("plateau values must be finite")
        p = smoothstep_polynomial(self.order)
        object.__setattr__(self, "_poly", (p, p.deriv(1), p.deriv(2)))

    @property
    def ramp_start(self) -> float:
        return self.window.t1 + self.ramp_fraction * self.window.duration

    @property
    def ramp_end(self) -> float:
        return self.window.t2 - self.ramp_fraction * self.window.duration

    def end_segments(self):
        w = self.window
        return (w.t1, self.ramp_start), (self.ramp_end, w.t2)

    def knots(self):
        return (self.ramp_start, self.ramp_end)

    def _eval(self, t, nu):
        width = self.ramp_end - self.ramp_start
        u = (t - self.ramp_start) / width
        inside = (u > 0.0) & (u < 1.0)
        jump = self.v_end - self.v_start
        ramp = jump * self._poly[nu](np.where(inside, u, 0.0)) / width**nu
        if nu == 0:
            ramp = ramp + self.v_start
            const = np.where(u <= 0.0, self.v_start, self.v_end)
        else:
            const = np.zeros_like(u)
        return np.where(inside, ramp, const)


@dataclass(frozen=True, eq=False)
class SampledProfile(Profile):
    """Values on a uniform grid over the window, joined by cubic Hermite pieces.

    Interior slopes follow the monotone (PCHIP) rule, so runs of equal samples
    stay exactly constant; end slopes are clamped to zero.
    """

    values: tuple[float, ...]
    window: TimeWindow
    end_fraction: float = 0.1
    _splines: tuple = field(init=False, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ParameterError("a sampled profile needs at least two samples")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("sampled profile values must be finite")
        if not 0.0 < self.end_fraction < 0.5:
            raise ParameterError("end_fraction must lie in (0, 1/2)")
        object.__setattr__(self, "values", tuple(float(v) for v in vals))
        times = np.linspace(self.window.t1, self.window.t2, vals.size)
        if vals.size == 2:
            slopes = np.zeros(2)
        else:
            slopes = PchipInterpolator(times, vals).derivative()(times)
            slopes[0] = slopes[-1] = 0.0
        spline = CubicHermiteSpline(times, vals, slopes)
        object.__setattr__(
            self, "_splines", (spline, spline.derivative(1), spline.derivative(2))
        )

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.window.t1, self.window.t2, len(self.values))

    def end_segments(self):
        w = self.window
        span = self.end_fraction * w.duration
        return (w.t1, w.t1 + span), (w.t2 - span, w.t2)

    def knots(self):
        return tuple(float(t) for t in self.times[1:-1])

    def _eval(self, t, nu):
        return self._splines[nu](t)


@dataclass(frozen=True)
class AffineProfile(Profile):
    """``v_start + slope * (t - t1)``; no plateaus unless ``slope == 0``."""

    v_start: float
    slope: float
    window: TimeWindow
    end_fraction: float = 0.1

    def end_segments(self):
        w = self.window
        span = self.end_fraction * w.duration
        return (w.t1, w.t1 + span), (w.t2 - span, w.t2)

    def _eval(self, t, nu):
        if nu == 0:
            return self.v_start + self.slope * (t - self.window.t1)
        if nu == 1:
            return np.full_like(t, self.slope)
        return np.zeros_like(t)


def plateau_profile(
    v_start: float, v_end: float, window: TimeWindow, ramp_fraction: float = 0.1
) -> PlateauProfile:
    return PlateauProfile(v_start, v_end, window, ramp_fraction)


def constant_profile(value: float, window: TimeWindow) -> PlateauProfile:
    return PlateauProfile(value, value, window)


def _check_window(name: str, profile: Profile, window: TimeWindow) -> None:
    if profile.window != window:
        raise ParameterError(f"profile {name!r} is defined on {profile.window}, model on {window}")


def _check_positive(name: str, profile: Profile) -> None:
    w = profile.window
    grid = np.linspace(w.t1, w.t2, 1025)
    grid = np.union1d(grid, profile.knots())
    if np.min(profile.value(grid)) <= 0.0:
        raise ParameterError(f"profile {name!r} must be strictly positive on the window")


@dataclass(frozen=True)
class Cylinder:
    """``R x S^1`` with metric ``dt^2 - dtheta^2`` and gauge potential ``A1(t) dtheta``."""

    L: float
    spin: CircleSpin
    gauge: Profile
    window: TimeWindow

    def __post_init__(self):
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ParameterError(f"circumference L must be positive, got {self.L}")
        if not isinstance(self.spin, CircleSpin):
            object.__setattr__(self, "spin", CircleSpin(self.spin))
        _check_window("gauge", self.gauge, self.window)

    @property
    def dimension(self) -> int:
        return 2

    def profiles(self) -> dict[str, Profile]:
        return {"gauge": self.gauge}


@dataclass(frozen=True)
class BianchiI:
    """``dt^2 - a1^2 dx1^2 - a2^2 dx2^2 - a3^2 dx3^2`` on ``R x T^3``."""

    a1: Profile
    a2: Profile
    a3: Profile
    spin: int
    window: TimeWindow

    def __post_init__(self):
        if not (isinstance(self.spin, int) and 0 <= self.spin < TORUS_SPIN_STRUCTURES):
            raise ParameterError(f"torus spin structure index must be in 0..7, got {self.spin}")
        for name, p in self.profiles().items():
            _check_window(name, p, self.window)
            _check_positive(name, p)

    @property
    def dimension(self) -> int:
        return 4

    def profiles(self) -> dict[str, Profile]:
        return {"a1": self.a1, "a2": self.a2, "a3": self.a3}


@dataclass(frozen=True)
class BianchiII:
    """``dt^2 - g_{a(t), b(t)}`` with the left-invariant Heisenberg metric.

    ``N1``/``N2`` are the integer parts of the Heisenberg eta invariants at
    the two ends. They come from outside and are optional.
    """

    a: Profile
    b: Profile
    spin: int
    window: TimeWindow
    N1: int | None = None
    N2: int | None = None

    def __post_init__(self):
        if not (isinstance(self.spin, int) and 0 <= self.spin < HEISENBERG_SPIN_STRUCTURES):
            raise ParameterError(
                f"Heisenberg spin structure index must be in 0..3, got {self.spin}"
            )
        for name, p in self.profiles().items():
            _check_window(name, p, self.window)
            _check_positive(name, p)
        for name in ("N1", "N2"):
            v = getattr(self, name)
            if v is not None and not isinstance(v, int):
                raise ParameterError(f"{name} must be an integer")

    @property
    def dimension(self) -> int:
        return 4

    def profiles(self) -> dict[str, Profile]:
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class SphereReference:
    """``R x S^(4k-1)``; only the registered chiral charge is available."""

    k: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ParameterError(f"sphere reference needs an integer k >= 1, got {self.k}")

    @property
    def dimension(self) -> int:
        return 4 * self.k

    def profiles(self) -> dict[str, Profile]:
        return {}


SpacetimeModel = Union[Cylinder, BianchiI, BianchiII, SphereReference]


def model_kind(model: SpacetimeModel) -> str:
    return {
        Cylinder: "cylinder",
        BianchiI: "bianchi_i",
        BianchiII: "bianchi_ii",
        SphereReference: "sphere_reference",
    }[type(model)]


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    tol: float
    maxima: dict[str, float]

    def failing(self) -> list[str]:
        return [name for name, m in self.maxima.items() if m > self.tol]


def validate_product_structure(model: SpacetimeModel, tol: float = 0.0) -> ValidationReport:
    """Check that every profile is stationary on both end segments.

    ``maxima[name]`` is the largest ``|derivative|`` seen on a dense grid over
    the two end segments (plus their endpoints).
    """
    maxima = {}
    for name, p in model.profiles().items():
        worst = 0.0
        for lo, hi in p.end_segments():
            grid = np.linspace(lo, hi, VALIDATION_SAMPLES)
            worst = max(worst, float(np.max(np.abs(p.derivative(grid)))))
        maxima[name] = worst
    passed = all(m <= tol for m in maxima.values())
    return ValidationReport(passed=passed, tol=tol, maxima=maxima)
