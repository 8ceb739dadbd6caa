"""Spectra of hypersurface Dirac operators and their eta / kernel invariants.

The circle operator ``i d/dtheta -/+ A1`` has the arithmetic spectrum
``s (k + sigma) + c``; its eta invariant has a closed form through the value
of the Hurwitz zeta function at zero. ``eta_zeta_oracle`` recomputes the
same number from raw partial sums, without using that closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError, ParameterError
from .models import HEISENBERG_SPIN_STRUCTURES, TORUS_SPIN_STRUCTURES, CircleSpin

ZERO_MODE_TOL = 1e-12


@dataclass(frozen=True)
class ArithmeticSpectrum:
    """Simple eigenvalues ``scale * (k + sigma) + shift`` for k in Z."""

    scale: float
    sigma: float
    shift: float

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ParameterError(f"spectrum scale must be positive, got {self.scale}")
        if not math.isfinite(self.shift):
            raise ParameterError("spectrum shift must be finite")

    def eigenvalues(self, kmin: int, kmax: int) -> np.ndarray:
        k = np.arange(kmin, kmax + 1, dtype=float)
        return self.scale * (k + self.sigma) + self.shift

    def offset(self) -> float:
        """``frac(sigma + shift/scale)``: position of the lattice inside [0, 1)."""
        return (self.sigma + self.shift / self.scale) % 1.0

    def rescaled(self, factor: float) -> "ArithmeticSpectrum":
        return ArithmeticSpectrum(self.scale * factor, self.sigma, self.shift * factor)


@dataclass(frozen=True)
class EtaResult:
    eta: float
    h: int

    @property
    def reduced(self) -> float:
        return ((self.eta + self.h) / 2.0) % 1.0


@dataclass(frozen=True)
class TorusSummary:
    """Flat 3-torus slice: the Dirac spectrum is symmetric, so eta vanishes."""

    spin: int
    h: int
    eta: float = 0.0


@dataclass(frozen=True)
class HeisenbergSummary:
    """Heisenberg slice; only the smooth part of eta is known in closed form."""

    a: float
    b: float

    @property
    def smooth_eta(self) -> float:
        return heisenberg_eta_smooth(self.a, self.b)


def circle_spectrum(
    L: float, spin: CircleSpin | str, A1: float, conjugate: bool = False
) -> ArithmeticSpectrum:
    """Spectrum of ``i d/dtheta - A1`` (or of its charge conjugate).

    The conjugate operator couples with the opposite charge, so its shift is
    ``+A1``; the plain operator has shift ``-A1``.
    """
    if not L > 0:
        raise DomainError(f"circumference must be positive, got {L}")
    spin = CircleSpin(spin)
    shift = A1 if conjugate else -A1
    return ArithmeticSpectrum(2.0 * math.pi / L, spin.sigma, float(shift))


def _zero_mode(offset: float) -> bool:
    return min(offset, 1.0 - offset) < ZERO_MODE_TOL


def eta_closed(spec: ArithmeticSpectrum) -> EtaResult:
    """Closed-form eta invariant and kernel dimension.

    With ``q = frac(sigma + shift/scale)`` in (0, 1) the spectrum is
    ``scale * {q + n, n >= 0} u -scale * {1 - q + n, n >= 0}``, so
    ``eta = zeta_H(0, q) - zeta_H(0, 1 - q) = 1 - 2q``. A lattice point at
    zero contributes to ``h`` and leaves a symmetric remainder.
    """
    q = spec.offset()
    if _zero_mode(q):
        return EtaResult(eta=0.0, h=1)
    return EtaResult(eta=hurwitz_zeta_at_zero(q) - hurwitz_zeta_at_zero(1.0 - q), h=0)


def hurwitz_zeta_at_zero(q: float) -> float:
    if not 0.0 < q <= 1.0:
        raise DomainError(f"Hurwitz zeta at 0 is implemented for 0 < q <= 1, got {q}")
    return 0.5 - q


def _signed_power_sum(spec: ArithmeticSpectrum, K: int, s: float) -> tuple[float, int]:
    lam = spec.eigenvalues(-K, K)
    zero = np.abs(lam) < ZERO_MODE_TOL * spec.scale
    lam = lam[~zero]
    terms = np.sign(lam) * np.abs(lam) ** (-s)
    return math.fsum(terms), int(np.count_nonzero(zero))


def _eta_at(spec: ArithmeticSpectrum, s: float, cutoff: int, levels: int) -> tuple[float, int]:
    """eta(s) from partial sums over |k| <= K on a doubling ladder.

    The truncation error expands in ``K^-(s+j)``, j = 0, 1, ...; each
    Richardson sweep removes one of those powers.
    """
    table = []
    h = 0
    for j in range(levels + 1):
        value, h = _signed_power_sum(spec, cutoff * 2**j, s)
        table.append(value)
    for j in range(levels):
        factor = 2.0 ** (s + j)
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0) for i in range(len(table) - 1)]
    return table[0], h


def _neville_at_zero(xs, ys) -> float:
    p = list(ys)
    n = len(xs)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i])
    return p[0]


def eta_zeta_oracle(
    spec: ArithmeticSpectrum,
    cutoff: int = 16,
    richardson_levels: int = 6,
    s_step: float = 0.05,
    s_points: int = 12,
    divergence_tol: float = 1e-4,
) -> EtaResult:
    """Eta invariant from ``sum sign(lam) |lam|^-s`` continued to ``s = 0``.

    For each s on the ladder ``s_step, 2 s_step, ...`` the K -> infinity limit
    is taken by Richardson extrapolation; the resulting values of the (entire)
    function eta(s) are then extrapolated polynomially to s = 0. Eigenvalues
    within ``1e-12 * scale`` of zero are dropped and counted in ``h``.
    """
    if cutoff < 10:
        raise ParameterError(f"cutoff must be >= 10, got {cutoff}")
    if richardson_levels < 1 or s_points < 3:
        raise ParameterError("need at least one Richardson level and three s points")
    xs = [s_step * (i + 1) for i in range(s_points)]
    ys = []
    h = 0
    for s in xs:
        value, h = _eta_at(spec, s, cutoff, richardson_levels)
        ys.append(value)
    estimate = _neville_at_zero(xs, ys)
    coarser = _neville_at_zero(xs[:-1], ys[:-1])
    if not math.isfinite(estimate) or abs(estimate - coarser) > divergence_tol:
        raise AccuracyError(
            "eta extrapolation to s = 0 did not settle", estimate, abs(estimate - coarser)
        )
    return EtaResult(eta=estimate, h=h)


def torus_summary(spin: int) -> TorusSummary:
    """Flat torus: eta = 0 for all 8 spin structures, kernel only for index 0."""
    if not (isinstance(spin, int) and 0 <= spin < TORUS_SPIN_STRUCTURES):
        raise ParameterError(f"torus spin structure index must be in 0..7, got {spin}")
    return TorusSummary(spin=spin, h=1 if spin == 0 else 0)


def heisenberg_summary(a: float, b: float, spin: int = 0) -> HeisenbergSummary:
    if not (isinstance(spin, int) and 0 <= spin < HEISENBERG_SPIN_STRUCTURES):
        raise ParameterError(f"Heisenberg spin structure index must be in 0..3, got {spin}")
    heisenberg_eta_smooth(a, b)
    return HeisenbergSummary(a=float(a), b=float(b))


def heisenberg_eta_smooth(a: float, b: float) -> float:
    """Smooth part ``b^4 / (96 pi^2 a^4)`` of the Heisenberg eta invariant."""
    if not (a > 0 and b > 0):
        raise DomainError(f"Heisenberg metric needs a, b > 0, got a={a}, b={b}")
    return (b / a) ** 4 / (96.0 * math.pi**2)
