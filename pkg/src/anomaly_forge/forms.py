"""Metric, curvature and characteristic-form integrals for the model spacetimes.

Signature is (+, -, ..., -) throughout. Derivatives of the metric are taken by
fourth-order central differences with one Richardson level; curvature is the
difference quotient of those Christoffel symbols, so the whole chain only
ever calls ``metric_at``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import AccuracyError, NumericError, UnsupportedModelError
from .models import BianchiI, BianchiII, Cylinder, SpacetimeModel, SphereReference

log = logging.getLogger(__name__)

AHAT_NORMALIZATION = 1.0 / (192.0 * math.pi**2)
# Sign with which the coordinate density of dt^dx^dy^dz enters the integral
# over M = [t1, t2] x Sigma. This orientation turns the Bianchi-II density into
# the boundary term (b^4/a^4 at t1 minus at t2) / 192 pi^2, which the integer
# part of the eta invariant has to cancel.
ORIENTATION_4D = -1.0
CONDITION_LIMIT = 1e12
DEFAULT_STEP = np.finfo(float).eps ** (1.0 / 6.0)
QUAD_LIMIT = 200
# reference point for homogeneous models; any point gives the same density
HOMOGENEOUS_POINT = (0.5, 0.5, 0.5)


@dataclass(frozen=True)
class FormIntegral:
    value: float
    estimated_error: float
    evaluations: int


@dataclass(frozen=True)
class CurvatureTensor:
    """``components[mu, nu, rho, sigma] = R^mu_{nu rho sigma}`` in the coordinate basis."""

    components: np.ndarray

    def norm(self) -> float:
        return float(np.max(np.abs(self.components)))

    def antisymmetry_residual(self) -> float:
        R = self.components
        return float(np.max(np.abs(R + R.transpose(0, 1, 3, 2))))

    def bianchi_residual(self) -> float:
        """max |R^a_{b[cd e]}| for the algebraic (first) Bianchi identity."""
        R = self.components
        cyc = R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)
        return float(np.max(np.abs(cyc)))


def _levi_civita(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        inversions = sum(
            1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j]
        )
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


_EPS4 = _levi_civita(4)


def _spatial_dim(model) -> int:
    if isinstance(model, Cylinder):
        return 1
    if isinstance(model, (BianchiI, BianchiII)):
        return 3
    raise UnsupportedModelError(
        f"{type(model).__name__} has no explicit metric; only cylinder and Bianchi models do"
    )


def metric_batch(model: SpacetimeModel, pts: np.ndarray) -> np.ndarray:
    """Metric components at points of shape (..., dim); returns (..., dim, dim)."""
    dim = _spatial_dim(model) + 1
    pts = np.asarray(pts, dtype=float)
    if pts.shape[-1] != dim:
        raise ValueError(f"expected {dim} coordinates per point, got {pts.shape[-1]}")
    g = np.zeros(pts.shape[:-1] + (dim, dim))
    g[..., 0, 0] = 1.0
    t = pts[..., 0]
    if isinstance(model, Cylinder):
        g[..., 1, 1] = -1.0
    elif isinstance(model, BianchiI):
        for i, p in enumerate((model.a1, model.a2, model.a3), start=1):
            g[..., i, i] = -p.value(t) ** 2
    else:
        a2 = model.a.value(t) ** 2
        b2 = model.b.value(t) ** 2
        x, y = pts[..., 1], pts[..., 2]
        # g_{xy} is half the dx dy coefficient of the line element
        g[..., 1, 1] = -(b2 * y**2 / 4.0 + a2)
        g[..., 2, 2] = -(b2 * x**2 / 4.0 + a2)
        g[..., 3, 3] = -b2
        g[..., 1, 2] = g[..., 2, 1] = b2 * x * y / 4.0
        g[..., 1, 3] = g[..., 3, 1] = -b2 * y / 2.0
        g[..., 2, 3] = g[..., 3, 2] = b2 * x / 2.0
    return g


def metric_at(model: SpacetimeModel, p) -> np.ndarray:
    return metric_batch(model, np.asarray(p, dtype=float))


def _steps(pts: np.ndarray, step: float | None) -> np.ndarray:
    if step is not None:
        if not step > 0:
            raise ValueError("finite-difference step must be positive")
        return np.full(pts.shape[-1], float(step))
    scale = np.maximum(1.0, np.max(np.abs(pts.reshape(-1, pts.shape[-1])), axis=0))
    return DEFAULT_STEP * scale


def _gradient(fn, pts: np.ndarray, h: np.ndarray) -> np.ndarray:
    """d fn / d x^lam at pts, stacked on a new axis right after the point axes.

    Five-point stencil at h and h/2 combined by one Richardson step.
    """
    dim = pts.shape[-1]
    lead = pts.shape[:-1]

    def stencil(hh):
        offsets = np.array([-2.0, -1.0, 1.0, 2.0])
        # shifted points: (4 offsets, dim directions, *lead, dim)
        shift = offsets[:, None, None] * np.eye(dim)[None] * hh[None, None, :]
        shifted = pts[None, None] + shift.reshape((4, dim) + (1,) * len(lead) + (dim,))
        vals = fn(shifted)
        extra = vals.ndim - 2 - len(lead)
        # paired differences so constant fields give exactly zero
        d = (8.0 * (vals[2] - vals[1]) - (vals[3] - vals[0])) / 12.0
        d = d / hh.reshape((dim,) + (1,) * (len(lead) + extra))
        return np.moveaxis(d, 0, len(lead))

    coarse = stencil(h)
    fine = stencil(h / 2.0)
    return (16.0 * fine - coarse) / 15.0


def _inverse_metric(g: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(g)
    worst = float(np.max(cond))
    if not np.isfinite(worst) or worst > CONDITION_LIMIT:
        raise NumericError(f"metric is numerically singular (condition {worst:.3g})", worst)
    return np.linalg.inv(g)


def christoffel_batch(model: SpacetimeModel, pts: np.ndarray, step: float | None = None):
    """``Gamma[..., mu, nu, rho]`` at points of shape (..., dim)."""
    pts = np.asarray(pts, dtype=float)
    h = _steps(pts, step)
    return _christoffel(model, pts, h)


def _christoffel(model, pts, h):
    g = metric_batch(model, pts)
    ginv = _inverse_metric(g)
    dg = _gradient(lambda q: metric_batch(model, q), pts, h)  # [..., lam, mu, nu] = d_lam g_mu nu
    # lowered[..., lam, nu, rho] = d_nu g_{lam rho} + d_rho g_{lam nu} - d_lam g_{nu rho}
    lowered = (
        np.swapaxes(dg, -3, -2)
        + np.swapaxes(np.swapaxes(dg, -3, -2), -2, -1)
        - dg
    )
    return 0.5 * np.einsum("...ml,...lnr->...mnr", ginv, lowered)


def christoffel_at(model: SpacetimeModel, p, step: float | None = None) -> np.ndarray:
    return christoffel_batch(model, np.asarray(p, dtype=float), step)


def curvature_batch(model: SpacetimeModel, pts: np.ndarray, step: float | None = None):
    """``R[..., mu, nu, rho, sigma]`` at points of shape (..., dim)."""
    pts = np.asarray(pts, dtype=float)
    h = _steps(pts, step)
    gamma = _christoffel(model, pts, h)
    # dgamma[..., rho, mu, nu, sigma] = d_rho Gamma^mu_{nu sigma}
    dgamma = _gradient(lambda q: _christoffel(model, q, h), pts, h)
    d = np.moveaxis(dgamma, -4, -2)  # [..., mu, nu, rho, sigma] = d_rho Gamma^mu_{nu sigma}
    R = d - np.swapaxes(d, -1, -2)
    quad = np.einsum("...mlr,...lns->...mnrs", gamma, gamma)
    return R + quad - np.swapaxes(quad, -1, -2)


def curvature_at(model: SpacetimeModel, p, step: float | None = None) -> CurvatureTensor:
    return CurvatureTensor(curvature_batch(model, np.asarray(p, dtype=float), step))


def _ahat_from_curvature(R: np.ndarray) -> np.ndarray:
    # coefficient of dt^dx^dy^dz in tr(R ^ R) / 192 pi^2, with R = 1/2 R_{mn} dx^m ^ dx^n
    trace = np.einsum("...abmn,...barS,mnrS->...", R, R, _EPS4)
    return AHAT_NORMALIZATION * trace / 4.0


def ahat_density_batch(model: SpacetimeModel, pts: np.ndarray, step: float | None = None):
    if isinstance(model, Cylinder):
        log.info("degree-4 form in 2D: the A-hat density vanishes")
        return np.zeros(np.asarray(pts).shape[:-1])
    if isinstance(model, SphereReference):
        raise UnsupportedModelError("sphere reference model carries no metric")
    return _ahat_from_curvature(curvature_batch(model, pts, step))


def ahat_density_at(model: SpacetimeModel, p, step: float | None = None) -> float:
    """Degree-4 A-hat density (coefficient of dt^dx^dy^dz) at a point."""
    return float(ahat_density_batch(model, np.asarray(p, dtype=float), step))


def ahat_density_closed_bianchi2(a, a_dot, a_ddot, b, b_dot, b_ddot) -> float:
    """Closed-form Bianchi-II A-hat density as a function of the profile jets."""
    from .errors import DomainError

    if not a > 0:
        raise DomainError(f"scale factor a must be positive, got {a}")
    first = a**2 * b * a_dot**2 - a**3 * b * a_ddot - a**3 * a_dot * b_dot + a**4 * b_ddot - b**3
    return first * (b * a_dot - a * b_dot) / (48.0 * math.pi**2 * a**5)


def bianchi2_boundary_term(a1: float, b1: float, a2: float, b2: float) -> float:
    """Integrated A-hat for product-structure ends: (b1^4/a1^4 - b2^4/a2^4)/192 pi^2."""
    return AHAT_NORMALIZATION * ((b1 / a1) ** 4 - (b2 / a2) ** 4)


def _breakpoints(model, t1: float, t2: float) -> list[float]:
    pts = {t1, t2}
    for p in model.profiles().values():
        pts.update(k for k in p.knots() if t1 < k < t2)
    return sorted(pts)


def _quad_pieces(fn, breaks, tol) -> FormIntegral:
    total, err, nev = 0.0, 0.0, 0
    pieces = len(breaks) - 1
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        value, abserr, info, *rest = integrate.quad(
            fn, lo, hi, epsabs=tol / pieces, epsrel=0.0, limit=QUAD_LIMIT, full_output=1
        )
        total += value
        err += abserr
        nev += info["neval"]
        if rest and abserr > tol / pieces:
            raise AccuracyError(
                f"quadrature did not converge on [{lo}, {hi}]: {rest[0].splitlines()[0]}",
                total,
                err,
            )
    return FormIntegral(value=total, estimated_error=err, evaluations=nev)


def chern_flux_cylinder(model: SpacetimeModel, tol: float = 1e-12) -> FormIntegral:
    """Integral of ch(A) = F / 2 pi over [t1, t2] x S^1.

    The value is the closed form ``L/2pi (A1(t2) - A1(t1))``; the
    ``estimated_error`` is its discrepancy against direct quadrature of
    ``dA1/dt / 2pi`` over the cylinder.
    """
    if not isinstance(model, Cylinder):
        raise UnsupportedModelError("chern_flux_cylinder needs a Cylinder model")
    w = model.window
    A = model.gauge
    closed = model.L / (2.0 * math.pi) * (A.value(w.t2) - A.value(w.t1))
    quad = _quad_pieces(
        lambda t: model.L * A.derivative(t) / (2.0 * math.pi), _breakpoints(model, w.t1, w.t2), tol
    )
    return FormIntegral(
        value=closed,
        estimated_error=abs(closed - quad.value),
        evaluations=quad.evaluations,
    )


def index_form_integral(
    model: SpacetimeModel, tol: float = 1e-9, step: float | None = None
) -> FormIntegral:
    """Integral over M of A-hat ^ ch(E).

    Cylinder: the Chern flux (A-hat = 1 in two dimensions). Bianchi models:
    trivial bundle, so the degree-4 A-hat density integrated over
    ``[t1, t2] x [0,1)^3``. The models are spatially homogeneous and the
    coordinate volume of the fundamental domain is 1, so this is a time
    integral of the density at a single spatial point.
    """
    if isinstance(model, Cylinder):
        return chern_flux_cylinder(model)
    if not isinstance(model, (BianchiI, BianchiII)):
        raise UnsupportedModelError(f"no form integral for {type(model).__name__}")
    w = model.window
    x0 = np.asarray(HOMOGENEOUS_POINT)

    def density(t):
        return float(ahat_density_batch(model, np.concatenate(([t], x0)), step))

    res = _quad_pieces(density, _breakpoints(model, w.t1, w.t2), tol)
    return FormIntegral(
        value=ORIENTATION_4D * res.value,
        estimated_error=res.estimated_error,
        evaluations=res.evaluations,
    )


def full_grid_form_integral(
    model: SpacetimeModel,
    time_nodes: int = 24,
    space_nodes: int = 3,
    step: float | None = None,
) -> FormIntegral:
    """Tensor Gauss-Legendre rule over ``[t1, t2] x [0,1)^3`` without the homogeneity shortcut.

    Coarse on purpose; it exists to check ``index_form_integral``.
    """
    if not isinstance(model, (BianchiI, BianchiII)):
        raise UnsupportedModelError("full-grid integral is implemented for Bianchi models")
    w = model.window
    breaks = _breakpoints(model, w.t1, w.t2)
    gx, gw = np.polynomial.legendre.leggauss(time_nodes)
    ts, tw = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        ts.append(0.5 * (hi - lo) * gx + 0.5 * (hi + lo))
        tw.append(0.5 * (hi - lo) * gw)
    ts, tw = np.concatenate(ts), np.concatenate(tw)
    sx, sw = np.polynomial.legendre.leggauss(space_nodes)
    sx, sw = 0.5 * sx + 0.5, 0.5 * sw
    T, X, Y, Z = np.meshgrid(ts, sx, sx, sx, indexing="ij")
    W = np.einsum("i,j,k,l->ijkl", tw, sw, sw, sw)
    pts = np.stack([T, X, Y, Z], axis=-1).reshape(-1, 4)
    dens = ahat_density_batch(model, pts, step)
    value = float(np.sum(W.reshape(-1) * dens))
    return FormIntegral(
        value=ORIENTATION_4D * value, estimated_error=float("nan"), evaluations=len(pts)
    )
