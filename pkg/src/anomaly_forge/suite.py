"""Randomized invariant suite run by ``anomaly-forge suite``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .charge import assemble_charges, left_handed_charge, reference_sphere_charge
from .flow import mode_family_cylinder, projector_trace, spectral_flow
from .forms import ahat_density_batch
from .models import BianchiI, CircleSpin, Cylinder, TimeWindow, plateau_profile
from .spectral import ArithmeticSpectrum, circle_spectrum, eta_closed, eta_zeta_oracle

WINDOW = TimeWindow(0.0, 1.0)
LATTICE_MARGIN = 1e-3


@dataclass
class CheckResult:
    name: str
    passed: int = 0
    failed: int = 0

    def record(self, ok: bool) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1


def off_lattice(rng: np.random.Generator, L: float, sigma: float, lo=-5.0, hi=5.0) -> float:
    """Uniform gauge value whose spectrum stays at least LATTICE_MARGIN away from 0."""
    scale = 2.0 * math.pi / L
    while True:
        v = rng.uniform(lo, hi)
        q = (sigma + v / scale) % 1.0
        if LATTICE_MARGIN < q < 1.0 - LATTICE_MARGIN:
            return v


def random_cylinder(rng: np.random.Generator) -> Cylinder:
    L = rng.uniform(1.0, 10.0)
    spin = CircleSpin.TRIVIAL if rng.integers(2) == 0 else CircleSpin.NONTRIVIAL
    v1, v2 = off_lattice(rng, L, spin.sigma), off_lattice(rng, L, spin.sigma)
    gauge = plateau_profile(v1, v2, WINDOW, rng.uniform(0.05, 0.45))
    return Cylinder(L, spin, gauge, WINDOW)


def check_cylinder(rng, cases: int, tol: float) -> CheckResult:
    res = CheckResult("cylinder_integrality_and_oracle")
    for _ in range(cases):
        model = random_cylinder(rng)
        rep = assemble_charges(model, tol)
        flow = spectral_flow(mode_family_cylinder(model), WINDOW.t1, WINDOW.t2)
        res.record(
            rep.nearest_integer_deviation < 1e-8
            and round(rep.Q_R) == rep.oracle_value == flow
            and rep.Q_total == 0.0
        )
    return res


def check_hurwitz(rng, cases: int) -> CheckResult:
    res = CheckResult("hurwitz_identity")
    for _ in range(cases):
        L = rng.uniform(1.0, 10.0)
        A1 = off_lattice(rng, L, 0.0, -20.0, 20.0)
        x = L * A1 / (2.0 * math.pi)
        eta = eta_closed(circle_spectrum(L, CircleSpin.TRIVIAL, A1, conjugate=True))
        res.record(abs(2 * x + eta.h + eta.eta - (2 * math.floor(x) + 1)) < 1e-12)
    return res


def check_eta_oracle(rng, cases: int, tol: float) -> CheckResult:
    res = CheckResult("eta_zeta_oracle")
    for _ in range(cases):
        scale = rng.uniform(0.2, 5.0)
        sigma = float(rng.choice([0.0, 0.5]))
        q = rng.uniform(0.05, 0.95)
        shift = scale * (q - sigma + int(rng.integers(-3, 4)))
        spec = ArithmeticSpectrum(scale, sigma, shift)
        res.record(abs(eta_zeta_oracle(spec).eta - eta_closed(spec).eta) < tol)
    return res


def check_symmetries(rng, cases: int, tol: float) -> list[CheckResult]:
    conservation = CheckResult("conservation")
    reversal = CheckResult("time_reversal")
    gauge = CheckResult("gauge_shift")
    for _ in range(cases):
        model = random_cylinder(rng)
        rep = assemble_charges(model, tol)
        q_left = left_handed_charge(rep.form_integral, rep.h1, rep.h2, rep.eta1, rep.eta2)
        conservation.record(rep.Q_total == 0.0 and abs(q_left - rep.Q_L) < 1e-10)

        fam = mode_family_cylinder(model)
        fwd = projector_trace(fam, WINDOW.t1, WINDOW.t2).value
        bwd = projector_trace(fam, WINDOW.t2, WINDOW.t1).value
        reversal.record(
            bwd == -fwd and spectral_flow(fam, WINDOW.t2, WINDOW.t1) == -fwd
        )

        m = int(rng.integers(-3, 4))
        shift = 2.0 * math.pi / model.L * m
        g = model.gauge
        shifted = Cylinder(
            model.L,
            model.spin,
            plateau_profile(g.v_start + shift, g.v_end + shift, WINDOW, g.ramp_fraction),
            WINDOW,
        )
        gauge.record(round(assemble_charges(shifted, tol).Q_chir) == round(rep.Q_chir))
    return [conservation, reversal, gauge]


def check_bianchi_i(rng, points: int, tol: float) -> CheckResult:
    res = CheckResult("bianchi_i_vanishing")
    for _ in range(max(1, points // 10)):
        profiles = [plateau_profile(*rng.uniform(0.5, 2.0, 2), WINDOW) for _ in range(3)]
        model = BianchiI(*profiles, int(rng.integers(8)), WINDOW)
        pts = np.column_stack([rng.uniform(0, 1, 10), rng.uniform(0, 1, (10, 3))])
        dens = ahat_density_batch(model, pts)
        rep = assemble_charges(model, tol)
        res.record(float(np.max(np.abs(dens))) < 1e-8 and round(rep.Q_chir) == 0)
    return res


def check_sphere() -> CheckResult:
    res = CheckResult("sphere_reference")
    res.record(reference_sphere_charge(1) == -4 and reference_sphere_charge(2) == 12)
    return res


def run_suite(seed: int, sizes, quadrature_tol: float, eta_tol: float) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = [
        check_cylinder(rng, sizes.cylinder_cases, quadrature_tol),
        check_hurwitz(rng, sizes.hurwitz_cases),
        check_eta_oracle(rng, sizes.eta_oracle_cases, eta_tol),
    ]
    out.extend(check_symmetries(rng, sizes.symmetry_cases, quadrature_tol))
    out.append(check_bianchi_i(rng, sizes.bianchi_points, quadrature_tol))
    out.append(check_sphere())
    return out
