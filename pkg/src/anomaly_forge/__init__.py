"""Relative chiral charges of Weyl fermions on model globally hyperbolic spacetimes."""

__version__ = "0.1.0"

from .charge import (
    ChargeReport,
    assemble_charges,
    cross_validate_cylinder,
    left_handed_charge,
    reference_sphere_charge,
    right_handed_charge,
)
from .flow import ModeFamily, TraceResult, mode_family_cylinder, projector_trace, spectral_flow
from .forms import (
    FormIntegral,
    ahat_density_at,
    ahat_density_closed_bianchi2,
    chern_flux_cylinder,
    christoffel_at,
    curvature_at,
    index_form_integral,
    metric_at,
)
from .models import (
    AffineProfile,
    BianchiI,
    BianchiII,
    CircleSpin,
    Cylinder,
    PlateauProfile,
    SampledProfile,
    SphereReference,
    TimeWindow,
    plateau_profile,
    validate_product_structure,
)
from .spectral import (
    ArithmeticSpectrum,
    EtaResult,
    circle_spectrum,
    eta_closed,
    eta_zeta_oracle,
    heisenberg_eta_smooth,
    hurwitz_zeta_at_zero,
    torus_summary,
)
