"""Numerical verification of Riemannian submersions from 3-manifolds onto surfaces."""

from .calculus import Chart, ChartPoint, ScalarField, VectorField, eval_jet, fd_oracle, lie_bracket
from .errors import (
    DomainError,
    FrameError,
    FrameNotNaturalError,
    Geo3Error,
    InconclusiveError,
    ParameterError,
    StructuralError,
    UsageError,
)
from .geometry import FrameField, MetricField, riemann_frame, ricci_frame, structure_functions
from .spaces import bcv_space, berger_space, catalog, classify_bcv, get_map, hopf_map
from .submersion import (
    base_gauss_curvature,
    curvature_identity_residuals,
    energy_density,
    harmonic_system_residuals,
    integrability_data,
    is_harmonic,
    natural_frame,
    tension_field,
    validate_submersion,
)

__all__ = [
    "Chart",
    "ChartPoint",
    "DomainError",
    "FrameError",
    "FrameField",
    "FrameNotNaturalError",
    "Geo3Error",
    "InconclusiveError",
    "MetricField",
    "ParameterError",
    "ScalarField",
    "StructuralError",
    "UsageError",
    "VectorField",
    "base_gauss_curvature",
    "bcv_space",
    "berger_space",
    "catalog",
    "classify_bcv",
    "curvature_identity_residuals",
    "energy_density",
    "eval_jet",
    "fd_oracle",
    "get_map",
    "harmonic_system_residuals",
    "hopf_map",
    "integrability_data",
    "is_harmonic",
    "lie_bracket",
    "natural_frame",
    "ricci_frame",
    "riemann_frame",
    "structure_functions",
    "tension_field",
    "validate_submersion",
]
