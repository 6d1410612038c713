# Construction
from rootcloak.config import Settings, get_settings
from rootcloak.core.construction import Construction, ConstructionReport, resolve_config

# Exceptions
from rootcloak.core.exceptions import (
    AmplitudeDegenerate,
    ConfigInvalid,
    EscapeFailure,
    GeometryInvalid,
    GroupClosureError,
    NotPositiveDefinite,
    RootCloakError,
    SingularSystem,
    StepFailure,
    ThresholdNotFound,
)

# Geometry
from rootcloak.geometry.bumps import BumpSet
from rootcloak.geometry.geodesic import GeodesicState, TraceResult, hamilton_rhs, integrate
from rootcloak.geometry.metricfield import HamiltonianField, SolveReport, assemble_system, dH, max_admissible_epsilon, solve_H, validate_geometry
from rootcloak.geometry.rootsys import RootSystem, WeylGroup, build_roots, build_weyl_group

# Verification
from rootcloak.verify.curvature import curvature
from rootcloak.verify.invisibility import verify_invisibility
from rootcloak.verify.obstruction import flatness_obstruction
from rootcloak.verify.report import CurvatureSample, InvisibilityReport, VerificationReport
from rootcloak.verify.runner import run_verification
from rootcloak.verify.symmetry import verify_symmetry

__all__ = [
    "Settings",
    "get_settings",
    "Construction",
    "ConstructionReport",
    "resolve_config",
    "RootCloakError",
    "ConfigInvalid",
    "AmplitudeDegenerate",
    "GroupClosureError",
    "SingularSystem",
    "NotPositiveDefinite",
    "ThresholdNotFound",
    "StepFailure",
    "EscapeFailure",
    "GeometryInvalid",
    "RootSystem",
    "WeylGroup",
    "build_roots",
    "build_weyl_group",
    "BumpSet",
    "HamiltonianField",
    "SolveReport",
    "assemble_system",
    "solve_H",
    "dH",
    "max_admissible_epsilon",
    "validate_geometry",
    "GeodesicState",
    "TraceResult",
    "hamilton_rhs",
    "integrate",
    "InvisibilityReport",
    "CurvatureSample",
    "VerificationReport",
    "verify_invisibility",
    "verify_symmetry",
    "flatness_obstruction",
    "curvature",
    "run_verification",
]
