"""Numerical toolkit for billiards in nearly circular convex domains.

Builds boundary curves from radius profiles, iterates the billiard map with
exact step Jacobians, solves for winding-once loops and their length
critical points, assembles length-spectrum bands and their gap structure,
differentiates loop lengths along radial deformation families, and measures
oscillatory-integral decay and sublevel regularity of periodic phases.
"""

from .billiard import Orbit, PhasePoint, StepResult, decompose, iterate, lazutkin_residual, step
from .config import DomainConfig, parse_domain_config
from .deform import MelnikovProfile, VariationField, melnikov, melnikov_vs_fd, variations
from .errors import (
    BracketFailure,
    LoopspecError,
    NoConvergence,
    NoisyFit,
    NonConvex,
    NonConvexWarning,
    NonStarShaped,
    PartitionAmbiguous,
    ResolutionCap,
    SolverFailure,
    UnsupportedProfile,
    WindowViolation,
)
from .geometry import (
    BoundaryCurve,
    BoundaryPoint,
    CircularityReport,
    CurvatureFunctionals,
    build_boundary,
)
from .loops import (
    BirkhoffOrbit,
    CriticalPoint,
    LoopProfile,
    birkhoff_orbit,
    critical_points,
    loop_profile,
    passage_angle,
)
from .osc import (
    DecayFit,
    PeriodicFunction,
    decay_exponent,
    detect_constant_phase,
    holder_exponent,
    oscillatory_integral,
    sublevel_distribution,
)
from .profiles import EllipseProfile, FourierProfile, cosine_profile
from .settings import DEFAULT, Settings
from .spectrum import (
    HeardBand,
    MMFit,
    SpectrumBand,
    SpectrumReport,
    band,
    classify_integrability,
    gap_analysis,
    hear_bounces,
    mather,
    mm_fit,
)

__version__ = "0.1.0"
