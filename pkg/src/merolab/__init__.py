"""merolab: a numerical laboratory for growth and iteration of meromorphic functions."""

__version__ = "0.1.0"

from .corpus import CORPUS, corpus_function, corpus_names
from .criteria import (
    ChainReport,
    CriterionParams,
    CriterionVerdict,
    DensityReport,
    NotEntireError,
    Witness,
    check_L_over_r,
    check_L_versus_M,
    check_deficiency_order,
    check_entire_conditions,
    check_growth_chain,
    check_main,
    check_strong,
    exceptional_set,
    log_density,
)
from .dynamics import (
    ClassifiedGrid,
    ComponentReport,
    OrbitClass,
    OrbitResult,
    SeedUndecidedError,
    boundedness_probe,
    classify_grid,
    component_summaries,
    iterate_orbit,
    label_components,
    to_ppm,
)
from .expr import MeroExpr, ParseError, evaluate, parse
from .hyperbolic import (
    Annulus,
    ConstantAudit,
    Disk,
    DistortionReport,
    DomainConstant,
    HalfPlane,
    HyperbolicSample,
    NonEscapingSampleError,
    OutsideDomainError,
    PolygonDomain,
    PuncturedPlane,
    TraceState,
    UnsupportedDomainError,
    circle_bound_constant_audit,
    distortion_check,
    domain_constant,
    hyperbolic_density,
    hyperbolic_distance,
    schwarz_pick_check,
    trace_radius_recursion,
)
from .nevanlinna import (
    CircleBoundSearchError,
    GrowthSummary,
    InsufficientSpanError,
    RadialProfile,
    RadialSample,
    RadiusGrid,
    build_profile,
    characteristic,
    circle_bound_witness,
    counting,
    growth_summary,
    log_max_modulus,
    log_min_modulus,
    max_modulus,
    min_modulus,
    proximity,
)

__all__ = [
    "CORPUS",
    "ChainReport",
    "CircleBoundSearchError",
    "ClassifiedGrid",
    "ComponentReport",
    "ConstantAudit",
    "CriterionParams",
    "CriterionVerdict",
    "DensityReport",
    "Disk",
    "DistortionReport",
    "DomainConstant",
    "GrowthSummary",
    "HalfPlane",
    "Annulus",
    "HyperbolicSample",
    "InsufficientSpanError",
    "MeroExpr",
    "NonEscapingSampleError",
    "NotEntireError",
    "OrbitClass",
    "OrbitResult",
    "OutsideDomainError",
    "ParseError",
    "PolygonDomain",
    "PuncturedPlane",
    "RadialProfile",
    "RadialSample",
    "RadiusGrid",
    "SeedUndecidedError",
    "TraceState",
    "UnsupportedDomainError",
    "Witness",
    "boundedness_probe",
    "build_profile",
    "characteristic",
    "check_L_over_r",
    "check_L_versus_M",
    "check_deficiency_order",
    "check_entire_conditions",
    "check_growth_chain",
    "check_main",
    "check_strong",
    "circle_bound_constant_audit",
    "circle_bound_witness",
    "classify_grid",
    "component_summaries",
    "corpus_function",
    "corpus_names",
    "counting",
    "distortion_check",
    "domain_constant",
    "evaluate",
    "exceptional_set",
    "growth_summary",
    "hyperbolic_density",
    "hyperbolic_distance",
    "iterate_orbit",
    "label_components",
    "log_density",
    "log_max_modulus",
    "log_min_modulus",
    "max_modulus",
    "min_modulus",
    "parse",
    "proximity",
    "schwarz_pick_check",
    "to_ppm",
    "trace_radius_recursion",
    "__version__",
]
