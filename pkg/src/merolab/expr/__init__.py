"""Expression trees, parsing, and stable evaluation of meromorphic functions."""

from .evaluate import (
    LOG_HUGE,
    OVERFLOW,
    OVERFLOW_FLAG,
    OK_FLAG,
    POLE,
    POLE_FLAG,
    evaluate,
    evaluate_many,
    log_modulus,
    log_polar,
)
from .nodes import (
    Add,
    CanonicalProduct,
    Const,
    Div,
    Func,
    LacunarySeries,
    MeroExpr,
    Mul,
    Neg,
    Node,
    Pow,
    Sub,
    Var,
    polynomial_coefficients,
    to_string,
)
from .parser import ParseError, parse
from .poles import (
    BoundarySingularityError,
    SingularityList,
    UnresolvedRegionError,
    UnsupportedExpressionError,
    WindingConvergenceError,
    poles_in_disk,
    winding_count,
)

__all__ = [
    "Add",
    "BoundarySingularityError",
    "CanonicalProduct",
    "Const",
    "Div",
    "Func",
    "LacunarySeries",
    "LOG_HUGE",
    "MeroExpr",
    "Mul",
    "Neg",
    "Node",
    "OK_FLAG",
    "OVERFLOW",
    "OVERFLOW_FLAG",
    "ParseError",
    "POLE",
    "POLE_FLAG",
    "Pow",
    "SingularityList",
    "Sub",
    "UnresolvedRegionError",
    "UnsupportedExpressionError",
    "Var",
    "WindingConvergenceError",
    "evaluate",
    "evaluate_many",
    "log_modulus",
    "log_polar",
    "parse",
    "poles_in_disk",
    "polynomial_coefficients",
    "to_string",
    "winding_count",
]
