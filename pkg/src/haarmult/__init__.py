"""Haar-multiplier toolkit: dyadic combinatorics, square-function norms,
stopping-time block decompositions, summing weights for coefficient
multipliers, and lattice factorizations, all on finite Haar expansions."""

from .atomic import (
    AtomicDecomposition,
    AtomicPiece,
    DecompositionReport,
    appendix_constant,
    decompose,
    sup_square,
    verify_decomposition,
)
from .dyadic import (
    DyadicInterval,
    IntervalFamily,
    carleson_constant,
    contains,
    generation_decay_check,
    generations,
    is_block,
    maximal_intervals,
    measure,
)
from .errors import (
    DegenerateThetaError,
    EmptyFamilyError,
    ExpansionFormatError,
    VerificationError,
    ZeroInputError,
)
from .haar import (
    HaarExpansion,
    StepFunction,
    convexify,
    evaluate_haar,
    hp_norm,
    l2_norm,
    multiply,
    q_variation,
    square_function,
    tl_norm,
)
from .pietsch import (
    MultiplierReport,
    PietschMeasure,
    check_multiplier_bound,
    h2_measure,
    validate_measure,
    weights_hp,
    weights_tl,
    weights_vector,
)
from .pisier import (
    Factorization,
    factorize,
    theta,
    verify_factorization,
    x0_norm_estimate,
)

__all__ = [
    "AtomicDecomposition",
    "AtomicPiece",
    "DecompositionReport",
    "DegenerateThetaError",
    "DyadicInterval",
    "EmptyFamilyError",
    "ExpansionFormatError",
    "Factorization",
    "HaarExpansion",
    "IntervalFamily",
    "MultiplierReport",
    "PietschMeasure",
    "StepFunction",
    "VerificationError",
    "ZeroInputError",
    "appendix_constant",
    "carleson_constant",
    "check_multiplier_bound",
    "contains",
    "convexify",
    "decompose",
    "evaluate_haar",
    "factorize",
    "generation_decay_check",
    "generations",
    "h2_measure",
    "hp_norm",
    "is_block",
    "l2_norm",
    "maximal_intervals",
    "measure",
    "multiply",
    "q_variation",
    "square_function",
    "sup_square",
    "theta",
    "tl_norm",
    "validate_measure",
    "verify_decomposition",
    "verify_factorization",
    "weights_hp",
    "weights_tl",
    "weights_vector",
    "x0_norm_estimate",
]
