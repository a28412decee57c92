"""Covering and collection squares, choice objects, small maps and representations."""

from .choice import (
    AmcResult,
    ChoiceVerdict,
    StrippedAmbient,
    check_choice_object,
    exact_choice_test,
    find_amc_square,
    has_enough_projectives,
    is_projective,
)
from .small import (
    SmallMapClass,
    check_small_axioms,
    rp_square_from_representation,
    s2_search,
    set_amc_check,
    small_class_from_square,
    standard_instances,
)
from .squares import Square, fibre, identity_square, is_collection_square, is_covering_square

__all__ = [
    "AmcResult", "ChoiceVerdict", "SmallMapClass", "Square", "StrippedAmbient", "check_choice_object",
    "check_small_axioms", "exact_choice_test", "fibre", "find_amc_square", "has_enough_projectives",
    "identity_square", "is_collection_square", "is_covering_square", "is_projective",
    "rp_square_from_representation", "s2_search", "set_amc_check", "small_class_from_square",
    "standard_instances",
]
