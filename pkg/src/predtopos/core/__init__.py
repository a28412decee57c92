"""Finite categories, presheaves and the ambient interface."""

from .ambient import Ambient
from .category import (
    FiniteCategory,
    Functor,
    free_category,
    monoid_category,
    preorder_category,
    validate_category,
    validate_functor,
)
from .presheaf import (
    NatTrans,
    Presheaf,
    canonical_cover,
    enumerate_presheaves,
    find_iso,
    find_lift,
    presheaf_hom,
    search_nat,
    yoneda_embed,
)
from .psh import FinPsh

__all__ = [
    "Ambient",
    "FinPsh",
    "FiniteCategory",
    "Functor",
    "NatTrans",
    "Presheaf",
    "canonical_cover",
    "enumerate_presheaves",
    "find_iso",
    "find_lift",
    "free_category",
    "monoid_category",
    "preorder_category",
    "presheaf_hom",
    "search_nat",
    "validate_category",
    "validate_functor",
    "yoneda_embed",
]
