"""Typed first-order formulas, Tarski evaluation over finite sets and presheaf forcing."""

from .parse import Signature, parse_formula, tokenize
from .semantics import (
    EvalResult,
    ForceResult,
    Forcer,
    Structure,
    as_presheaf_structure,
    eval_finset,
    force,
    restrict_env,
    tuple_product,
)
from .syntax import And, App, Bot, Eq, Exists, Forall, Imp, Not, Or, Pred, Top, Var, free_vars, quantifier_depth

__all__ = [
    "And", "App", "Bot", "Eq", "EvalResult", "Exists", "Forall", "ForceResult", "Forcer", "Imp", "Not", "Or",
    "Pred", "Signature", "Structure", "Top", "Var", "as_presheaf_structure", "eval_finset", "force",
    "free_vars", "parse_formula", "quantifier_depth", "restrict_env", "tokenize", "tuple_product",
]
