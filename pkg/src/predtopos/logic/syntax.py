"""Abstract syntax for typed first-order intuitionistic formulas."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple["Term", ...] = ()

    def __str__(self):
        if not self.args:
            return self.fn
        return f"{self.fn}({', '.join(map(str, self.args))})"


Term = Union[Var, App]


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Bot:
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __str__(self):
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple[Term, ...] = ()

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self):
        return f"~{self.body}"


@dataclass(frozen=True)
class Forall:
    var: str
    sort: str
    body: "Formula"

    def __str__(self):
        return f"(forall {self.var}:{self.sort}. {self.body})"


@dataclass(frozen=True)
class Exists:
    var: str
    sort: str
    body: "Formula"

    def __str__(self):
        return f"(exists {self.var}:{self.sort}. {self.body})"


Formula = Union[Top, Bot, Eq, Pred, And, Or, Imp, Not, Forall, Exists]


def free_vars(phi) -> set[str]:
    if isinstance(phi, Var):
        return {phi.name}
    if isinstance(phi, (App, Pred)):
        return set().union(*(free_vars(a) for a in phi.args)) if phi.args else set()
    if isinstance(phi, Eq):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (And, Or, Imp)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (Forall, Exists)):
        return free_vars(phi.body) - {phi.var}
    return set()


def quantifier_depth(phi) -> int:
    if isinstance(phi, (And, Or, Imp)):
        return max(quantifier_depth(phi.left), quantifier_depth(phi.right))
    if isinstance(phi, Not):
        return quantifier_depth(phi.body)
    if isinstance(phi, (Forall, Exists)):
        return 1 + quantifier_depth(phi.body)
    return 0
