"""Structures and the two evaluators: Tarski semantics over finite sets and
Kripke–Joyal forcing over presheaves.

Forcing clauses at a stage ``c`` (with an environment of elements at ``c``)::

    c ⊩ φ ∧ ψ      iff  c ⊩ φ and c ⊩ ψ
    c ⊩ φ ∨ ψ      iff  c ⊩ φ or c ⊩ ψ                 (local witness)
    c ⊩ ∃x:X. φ    iff  c ⊩ φ[x := p] for some p ∈ X(c)  (local witness)
    c ⊩ φ → ψ      iff  for all f: d → c, d ⊩ φ·f implies d ⊩ ψ·f
    c ⊩ ∀x:X. φ    iff  for all f: d → c and p ∈ X(d), d ⊩ (φ·f)[x := p]

No covers are needed for ∨ and ∃ because every presheaf topology here is
the trivial one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Mapping

from ..core import catalog
from ..core.presheaf import NatTrans, Presheaf
from ..core.psh import FinPsh
from ..errors import ShapeMismatch, SortError
from ..finset import FinSet, FinSetMap, FinSetObj
from .parse import Signature
from .syntax import And, App, Bot, Eq, Exists, Forall, Imp, Not, Or, Pred, Top, Var


def tuple_product(ambient, objs):
    """Product of ``objs`` whose elements are flat tuples (one entry per factor)."""
    objs = list(objs)
    if isinstance(ambient, FinSet):
        return FinSetObj(tuple(itertools.product(*(o.carrier for o in objs))))
    C = ambient.base
    stalks = {x: tuple(itertools.product(*(o.stalks[x] for o in objs))) for x in C.objects}
    action = {}
    for f, (y, x) in C.arrows.items():
        for t in stalks[x]:
            action[(f, t)] = tuple(o.act(p, f) for o, p in zip(objs, t))
    return Presheaf(C, stalks, action, check=False)


@dataclass
class Structure:
    """Interpretation of a signature in an ambient.

    ``functions[name] = (arg_sorts, result_sort, map)``.  The domain of ``map``
    is the terminal object for constants, the sort itself for unary symbols and
    :func:`tuple_product` of the argument sorts otherwise.

    ``predicates[name] = (arg_sorts, interp)`` where ``interp`` is a mono into
    the (product of the) argument sorts, or a plain collection of elements
    (FinSet) / a mapping ``stage -> elements`` (presheaves).
    """

    ambient: Any
    sorts: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=dict)

    def __post_init__(self):
        self._members: dict = {}
        for name, (args, res, m) in self.functions.items():
            self._check_function(name, tuple(args), res, m)
        for name, (args, interp) in self.predicates.items():
            self._members[name] = self._normalize_predicate(name, tuple(args), interp)

    @property
    def is_finset(self) -> bool:
        return isinstance(self.ambient, FinSet)

    def signature(self) -> Signature:
        return Signature(
            frozenset(self.sorts),
            {n: (tuple(a), r) for n, (a, r, _) in self.functions.items()},
            {n: tuple(a) for n, (a, _) in self.predicates.items()},
        )

    def stages(self) -> tuple:
        return ("*",) if self.is_finset else self.ambient.base.objects

    def elements(self, sort: str, stage) -> tuple:
        if sort not in self.sorts:
            raise SortError(f"unknown sort {sort!r}", var=sort)
        obj = self.sorts[sort]
        return obj.carrier if self.is_finset else obj.stalks[stage]

    def restrict(self, sort: str, p, f: str):
        if self.is_finset:
            return p
        return self.sorts[sort].act(p, f)

    def _domain(self, args):
        if not args:
            return self.ambient.terminal()
        if len(args) == 1:
            return self.sorts[args[0]]
        return tuple_product(self.ambient, [self.sorts[a] for a in args])

    def _check_function(self, name, args, res, m):
        for s in args + (res,):
            if s not in self.sorts:
                raise SortError(f"function {name} uses unknown sort {s!r}", var=name)
        dom = self._domain(args)
        if self.is_finset:
            ok = m.cod == self.sorts[res] and (len(m.dom) == 1 if not args else set(m.dom.carrier) == set(dom.carrier))
        else:
            ok = m.cod == self.sorts[res] and (
                all(len(m.dom.stalks[x]) == 1 for x in m.base.objects) if not args else m.dom.stalks == dom.stalks
            )
        if not ok:
            raise ShapeMismatch(f"interpretation of {name} does not match its sorts", witness=name)

    def _normalize_predicate(self, name, args, interp):
        for s in args:
            if s not in self.sorts:
                raise SortError(f"predicate {name} uses unknown sort {s!r}", var=name)
        # nullary predicates are stored as the set {()} (true) or {} (false)
        norm = (lambda vals: frozenset(() for _ in vals)) if not args else frozenset
        if isinstance(interp, FinSetMap):
            if not interp.is_injective():
                raise ShapeMismatch(f"predicate {name} is not a mono", witness=name)
            return {"*": norm(interp.images)}
        if isinstance(interp, NatTrans):
            if not interp.is_injective():
                raise ShapeMismatch(f"predicate {name} is not a mono", witness=name)
            return {x: norm(interp.comps[x].values()) for x in interp.base.objects}
        if self.is_finset:
            return {"*": frozenset(interp)}
        members = {x: frozenset(interp.get(x, ())) for x in self.stages()}
        dom = self._domain(args)
        for f, (y, x) in self.ambient.base.arrows.items():
            for v in members[x]:
                img = dom.act(v, f) if args else v
                if img not in members[y]:
                    raise ShapeMismatch(f"predicate {name} is not closed under restriction", witness=(v, f))
        return members

    # -- evaluation helpers shared by both semantics
    def apply(self, name: str, stage, values: tuple):
        args, _, m = self.functions[name]
        if self.is_finset:
            if not args:
                return m.images[0]
            return m(values[0] if len(args) == 1 else tuple(values))
        comp = m.comps[stage]
        if not args:
            return next(iter(comp.values()))
        return comp[values[0] if len(args) == 1 else tuple(values)]

    def holds(self, name: str, stage, values: tuple) -> bool:
        args = self.predicates[name][0]
        key = values[0] if len(args) == 1 else tuple(values)
        return key in self._members[name][stage]


def _term(S: Structure, t, stage, env):
    if isinstance(t, Var):
        try:
            return env[t.name][1]
        except KeyError:
            raise SortError(f"variable {t.name!r} is not bound", var=t.name) from None
    return S.apply(t.fn, stage, tuple(_term(S, a, stage, env) for a in t.args))


# ---------------------------------------------------------------- Tarski semantics


@dataclass
class Witness:
    kind: str  # "witness" for a true ∃, "counterexample" for a false ∀
    formula: str
    env: dict
    var: str
    value: Any


@dataclass
class EvalResult:
    value: bool
    witnesses: list = field(default_factory=list)

    def __bool__(self):
        return self.value


def eval_finset(phi, S: Structure, env: Mapping | None = None) -> EvalResult:
    """Classical truth in a FinSet structure, with witnesses and counterexamples.

    ``env`` maps free variables to ``(sort, value)`` pairs.
    """
    if not S.is_finset:
        raise ShapeMismatch("eval_finset needs a structure over finite sets")
    log: list[Witness] = []

    def ev(phi, env) -> bool:
        if isinstance(phi, Top):
            return True
        if isinstance(phi, Bot):
            return False
        if isinstance(phi, Eq):
            return _term(S, phi.left, "*", env) == _term(S, phi.right, "*", env)
        if isinstance(phi, Pred):
            return S.holds(phi.name, "*", tuple(_term(S, a, "*", env) for a in phi.args))
        if isinstance(phi, And):
            return ev(phi.left, env) and ev(phi.right, env)
        if isinstance(phi, Or):
            return ev(phi.left, env) or ev(phi.right, env)
        if isinstance(phi, Imp):
            return (not ev(phi.left, env)) or ev(phi.right, env)
        if isinstance(phi, Not):
            return not ev(phi.body, env)
        if isinstance(phi, (Forall, Exists)):
            want = isinstance(phi, Exists)
            for p in S.elements(phi.sort, "*"):
                inner = dict(env)
                inner[phi.var] = (phi.sort, p)
                if ev(phi.body, inner) == want:
                    kind = "witness" if want else "counterexample"
                    log.append(Witness(kind, str(phi), {k: v[1] for k, v in env.items()}, phi.var, p))
                    return want
            return not want
        raise TypeError(f"not a formula: {phi!r}")

    value = ev(phi, dict(env or {}))
    return EvalResult(value, log)


# ---------------------------------------------------------------- forcing


@dataclass
class TraceEntry:
    stage: str
    formula: str
    env: dict
    value: bool


@dataclass
class ForceResult:
    value: bool
    trace: list = field(default_factory=list)

    def __bool__(self):
        return self.value


def restrict_env(S: Structure, env: Mapping, f: str) -> dict:
    """Restrict every variable of ``env`` along the arrow ``f``."""
    return {v: (s, S.restrict(s, p, f)) for v, (s, p) in env.items()}


class Forcer:
    """Memoised Kripke–Joyal forcing for one structure."""

    def __init__(self, S: Structure, trace_limit: int = 2000):
        if S.is_finset:
            S = as_presheaf_structure(S)
        self.S = S
        self.C = S.ambient.base
        self.memo: dict = {}
        self.trace: list[TraceEntry] = []
        self.trace_limit = trace_limit

    def force(self, phi, stage: str, env: Mapping) -> bool:
        key = (phi, stage, frozenset(env.items()))
        hit = self.memo.get(key)
        if hit is None:
            hit = self._force(phi, stage, env)
            self.memo[key] = hit
            if isinstance(phi, (Forall, Exists, Imp, Not)) and len(self.trace) < self.trace_limit:
                self.trace.append(TraceEntry(stage, str(phi), {k: v[1] for k, v in env.items()}, hit))
        return hit

    def _force(self, phi, c, env) -> bool:
        S, C = self.S, self.C
        if isinstance(phi, Top):
            return True
        if isinstance(phi, Bot):
            return False
        if isinstance(phi, Eq):
            return _term(S, phi.left, c, env) == _term(S, phi.right, c, env)
        if isinstance(phi, Pred):
            return S.holds(phi.name, c, tuple(_term(S, a, c, env) for a in phi.args))
        if isinstance(phi, And):
            return self.force(phi.left, c, env) and self.force(phi.right, c, env)
        if isinstance(phi, Or):
            return self.force(phi.left, c, env) or self.force(phi.right, c, env)
        if isinstance(phi, Exists):
            return any(self.force(phi.body, c, {**env, phi.var: (phi.sort, p)}) for p in S.elements(phi.sort, c))
        if isinstance(phi, (Imp, Not)):
            left, right = (phi.left, phi.right) if isinstance(phi, Imp) else (phi.body, Bot())
            for f in C.arrows_into(c):
                d = C.dom(f)
                e = restrict_env(S, env, f)
                if self.force(left, d, e) and not self.force(right, d, e):
                    return False
            return True
        if isinstance(phi, Forall):
            for f in C.arrows_into(c):
                d = C.dom(f)
                e = restrict_env(S, env, f)
                for p in S.elements(phi.sort, d):
                    if not self.force(phi.body, d, {**e, phi.var: (phi.sort, p)}):
                        return False
            return True
        raise TypeError(f"not a formula: {phi!r}")


def force(phi, S: Structure, stage: str = "*", env: Mapping | None = None) -> ForceResult:
    """Whether ``stage ⊩ phi``, with a trace of the quantifier and implication nodes visited.

    FinSet structures are forced over the one-object category.
    """
    F = Forcer(S)
    value = F.force(phi, stage, dict(env or {}))
    return ForceResult(value, F.trace)


def as_presheaf_structure(S: Structure) -> Structure:
    """A FinSet structure viewed as presheaves on the one-object category."""
    T = catalog.terminal()
    amb = FinPsh(T)

    def psh(X: FinSetObj) -> Presheaf:
        return Presheaf(T, {"*": X.carrier}, {}, check=False)

    sorts = {n: psh(X) for n, X in S.sorts.items()}
    functions = {}
    for name, (args, res, m) in S.functions.items():
        if not args:
            dom = amb.terminal()
            comps = {"*": {"*": m.images[0]}}
        else:
            dom = sorts[args[0]] if len(args) == 1 else tuple_product(amb, [sorts[a] for a in args])
            comps = {"*": {p: m(p) for p in dom.stalks["*"]}}
        functions[name] = (args, res, NatTrans(dom, sorts[res], comps, check=False))
    predicates = {n: (args, {"*": S._members[n]["*"]}) for n, (args, _) in S.predicates.items()}
    return Structure(amb, sorts, functions, predicates)
