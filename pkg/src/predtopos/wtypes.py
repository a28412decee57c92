"""Polynomial functors, W-types, ranks of trees, dependent polynomial functors and free algebras."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping

from .errors import SignatureMismatch
from .finset import FinSetMap, FinSetObj


@dataclass(frozen=True)
class WTree:
    """``sup_label(children)``; ``children`` pairs each fibre element with a subtree, in fibre order."""

    label: Hashable
    children: tuple = ()

    def child(self, b) -> "WTree":
        for key, t in self.children:
            if key == b:
                return t
        raise KeyError(b)

    def height(self) -> int:
        """Leaves have height 1, so level ``n`` of the W-type chain holds the trees of height ``<= n``."""
        return 1 + max((t.height() for _, t in self.children), default=0)

    def size(self) -> int:
        return 1 + sum(t.size() for _, t in self.children)

    def __str__(self):
        if not self.children:
            return str(self.label)
        return f"{self.label}({', '.join(str(t) for _, t in self.children)})"


class PolyFunctor:
    """``P_f(X) = Σ_{a ∈ A} X^{B_a}`` for ``f: B -> A``."""

    def __init__(self, f: FinSetMap):
        self.f = f
        self.fibres = f.fibres()

    @classmethod
    def from_arities(cls, arities: Mapping[Hashable, int]) -> "PolyFunctor":
        """Signature with operation ``a`` of arity ``n``: ``B_a = {0, ..., n-1}``."""
        return cls.from_fibres({a: tuple(range(n)) for a, n in arities.items()})

    @classmethod
    def from_fibres(cls, fibres: Mapping[Hashable, Iterable]) -> "PolyFunctor":
        A = FinSetObj(tuple(fibres))
        B = FinSetObj(tuple((a, b) for a, bs in fibres.items() for b in bs))
        pf = cls(FinSetMap(B, A, lambda e: e[0], check=False))
        # children are keyed by the bare position ``b`` rather than ``(a, b)``
        pf.fibres = {a: tuple(bs) for a, bs in fibres.items()}
        return pf

    @property
    def labels(self) -> tuple:
        return self.f.cod.carrier

    def arity(self, a) -> list:
        return self.fibres[a]

    def __repr__(self):
        return "PolyFunctor(" + ", ".join(f"{a}/{len(b)}" for a, b in self.fibres.items()) + ")"


def apply_poly(pf: PolyFunctor, X: FinSetObj) -> FinSetObj:
    """Elements ``(a, images)`` with ``images`` a tuple indexed by the fibre ``B_a``."""
    out = []
    for a in pf.labels:
        for images in itertools.product(X.carrier, repeat=len(pf.fibres[a])):
            out.append((a, images))
    return FinSetObj(tuple(out))


def apply_poly_map(pf: PolyFunctor, h: FinSetMap) -> FinSetMap:
    """Functorial action ``P_f(h)``."""
    src, dst = apply_poly(pf, h.dom), apply_poly(pf, h.cod)
    return FinSetMap(src, dst, lambda e: (e[0], tuple(h(x) for x in e[1])), check=False)


def sup(pf: PolyFunctor, a, images: tuple) -> WTree:
    return WTree(a, tuple(zip(pf.fibres[a], images)))


# ---------------------------------------------------------------- W-types


@dataclass
class WResult:
    kind: str  # "empty", "finite" or "infinite-truncated"
    levels: list  # W_0, W_1, ..., W_cap as FinSetObj of WTree
    pf: PolyFunctor = field(repr=False)

    @property
    def sizes(self) -> list[int]:
        return [len(L) for L in self.levels]

    @property
    def carrier(self) -> FinSetObj:
        """``W`` itself when finite, otherwise the deepest computed level."""
        return self.levels[-1]

    def sup_map(self) -> FinSetMap:
        """Structure map ``P_f(W_top) -> W_top+1`` (an iso ``P_f(W) -> W`` when finite)."""
        top = self.levels[-1]
        dom = apply_poly(self.pf, top)
        nxt = FinSetObj(tuple(sup(self.pf, a, imgs) for a, imgs in dom.carrier))
        return FinSetMap(dom, nxt, lambda e: sup(self.pf, e[0], e[1]), check=False)


def w_levels(pf: PolyFunctor, cap: int) -> list[FinSetObj]:
    """``W_0 = ∅`` and ``W_{n+1} = {sup_a(t) | (a, t) ∈ P_f(W_n)}`` for ``n < cap``."""
    levels = [FinSetObj(())]
    for _ in range(cap):
        prev = levels[-1]
        levels.append(FinSetObj(tuple(sup(pf, a, imgs) for a, imgs in apply_poly(pf, prev).carrier)))
    return levels


def classify(pf: PolyFunctor) -> str:
    """Exact classification of ``W(f)``.

    No leaf constructor means no well-founded tree; only leaf constructors
    means ``W ≅ A``; otherwise grafting leaves under a constructor with a
    nonempty fibre produces trees of every height.
    """
    sizes = [len(b) for b in pf.fibres.values()]
    if all(n > 0 for n in sizes):
        return "empty"
    if all(n == 0 for n in sizes):
        return "finite"
    return "infinite-truncated"


def wtype(pf: PolyFunctor, cap: int) -> WResult:
    """The W-type of ``pf``: exact when empty or finite, otherwise truncated at height ``cap``."""
    if cap < 0:
        raise ValueError("cap must be non-negative")
    kind = classify(pf)
    if kind == "infinite-truncated":
        return WResult(kind, w_levels(pf, cap), pf)
    # finite or empty: the chain is stable from level 1 on
    return WResult(kind, w_levels(pf, max(cap, 1) if kind == "finite" else max(cap, 0)), pf)


# ---------------------------------------------------------------- folds


def _structure(pf: PolyFunctor, s):
    if isinstance(s, FinSetMap):
        return lambda a, vals: s((a, vals))
    return s


def wfold(pf: PolyFunctor, algebra: tuple, tree: WTree):
    """Value of the unique algebra morphism on ``tree``: ``fold(sup_a t) = s(a, fold ∘ t)``.

    ``algebra`` is ``(X, s)`` with ``s`` a map ``P_f(X) -> X`` or a callable
    ``s(a, values)`` where ``values`` is indexed by the fibre ``B_a``.
    """
    _, s = algebra
    s = _structure(pf, s)
    memo: dict = {}

    def go(t: WTree):
        hit = memo.get(t)
        if hit is not None:
            return hit
        if t.label not in pf.fibres:
            raise SignatureMismatch(f"unknown constructor {t.label!r}", witness=t.label)
        keys = tuple(b for b, _ in t.children)
        if keys != tuple(pf.fibres[t.label]):
            raise SignatureMismatch(f"children of {t.label!r} are not indexed by its fibre", witness=t)
        val = s(t.label, tuple(go(c) for _, c in t.children))
        memo[t] = val
        return val

    return go(tree)


def morphisms_from_w(pf: PolyFunctor, W: FinSetObj, algebra: tuple) -> list[dict]:
    """Every function ``W -> X`` commuting with the structure maps (exhaustive)."""
    X, s = algebra
    s = _structure(pf, s)
    found = []
    for images in itertools.product(X.carrier, repeat=len(W)):
        h = dict(zip(W.carrier, images))
        if all(h[t] == s(t.label, tuple(h[c] for _, c in t.children)) for t in W.carrier):
            found.append(h)
    return found


# ---------------------------------------------------------------- ranks


def rank_signature(family: list[FinSetMap]) -> PolyFunctor:
    """``A = {0, 1} + I`` with ``B_0 = ∅``, ``B_1 = {0}`` and ``B_i`` the domain of the ``i``-th surjection.

    Labels are ``0``, ``1`` and ``("sup", i)``.
    """
    fibres: dict = {0: (), 1: (0,)}
    for i, p in enumerate(family):
        fibres[("sup", i)] = p.dom.carrier
    return PolyFunctor.from_fibres(fibres)


def rank(tree: WTree) -> int:
    """``m(sup_0) = 0``, ``m(sup_1 t) = m(t 0) + 1``, ``m(sup_i t) = max_b m(t b)`` (0 when ``B_i = ∅``)."""
    memo: dict = {}
    stack = [(tree, False)]
    while stack:
        t, ready = stack.pop()
        if t in memo:
            continue
        if not ready:
            stack.append((t, True))
            stack.extend((c, False) for _, c in t.children if c not in memo)
            continue
        if t.label == 0:
            if t.children:
                raise SignatureMismatch("constructor 0 takes no children", witness=t)
            memo[t] = 0
        elif t.label == 1:
            if len(t.children) != 1 or t.children[0][0] != 0:
                raise SignatureMismatch("constructor 1 takes exactly the child 0", witness=t)
            memo[t] = memo[t.children[0][1]] + 1
        elif isinstance(t.label, tuple) and t.label[:1] == ("sup",):
            memo[t] = max((memo[c] for _, c in t.children), default=0)
        else:
            raise SignatureMismatch(f"{t.label!r} is not a rank constructor", witness=t.label)
    return memo[tree]


@dataclass
class RankClosureReport:
    depth: int
    ranks_by_level: list  # sorted attained ranks among trees of height <= n
    representatives: dict  # rank -> a smallest tree attaining it
    zero_attained: bool
    successor_closed: bool
    sup_closed: bool
    counterexample: Any = None

    @property
    def ok(self) -> bool:
        return self.zero_attained and self.successor_closed and self.sup_closed


def rank_closure_demo(X: FinSetObj, family: list[FinSetMap], depth: int) -> RankClosureReport:
    """Ranks attained by trees of height ``<= depth`` and the three closure properties.

    Trees are enumerated up to equal rank: at each level one representative per
    attained rank is kept, which suffices because the rank of ``sup_a(t)``
    depends only on the ranks of the subtrees.  Closure is checked within the
    depth: ``0`` occurs; ``r`` at level ``n`` gives ``r + 1`` at level
    ``n + 1``; every ``X``-indexed choice of ranks at level ``n`` has its
    maximum realised by some ``sup_i(t)`` at level ``n + 1`` whose subtree
    ranks are ``α ∘ p_i``.
    """
    for i, p in enumerate(family):
        if p.cod != X or not p.is_surjective():
            raise SignatureMismatch(f"family member {i} is not a surjection onto X", witness=i)
    pf = rank_signature(family)
    reps: list[dict[int, WTree]] = [{}]
    for _ in range(depth):
        prev = reps[-1]
        cur: dict[int, WTree] = dict(prev)
        options = sorted(prev.items())
        for a in pf.labels:
            fib = pf.fibres[a]
            for combo in itertools.product(options, repeat=len(fib)):
                t = WTree(a, tuple((b, tr) for b, (_, tr) in zip(fib, combo)))
                r = rank(t)
                if r not in cur or t.size() < cur[r].size():
                    cur[r] = t
        reps.append(cur)
    levels = [sorted(level) for level in reps]
    zero = depth >= 1 and 0 in reps[min(1, depth)]
    succ = all(r + 1 in reps[n + 1] for n in range(depth) for r in reps[n])
    sup_ok, bad = True, None
    for n in range(depth):
        attained = sorted(reps[n])
        for alpha in itertools.product(attained, repeat=len(X)):
            choice = dict(zip(X.carrier, alpha))
            target = max(alpha, default=0)
            ok = any(
                max((choice[p(b)] for b in p.dom.carrier), default=0) == target
                for p in family
            )
            if not ok:
                sup_ok, bad = False, {"level": n, "ranks": choice}
                break
        if not sup_ok:
            break
    if sup_ok and depth >= 1 and not family:
        sup_ok, bad = False, {"level": 0, "ranks": {}, "reason": "empty family"}
    representatives = {r: t for r, t in reps[-1].items()}
    return RankClosureReport(depth, levels, representatives, zero, succ, sup_ok, bad)


# ---------------------------------------------------------------- dependent polynomial functors


@dataclass
class DepPolyFunctor:
    """``(FX)_c = 1 + Σ_{U ∈ cons[c]} Π_{i} X_{arity_U(i)}``.

    ``constructors[c]`` lists ``(label, arity)`` with ``arity`` a tuple of
    indices; the ``1`` summand (element ``"*"``) is present when ``unit``.
    """

    indices: tuple
    constructors: dict
    unit: bool = True

    def __post_init__(self):
        self.indices = tuple(self.indices)
        for c, cons in self.constructors.items():
            if c not in self.indices:
                raise SignatureMismatch(f"constructors for unknown index {c!r}", witness=c)
            for label, arity in cons:
                for j in arity:
                    if j not in self.indices:
                        raise SignatureMismatch(f"{label!r} refers to unknown index {j!r}", witness=(label, j))

    def apply(self, X: Mapping) -> dict:
        out = {}
        for c in self.indices:
            elems = ["*"] if self.unit else []
            for label, arity in self.constructors.get(c, ()):
                for t in itertools.product(*(X[j] for j in arity)):
                    elems.append((label, t))
            out[c] = tuple(elems)
        return out

    def predicted_size(self, sizes: Mapping) -> dict:
        """Cardinality of ``F`` applied to a family of the given sizes."""
        out = {}
        for c in self.indices:
            n = 1 if self.unit else 0
            for _, arity in self.constructors.get(c, ()):
                prod = 1
                for j in arity:
                    prod *= sizes[j]
                n += prod
            out[c] = n
        return out


@dataclass
class DepFixpoint:
    levels: list  # list of dict index -> tuple of elements
    stabilized: bool
    functor: DepPolyFunctor = field(repr=False)

    @property
    def sizes(self) -> list[dict]:
        return [{c: len(v) for c, v in L.items()} for L in self.levels]

    def equation_holds(self) -> bool:
        """``|X_{n+1}(c)| = 1 + Σ_U Π_i |X_n(dom)|`` at every computed level."""
        return all(
            self.functor.predicted_size(self.sizes[n]) == self.sizes[n + 1]
            for n in range(len(self.levels) - 1)
        )

    def structure_map(self, c):
        """The algebra map at the top level: elements of ``F(X_top)(c)`` are already elements of ``X_top+1(c)``."""
        return self.functor.apply(self.levels[-1])[c]


def dep_fixpoint(F: DepPolyFunctor, cap: int) -> DepFixpoint:
    """Least-fixed-point chain ``X_0 = ∅``, ``X_{n+1} = F(X_n)`` up to level ``cap`` or stabilisation."""
    if cap < 0:
        raise ValueError("cap must be non-negative")
    levels = [{c: () for c in F.indices}]
    stable = False
    for _ in range(cap):
        nxt = F.apply(levels[-1])
        if nxt == levels[-1]:
            stable = True
            break
        levels.append(nxt)
    if not stable and levels and F.apply(levels[-1]) == levels[-1]:
        stable = True
    return DepFixpoint(levels, stable, F)


# ---------------------------------------------------------------- free algebras


Term = tuple  # (symbol, children) with generators as ("gen", g)


def _term_height(t: Term) -> int:
    return 1 + max((_term_height(c) for c in t[1]), default=-1) if t[1] else 0


def term_str(t: Term) -> str:
    sym, kids = t
    name = sym[1] if isinstance(sym, tuple) else sym
    if not kids:
        return str(name)
    return f"{name}({', '.join(term_str(k) for k in kids)})"


def enumerate_terms(signature: Mapping[str, int], generators: FinSetObj, cap: int) -> list[Term]:
    """Terms of height ``<= cap``; generators and constants have height 0."""
    pf = PolyFunctor.from_arities({**{("gen", g): 0 for g in generators.carrier}, **dict(signature)})
    levels = w_levels(pf, cap + 1)

    def conv(t: WTree) -> Term:
        return (t.label, tuple(conv(c) for _, c in t.children))

    return [conv(t) for t in levels[-1].carrier]


def _match(pattern, term, subst) -> bool:
    if isinstance(pattern, str):
        if pattern in subst:
            return subst[pattern] == term
        subst[pattern] = term
        return True
    sym, kids = pattern
    if term[0] != sym or len(term[1]) != len(kids):
        return False
    return all(_match(p, t, subst) for p, t in zip(kids, term[1]))


def _instantiate(pattern, subst):
    if isinstance(pattern, str):
        return subst[pattern]
    sym, kids = pattern
    return (sym, tuple(_instantiate(k, subst) for k in kids))


def parse_pattern(text: str):
    """``m(m(x, y), z)`` style patterns; bare names are variables unless followed by ``()``."""
    text = text.replace(" ", "")
    pos = 0

    def parse():
        nonlocal pos
        start = pos
        while pos < len(text) and (text[pos].isalnum() or text[pos] in "_'"):
            pos += 1
        name = text[start:pos]
        if pos < len(text) and text[pos] == "(":
            pos += 1
            kids = []
            if text[pos] == ")":
                pos += 1
                return (name, ())
            while True:
                kids.append(parse())
                if text[pos] == ",":
                    pos += 1
                    continue
                pos += 1  # ')'
                return (name, tuple(kids))
        return name

    return parse()


@dataclass
class FreeAlgebra:
    terms: list
    classes: list  # list of lists of terms (singletons without equations)
    approximate: bool
    universal: Any = None

    def class_of(self, t: Term) -> int:
        for i, cl in enumerate(self.classes):
            if t in cl:
                return i
        raise KeyError(t)


@dataclass
class UniversalReport:
    algebras_checked: int
    ok: bool
    failure: Any = None


def _congruence_classes(terms: list[Term], equations: list[tuple]) -> list[list[Term]]:
    index = {t: i for i, t in enumerate(terms)}
    parent = list(range(len(terms)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
            return True
        return False

    # instances of the equations whose sides both lie within the term set
    for lhs, rhs in equations:
        for t in terms:
            for side, other in ((lhs, rhs), (rhs, lhs)):
                subst: dict = {}
                if _match(side, t, subst):
                    try:
                        u = _instantiate(other, subst)
                    except KeyError:
                        continue
                    if u in index:
                        union(index[t], index[u])
    by_sym: dict = {}
    for t in terms:
        if t[1]:
            by_sym.setdefault((t[0], len(t[1])), []).append(t)
    changed = True
    while changed:
        changed = False
        for group in by_sym.values():
            sig: dict = {}
            for t in group:
                key = tuple(find(index[c]) for c in t[1])
                if key in sig:
                    if union(index[t], index[sig[key]]):
                        changed = True
                else:
                    sig[key] = t
    classes: dict = {}
    for t in terms:
        classes.setdefault(find(index[t]), []).append(t)
    return [classes[k] for k in sorted(classes)]


def _eval(t: Term, ops: Mapping, val: Mapping):
    sym, kids = t
    if isinstance(sym, tuple) and sym[0] == "gen":
        return val[sym[1]]
    return ops[sym](*(_eval(k, ops, val) for k in kids))


def _algebras(signature: Mapping[str, int], size: int):
    X = range(size)
    names = list(signature)
    tables = []
    for name in names:
        n = signature[name]
        args = list(itertools.product(X, repeat=n))
        tables.append([(name, args, imgs) for imgs in itertools.product(X, repeat=len(args))])
    for combo in itertools.product(*tables):
        ops = {}
        for name, args, imgs in combo:
            table = dict(zip(args, imgs))
            ops[name] = (lambda table: (lambda *a: table[a]))(table)
        yield ops


def _satisfies(ops, size, equations) -> bool:
    for lhs, rhs in equations:
        vars_ = sorted(_pattern_vars(lhs) | _pattern_vars(rhs))
        for vals in itertools.product(range(size), repeat=len(vars_)):
            env = dict(zip(vars_, vals))
            if _eval_pattern(lhs, ops, env) != _eval_pattern(rhs, ops, env):
                return False
    return True


def _pattern_vars(p) -> set:
    if isinstance(p, str):
        return {p}
    return set().union(*(_pattern_vars(k) for k in p[1])) if p[1] else set()


def _eval_pattern(p, ops, env):
    if isinstance(p, str):
        return env[p]
    return ops[p[0]](*(_eval_pattern(k, ops, env) for k in p[1]))


def free_algebra(
    signature: Mapping[str, int],
    generators: FinSetObj,
    equations: Iterable | None = None,
    cap: int = 3,
    check_universal: bool = True,
    algebra_bound: int = 3,
) -> FreeAlgebra:
    """Term algebra (the W-type of the signature plus generator constants) truncated at height ``cap``.

    With equations the terms are quotiented by congruence closure computed on
    the truncated term set, which can miss identifications that need taller
    terms, so the result is flagged approximate.  The universal property is
    checked against every algebra of size ``<= algebra_bound`` satisfying the
    equations and every assignment of the generators: the extension must be
    constant on each class.  Equations are pairs of patterns (strings or
    parsed) over operation names and variables.
    """
    eqs = [tuple(parse_pattern(s) if isinstance(s, str) else s for s in e) for e in (equations or [])]
    terms = enumerate_terms(signature, generators, cap)
    classes = _congruence_classes(terms, eqs) if eqs else [[t] for t in terms]
    result = FreeAlgebra(terms, classes, approximate=bool(eqs))
    if check_universal:
        checked = 0
        for size in range(1, algebra_bound + 1):
            for ops in _algebras(signature, size):
                if eqs and not _satisfies(ops, size, eqs):
                    continue
                for vals in itertools.product(range(size), repeat=len(generators)):
                    val = dict(zip(generators.carrier, vals))
                    checked += 1
                    for cl in classes:
                        images = {_eval(t, ops, val) for t in cl}
                        if len(images) != 1:
                            result.universal = UniversalReport(checked, False, {"class": cl, "size": size})
                            return result
        result.universal = UniversalReport(checked, True)
    return result
