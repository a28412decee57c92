"""Exact completions: ex/lex over any finite-limit ambient, ex/reg over a regular one.

Ex/lex objects are pseudo-equivalence relations ``r0, r1: R ⇉ X`` with chosen
reflexivity, symmetry and transitivity maps; a morphism is a tracker
``f: X -> X'`` admitting a map ``R -> R'`` over ``f × f``, taken modulo the
codomain relation.  Ex/reg objects are equivalence relations in a regular
ambient and morphisms are functional relations.  Equality of completion
objects is never tested, only isomorphism.

All verdicts about the completions themselves are checked on a finite sample,
so reports say "consistent with" rather than "is".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .core.ambient import Ambient
from .core.presheaf import NatTrans, Presheaf, canonical_cover, product as psh_product
from .core.psh import FinPsh
from .errors import AmbientMismatch, HypothesisFailed, NotEquivalenceRelation, ShapeMismatch
from .finset import FinSet, FinSetMap, FinSetObj


def _same_ambient(a: Ambient, b: Ambient) -> bool:
    return a is b or a == b or (type(a) is type(b) and not isinstance(a, FinPsh))


def _lift_pair(amb: Ambient, a, b, r0, r1):
    """A map ``k`` with ``r0∘k = a`` and ``r1∘k = b``, or None."""
    P, _, _ = amb.product(r0.cod, r0.cod)
    return amb.find_lift(amb.pair(a, b, P), amb.pair(r0, r1, P))


# ---------------------------------------------------------------- ex/lex


class ExLexObj:
    """A pseudo-equivalence relation ``(r0, r1): R ⇉ X`` with witness maps."""

    def __init__(self, ambient: Ambient, X, R, r0, r1, refl=None, sym=None, trans=None, check: bool = True, name: str = ""):
        self.ambient, self.X, self.R, self.r0, self.r1 = ambient, X, R, r0, r1
        self.name = name
        amb = ambient
        if r0.dom != R or r1.dom != R or r0.cod != X or r1.cod != X:
            raise ShapeMismatch("relation legs must be maps R -> X")
        self.refl = refl if refl is not None else _lift_pair(amb, amb.identity(X), amb.identity(X), r0, r1)
        if self.refl is None:
            raise NotEquivalenceRelation("no reflexivity witness", witness="reflexivity")
        self.sym = sym if sym is not None else _lift_pair(amb, r1, r0, r0, r1)
        if self.sym is None:
            raise NotEquivalenceRelation("no symmetry witness", witness="symmetry")
        T, t0, t1 = amb.pullback(r1, r0)
        self._comp = (T, t0, t1)
        self.trans = trans if trans is not None else _lift_pair(amb, amb.compose(r0, t0), amb.compose(r1, t1), r0, r1)
        if self.trans is None:
            raise NotEquivalenceRelation("no transitivity witness", witness="transitivity")
        if check:
            self.check_witnesses()

    def check_witnesses(self) -> None:
        amb, r0, r1 = self.ambient, self.r0, self.r1
        idX = amb.identity(self.X)
        T, t0, t1 = self._comp
        eqs = {
            "reflexivity": amb.compose(r0, self.refl) == idX and amb.compose(r1, self.refl) == idX,
            "symmetry": amb.compose(r0, self.sym) == r1 and amb.compose(r1, self.sym) == r0,
            "transitivity": amb.compose(r0, self.trans) == amb.compose(r0, t0)
            and amb.compose(r1, self.trans) == amb.compose(r1, t1),
        }
        for which, ok in eqs.items():
            if not ok:
                raise NotEquivalenceRelation(f"{which} witness fails its equations", witness=which)

    def related(self, a, b) -> bool:
        """Do the maps ``a, b: S -> X`` factor jointly through ``(r0, r1)``?"""
        if isinstance(a, FinSetMap) and isinstance(self.X, FinSetObj):
            E = self.image_pairs()
            return all(p in E for p in zip(a.images, b.images))
        return _lift_pair(self.ambient, a, b, self.r0, self.r1) is not None

    def image_pairs(self) -> frozenset:
        """Over finite sets, the image of ``(r0, r1)``; an equivalence relation on ``X``."""
        E = self.__dict__.get("_image")
        if E is None:
            E = self._image = frozenset(zip(self.r0.images, self.r1.images))
        return E

    def class_index(self) -> dict:
        """Over finite sets, each element's position among the classes of :meth:`image_pairs`."""
        idx = self.__dict__.get("_cls")
        if idx is None:
            idx = {}
            for x in self.X.carrier:
                if x not in idx:
                    n = len(set(idx.values()))
                    for y in self.X.carrier:
                        if (x, y) in self.image_pairs():
                            idx[y] = n
            self._cls = idx
        return idx

    def __repr__(self):
        return f"ExLexObj({self.name or self.X!r})"


class ExLexMap:
    """A tracker with its relation witness; equality is taken modulo the codomain relation."""

    def __init__(self, dom: ExLexObj, cod: ExLexObj, tracker, witness=None):
        self.dom, self.cod, self.tracker = dom, cod, tracker
        amb = dom.ambient
        if witness is None:
            witness = _lift_pair(amb, amb.compose(tracker, dom.r0), amb.compose(tracker, dom.r1), cod.r0, cod.r1)
            if witness is None:
                raise ShapeMismatch("tracker does not respect the relations", witness=tracker)
        self.witness = witness

    def __eq__(self, other):
        return (
            isinstance(other, ExLexMap)
            and self.dom is other.dom
            and self.cod is other.cod
            and self.cod.related(self.tracker, other.tracker)
        )

    __hash__ = None

    def then(self, g: "ExLexMap") -> "ExLexMap":
        amb = self.dom.ambient
        return ExLexMap(self.dom, g.cod, amb.compose(g.tracker, self.tracker), amb.compose(g.witness, self.witness))

    def __repr__(self):
        return f"ExLexMap({self.dom!r} -> {self.cod!r}, {self.tracker!r})"


def discrete(amb: Ambient, X, name: str = "") -> ExLexObj:
    """``y(X)``: the diagonal relation."""
    i = amb.identity(X)
    return ExLexObj(amb, X, X, i, i, refl=i, sym=i, trans=amb.pullback(i, i)[1], name=name or f"y({X!r})")


def total(amb: Ambient, X, name: str = "") -> ExLexObj:
    R, p0, p1 = amb.product(X, X)
    return ExLexObj(amb, X, R, p0, p1, name=name)


def kernel(amb: Ambient, f, name: str = "") -> ExLexObj:
    R, k0, k1 = amb.pullback(f, f)
    return ExLexObj(amb, f.dom, R, k0, k1, name=name)


def relation_from_pairs(X: FinSetObj, pairs: Iterable[tuple], name: str = "") -> ExLexObj:
    """Finite-set pseudo-relation; repeated pairs give a non-monic ``R``."""
    pairs = list(pairs)
    R = FinSetObj(tuple((k, x, y) for k, (x, y) in enumerate(pairs)))
    r0 = FinSetMap(R, X, lambda e: e[1])
    r1 = FinSetMap(R, X, lambda e: e[2])
    return ExLexObj(FinSet(), X, R, r0, r1, name=name)


def _partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _induced(amb: Ambient, S, legs: list) -> tuple:
    """Relation on ``S`` pairing ``σ, σ'`` when every ``(a, A)`` in ``legs`` has ``a σ`` related to ``a σ'`` in ``A``."""
    T, z0, z1 = amb.product(S, S)
    cur, to_pairs = T, amb.identity(T)
    for a, A in legs:
        P, _, _ = amb.product(A.X, A.X)
        lhs = amb.pair(amb.compose(a, amb.compose(z0, to_pairs)), amb.compose(a, amb.compose(z1, to_pairs)), P)
        rhs = amb.pair(A.r0, A.r1, P)
        cur, pr, _ = amb.pullback(lhs, rhs)
        to_pairs = amb.compose(to_pairs, pr)
    return cur, amb.compose(z0, to_pairs), amb.compose(z1, to_pairs)


class ExLex(Ambient):
    """The ex/lex completion of ``base``, computed lazily on demand."""

    regular = True

    def __init__(self, base: Ambient):
        self.base = base
        self.kind = f"exlex({base.kind})"

    def __repr__(self):
        return f"ExLex({self.base!r})"

    def __eq__(self, other):
        return isinstance(other, ExLex) and _same_ambient(self.base, other.base)

    def __hash__(self):
        return hash(("exlex", self.kind))

    def _own(self, *objs):
        for A in objs:
            if not _same_ambient(A.ambient, self.base):
                raise AmbientMismatch(f"{A!r} lives over {A.ambient!r}, not {self.base!r}")

    def y(self, X) -> ExLexObj:
        return discrete(self.base, X)

    def y_map(self, f, dom: ExLexObj | None = None, cod: ExLexObj | None = None) -> ExLexMap:
        return ExLexMap(dom or self.y(f.dom), cod or self.y(f.cod), f, f)

    def hom(self, A: ExLexObj, B: ExLexObj) -> list[ExLexMap]:
        return exlex_hom(A, B)

    def identity(self, A):
        amb = self.base
        return ExLexMap(A, A, amb.identity(A.X), amb.identity(A.R))

    def compose(self, g, f):
        return f.then(g)

    def terminal(self):
        return self.y(self.base.terminal())

    def to_terminal(self, A):
        T = self.terminal()
        return ExLexMap(A, T, self.base.to_terminal(A.X), self.base.to_terminal(A.R))

    def product(self, A, B):
        amb = self.base
        self._own(A, B)
        X, p0, p1 = amb.product(A.X, B.X)
        R, s0, s1 = _induced(amb, X, [(p0, A), (p1, B)])
        P = ExLexObj(amb, X, R, s0, s1, name=f"{A.name}×{B.name}")
        return P, ExLexMap(P, A, p0), ExLexMap(P, B, p1)

    def pullback(self, f: ExLexMap, g: ExLexMap):
        """Carrier ``{(x, γ, y) | γ ∈ R_C, r0 γ = f x, r1 γ = g y}`` with the induced relation."""
        amb = self.base
        C = f.cod
        if g.cod is not C:
            raise ShapeMismatch("pullback of maps with different codomains")
        P1, u0, u1 = amb.pullback(f.tracker, C.r0)
        P, v0, v1 = amb.pullback(amb.compose(C.r1, u1), g.tracker)
        pa, pb = amb.compose(u0, v0), v1
        R, s0, s1 = _induced(amb, P, [(pa, f.dom), (pb, g.dom)])
        obj = ExLexObj(amb, P, R, s0, s1, name="pb")
        return obj, ExLexMap(obj, f.dom, pa), ExLexMap(obj, g.dom, pb)

    def pair(self, u: ExLexMap, v: ExLexMap, P: ExLexObj) -> ExLexMap:
        """Into a product object built by :meth:`product`."""
        return ExLexMap(u.dom, P, self.base.pair(u.tracker, v.tracker, P.X))

    def lifts(self, h, e):
        for k in self.hom(h.dom, e.dom):
            if k.then(e) == h:
                yield k

    def is_cover(self, f: ExLexMap) -> bool:
        """Some ``s: X_B -> X_A`` has ``f∘s`` related to the identity (``y(X_B)`` is projective).

        Such an ``s`` with its relation witness is a lift of the identity
        through ``{(a, ρ) | f a = r0 ρ} -> X_B, (a, ρ) ↦ r1 ρ``.
        """
        amb, B = self.base, f.cod
        P, _, pr = amb.pullback(f.tracker, B.r0)
        return amb.find_lift(amb.identity(B.X), amb.compose(B.r1, pr)) is not None

    def is_mono(self, f: ExLexMap) -> bool:
        amb, A, B = self.base, f.dom, f.cod
        K1, a0, g0 = amb.pullback(f.tracker, B.r0)
        K, w, a1 = amb.pullback(amb.compose(B.r1, g0), f.tracker)
        return A.related(amb.compose(a0, w), a1)

    def is_iso(self, f):
        # the completion is exact, so cover + mono suffices
        return self.is_cover(f) and self.is_mono(f)

    def inverse(self, f: ExLexMap):
        for g in self.hom(f.cod, f.dom):
            if f.then(g) == self.identity(f.dom) and g.then(f) == self.identity(f.cod):
                return g
        return None

    def find_iso(self, A, B):
        for f in self.hom(A, B):
            if self.is_iso(f):
                return f
        return None

    def is_projective(self, A: ExLexObj) -> bool:
        """The cover ``y(X) -> A`` splits: some ``s: X -> X`` constant on related pairs with ``s`` related to the identity."""
        amb = self.base
        idX = amb.identity(A.X)
        for s in amb.hom(A.X, A.X):
            if amb.compose(s, A.r0) == amb.compose(s, A.r1) and A.related(s, idX):
                return True
        return False

    def unit_cover(self, A: ExLexObj) -> ExLexMap:
        """``y(X) -> (X, R)`` tracked by the identity."""
        return ExLexMap(self.y(A.X), A, self.base.identity(A.X))

    def objects_up_to(self, bound: int):
        """Over finite sets: every equivalence relation plus a non-monic copy; otherwise discrete and total relations."""
        if isinstance(self.base, FinSet):
            for X in self.base.objects_up_to(bound):
                for part in _partitions(list(X.carrier)):
                    pairs = [(x, y) for block in part for x in block for y in block]
                    yield relation_from_pairs(X, pairs, name=f"{len(X)}/{len(part)}")
                    if len(X):
                        diag = [(x, x) for x in X.carrier]
                        yield relation_from_pairs(X, pairs + diag, name=f"{len(X)}/{len(part)}+Δ")
            return
        for X in self.base.objects_up_to(bound):
            yield self.y(X)
            yield total(self.base, X)


def exlex_hom(A: ExLexObj, B: ExLexObj) -> list[ExLexMap]:
    """Representatives of the morphism classes ``A -> B``, in the base hom's enumeration order."""
    if not _same_ambient(A.ambient, B.ambient):
        raise AmbientMismatch("objects over different ambients")
    amb = A.ambient
    if isinstance(amb, FinSet):
        return _finset_hom(A, B)
    reps: list[ExLexMap] = []
    for f in amb.hom(A.X, B.X):
        w = _lift_pair(amb, amb.compose(f, A.r0), amb.compose(f, A.r1), B.r0, B.r1)
        if w is None:
            continue
        if any(B.related(f, r.tracker) for r in reps):
            continue
        reps.append(ExLexMap(A, B, f, w))
    return reps


def _finset_hom(A: ExLexObj, B: ExLexObj) -> list[ExLexMap]:
    """Same enumeration over finite sets, with relatedness decided pointwise on classes."""
    amb = A.ambient
    E = B.image_pairs()
    cls = B.class_index()
    pairs = list(zip(A.r0.images, A.r1.images))
    seen: set = set()
    reps: list[ExLexMap] = []
    for f in amb.hom(A.X, B.X):
        key = tuple(cls[y] for y in f.images)
        if key in seen:
            continue
        t = f.table
        if not all((t[a], t[b]) in E for a, b in pairs):
            continue
        seen.add(key)
        w = _lift_pair(amb, amb.compose(f, A.r0), amb.compose(f, A.r1), B.r0, B.r1)
        reps.append(ExLexMap(A, B, f, w))
    return reps


@dataclass
class QuotientResult:
    quotient: ExLexObj
    q: ExLexMap
    kernel: tuple  # (K, k0, k1)
    coequalizes: bool
    kernel_matches: bool
    stable: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.coequalizes and self.kernel_matches and all(self.stable.values())


def _compose_relations(amb: Ambient, first: tuple, second: tuple) -> tuple:
    """``first ; second`` for spans ``(R, r0, r1)``."""
    _, a0, a1 = first
    _, b0, b1 = second
    P, p0, p1 = amb.pullback(a1, b0)
    return P, amb.compose(a0, p0), amb.compose(b1, p1)


def _factors_through(A: ExLexObj, kl, kr, pl, pr) -> bool:
    """Is there ``u`` with ``kl∘u ~ pl`` and ``kr∘u ~ pr`` in ``A``?

    One lift problem: ``(pl, pr)`` through the object of triples
    ``(k, ρ0, ρ1)`` with ``r0 ρ0 = kl k`` and ``r0 ρ1 = kr k``, sent to
    ``(r1 ρ0, r1 ρ1)``.  When the relation on ``dom(kl)`` is the one induced
    by ``(kl, kr)``, such a tracker respects relations automatically.
    """
    amb = A.ambient
    Z1, z_k, z_r0 = amb.pullback(kl, A.r0)
    Z, zz, z_r1 = amb.pullback(amb.compose(kr, z_k), A.r0)
    XX, _, _ = amb.product(A.X, A.X)
    to_pairs = amb.pair(amb.compose(A.r1, amb.compose(z_r0, zz)), amb.compose(A.r1, z_r1), XX)
    return amb.find_lift(amb.pair(pl, pr, XX), to_pairs) is not None


def exlex_quotient(A: ExLexObj, S, s0, s1, sample: Iterable[ExLexMap] = ()) -> QuotientResult:
    """Quotient of ``A`` by the relation ``(s0, s1): S ⇉ X``.

    The relation is first saturated to ``R ; S ; R`` so that it contains
    ``A``'s own relation; the quotient is ``X`` with the saturated relation
    and ``q`` is tracked by the identity.  Exactness is verified: ``q``
    coequalizes the kernel legs and the kernel pair of ``q``, computed as a
    pullback in the completion, factors through the relation and back.
    ``sample`` maps ``c: T -> Q`` are used to check that pulling ``q`` back
    along ``c`` yields a cover.
    """
    amb = A.ambient
    Rspan = (A.R, A.r0, A.r1)
    sat = _compose_relations(amb, _compose_relations(amb, Rspan, (S, s0, s1)), Rspan)
    Q = ExLexObj(amb, A.X, *sat, name=f"{A.name}/~")
    E = ExLex(amb)
    q = ExLexMap(A, Q, amb.identity(A.X))
    K, k0, k1 = _induced(amb, sat[0], [(sat[1], A), (sat[2], A)])
    Kobj = ExLexObj(amb, sat[0], K, k0, k1, name="ker")
    kl, kr = ExLexMap(Kobj, A, sat[1]), ExLexMap(Kobj, A, sat[2])
    coeq = kl.then(q) == kr.then(q)
    P, pl, pr = E.pullback(q, q)
    into_K = _factors_through(A, kl.tracker, kr.tracker, pl.tracker, pr.tracker)
    into_P = _factors_through(A, pl.tracker, pr.tracker, kl.tracker, kr.tracker)
    stable = {}
    for i, c in enumerate(sample):
        _, _, leg = E.pullback(q, c)
        stable[i] = E.is_cover(leg)
    return QuotientResult(Q, q, (Kobj, kl, kr), coeq, into_K and into_P, stable)


def exlex_structure(kind: str, *args, **kwargs):
    """Dispatch for ``"product"``, ``"pullback"``, ``"quotient"``, ``"image"``."""
    if kind == "product":
        A, B = args
        return ExLex(A.ambient).product(A, B)
    if kind == "pullback":
        f, g = args
        return ExLex(f.dom.ambient).pullback(f, g)
    if kind == "quotient":
        return exlex_quotient(*args, **kwargs)
    if kind == "image":
        (f,) = args
        amb = f.dom.ambient
        # image of f = quotient of the domain by the kernel of f
        P1, u0, u1 = amb.pullback(f.tracker, f.cod.r0)
        P, v0, v1 = amb.pullback(amb.compose(f.cod.r1, u1), f.tracker)
        res = exlex_quotient(f.dom, P, amb.compose(u0, v0), v1)
        m = ExLexMap(res.quotient, f.cod, f.tracker)
        return res.q, m
    raise ShapeMismatch(f"unknown structure {kind!r}")


# ---------------------------------------------------------------- ex/reg


def _as_presheaf(X):
    if isinstance(X, Presheaf):
        return X
    if isinstance(X, FinSetObj):
        from .amc.squares import embed_object

        return embed_object(X)
    raise ShapeMismatch(f"ex/reg needs a regular ambient of finite sets or presheaves, got {X!r}")


def _as_nat(f):
    if isinstance(f, NatTrans):
        return f
    if isinstance(f, FinSetMap):
        from .amc.squares import embed_map

        return embed_map(f)
    raise ShapeMismatch(f"not a map of finite sets or presheaves: {f!r}")


Rel = dict  # stage -> frozenset of pairs


class ExRegObj:
    """A presheaf ``X`` (finite sets are presheaves on one object) with an equivalence relation given stagewise."""

    def __init__(self, X: Presheaf, E: Rel, name: str = "", check: bool = True):
        self.X, self.E, self.name = X, {x: frozenset(E[x]) for x in X.base.objects}, name
        if check:
            self.check()

    @property
    def base(self):
        return self.X.base

    def check(self):
        X, E = self.X, self.E
        for x in X.base.objects:
            S = X.stalks[x]
            rel = E[x]
            for a in S:
                if (a, a) not in rel:
                    raise NotEquivalenceRelation("not reflexive", witness=(x, a))
            for a, b in rel:
                if (b, a) not in rel:
                    raise NotEquivalenceRelation("not symmetric", witness=(x, a, b))
                for c in S:
                    if (b, c) in rel and (a, c) not in rel:
                        raise NotEquivalenceRelation("not transitive", witness=(x, a, b, c))
        for f, (y, x) in X.base.arrows.items():
            for a, b in E[x]:
                if (X.act(a, f), X.act(b, f)) not in E[y]:
                    raise NotEquivalenceRelation("not closed under restriction", witness=(f, a, b))

    def classes(self, x) -> list[frozenset]:
        seen, out = set(), []
        for a in self.X.stalks[x]:
            if a in seen:
                continue
            cl = frozenset(b for b in self.X.stalks[x] if (a, b) in self.E[x])
            seen |= cl
            out.append(cl)
        return out

    def __repr__(self):
        return f"ExRegObj({self.name or self.X!r})"


class ExRegMap:
    """A functional relation, stored stagewise; equal relations are equal maps."""

    def __init__(self, dom: ExRegObj, cod: ExRegObj, rel: Rel):
        self.dom, self.cod = dom, cod
        self.rel = {x: frozenset(rel[x]) for x in dom.base.objects}

    def _key(self):
        return tuple(sorted((x, tuple(sorted(map(repr, r)))) for x, r in self.rel.items()))

    def __eq__(self, other):
        return isinstance(other, ExRegMap) and self.rel == other.rel

    def __hash__(self):
        return hash(self._key())

    def then(self, g: "ExRegMap") -> "ExRegMap":
        rel = {}
        for x in self.dom.base.objects:
            rel[x] = frozenset((a, c) for a, b in self.rel[x] for b2, c in g.rel[x] if b == b2)
        return ExRegMap(self.dom, g.cod, rel)

    def __repr__(self):
        return f"ExRegMap({self.dom!r} -> {self.cod!r})"


def _is_functional_relation(A: ExRegObj, B: ExRegObj, rel: Rel) -> bool:
    X, Y = A.X, B.X
    for f, (y, x) in X.base.arrows.items():
        for a, b in rel[x]:
            if (X.act(a, f), Y.act(b, f)) not in rel[y]:
                return False
    for x in X.base.objects:
        r = rel[x]
        for a, b in r:
            for a2, b2 in r:
                if (a, a2) in A.E[x] and (b, b2) not in B.E[x]:  # functional and saturated on the left
                    return False
            for b2 in Y.stalks[x]:
                if (b, b2) in B.E[x] and (a, b2) not in r:  # saturated on the right
                    return False
        for a in X.stalks[x]:
            if not any(a == a2 for a2, _ in r):  # total
                return False
    return True


class ExReg(Ambient):
    """The ex/reg completion of finite sets or of presheaves on a finite category."""

    regular = True

    def __init__(self, base: Ambient):
        if not getattr(base, "regular", False):
            raise HypothesisFailed("ex/reg needs a regular ambient", witness=base)
        self.base = base
        self.kind = f"exreg({base.kind})"

    def __repr__(self):
        return f"ExReg({self.base!r})"

    def y(self, X) -> ExRegObj:
        P = _as_presheaf(X)
        return ExRegObj(P, {x: {(a, a) for a in P.stalks[x]} for x in P.base.objects}, name=f"y({X!r})", check=False)

    def y_map(self, f, dom=None, cod=None) -> ExRegMap:
        n = _as_nat(f)
        dom = dom or self.y(f.dom)
        cod = cod or self.y(f.cod)
        return ExRegMap(dom, cod, {x: {(a, n(x, a)) for a in n.dom.stalks[x]} for x in n.base.objects})

    def hom(self, A: ExRegObj, B: ExRegObj) -> list[ExRegMap]:
        """Every functional relation ``A -> B``.

        A functional, total, saturated relation relates each ``A``-class to
        exactly one ``B``-class, so candidates are generated class by class
        and then checked against the definition (including closure under
        restriction).
        """
        objs = A.base.objects
        choices = []
        for x in objs:
            ca, cb = A.classes(x), B.classes(x)
            choices.append([(x, dict(zip(ca, pick))) for pick in itertools.product(cb, repeat=len(ca))])
        out = []
        for combo in itertools.product(*choices):
            rel = {x: {(a, b) for cl, target in m.items() for a in cl for b in target} for x, m in combo}
            if _is_functional_relation(A, B, rel):
                out.append(ExRegMap(A, B, rel))
        return out

    def identity(self, A):
        return ExRegMap(A, A, A.E)

    def compose(self, g, f):
        return f.then(g)

    def terminal(self):
        return self.y(self.base.terminal())

    def product(self, A: ExRegObj, B: ExRegObj):
        P, _, _ = psh_product(A.X, B.X)
        E = {x: {((a, b), (a2, b2)) for (a, b) in P.stalks[x] for (a2, b2) in P.stalks[x]
                 if (a, a2) in A.E[x] and (b, b2) in B.E[x]} for x in P.base.objects}
        obj = ExRegObj(P, E, name=f"{A.name}×{B.name}")
        p0 = ExRegMap(obj, A, {x: {(e, a) for e in P.stalks[x] for a in A.X.stalks[x] if (e[0], a) in A.E[x]} for x in P.base.objects})
        p1 = ExRegMap(obj, B, {x: {(e, b) for e in P.stalks[x] for b in B.X.stalks[x] if (e[1], b) in B.E[x]} for x in P.base.objects})
        return obj, p0, p1

    def pair(self, u: ExRegMap, v: ExRegMap, P: ExRegObj) -> ExRegMap:
        rel = {x: {(a, (b, c)) for a, b in u.rel[x] for a2, c in v.rel[x] if a == a2} for x in u.dom.base.objects}
        return ExRegMap(u.dom, P, rel)

    def is_cover(self, f: ExRegMap) -> bool:
        return all({b for _, b in f.rel[x]} == set(f.cod.X.stalks[x]) for x in f.dom.base.objects)

    def is_mono(self, f: ExRegMap) -> bool:
        for x in f.dom.base.objects:
            for a, b in f.rel[x]:
                for a2, b2 in f.rel[x]:
                    if b == b2 and (a, a2) not in f.dom.E[x]:
                        return False
        return True

    def inverse(self, f: ExRegMap):
        conv = {x: {(b, a) for a, b in f.rel[x]} for x in f.dom.base.objects}
        if _is_functional_relation(f.cod, f.dom, conv):
            return ExRegMap(f.cod, f.dom, conv)
        return None

    def is_iso(self, f):
        # the completion is exact, so cover + mono suffices
        return self.is_cover(f) and self.is_mono(f)

    def find_iso(self, A, B):
        return next((f for f in self.hom(A, B) if self.is_iso(f)), None)

    def lifts(self, h, e):
        for k in self.hom(h.dom, e.dom):
            if k.then(e) == h:
                yield k

    def is_projective(self, A: ExRegObj) -> bool:
        """The cover from ``y`` of a projective cover of the carrier splits."""
        Can, eps = canonical_cover(A.X)
        P = self.y(Can)
        cover = ExRegMap(P, A, {x: {(p, a) for p in Can.stalks[x] for a in A.X.stalks[x] if (eps(x, p), a) in A.E[x]}
                                for x in Can.base.objects})
        ident = self.identity(A)
        return any(s.then(cover) == ident for s in self.hom(A, P))

    def monos_into(self, A: ExRegObj, B: ExRegObj) -> list[ExRegMap]:
        return [m for m in self.hom(A, B) if self.is_mono(m)]

    def objects_up_to(self, bound: int):
        """Every base object up to ``bound`` with every equivalence relation on it."""
        for Z in self.base.objects_up_to(bound):
            P = _as_presheaf(Z)
            per_stage = []
            for x in P.base.objects:
                per_stage.append([(x, part) for part in _partitions(list(P.stalks[x]))])
            for combo in itertools.product(*per_stage):
                E = {x: {(a, b) for block in part for a in block for b in block} for x, part in combo}
                try:
                    yield ExRegObj(P, E, name=f"{Z!r}/~")
                except NotEquivalenceRelation:
                    continue


# ---------------------------------------------------------------- recognition


@dataclass
class Embedding:
    """A functor ``F: source -> target`` given on objects and maps."""

    source: Ambient
    target: Any
    on_obj: Callable
    on_map: Callable
    name: str = "F"


def unit_embedding(completion) -> Embedding:
    """``y`` from the base ambient into ``completion``; images of objects are cached so maps share them."""
    cache: dict = {}

    def on_obj(X):
        if X not in cache:
            cache[X] = completion.y(X)
        return cache[X]

    def on_map_cached(f):
        return completion.y_map(f, on_obj(f.dom), on_obj(f.cod))

    return Embedding(completion.base, completion, on_obj, on_map_cached, name="y")


def identity_embedding(amb: Ambient) -> Embedding:
    return Embedding(amb, amb, lambda X: X, lambda f: f, name="id")


class RestrictedAmbient(Ambient):
    """A full subcategory: objects satisfying ``keep``."""

    def __init__(self, inner: Ambient, keep: Callable[[Any], bool], name: str = "restricted"):
        self.inner, self.keep = inner, keep
        self.kind = f"{name}-{inner.kind}"
        self.regular = inner.regular

    def hom(self, X, Y):
        return self.inner.hom(X, Y)

    def identity(self, X):
        return self.inner.identity(X)

    def subobjects(self, X):
        return [m for m in self.inner.subobjects(X) if self.keep(m.dom)]

    def objects_up_to(self, bound):
        return (X for X in self.inner.objects_up_to(bound) if self.keep(X))

    def canonical_cover(self, X):
        return None

    def is_cover(self, f):
        return self.inner.is_cover(f)

    def terminal(self):
        return self.inner.terminal()

    def to_terminal(self, X):
        return self.inner.to_terminal(X)

    def product(self, X, Y):
        return self.inner.product(X, Y)

    def pullback(self, f, g):
        return self.inner.pullback(f, g)

    def pair(self, u, v, P):
        return self.inner.pair(u, v, P)

    def lifts(self, h, e):
        return self.inner.lifts(h, e)

    def is_mono(self, f):
        return self.inner.is_mono(f)


def _projective(target, B) -> bool:
    if hasattr(target, "is_projective"):
        return target.is_projective(B)
    if isinstance(target, FinSet):
        return True
    from .amc.choice import is_projective

    return bool(is_projective(B))


@dataclass
class RecognitionReport:
    checks: dict
    witnesses: dict
    sample_sizes: dict
    conclusion: str = ""

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def __bool__(self):
        return self.ok


def _full_faithful(F: Embedding, sample: list) -> tuple[bool, Any]:
    T = F.target
    for X in sample:
        for Y in sample:
            images = [F.on_map(f) for f in F.source.hom(X, Y)]
            for i, j in itertools.combinations(range(len(images)), 2):
                if images[i] == images[j]:
                    return False, {"unfaithful": (X, Y, i, j)}
            for g in T.hom(F.on_obj(X), F.on_obj(Y)):
                if not any(g == im for im in images):
                    return False, {"not full": (X, Y, g)}
    return True, None


def _covering(F: Embedding, sample: list, targets: list) -> tuple[bool, Any]:
    T = F.target
    for B in targets:
        if not any(T.is_cover(e) for X in sample for e in T.hom(F.on_obj(X), B)):
            return False, B
    return True, None


def _preserves_products(F: Embedding, sample: list) -> tuple[bool, Any]:
    """The comparison ``F(X × Y) -> F(X) × F(Y)`` is an iso."""
    T, S = F.target, F.source
    for X, Y in itertools.product(sample, repeat=2):
        P, p0, p1 = S.product(X, Y)
        Q, q0, q1 = T.product(F.on_obj(X), F.on_obj(Y))
        comparison = T.pair(F.on_map(p0), F.on_map(p1), Q)
        if not T.is_iso(comparison):
            return False, (X, Y)
    return True, None


def check_recog_exlex(F: Embedding, sample: list, targets: list | None = None) -> RecognitionReport:
    """Conditions under which ``F`` exhibits its target as an ex/lex completion, on a sample.

    ``F`` preserves products, is full and faithful, every sampled target
    object is covered by an image object, image objects are projective and
    every sampled projective is isomorphic to an image object.
    """
    T = F.target
    targets = list(targets if targets is not None else sample_targets(T, sample))
    checks, wit = {}, {}
    checks["preserves products"], wit["preserves products"] = _preserves_products(F, sample)
    checks["full and faithful"], wit["full and faithful"] = _full_faithful(F, sample)
    checks["covering"], wit["covering"] = _covering(F, sample, targets)
    bad = next((X for X in sample if not _projective(T, F.on_obj(X))), None)
    checks["images projective"], wit["images projective"] = bad is None, bad
    missing = None
    for B in targets:
        if _projective(T, B) and not any(T.find_iso(F.on_obj(X), B) is not None for X in sample):
            missing = B
            break
    checks["projectives are images"], wit["projectives are images"] = missing is None, missing
    rep = RecognitionReport(checks, {k: v for k, v in wit.items() if v is not None}, {"source": len(sample), "target": len(targets)})
    rep.conclusion = (
        f"consistent with {T!r} being the ex/lex completion of the image of {F.name}"
        if rep.ok else "recognition conditions fail on the sample"
    )
    return rep


def check_recog_exreg(F: Embedding, sample: list, targets: list | None = None) -> RecognitionReport:
    """Full and faithful, covering, and full on subobjects, on a sample.

    Full on subobjects: every mono ``A ↣ F(X)`` from a sampled target object is
    isomorphic over ``F(X)`` to ``F(m)`` for a subobject ``m`` of ``X``.
    """
    T = F.target
    targets = list(targets if targets is not None else sample_targets(T, sample))
    checks, wit = {}, {}
    checks["full and faithful"], wit["full and faithful"] = _full_faithful(F, sample)
    checks["covering"], wit["covering"] = _covering(F, sample, targets)
    missing = None
    for X in sample:
        FX = F.on_obj(X)
        subs = [(m, F.on_map(m)) for m in F.source.subobjects(X)]
        for A in targets:
            for mono in _monos(T, A, FX):
                if not any(
                    any(i.then(Fm) == mono for i in T.hom(A, Fm.dom) if T.is_iso(i))
                    for _, Fm in subs
                ):
                    missing = {"object": X, "mono": mono}
                    break
            if missing:
                break
        if missing:
            break
    checks["full on subobjects"], wit["full on subobjects"] = missing is None, missing
    rep = RecognitionReport(checks, {k: v for k, v in wit.items() if v is not None}, {"source": len(sample), "target": len(targets)})
    rep.conclusion = (
        f"consistent with {T!r} being the ex/reg completion of the source of {F.name}"
        if rep.ok else "recognition conditions fail on the sample"
    )
    return rep


def _monos(T, A, B):
    if hasattr(T, "monos_into"):
        return T.monos_into(A, B)
    return [m for m in T.hom(A, B) if T.is_mono(m)]


def sample_targets(T, sample: list, bound: int | None = None) -> list:
    if bound is None:
        bound = max((_size(X) for X in sample), default=0)
    return list(T.objects_up_to(bound))


def _size(X) -> int:
    if isinstance(X, FinSetObj):
        return len(X)
    if isinstance(X, Presheaf):
        return max(X.sizes().values(), default=0)
    return len(X.points)


def proj_coincidence(C: Ambient, bound: int = 2) -> RecognitionReport:
    """Compare ``Proj(C)_ex/lex`` with ``C_ex/reg`` on objects up to ``bound``.

    Checks on the sample that there are enough projectives, that projectives
    are closed under finite limits and that covers of projectives split.  Then
    verifies the ex/lex recognition conditions for ``y: Proj(C) -> C_ex/reg``
    together with fullness on subobjects of ``y``.
    """
    objects = list(C.objects_up_to(bound))
    for X in objects:
        cov = C.canonical_cover(X)
        if cov is None or not C.is_cover(cov) or not _projective(C, cov.dom):
            raise HypothesisFailed("enough projectives", witness=X)
    projectives = [X for X in objects if _projective(C, X)]
    # the projective covers themselves may exceed the bound; they join the sample
    for X in objects:
        P = C.canonical_cover(X).dom
        if not any(_size(P) == _size(Q) and C.find_iso(P, Q) is not None for Q in projectives):
            projectives.append(P)
    if not _projective(C, C.terminal()):
        raise HypothesisFailed("projectives closed under finite limits: terminal", witness=C.terminal())
    for P, Q in itertools.product(projectives, repeat=2):
        if not _projective(C, C.product(P, Q)[0]):
            raise HypothesisFailed("projectives closed under finite limits: products", witness=(P, Q))
        for R in projectives:
            for f in C.hom(P, R):
                for g in C.hom(Q, R):
                    if not _projective(C, C.pullback(f, g)[0]):
                        raise HypothesisFailed("projectives closed under finite limits: pullbacks", witness=(f, g))
    for P in projectives:
        Can, eps = _canonical(C, P)
        if C.find_lift(C.identity(P), eps) is None:
            raise HypothesisFailed("covers of projectives split", witness=P)
    target = ExReg(C)
    proj = RestrictedAmbient(C, lambda X: _projective(C, X), name="proj")
    F = unit_embedding(target)
    F = Embedding(proj, target, F.on_obj, F.on_map, name="y")
    targets = list(target.objects_up_to(bound))
    rep = check_recog_exlex(F, projectives, targets)
    sub = check_recog_exreg(Embedding(C, target, F.on_obj, F.on_map, "y"), projectives, targets)
    rep.checks["y full on subobjects"] = sub.checks["full on subobjects"]
    if "full on subobjects" in sub.witnesses:
        rep.witnesses["y full on subobjects"] = sub.witnesses["full on subobjects"]
    rep.sample_sizes["projectives"] = len(projectives)
    rep.conclusion = (
        "consistent with Proj(C)_ex/lex ≃ C_ex/reg on the sample" if rep.ok else "comparison fails on the sample"
    )
    return rep


def _canonical(C: Ambient, P):
    cov = C.canonical_cover(P)
    return cov.dom, cov
