"""Oriented squares, covering squares and (strong) collection squares.

A square is drawn with ``f: B -> A`` on the right, ``g: D -> C`` on the left,
``p: C -> A`` at the bottom and ``q: D -> B`` at the top; properties are read
from left to right.

Collection is decided by Kripke–Joyal semantics in presheaves (finite sets
are presheaves on the one-object category).  At a stage ``Y`` an element
``c ∈ C(Y)`` has fibre ``D_c(Z) = {(v: Z -> Y, d) | g(d) = c·v}``, an object
over ``y(Y)``.  The quantifier over covers ``e: E ↠ D_c`` is replaced by the
canonical cover by a sum of representables: that cover is projective in the
slice, so it factors through every cover, and a map factoring through it
factors through all of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..core import catalog
from ..core.presheaf import NatTrans, Presheaf, canonical_cover, search_nat
from ..core.psh import FinPsh
from ..errors import NotCommuting, ShapeMismatch
from ..finset import FinSet, FinSetMap, FinSetObj
from ..topspace import ContinuousMap, FinTop


def ambient_of(m) -> Any:
    if isinstance(m, FinSetMap):
        return FinSet()
    if isinstance(m, NatTrans):
        return FinPsh(m.base)
    if isinstance(m, ContinuousMap):
        return FinTop()
    raise ShapeMismatch(f"cannot infer an ambient for {m!r}")


@dataclass
class Square:
    """``f ∘ q == p ∘ g``, checked on construction."""

    f: Any
    g: Any
    p: Any
    q: Any
    ambient: Any = None

    def __post_init__(self):
        if self.ambient is None:
            self.ambient = ambient_of(self.f)
        amb = self.ambient
        if self.q.dom != self.g.dom or self.q.cod != self.f.dom or self.g.cod != self.p.dom or self.p.cod != self.f.cod:
            raise ShapeMismatch("square maps do not line up")
        if amb.compose(self.f, self.q) != amb.compose(self.p, self.g):
            raise NotCommuting("f∘q != p∘g", witness=_first_difference(amb.compose(self.f, self.q), amb.compose(self.p, self.g)))

    @property
    def A(self):
        return self.f.cod

    @property
    def B(self):
        return self.f.dom

    @property
    def C(self):
        return self.g.cod

    @property
    def D(self):
        return self.g.dom

    def transpose(self) -> "Square":
        """The same square read top to bottom: ``p`` on the right, ``q`` on the left."""
        return Square(self.p, self.q, self.f, self.g, self.ambient)


def _first_difference(u, v):
    if isinstance(u, FinSetMap):
        return next((x for x in u.dom.carrier if u(x) != v(x)), None)
    if isinstance(u, NatTrans):
        return next(((x, e) for x in u.base.objects for e in u.dom.stalks[x] if u(x, e) != v(x, e)), None)
    return None


def identity_square(f, ambient=None) -> Square:
    amb = ambient or ambient_of(f)
    return Square(f, f, amb.identity(f.cod), amb.identity(f.dom), amb)


# ---------------------------------------------------------------- embedding finite sets


_TERMINAL = catalog.terminal()


def embed_object(X: FinSetObj) -> Presheaf:
    return Presheaf(_TERMINAL, {"*": X.carrier}, {}, check=False)


def embed_map(m: FinSetMap) -> NatTrans:
    return NatTrans(embed_object(m.dom), embed_object(m.cod), {"*": m.table}, check=False)


def as_presheaf_square(sq: Square) -> Square:
    """A FinSet square as a square of presheaves on the one-object category."""
    if isinstance(sq.ambient, FinPsh):
        return sq
    if not isinstance(sq.ambient, FinSet):
        raise ShapeMismatch(f"collection checks are not available over {sq.ambient!r}")
    return Square(embed_map(sq.f), embed_map(sq.g), embed_map(sq.p), embed_map(sq.q), FinPsh(_TERMINAL))


# ---------------------------------------------------------------- covering squares


@dataclass
class CoveringResult:
    value: bool
    canonical: Any
    reason: str = ""
    witness: Any = None

    def __bool__(self):
        return self.value


def _missed(m) -> list:
    if isinstance(m, FinSetMap):
        hit = set(m.images)
        return [y for y in m.cod.carrier if y not in hit]
    if isinstance(m, NatTrans):
        out = []
        for x in m.base.objects:
            hit = set(m.comps[x].values())
            out.extend((x, e) for e in m.cod.stalks[x] if e not in hit)
        return out
    return [y for y in m.cod.points if y not in set(m.table.values())]


def is_covering_square(sq: Square) -> CoveringResult:
    """``p`` is a cover and so is the canonical map ``D -> B ×_A C``."""
    amb = sq.ambient
    P, _, _ = amb.pullback(sq.f, sq.p)
    can = amb.pair(sq.q, sq.g, P)
    if not amb.is_cover(sq.p):
        return CoveringResult(False, can, "bottom map is not a cover", _missed(sq.p))
    if not amb.is_cover(can):
        return CoveringResult(False, can, "canonical map into the pullback is not a cover", _missed(can))
    return CoveringResult(True, can)


# ---------------------------------------------------------------- fibres over a stage


def fibre(g: NatTrans, Y: str, c) -> Presheaf:
    """``D_c`` for ``c ∈ C(Y)``: elements ``(v, d)`` with ``v: Z -> Y`` and ``g(d) = c·v``."""
    cat = g.base
    D, C = g.dom, g.cod
    stalks = {
        Z: tuple((v, d) for v in cat.hom(Z, Y) for d in D.stalks[Z] if g(Z, d) == C.act(c, v))
        for Z in cat.objects
    }
    action = {}
    for w, (Z2, Z) in cat.arrows.items():
        for v, d in stalks[Z]:
            action[(w, (v, d))] = (cat.compose(v, w), D.act(d, w))
    return Presheaf(cat, stalks, action, check=False)


@dataclass
class CollectionResult:
    value: bool
    strong: bool
    route: str
    witness: Any = None
    trace: list = field(default_factory=list)

    def __bool__(self):
        return self.value


def _lift_through_canonical(source: Presheaf, target: Presheaf, target_b, q: NatTrans, strong: bool):
    """A map ``k: source -> Can(target)`` with ``ε∘k`` over ``y(Y)`` and over ``B``.

    ``source`` and ``target`` are fibres (elements ``(v, d)``); ``target_b(Z, e)``
    gives the ``B``-component of an element of ``target``.
    """
    Can, eps = canonical_cover(target)
    index: dict = {}
    for Z in Can.base.objects:
        for z in Can.stalks[Z]:
            v, _ = eps(Z, z)
            index.setdefault((Z, v, target_b(Z, eps(Z, z))), []).append(z)

    def allowed(Z, e):
        v, d = e
        return index.get((Z, v, q(Z, d)), ())

    accept = None
    if strong:
        cod_elems = {Z: set(target.stalks[Z]) for Z in target.base.objects}

        def accept(comps):
            return all({eps(Z, z) for z in comps[Z].values()} == cod_elems[Z] for Z in cod_elems)

    return next(search_nat(source, Can, allowed, accept), None)


def is_collection_square(sq: Square, strong: bool = False, route: str = "definition") -> CollectionResult:
    """Decide the (strong) collection property.

    ``route="definition"`` evaluates: for every ``c`` and cover ``e: E ↠ D_c``
    there are ``c'`` with ``p(c') = p(c)`` and ``h: D_c' -> D_c`` over ``B``
    factoring through ``e`` (a cover when ``strong``).

    ``route="fibres"`` evaluates the equivalent condition for covering squares:
    for every ``a`` and cover ``e: E ↠ B_a`` there are ``c`` over ``a`` and
    ``t: D_c -> E`` with ``e∘t = q_c``.  Only meaningful for covering squares
    and only for the non-strong property.
    """
    psq = as_presheaf_square(sq)
    if route == "definition":
        return _by_definition(psq, strong)
    if route == "fibres":
        if strong:
            raise ValueError("the fibre-wise characterisation covers only the non-strong property")
        return _by_fibres(psq)
    raise ValueError(f"unknown route {route!r}")


def _by_definition(sq: Square, strong: bool) -> CollectionResult:
    f, g, p, q = sq.f, sq.g, sq.p, sq.q
    cat = g.base
    trace = []
    for Y in cat.objects:
        for c in g.cod.stalks[Y]:
            Dc = fibre(g, Y, c)
            candidates = [c] + [c2 for c2 in g.cod.stalks[Y] if c2 != c and p(Y, c2) == p(Y, c)]
            found = None
            for c2 in candidates:
                src = Dc if c2 == c else fibre(g, Y, c2)
                k = _lift_through_canonical(src, Dc, lambda Z, e: q(Z, e[1]), q, strong)
                if k is not None:
                    found = c2
                    break
            if found is None:
                return CollectionResult(False, strong, "definition", witness={"stage": Y, "c": c}, trace=trace)
            trace.append({"stage": Y, "c": c, "c'": found})
    return CollectionResult(True, strong, "definition", trace=trace)


def _by_fibres(sq: Square) -> CollectionResult:
    f, g, p, q = sq.f, sq.g, sq.p, sq.q
    cat = g.base
    trace = []
    for Y in cat.objects:
        for a in f.cod.stalks[Y]:
            Ba = fibre(f, Y, a)
            Can, eps = canonical_cover(Ba)
            index: dict = {}
            for Z in cat.objects:
                for z in Can.stalks[Z]:
                    index.setdefault((Z, eps(Z, z)), []).append(z)
            found = None
            for c in g.cod.stalks[Y]:
                if p(Y, c) != a:
                    continue
                Dc = fibre(g, Y, c)
                t = next(search_nat(Dc, Can, lambda Z, e: index.get((Z, (e[0], q(Z, e[1]))), ())), None)
                if t is not None:
                    found = c
                    break
            if found is None:
                return CollectionResult(False, False, "fibres", witness={"stage": Y, "a": a}, trace=trace)
            trace.append({"stage": Y, "a": a, "c": found})
    return CollectionResult(True, False, "fibres", trace=trace)
