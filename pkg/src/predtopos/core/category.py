"""Finite categories stored as explicit composition tables, plus functors."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..errors import BadComposite, FunctorError, MissingIdentity, NonAssociative, UnknownObject


class FiniteCategory:
    """Objects, named arrows and a full composition table.

    ``comp[(g, f)]`` is the name of ``g ∘ f`` and must be present exactly when
    ``cod(f) == dom(g)``.  Construction does not validate; call
    :func:`validate_category` (every builder in this module does).
    """

    def __init__(
        self,
        objects: Iterable[str],
        arrows: Mapping[str, tuple[str, str]],
        comp: Mapping[tuple[str, str], str],
        identities: Mapping[str, str] | None = None,
        name: str = "",
    ):
        self.objects: tuple[str, ...] = tuple(objects)
        self.arrows: dict[str, tuple[str, str]] = dict(arrows)
        self.comp: dict[tuple[str, str], str] = dict(comp)
        if identities is None:
            identities = {x: f"id_{x}" for x in self.objects if f"id_{x}" in self.arrows}
        self.identities: dict[str, str] = dict(identities)
        self.name = name
        self._into: dict[str, tuple[str, ...]] | None = None
        self._key = (
            self.objects,
            tuple(sorted(self.arrows.items())),
            tuple(sorted(self.comp.items())),
            tuple(sorted(self.identities.items())),
        )

    def __eq__(self, other):
        return isinstance(other, FiniteCategory) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        label = self.name or "FiniteCategory"
        return f"<{label}: {len(self.objects)} objects, {len(self.arrows)} arrows>"

    def dom(self, f: str) -> str:
        return self.arrows[f][0]

    def cod(self, f: str) -> str:
        return self.arrows[f][1]

    def id(self, x: str) -> str:
        try:
            return self.identities[x]
        except KeyError:
            raise UnknownObject(f"unknown object {x!r}", witness=x) from None

    def compose(self, g: str, f: str) -> str:
        """``g ∘ f`` (first ``f``, then ``g``)."""
        return self.comp[(g, f)]

    def hom(self, x: str, y: str) -> list[str]:
        return [a for a, (d, c) in self.arrows.items() if d == x and c == y]

    def arrows_into(self, c: str) -> tuple[str, ...]:
        if self._into is None:
            into: dict[str, list[str]] = {x: [] for x in self.objects}
            for a, (_, cod) in self.arrows.items():
                into[cod].append(a)
            self._into = {x: tuple(v) for x, v in into.items()}
        return self._into[c]

    def arrows_from(self, x: str) -> list[str]:
        return [a for a, (d, _) in self.arrows.items() if d == x]

    def is_identity(self, f: str) -> bool:
        return self.identities.get(self.dom(f)) == f

    def non_identities(self) -> list[str]:
        return [a for a in self.arrows if not self.is_identity(a)]

    def factors_through(self, h: str, a: str) -> list[str]:
        """All ``k`` with ``a ∘ k == h``."""
        return [k for k in self.hom(self.dom(h), self.dom(a)) if self.comp[(a, k)] == h]

    def check_object(self, x: str) -> None:
        if x not in self.identities and x not in self.objects:
            raise UnknownObject(f"unknown object {x!r}", witness=x)


def validate_category(cat: FiniteCategory) -> FiniteCategory:
    """Return ``cat`` if every category law holds; raise naming the first violation."""
    objs = set(cat.objects)
    if len(objs) != len(cat.objects):
        raise BadComposite("duplicate object ids", witness=cat.objects)
    for a, (d, c) in cat.arrows.items():
        if d not in objs or c not in objs:
            raise BadComposite(f"arrow {a} has unknown endpoint", witness=(a, d, c))
    for x in cat.objects:
        i = cat.identities.get(x)
        if i is None or cat.arrows.get(i) != (x, x):
            raise MissingIdentity(f"object {x} has no identity arrow", witness=x)

    for (g, f), h in cat.comp.items():
        if f not in cat.arrows or g not in cat.arrows or h not in cat.arrows:
            raise BadComposite(f"composite {g}∘{f} = {h} names an unknown arrow", witness=(g, f))
        if cat.cod(f) != cat.dom(g):
            raise BadComposite(f"{g}∘{f} is listed but not composable", witness=(g, f))
        if cat.arrows[h] != (cat.dom(f), cat.cod(g)):
            raise BadComposite(f"{g}∘{f} = {h} has the wrong dom/cod", witness=(g, f))
    for f in cat.arrows:
        for g in cat.arrows_from(cat.cod(f)):
            if (g, f) not in cat.comp:
                raise BadComposite(f"composite {g}∘{f} is missing", witness=(g, f))

    for f, (d, c) in cat.arrows.items():
        if cat.comp[(cat.identities[c], f)] != f:
            raise MissingIdentity(f"id_{c}∘{f} != {f}", witness=(cat.identities[c], f))
        if cat.comp[(f, cat.identities[d])] != f:
            raise MissingIdentity(f"{f}∘id_{d} != {f}", witness=(f, cat.identities[d]))

    for f in cat.arrows:
        for g in cat.arrows_from(cat.cod(f)):
            gf = cat.comp[(g, f)]
            for h in cat.arrows_from(cat.cod(g)):
                if cat.comp[(h, gf)] != cat.comp[(cat.comp[(h, g)], f)]:
                    raise NonAssociative(f"({h}∘{g})∘{f} != {h}∘({g}∘{f})", witness=(h, g, f))
    return cat


@dataclass(frozen=True)
class Functor:
    source: FiniteCategory
    target: FiniteCategory
    on_objects: Mapping[str, str] = field(hash=False)
    on_arrows: Mapping[str, str] = field(hash=False)

    def __call__(self, arrow: str) -> str:
        return self.on_arrows[arrow]


def validate_functor(F: Functor) -> Functor:
    """Exhaustive check of identities, endpoints and composition."""
    S, T = F.source, F.target
    for x in S.objects:
        if F.on_objects.get(x) not in T.objects:
            raise FunctorError(f"object {x} is not sent to an object", witness=x)
        if F.on_arrows.get(S.id(x)) != T.id(F.on_objects[x]):
            raise FunctorError(f"identity of {x} not preserved", witness=x)
    for a, (d, c) in S.arrows.items():
        b = F.on_arrows.get(a)
        if b not in T.arrows or T.arrows[b] != (F.on_objects[d], F.on_objects[c]):
            raise FunctorError(f"arrow {a} is not sent to an arrow with matching endpoints", witness=a)
    for (g, f), h in S.comp.items():
        if T.comp[(F.on_arrows[g], F.on_arrows[f])] != F.on_arrows[h]:
            raise FunctorError(f"composite {g}∘{f} not preserved", witness=(g, f))
    return F


# ---------------------------------------------------------------- builders


def free_category(objects: Iterable[str], edges: Mapping[str, tuple[str, str]], name: str = "") -> FiniteCategory:
    """Path category of an acyclic graph.  A path ``f`` then ``g`` is named ``g.f``."""
    objects = tuple(objects)
    frontier = [((e,), d, c) for e, (d, c) in edges.items()]
    found: list[tuple[tuple[str, ...], str, str]] = []
    while frontier:
        if len(found) > 10_000:
            raise BadComposite("graph has a cycle; free category is infinite", witness=tuple(edges))
        found.extend(frontier)
        frontier = [
            ((e,) + p, d, c2)
            for p, d, c in frontier
            for e, (d2, c2) in edges.items()
            if d2 == c
        ]

    ids = {f"id_{x}" for x in objects}
    arrows = {f"id_{x}": (x, x) for x in objects}
    for p, d, c in found:
        arrows[".".join(p)] = (d, c)
    comp = {}
    for a in arrows:
        for b in arrows:
            if arrows[b][1] != arrows[a][0]:
                continue
            if a in ids:
                comp[(a, b)] = b
            elif b in ids:
                comp[(a, b)] = a
            else:
                comp[(a, b)] = f"{a}.{b}"
    cat = FiniteCategory(objects, arrows, comp, {x: f"id_{x}" for x in objects}, name=name)
    return validate_category(cat)


def preorder_category(objects: Iterable[str], leq: Iterable[tuple[str, str]], name: str = "") -> FiniteCategory:
    """Thin category on the reflexive-transitive closure of ``leq``; arrow ``a->b`` for a ≤ b."""
    objects = tuple(objects)
    rel = {(x, x) for x in objects} | set(leq)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), list(rel)):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True

    def arrow(a, b):
        return f"id_{a}" if a == b else f"{a}->{b}"

    arrows = {arrow(a, b): (a, b) for (a, b) in sorted(rel, key=lambda p: (objects.index(p[0]), objects.index(p[1])))}
    comp = {}
    for (a, b) in rel:
        for (c, d) in rel:
            if b == c:
                comp[(arrow(c, d), arrow(a, b))] = arrow(a, d)
    cat = FiniteCategory(objects, arrows, comp, {x: f"id_{x}" for x in objects}, name=name)
    return validate_category(cat)


def monoid_category(elements: Iterable[str], mult: Mapping[tuple[str, str], str], unit: str, name: str = "") -> FiniteCategory:
    """One-object category ``*`` whose arrows are monoid elements; ``mult[(g, f)] = g∘f``."""
    elements = tuple(elements)
    arrows = {e: ("*", "*") for e in elements}
    cat = FiniteCategory(("*",), arrows, dict(mult), {"*": unit}, name=name)
    return validate_category(cat)
