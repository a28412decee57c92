"""Projectives, choice objects and the search for squares that are both covering and collection."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

from ..core.ambient import Ambient
from ..core.presheaf import (
    Presheaf,
    canonical_cover,
    enumerate_presheaves,
    find_lift,
    identity_nat,
    product,
    search_nat,
    yoneda_embed,
)
from ..core.psh import FinPsh
from ..finset import FinSet, FinSetObj
from .squares import Square, identity_square, is_collection_square, is_covering_square


@dataclass
class ProjectiveVerdict:
    value: bool
    section: Any = None
    cover: Any = None

    def __bool__(self):
        return self.value


def is_projective(P) -> ProjectiveVerdict:
    """Split-search against the canonical cover.

    Every finite set is projective.  A presheaf is projective iff its cover by
    a sum of representables splits, since that cover factors through any other.
    """
    if isinstance(P, FinSetObj):
        return ProjectiveVerdict(True)
    _, eps = canonical_cover(P)
    s = find_lift(identity_nat(P), eps)
    if s is None:
        return ProjectiveVerdict(False, cover=eps)
    return ProjectiveVerdict(True, section=s, cover=eps)


@dataclass
class EnoughProjectivesVerdict:
    value: bool
    checked: int
    witness: Any = None

    def __bool__(self):
        return self.value


def has_enough_projectives(ambient: Ambient, bound: int) -> EnoughProjectivesVerdict:
    """Exhibit a projective cover of every object up to ``bound``."""
    n = 0
    objects = list(ambient.objects_up_to(bound))
    if not objects:
        return EnoughProjectivesVerdict(False, 0, witness="no objects are exposed")
    for X in objects:
        n += 1
        cov = ambient.canonical_cover(X)
        if cov is None or not ambient.is_cover(cov) or not is_projective(cov.dom):
            return EnoughProjectivesVerdict(False, n, witness=X)
    return EnoughProjectivesVerdict(True, n)


# ---------------------------------------------------------------- choice objects


@dataclass
class ChoiceVerdict:
    status: str  # "choice", "not-choice" or "choice-up-to-bound"
    method: str
    witness: Any = None
    bound: int | None = None

    @property
    def is_choice(self) -> bool | None:
        return {"choice": True, "not-choice": False}.get(self.status)


def exact_choice_test(P: Presheaf) -> tuple[bool, Any]:
    """``(−)^P`` preserves covers iff ``y(c) × P`` is projective for every object ``c``.

    Components of ``X^P`` at ``c`` are maps ``y(c) × P -> X``, so stagewise
    surjectivity of ``e^P`` is exactly lifting from ``y(c) × P``.
    Returns ``(verdict, failing stage or None)``.
    """
    for c in P.base.objects:
        Q, _, _ = product(yoneda_embed(P.base, c), P)
        if not is_projective(Q):
            return False, c
    return True, None


def bounded_choice_search(P: Presheaf, bound: int):
    """Look for a cover ``e: Y ↠ X`` and ``m: y(c) × P -> X`` with no lift, stalks ``<= bound``.

    Candidate pairs ``(X, Y)`` are tried in order of total size.  Returns a
    witness dict or None.
    """
    C = P.base
    objs = list(enumerate_presheaves(C, bound))
    pairs = sorted(itertools.product(range(len(objs)), repeat=2), key=lambda ij: (objs[ij[0]].total_size() + objs[ij[1]].total_size(), ij))
    sources = {c: product(yoneda_embed(C, c), P)[0] for c in C.objects}
    for i, j in pairs:
        X, Y = objs[i], objs[j]
        if X.total_size() > Y.total_size() or any(len(Y.stalks[x]) < len(X.stalks[x]) for x in C.objects):
            continue
        covers = search_nat(Y, X, accept=lambda comps: all(set(comps[x].values()) == set(X.stalks[x]) for x in C.objects))
        for e in covers:
            fibre: dict = {}
            for x in C.objects:
                for z in Y.stalks[x]:
                    fibre.setdefault((x, e(x, z)), []).append(z)
            for c, S in sources.items():
                for m in search_nat(S, X):
                    lift = next(search_nat(S, Y, lambda x, s: fibre.get((x, m(x, s)), ())), None)
                    if lift is None:
                        return {"cover": e, "stage": c, "map": m, "X": X, "Y": Y}
    return None


def check_choice_object(P, bound: int = 3, exact: bool = True) -> ChoiceVerdict:
    """Decide whether exponentiation by ``P`` preserves covers.

    Over finite sets every object is a choice object.  Over presheaves a
    bounded search for a cover that ``(−)^P`` fails to preserve runs first;
    with ``exact=True`` the projectivity test above settles the cases the
    bounded search cannot.
    """
    if isinstance(P, FinSetObj):
        return ChoiceVerdict("choice", "split covers")
    if exact:
        ok, stage = exact_choice_test(P)
        if ok:
            return ChoiceVerdict("choice", "exact", bound=bound)
    found = bounded_choice_search(P, bound)
    if found is not None:
        return ChoiceVerdict("not-choice", "bounded search", found, bound)
    if exact:
        Q, _, _ = product(yoneda_embed(P.base, stage), P)
        _, eps = canonical_cover(Q)
        return ChoiceVerdict("not-choice", "exact", {"stage": stage, "cover": eps}, bound)
    return ChoiceVerdict("choice-up-to-bound", "bounded search", bound=bound)


# ---------------------------------------------------------------- AMC squares


@dataclass
class AmcResult:
    found: bool
    square: Square | None = None
    path: str = ""
    trace: list = field(default_factory=list)

    def __bool__(self):
        return self.found


class StrippedAmbient(Ambient):
    """Wraps an ambient but hides its projectives and its object universe."""

    def __init__(self, inner: Ambient):
        self.inner = inner
        self.kind = f"stripped-{inner.kind}"

    def hom(self, X, Y):
        return self.inner.hom(X, Y)

    def identity(self, X):
        return self.inner.identity(X)

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

    def is_cover(self, f):
        return self.inner.is_cover(f)

    def is_mono(self, f):
        return self.inner.is_mono(f)

    def canonical_cover(self, X):
        return None

    def objects_up_to(self, bound):
        return iter(())


def _passes(sq: Square) -> bool:
    return bool(is_covering_square(sq)) and bool(is_collection_square(sq, strong=True))


def find_amc_square(f, ambient: Ambient | None = None, search_bound: int = 2) -> AmcResult:
    """A square with ``f`` on the right that is covering and strong collection.

    Finite sets: the identity square.  With projective covers available: cover
    ``A`` by a projective ``C``, then cover ``C ×_A B`` by a projective ``D``;
    the left map is between projectives, hence a choice map.  Otherwise a
    bounded search over objects up to ``search_bound``.
    """
    from .squares import ambient_of

    amb = ambient or ambient_of(f)
    if isinstance(amb, FinSet):
        sq = identity_square(f, amb)
        return AmcResult(True, sq, "identity", ["finite sets: covers split"])
    cov = amb.canonical_cover(f.cod)
    if cov is not None:
        P, pc, pb = amb.pullback(cov, f)
        covD = amb.canonical_cover(P)
        sq = Square(f, amb.compose(pc, covD), cov, amb.compose(pb, covD), amb)
        if _passes(sq):
            return AmcResult(True, sq, "projective-cover", [
                "bottom: projective cover of the codomain",
                "left: projective cover of the pullback, a map between projectives",
            ])
    for C in amb.objects_up_to(search_bound):
        for p in amb.hom(C, f.cod):
            if not amb.is_cover(p):
                continue
            P, pc, pb = amb.pullback(p, f)
            for D in amb.objects_up_to(search_bound):
                for k in amb.hom(D, P):
                    if not amb.is_cover(k):
                        continue
                    sq = Square(f, amb.compose(pc, k), p, amb.compose(pb, k), amb)
                    if _passes(sq):
                        return AmcResult(True, sq, "search", [f"bounded search at {search_bound}"])
    return AmcResult(False, None, "not-found", [f"no square within bound {search_bound}"])
