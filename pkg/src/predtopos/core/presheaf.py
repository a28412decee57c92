"""Presheaves on finite categories, natural transformations and the searches over them."""

from __future__ import annotations

import itertools
from typing import Callable, Hashable, Iterable, Iterator, Mapping

from ..errors import BaseMismatch, PresheafLawError, UnknownObject
from .category import FiniteCategory

Elem = Hashable


class Presheaf:
    """Finite stalks ``stalks[X]`` with a contravariant action ``act(p, f)``.

    ``action[(f, p)]`` is ``p · f`` for ``f: Y -> X`` and ``p`` in ``stalks[X]``.
    Entries for identities may be omitted.  The action laws are asserted on
    construction.
    """

    def __init__(
        self,
        base: FiniteCategory,
        stalks: Mapping[str, Iterable[Elem]],
        action: Mapping[tuple[str, Elem], Elem],
        name: str = "",
        check: bool = True,
    ):
        self.base = base
        self.stalks: dict[str, tuple[Elem, ...]] = {x: tuple(stalks.get(x, ())) for x in base.objects}
        for x in stalks:
            if x not in self.stalks:
                raise UnknownObject(f"stalk given for unknown object {x!r}", witness=x)
        act = dict(action)
        for x in base.objects:
            i = base.id(x)
            for p in self.stalks[x]:
                act.setdefault((i, p), p)
        self.action = act
        self.name = name
        self._key = None
        if check:
            self._check_laws()

    def _check_laws(self) -> None:
        C = self.base
        for x, elems in self.stalks.items():
            if len(set(elems)) != len(elems):
                raise PresheafLawError(f"stalk at {x} has repeated labels", witness=x)
        members = {x: set(v) for x, v in self.stalks.items()}
        for f, (y, x) in C.arrows.items():
            for p in self.stalks[x]:
                q = self.action.get((f, p))
                if q is None or q not in members[y]:
                    raise PresheafLawError(f"{p}·{f} is undefined or outside the stalk at {y}", witness=(p, f))
        for x in C.objects:
            for p in self.stalks[x]:
                if self.action[(C.id(x), p)] != p:
                    raise PresheafLawError(f"{p}·id != {p}", witness=(p, C.id(x)))
        for (f, g), fg in C.comp.items():
            x = C.cod(f)
            for p in self.stalks[x]:
                if self.action[(g, self.action[(f, p)])] != self.action[(fg, p)]:
                    raise PresheafLawError(f"({p}·{f})·{g} != {p}·({f}∘{g})", witness=(p, f, g))

    def act(self, p: Elem, f: str) -> Elem:
        return self.action[(f, p)]

    def elements(self) -> Iterator[tuple[str, Elem]]:
        for x in self.base.objects:
            for p in self.stalks[x]:
                yield x, p

    def sizes(self) -> dict[str, int]:
        return {x: len(v) for x, v in self.stalks.items()}

    def total_size(self) -> int:
        return sum(len(v) for v in self.stalks.values())

    def principal(self, x: str, p: Elem) -> set[tuple[str, Elem]]:
        """Elements of the subpresheaf generated by ``p``."""
        return {(self.base.dom(f), self.action[(f, p)]) for f in self.base.arrows_into(x)}

    @property
    def key(self):
        if self._key is None:
            self._key = (
                self.base,
                tuple((x, self.stalks[x]) for x in self.base.objects),
                frozenset(self.action.items()),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, Presheaf) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        label = self.name or "Presheaf"
        sizes = ",".join(f"{x}:{len(v)}" for x, v in self.stalks.items())
        return f"<{label} [{sizes}]>"


class NatTrans:
    """Natural transformation ``dom -> cod`` given by per-object component tables."""

    def __init__(self, dom: Presheaf, cod: Presheaf, comps: Mapping[str, Mapping[Elem, Elem]], check: bool = True):
        if dom.base != cod.base:
            raise BaseMismatch("natural transformation between presheaves on different bases")
        self.dom = dom
        self.cod = cod
        self.comps: dict[str, dict[Elem, Elem]] = {x: dict(comps.get(x, {})) for x in dom.base.objects}
        self._key = None
        if check:
            self._check()

    def _check(self) -> None:
        P, Q, C = self.dom, self.cod, self.dom.base
        for x in C.objects:
            comp = self.comps[x]
            targets = set(Q.stalks[x])
            for p in P.stalks[x]:
                if comp.get(p) not in targets:
                    raise PresheafLawError(f"component at {x} undefined or out of range on {p}", witness=(x, p))
        for f, (y, x) in C.arrows.items():
            for p in P.stalks[x]:
                if self.comps[y][P.act(p, f)] != Q.act(self.comps[x][p], f):
                    raise PresheafLawError(f"naturality fails for {p} along {f}", witness=(p, f))

    def __call__(self, x: str, p: Elem) -> Elem:
        return self.comps[x][p]

    @property
    def base(self) -> FiniteCategory:
        return self.dom.base

    @property
    def key(self):
        if self._key is None:
            self._key = (
                self.dom,
                self.cod,
                tuple((x, frozenset(self.comps[x].items())) for x in self.dom.base.objects),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, NatTrans) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"<NatTrans {self.dom!r} -> {self.cod!r}>"

    def then(self, other: "NatTrans") -> "NatTrans":
        """``other ∘ self``."""
        return NatTrans(
            self.dom,
            other.cod,
            {x: {p: other.comps[x][q] for p, q in self.comps[x].items()} for x in self.dom.base.objects},
            check=False,
        )

    def is_surjective(self) -> bool:
        return all(set(self.comps[x].values()) == set(self.cod.stalks[x]) for x in self.base.objects)

    def is_injective(self) -> bool:
        return all(len(set(self.comps[x].values())) == len(self.comps[x]) for x in self.base.objects)


def identity_nat(P: Presheaf) -> NatTrans:
    return NatTrans(P, P, {x: {p: p for p in P.stalks[x]} for x in P.base.objects}, check=False)


# ---------------------------------------------------------------- yoneda / hom


def yoneda_embed(C: FiniteCategory, X: str) -> Presheaf:
    """Representable ``Hom(-, X)`` acting by precomposition."""
    C.check_object(X)
    if X not in C.objects:
        raise UnknownObject(f"unknown object {X!r}", witness=X)
    stalks = {D: tuple(C.hom(D, X)) for D in C.objects}
    action = {}
    for f, (E, D) in C.arrows.items():
        for g in stalks[D]:
            action[(f, g)] = C.compose(g, f)
    return Presheaf(C, stalks, action, name=f"y({X})")


def search_nat(
    P: Presheaf,
    Q: Presheaf,
    allowed: Callable[[str, Elem], Iterable[Elem]] | None = None,
    accept: Callable[[dict[str, dict[Elem, Elem]]], bool] | None = None,
) -> Iterator[NatTrans]:
    """Enumerate natural transformations ``P -> Q``.

    ``allowed(X, p)`` restricts the image of ``p``; ``accept`` filters complete
    assignments.  Choosing the image of ``p`` forces the image of every
    restriction of ``p``, so only generators branch.
    """
    if P.base != Q.base:
        raise BaseMismatch("presheaves live on different bases")
    C = P.base
    if allowed is None:
        domains = {(x, p): list(Q.stalks[x]) for x, p in P.elements()}
    else:
        domains = {(x, p): list(allowed(x, p)) for x, p in P.elements()}
    domain_sets = {v: set(d) for v, d in domains.items()}
    into = {x: C.arrows_into(x) for x in C.objects}
    order = sorted(domains, key=lambda v: (-len(P.principal(*v)), len(domains[v])))
    assign: dict[tuple[str, Elem], Elem] = {}

    def place(var, val, changed):
        x, p = var
        for f in into[x]:
            w = (C.dom(f), P.act(p, f))
            forced = Q.act(val, f)
            cur = assign.get(w)
            if cur is None:
                if forced not in domain_sets[w]:
                    return False
                assign[w] = forced
                changed.append(w)
            elif cur != forced:
                return False
        return True

    def rec(i):
        while i < len(order) and order[i] in assign:
            i += 1
        if i == len(order):
            comps = {x: {} for x in C.objects}
            for (x, p), q in assign.items():
                comps[x][p] = q
            if accept is None or accept(comps):
                yield NatTrans(P, Q, comps, check=False)
            return
        var = order[i]
        for val in domains[var]:
            changed: list = []
            if place(var, val, changed):
                yield from rec(i + 1)
            for w in changed:
                del assign[w]

    yield from rec(0)


def presheaf_hom(P: Presheaf, Q: Presheaf) -> list[NatTrans]:
    """Every natural transformation ``P -> Q``."""
    return list(search_nat(P, Q))


def find_lift(h: NatTrans, e: NatTrans) -> NatTrans | None:
    """Some ``k`` with ``e ∘ k == h``, or None."""
    if h.cod != e.cod:
        raise BaseMismatch("lift problem with mismatched codomains")
    E = e.dom
    fibre = {}
    for x in E.base.objects:
        for z in E.stalks[x]:
            fibre.setdefault((x, e.comps[x][z]), []).append(z)
    return next(search_nat(h.dom, E, lambda x, p: fibre.get((x, h.comps[x][p]), ())), None)


# ---------------------------------------------------------------- constructions


def terminal_presheaf(C: FiniteCategory) -> Presheaf:
    return Presheaf(C, {x: ("*",) for x in C.objects}, {(f, "*"): "*" for f in C.arrows}, name="1")


def empty_presheaf(C: FiniteCategory) -> Presheaf:
    return Presheaf(C, {x: () for x in C.objects}, {}, name="0")


def product(P: Presheaf, Q: Presheaf) -> tuple[Presheaf, NatTrans, NatTrans]:
    C = P.base
    stalks = {x: tuple(itertools.product(P.stalks[x], Q.stalks[x])) for x in C.objects}
    action = {}
    for f, (y, x) in C.arrows.items():
        for a, b in stalks[x]:
            action[(f, (a, b))] = (P.act(a, f), Q.act(b, f))
    R = Presheaf(C, stalks, action, check=False)
    p1 = NatTrans(R, P, {x: {e: e[0] for e in stalks[x]} for x in C.objects}, check=False)
    p2 = NatTrans(R, Q, {x: {e: e[1] for e in stalks[x]} for x in C.objects}, check=False)
    return R, p1, p2


def coproduct(P: Presheaf, Q: Presheaf) -> tuple[Presheaf, NatTrans, NatTrans]:
    C = P.base
    stalks = {x: tuple((0, a) for a in P.stalks[x]) + tuple((1, b) for b in Q.stalks[x]) for x in C.objects}
    action = {}
    for f, (y, x) in C.arrows.items():
        for a in P.stalks[x]:
            action[(f, (0, a))] = (0, P.act(a, f))
        for b in Q.stalks[x]:
            action[(f, (1, b))] = (1, Q.act(b, f))
    S = Presheaf(C, stalks, action, check=False)
    inl = NatTrans(P, S, {x: {a: (0, a) for a in P.stalks[x]} for x in C.objects}, check=False)
    inr = NatTrans(Q, S, {x: {b: (1, b) for b in Q.stalks[x]} for x in C.objects}, check=False)
    return S, inl, inr


def subpresheaf(P: Presheaf, keep: Mapping[str, Iterable[Elem]]) -> tuple[Presheaf, NatTrans]:
    """Restriction of ``P`` to the given elements, which must be closed under the action."""
    C = P.base
    stalks = {x: tuple(p for p in P.stalks[x] if p in set(keep.get(x, ()))) for x in C.objects}
    action = {}
    for f, (y, x) in C.arrows.items():
        for p in stalks[x]:
            action[(f, p)] = P.act(p, f)
    S = Presheaf(C, stalks, action)
    inc = NatTrans(S, P, {x: {p: p for p in stalks[x]} for x in C.objects}, check=False)
    return S, inc


def pullback(f: NatTrans, g: NatTrans) -> tuple[Presheaf, NatTrans, NatTrans]:
    """Stagewise fibre product of ``f: P -> R`` and ``g: Q -> R``."""
    if f.cod != g.cod:
        raise BaseMismatch("pullback of maps with different codomains")
    prod, p1, p2 = product(f.dom, g.dom)
    keep = {x: [e for e in prod.stalks[x] if f.comps[x][e[0]] == g.comps[x][e[1]]] for x in f.base.objects}
    P, inc = subpresheaf(prod, keep)
    return P, inc.then(p1), inc.then(p2)


def quotient(P: Presheaf, classes: Mapping[str, Mapping[Elem, Elem]]) -> tuple[Presheaf, NatTrans]:
    """Quotient by a stagewise equivalence given as ``classes[X][p] = representative``.

    The equivalence must be a congruence for the action.
    """
    C = P.base
    stalks = {}
    for x in C.objects:
        reps = []
        for p in P.stalks[x]:
            r = classes[x][p]
            if r not in reps:
                reps.append(r)
        stalks[x] = tuple(reps)
    action = {}
    for f, (y, x) in C.arrows.items():
        for p in P.stalks[x]:
            r = classes[x][p]
            img = classes[y][P.act(p, f)]
            if action.setdefault((f, r), img) != img:
                raise PresheafLawError("equivalence is not a congruence", witness=(f, p))
    Q = Presheaf(C, stalks, action)
    q = NatTrans(P, Q, {x: {p: classes[x][p] for p in P.stalks[x]} for x in C.objects}, check=False)
    return Q, q


def generators(P: Presheaf) -> list[tuple[str, Elem]]:
    """A generating set: every element is a restriction of one of these."""
    C = P.base
    elems = list(P.elements())
    pos = {x: i for i, x in enumerate(C.objects)}
    elems.sort(key=lambda v: (-len(P.principal(*v)), pos[v[0]]))
    covered: set = set()
    gens = []
    for v in elems:
        if v not in covered:
            gens.append(v)
            covered |= P.principal(*v)
    return gens


def canonical_cover(P: Presheaf, full: bool = False) -> tuple[Presheaf, NatTrans]:
    """Sum of representables over a generating set (all elements if ``full``) with its cover ``ε``.

    Every cover of ``P`` is hit by ``ε`` (representables are projective), so
    this cover is weakly initial.
    """
    C = P.base
    gens = list(P.elements()) if full else generators(P)
    stalks: dict[str, list] = {x: [] for x in C.objects}
    eps: dict[str, dict] = {x: {} for x in C.objects}
    for i, (z, g) in enumerate(gens):
        for w in C.objects:
            for a in C.hom(w, z):
                stalks[w].append((i, a))
                eps[w][(i, a)] = P.act(g, a)
    action = {}
    for f, (y, x) in C.arrows.items():
        for i, a in stalks[x]:
            action[(f, (i, a))] = (i, C.compose(a, f))
    S = Presheaf(C, stalks, action, name=f"cover({P.name})" if P.name else "", check=False)
    return S, NatTrans(S, P, eps, check=False)


def relabel(P: Presheaf) -> tuple[Presheaf, NatTrans]:
    """Isomorphic copy with labels ``0..n-1`` in each stalk, plus the iso."""
    C = P.base
    idx = {x: {p: i for i, p in enumerate(P.stalks[x])} for x in C.objects}
    stalks = {x: tuple(range(len(P.stalks[x]))) for x in C.objects}
    action = {}
    for f, (y, x) in C.arrows.items():
        for p in P.stalks[x]:
            action[(f, idx[x][p])] = idx[y][P.act(p, f)]
    Q = Presheaf(C, stalks, action, name=P.name, check=False)
    return Q, NatTrans(P, Q, idx, check=False)


def find_iso(P: Presheaf, Q: Presheaf) -> NatTrans | None:
    if P.sizes() != Q.sizes():
        return None
    return next(search_nat(P, Q, accept=lambda comps: all(
        len(set(c.values())) == len(c) for c in comps.values())), None)


def subpresheaves(P: Presheaf) -> list[dict[str, frozenset]]:
    """All subpresheaves, as per-object element sets."""
    elems = list(P.elements())
    out = []
    for mask in range(1 << len(elems)):
        chosen = {elems[i] for i in range(len(elems)) if mask >> i & 1}
        if all(P.principal(*v) <= chosen for v in chosen):
            out.append({x: frozenset(p for (y, p) in chosen if y == x) for x in P.base.objects})
    return out


# ---------------------------------------------------------------- enumeration


def _canonical_code(C: FiniteCategory, sizes: dict[str, int], tables: dict[str, tuple[int, ...]], arrows: list[str]):
    best = None
    perms = [list(itertools.permutations(range(sizes[x]))) for x in C.objects]
    for choice in itertools.product(*perms):
        sig = dict(zip(C.objects, choice))
        code = []
        for f in arrows:
            y, x = C.arrows[f]
            inv = [0] * sizes[x]
            for old, new in enumerate(sig[x]):
                inv[new] = old
            code.append(tuple(sig[y][tables[f][inv[i]]] for i in range(sizes[x])))
        code = tuple(code)
        if best is None or code < best:
            best = code
    return best


def enumerate_presheaves(C: FiniteCategory, max_stalk: int, up_to_iso: bool = True) -> Iterator[Presheaf]:
    """All presheaves on ``C`` with every stalk of size ``<= max_stalk``.

    Stalks are labelled ``0..n-1``.  Ordered by total size, then size vector.
    """
    arrows = C.non_identities()
    laws = [(f, g, C.compose(f, g)) for (f, g) in C.comp if f in arrows and g in arrows]
    size_vectors = sorted(
        itertools.product(range(max_stalk + 1), repeat=len(C.objects)), key=lambda v: (sum(v), v)
    )
    for vec in size_vectors:
        sizes = dict(zip(C.objects, vec))
        seen = set()
        tables: dict[str, tuple[int, ...]] = {}

        def consistent():
            for f, g, fg in laws:
                if f in tables and g in tables:
                    tf, tg = tables[f], tables[g]
                    tfg = tables.get(fg) if fg in tables else (None if fg in arrows else "id")
                    for p in range(sizes[C.cod(f)]):
                        lhs = tg[tf[p]]
                        if tfg == "id":
                            if lhs != p:
                                return False
                        elif tfg is not None and lhs != tfg[p]:
                            return False
            return True

        def rec(i):
            if i == len(arrows):
                yield dict(tables)
                return
            f = arrows[i]
            y, x = C.arrows[f]
            for table in itertools.product(range(sizes[y]), repeat=sizes[x]):
                tables[f] = table
                if consistent():
                    yield from rec(i + 1)
                del tables[f]

        for tabs in rec(0):
            if up_to_iso:
                code = _canonical_code(C, sizes, tabs, arrows)
                if code in seen:
                    continue
                seen.add(code)
            stalks = {x: tuple(range(sizes[x])) for x in C.objects}
            action = {(f, p): tabs[f][p] for f in arrows for p in range(sizes[C.cod(f)])}
            yield Presheaf(C, stalks, action, check=False)
