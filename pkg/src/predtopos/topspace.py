"""Finite topological spaces, used as a finite-limit ambient for the ex/lex completion."""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping

from .core.ambient import Ambient
from .errors import NotContinuous, ShapeMismatch, TopologyError


class FinSpace:
    """A finite carrier with a family of open sets closed under unions and intersections.

    Internally the topology is held as the minimal open neighbourhood of each
    point; ``opens`` is derived on demand.
    """

    def __init__(self, points: Iterable, opens: Iterable[Iterable] | None = None, name: str = "", check: bool = True,
                 nbhd: Mapping | None = None):
        self.points: tuple = tuple(points)
        self.name = name
        self._opens = None
        if nbhd is not None:
            self.nbhd = {x: frozenset(nbhd[x]) for x in self.points}
        else:
            given = frozenset(frozenset(u) for u in opens)
            self._opens = given
            if check:
                self._check()
            pts = frozenset(self.points)
            self.nbhd = {}
            for x in self.points:
                m = pts
                for u in given:
                    if x in u:
                        m &= u
                self.nbhd[x] = m

    @property
    def opens(self) -> frozenset:
        if self._opens is None:
            out = {frozenset()}
            for x in self.points:
                out |= {u | self.nbhd[x] for u in out}
            self._opens = frozenset(out)
        return self._opens

    def is_open(self, u) -> bool:
        u = frozenset(u)
        return all(self.nbhd[x] <= u for x in u)

    def _check(self):
        pts = frozenset(self.points)
        if len(pts) != len(self.points):
            raise TopologyError("repeated points", witness=self.points)
        if frozenset() not in self._opens:
            raise TopologyError("the empty set is not open")
        if pts not in self._opens:
            raise TopologyError("the carrier is not open")
        for u in self._opens:
            if not u <= pts:
                raise TopologyError(f"open {set(u)} has points outside the carrier", witness=u)
        for u, v in itertools.combinations(self._opens, 2):
            if u | v not in self._opens:
                raise TopologyError(f"union of {set(u)} and {set(v)} is not open", witness=(u, v))
            if u & v not in self._opens:
                raise TopologyError(f"intersection of {set(u)} and {set(v)} is not open", witness=(u, v))

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return isinstance(other, FinSpace) and self.points == other.points and self.nbhd == other.nbhd

    def __hash__(self):
        return hash((self.points, frozenset(self.nbhd.items())))

    def __repr__(self):
        return f"FinSpace({self.name or list(self.points)})"

    def closure_of_basis(self, basis: Iterable[frozenset]) -> frozenset:
        return generate_opens(self.points, basis)


def generate_opens(points: Iterable, subbasis: Iterable[Iterable]) -> frozenset[frozenset]:
    """The topology generated by ``subbasis`` on ``points``."""
    pts = tuple(points)
    subs = [frozenset(u) for u in subbasis]
    nbhd = {}
    for x in pts:
        m = frozenset(pts)
        for u in subs:
            if x in u:
                m &= u
        nbhd[x] = m
    return FinSpace(pts, nbhd=nbhd).opens


def discrete(points: Iterable) -> FinSpace:
    pts = tuple(points)
    return FinSpace(pts, name="discrete", nbhd={x: {x} for x in pts})


def indiscrete(points: Iterable) -> FinSpace:
    pts = tuple(points)
    return FinSpace(pts, [(), pts], name="indiscrete")


def sierpinski() -> FinSpace:
    """Points ``0, 1`` with ``{1}`` open."""
    return FinSpace((0, 1), [(), (1,), (0, 1)], name="sierpinski")


class ContinuousMap:
    __slots__ = ("dom", "cod", "table", "_hash")

    def __init__(self, dom: FinSpace, cod: FinSpace, table: Mapping, check: bool = True):
        self.dom = dom
        self.cod = cod
        self.table = {x: table[x] for x in dom.points}
        self._hash = None
        if check:
            for x, y in self.table.items():
                if y not in cod.nbhd:
                    raise ShapeMismatch(f"{x!r} is sent outside the codomain", witness=(x, y))
            for x in dom.points:
                if not all(self.table[z] in cod.nbhd[self.table[x]] for z in dom.nbhd[x]):
                    raise NotContinuous(f"image of the neighbourhood of {x!r} leaves the neighbourhood of its image",
                                        witness=cod.nbhd[self.table[x]])

    def __call__(self, x):
        return self.table[x]

    def then(self, g: "ContinuousMap") -> "ContinuousMap":
        return ContinuousMap(self.dom, g.cod, {x: g(y) for x, y in self.table.items()}, check=False)

    def is_surjective(self) -> bool:
        return set(self.table.values()) == set(self.cod.points)

    def is_injective(self) -> bool:
        return len(set(self.table.values())) == len(self.table)

    def is_quotient(self) -> bool:
        """Surjective, and ``V`` is open whenever its preimage is.

        In a finite space the quotient topology is the preorder generated by
        the images of the specialisation relation, so compare neighbourhoods
        with its transitive closure.
        """
        if not self.is_surjective():
            return False
        reach = {y: set() for y in self.cod.points}
        for x in self.dom.points:
            for z in self.dom.nbhd[x]:
                reach[self.table[x]].add(self.table[z])
        for y in self.cod.points:
            seen, todo = {y}, [y]
            while todo:
                w = todo.pop()
                for v in reach[w]:
                    if v not in seen:
                        seen.add(v)
                        todo.append(v)
            if frozenset(seen) != self.cod.nbhd[y]:
                return False
        return True

    def _key(self):
        return (self.dom, self.cod, tuple(self.table[x] for x in self.dom.points))

    def __eq__(self, other):
        return isinstance(other, ContinuousMap) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return f"ContinuousMap({self.table})"


def is_continuous(dom: FinSpace, cod: FinSpace, table: Mapping) -> bool:
    try:
        ContinuousMap(dom, cod, table)
    except (NotContinuous, ShapeMismatch, KeyError):
        return False
    return True


def subspace(X: FinSpace, keep: Iterable) -> FinSpace:
    keep_set = set(keep)
    pts = tuple(x for x in X.points if x in keep_set)
    return FinSpace(pts, nbhd={x: X.nbhd[x] & keep_set for x in pts})


def _continuous_maps(X: FinSpace, Y: FinSpace, candidates):
    """Backtracking over tables ``x -> candidates(x)`` keeping ``f(U_x) ⊆ U_f(x)``."""
    pts = X.points
    opts = [tuple(candidates(x)) for x in pts]
    table: dict = {}

    def consistent(x):
        fx = table[x]
        for z in X.nbhd[x]:
            if z in table and table[z] not in Y.nbhd[fx]:
                return False
        for w, fw in table.items():
            if x in X.nbhd[w] and fx not in Y.nbhd[fw]:
                return False
        return True

    def rec(i):
        if i == len(pts):
            yield ContinuousMap(X, Y, dict(table), check=False)
            return
        x = pts[i]
        for y in opts[i]:
            table[x] = y
            if consistent(x):
                yield from rec(i + 1)
            del table[x]

    return rec(0)


class FinTop(Ambient):
    """Finite spaces and continuous maps.  Only finite limits are provided."""

    kind = "fintop"
    regular = False

    def hom(self, X, Y):
        return _continuous_maps(X, Y, lambda x: Y.points)

    def identity(self, X):
        return ContinuousMap(X, X, {x: x for x in X.points}, check=False)

    def terminal(self):
        return FinSpace(("*",), [(), ("*",)], name="1", check=False)

    def to_terminal(self, X):
        return ContinuousMap(X, self.terminal(), {x: "*" for x in X.points}, check=False)

    def product(self, X, Y):
        pts = tuple(itertools.product(X.points, Y.points))
        P = FinSpace(pts, nbhd={(x, y): frozenset(itertools.product(X.nbhd[x], Y.nbhd[y])) for x, y in pts})
        p1 = ContinuousMap(P, X, {e: e[0] for e in pts}, check=False)
        p2 = ContinuousMap(P, Y, {e: e[1] for e in pts}, check=False)
        return P, p1, p2

    def pullback(self, f, g):
        if f.cod != g.cod:
            raise ShapeMismatch("pullback of maps with different codomains")
        prod, _, _ = self.product(f.dom, g.dom)
        P = subspace(prod, [e for e in prod.points if f(e[0]) == g(e[1])])
        p1 = ContinuousMap(P, f.dom, {e: e[0] for e in P.points}, check=False)
        p2 = ContinuousMap(P, g.dom, {e: e[1] for e in P.points}, check=False)
        return P, p1, p2

    def pair(self, u, v, P):
        return ContinuousMap(u.dom, P, {w: (u(w), v(w)) for w in u.dom.points})

    def equalizer(self, f, g):
        E = subspace(f.dom, [x for x in f.dom.points if f(x) == g(x)])
        return E, ContinuousMap(E, f.dom, {x: x for x in E.points}, check=False)

    def lifts(self, h, e):
        fibre: dict = {}
        for z in e.dom.points:
            fibre.setdefault(e(z), []).append(z)
        return _continuous_maps(h.dom, e.dom, lambda x: fibre.get(h(x), ()))

    def is_cover(self, f):
        return f.is_quotient()

    def is_mono(self, f):
        return f.is_injective()

    def objects_up_to(self, bound):
        for n in range(bound + 1):
            pts = tuple(range(n))
            subsets = [frozenset(c) for r in range(n + 1) for c in itertools.combinations(pts, r)]
            seen = set()
            for r in range(len(subsets) + 1):
                for chosen in itertools.combinations(subsets, r):
                    opens = frozenset(chosen)
                    if opens in seen:
                        continue
                    try:
                        X = FinSpace(pts, opens)
                    except TopologyError:
                        continue
                    seen.add(opens)
                    yield X

    def __repr__(self):
        return "FinTop"
