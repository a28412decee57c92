"""Finite sets: the default ambient, with limits, colimits, images, quotients and Π."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Mapping

from .core.ambient import Ambient
from .errors import NotEquivalenceRelation, ShapeMismatch

Label = Hashable


@dataclass(frozen=True)
class FinSetObj:
    carrier: tuple

    def __post_init__(self):
        object.__setattr__(self, "carrier", tuple(self.carrier))
        if len(set(self.carrier)) != len(self.carrier):
            raise ShapeMismatch("finite set has repeated labels", witness=self.carrier)

    def __len__(self):
        return len(self.carrier)

    def __iter__(self):
        return iter(self.carrier)

    def __contains__(self, x):
        return x in self._members

    @property
    def _members(self) -> frozenset:
        m = self.__dict__.get("_m")
        if m is None:
            m = frozenset(self.carrier)
            object.__setattr__(self, "_m", m)
        return m

    def index(self, x) -> int:
        return self.carrier.index(x)


def fset(*labels) -> FinSetObj:
    return FinSetObj(tuple(labels))


def nat(n: int) -> FinSetObj:
    """``{0, ..., n-1}``."""
    return FinSetObj(tuple(range(n)))


class FinSetMap:
    """A total function between finite sets."""

    __slots__ = ("dom", "cod", "images", "_table", "_hash")

    def __init__(self, dom: FinSetObj, cod: FinSetObj, table: Mapping | Callable, check: bool = True):
        self.dom = dom
        self.cod = cod
        if callable(table) and not isinstance(table, Mapping):
            images = tuple(table(x) for x in dom.carrier)
        else:
            try:
                images = tuple(table[x] for x in dom.carrier)
            except KeyError as exc:
                raise ShapeMismatch(f"label {exc.args[0]!r} of the domain is not mapped", witness=exc.args[0]) from None
        self.images = images
        self._table = None
        self._hash = None
        if check:
            for x, y in zip(dom.carrier, images):
                if y not in cod:
                    raise ShapeMismatch(f"{x!r} is sent to {y!r}, outside the codomain", witness=(x, y))

    @property
    def table(self) -> dict:
        if self._table is None:
            self._table = dict(zip(self.dom.carrier, self.images))
        return self._table

    def __call__(self, x):
        return self.table[x]

    def then(self, g: "FinSetMap") -> "FinSetMap":
        """``g ∘ self``."""
        if g.dom != self.cod:
            raise ShapeMismatch("maps are not composable")
        gt = g.table
        return FinSetMap(self.dom, g.cod, dict(zip(self.dom.carrier, (gt[y] for y in self.images))), check=False)

    def fibre(self, a) -> list:
        return [b for b, y in zip(self.dom.carrier, self.images) if y == a]

    def fibres(self) -> dict:
        out = {a: [] for a in self.cod.carrier}
        for b, a in zip(self.dom.carrier, self.images):
            out[a].append(b)
        return out

    def is_surjective(self) -> bool:
        return set(self.images) == set(self.cod.carrier)

    def is_injective(self) -> bool:
        return len(set(self.images)) == len(self.images)

    def __eq__(self, other):
        return (
            isinstance(other, FinSetMap)
            and self.dom == other.dom
            and self.cod == other.cod
            and self.images == other.images
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dom, self.cod, self.images))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{x!r}->{y!r}" for x, y in zip(self.dom.carrier, self.images))
        return f"FinSetMap({body})"


def identity(X: FinSetObj) -> FinSetMap:
    return FinSetMap(X, X, {x: x for x in X.carrier}, check=False)


def compose(g: FinSetMap, f: FinSetMap) -> FinSetMap:
    return f.then(g)


def constant(X: FinSetObj, Y: FinSetObj, y) -> FinSetMap:
    return FinSetMap(X, Y, {x: y for x in X.carrier})


def hom(X: FinSetObj, Y: FinSetObj) -> Iterator[FinSetMap]:
    for images in itertools.product(Y.carrier, repeat=len(X)):
        yield FinSetMap(X, Y, dict(zip(X.carrier, images)), check=False)


def surjections(X: FinSetObj, Y: FinSetObj) -> Iterator[FinSetMap]:
    need = set(Y.carrier)
    for f in hom(X, Y):
        if set(f.images) == need:
            yield f


def section(f: FinSetMap) -> FinSetMap:
    """A right inverse of a surjection: each point goes to the first label of its fibre."""
    if not f.is_surjective():
        raise ShapeMismatch("only surjections split", witness=f)
    fib = f.fibres()
    return FinSetMap(f.cod, f.dom, {a: fib[a][0] for a in f.cod.carrier}, check=False)


# ---------------------------------------------------------------- limits


def terminal() -> FinSetObj:
    return FinSetObj(("*",))


def initial() -> FinSetObj:
    return FinSetObj(())


def to_terminal(X: FinSetObj) -> FinSetMap:
    return FinSetMap(X, terminal(), {x: "*" for x in X.carrier}, check=False)


def product(X: FinSetObj, Y: FinSetObj) -> tuple[FinSetObj, FinSetMap, FinSetMap]:
    P = FinSetObj(tuple(itertools.product(X.carrier, Y.carrier)))
    return P, FinSetMap(P, X, lambda e: e[0], check=False), FinSetMap(P, Y, lambda e: e[1], check=False)


def pullback(f: FinSetMap, g: FinSetMap) -> tuple[FinSetObj, FinSetMap, FinSetMap]:
    """``{(x, y) | f x = g y}`` with its projections."""
    if f.cod != g.cod:
        raise ShapeMismatch("pullback of maps with different codomains")
    gf = g.fibres()
    P = FinSetObj(tuple((x, y) for x, a in zip(f.dom.carrier, f.images) for y in gf[a]))
    return P, FinSetMap(P, f.dom, lambda e: e[0], check=False), FinSetMap(P, g.dom, lambda e: e[1], check=False)


def pair(u: FinSetMap, v: FinSetMap, P: FinSetObj) -> FinSetMap:
    if u.dom != v.dom:
        raise ShapeMismatch("pairing maps with different domains")
    return FinSetMap(u.dom, P, {w: (u(w), v(w)) for w in u.dom.carrier})


def equalizer(f: FinSetMap, g: FinSetMap) -> tuple[FinSetObj, FinSetMap]:
    if f.dom != g.dom or f.cod != g.cod:
        raise ShapeMismatch("equalizer of non-parallel maps")
    E = FinSetObj(tuple(x for x in f.dom.carrier if f(x) == g(x)))
    return E, FinSetMap(E, f.dom, lambda x: x, check=False)


def exponential(X: FinSetObj, P: FinSetObj) -> tuple[FinSetObj, FinSetMap]:
    """``X^P`` (elements: image tuples aligned with ``P``) and ``ev: X^P × P -> X``."""
    XP = FinSetObj(tuple(itertools.product(X.carrier, repeat=len(P))))
    prod, _, _ = product(XP, P)
    pos = {p: i for i, p in enumerate(P.carrier)}
    ev = FinSetMap(prod, X, lambda e: e[0][pos[e[1]]], check=False)
    return XP, ev


# ---------------------------------------------------------------- images and quotients


def image_factorization(f: FinSetMap) -> tuple[FinSetMap, FinSetMap]:
    """``f = mono ∘ cover`` through the set-theoretic image (in codomain order)."""
    hit = set(f.images)
    I = FinSetObj(tuple(a for a in f.cod.carrier if a in hit))
    cover = FinSetMap(f.dom, I, f.table, check=False)
    mono = FinSetMap(I, f.cod, {a: a for a in I.carrier}, check=False)
    return cover, mono


def factorization_iso(first: tuple[FinSetMap, FinSetMap], second: tuple[FinSetMap, FinSetMap]) -> FinSetMap:
    """The unique iso between the middle objects of two (cover, mono) factorizations.

    Raises ShapeMismatch when no iso commutes with both triangles, or when more than one does.
    """
    (e1, m1), (e2, m2) = first, second
    found = [
        i
        for i in hom(e1.cod, e2.cod)
        if i.is_injective() and i.is_surjective() and e1.then(i) == e2 and i.then(m2) == m1
    ]
    if len(found) != 1:
        raise ShapeMismatch(f"expected exactly one comparison iso, found {len(found)}", witness=found)
    return found[0]


def _classes(X: FinSetObj, pairs: Iterable[tuple]) -> dict:
    """Representative (least label in carrier order) of the equivalence generated by ``pairs``."""
    parent = {x: x for x in X.carrier}
    pos = {x: i for i, x in enumerate(X.carrier)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            if pos[ra] < pos[rb]:
                parent[rb] = ra
            else:
                parent[ra] = rb
    return {x: find(x) for x in X.carrier}


def _as_pair_of_maps(X: FinSetObj, R) -> tuple[FinSetMap, FinSetMap]:
    if isinstance(R, tuple) and len(R) == 2 and all(isinstance(r, FinSetMap) for r in R):
        r0, r1 = R
        if r0.cod != X or r1.cod != X or r0.dom != r1.dom:
            raise ShapeMismatch("relation maps must be R -> X")
        return r0, r1
    pairs = tuple(dict.fromkeys(tuple(p) for p in R))
    for a, b in pairs:
        if a not in X or b not in X:
            raise ShapeMismatch(f"pair {(a, b)!r} is not in X × X", witness=(a, b))
    Rset = FinSetObj(pairs)
    return FinSetMap(Rset, X, lambda e: e[0], check=False), FinSetMap(Rset, X, lambda e: e[1], check=False)


def kernel_pair(q: FinSetMap) -> set[tuple]:
    return {(a, b) for a in q.dom.carrier for b in q.dom.carrier if q(a) == q(b)}


def check_equivalence(X: FinSetObj, r0: FinSetMap, r1: FinSetMap) -> set[tuple]:
    """The relation as a set of pairs; raises with a witness if it is not an equivalence relation."""
    pairs = list(zip(r0.images, r1.images))
    rel = set(pairs)
    if len(rel) != len(pairs):
        dup = next(p for p in rel if pairs.count(p) > 1)
        raise NotEquivalenceRelation("(r0, r1) is not jointly monic", witness=dup)
    for x in X.carrier:
        if (x, x) not in rel:
            raise NotEquivalenceRelation(f"not reflexive at {x!r}", witness=(x, x))
    for a, b in rel:
        if (b, a) not in rel:
            raise NotEquivalenceRelation(f"not symmetric at {(a, b)!r}", witness=(a, b))
    for a, b in rel:
        for c, d in rel:
            if b == c and (a, d) not in rel:
                raise NotEquivalenceRelation(f"not transitive at {(a, b)!r}, {(c, d)!r}", witness=((a, b), (c, d)))
    return rel


@dataclass
class ExactnessReport:
    kernel_pair_matches: bool
    coequalizes: bool
    stable_under: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.kernel_pair_matches and self.coequalizes and all(ok for _, ok in self.stable_under)


def _exact(r0: FinSetMap, r1: FinSetMap, q: FinSetMap) -> tuple[bool, bool]:
    rel = set(zip(r0.images, r1.images))
    coeq = all(q(a) == q(b) for a, b in rel)
    return kernel_pair(q) == rel and q.is_surjective(), coeq


def quotient_equiv(X: FinSetObj, R, sample: Iterable[FinSetMap] | None = None) -> tuple[FinSetMap, ExactnessReport]:
    """Quotient ``q: X -> X/R`` of an equivalence relation, with exactness checks.

    ``R`` is a collection of pairs or a pair of maps ``(r0, r1)``.  Exactness is
    re-checked after pulling back along every map in ``sample`` (default: every
    map from a set of size at most 2 into ``X/R``).
    """
    r0, r1 = _as_pair_of_maps(X, R)
    rel = check_equivalence(X, r0, r1)
    reps = _classes(X, rel)
    Q = FinSetObj(tuple(dict.fromkeys(reps[x] for x in X.carrier)))
    q = FinSetMap(X, Q, reps, check=False)
    kp, coeq = _exact(r0, r1, q)
    report = ExactnessReport(kp, coeq)
    if sample is None:
        sample = [f for n in range(3) for f in hom(nat(n), Q)]
    for p in sample:
        PX, pq, _ = pullback(p, q)
        pairs = [((w, x), (w2, x2)) for (w, x) in PX.carrier for (w2, x2) in PX.carrier if w == w2 and (x, x2) in rel]
        pr = FinSetObj(tuple(pairs))
        p0 = FinSetMap(pr, PX, lambda e: e[0], check=False)
        p1 = FinSetMap(pr, PX, lambda e: e[1], check=False)
        a, b = _exact(p0, p1, pq)
        report.stable_under.append((p, a and b))
    return q, report


# ---------------------------------------------------------------- colimits


def coproduct(X: FinSetObj, Y: FinSetObj) -> tuple[FinSetObj, FinSetMap, FinSetMap]:
    S = FinSetObj(tuple((0, x) for x in X.carrier) + tuple((1, y) for y in Y.carrier))
    return S, FinSetMap(X, S, lambda x: (0, x), check=False), FinSetMap(Y, S, lambda y: (1, y), check=False)


def copair(u: FinSetMap, v: FinSetMap, S: FinSetObj) -> FinSetMap:
    if u.cod != v.cod:
        raise ShapeMismatch("copairing maps with different codomains")
    return FinSetMap(S, u.cod, lambda e: u(e[1]) if e[0] == 0 else v(e[1]))


def coequalizer(f: FinSetMap, g: FinSetMap) -> tuple[FinSetObj, FinSetMap]:
    if f.dom != g.dom or f.cod != g.cod:
        raise ShapeMismatch("coequalizer of non-parallel maps")
    reps = _classes(f.cod, zip(f.images, g.images))
    Q = FinSetObj(tuple(dict.fromkeys(reps[y] for y in f.cod.carrier)))
    return Q, FinSetMap(f.cod, Q, reps, check=False)


def check_sums(X: FinSetObj, Y: FinSetObj, sample: Iterable[FinSetMap] = ()) -> dict:
    """Disjointness of ``X + Y`` and stability of the sum under pullback along ``sample`` maps into it."""
    S, inl, inr = coproduct(X, Y)
    P, _, _ = pullback(inl, inr)
    stable = []
    for p in sample:
        PL, _, _ = pullback(inl, p)
        PR, _, _ = pullback(inr, p)
        stable.append((p, len(PL) + len(PR) == len(p.dom)))
    return {"disjoint": len(P) == 0, "stable": stable, "ok": len(P) == 0 and all(ok for _, ok in stable)}


# ---------------------------------------------------------------- dependent products


def dependent_product(f: FinSetMap, g: FinSetMap) -> FinSetMap:
    """``Π_f g`` for ``f: B -> A`` and ``g: X -> B``, as a map over ``A``.

    The fibre over ``a`` consists of pairs ``(a, s)`` where ``s`` is a section of
    ``g`` over ``B_a``, written as the tuple of its values in ``B``-order.
    """
    if g.cod != f.dom:
        raise ShapeMismatch("dependent product needs cod(g) == dom(f)")
    gfib = g.fibres()
    elems = []
    for a in f.cod.carrier:
        bs = f.fibre(a)
        for choice in itertools.product(*(gfib[b] for b in bs)):
            elems.append((a, choice))
    P = FinSetObj(tuple(elems))
    return FinSetMap(P, f.cod, lambda e: e[0], check=False)


def pi_evaluation(f: FinSetMap, g: FinSetMap, pi: FinSetMap) -> FinSetMap:
    """Counit ``f*(Π_f g) -> X`` over ``B``: ``(b, (a, s)) ↦ s(b)``."""
    PB, _, _ = pullback(f, pi)
    pos = {b: f.fibre(f(b)).index(b) for b in f.dom.carrier}
    return FinSetMap(PB, g.dom, lambda e: e[1][1][pos[e[0]]], check=False)


def maps_over(h: FinSetMap, k: FinSetMap) -> Iterator[FinSetMap]:
    """Maps ``dom h -> dom k`` commuting with ``h`` and ``k`` (slice hom)."""
    if h.cod != k.cod:
        raise ShapeMismatch("slice hom needs a common base")
    kf = k.fibres()
    for images in itertools.product(*(kf[h(y)] for y in h.dom.carrier)):
        yield FinSetMap(h.dom, k.dom, dict(zip(h.dom.carrier, images)), check=False)


def check_pi_adjunction(f: FinSetMap, g: FinSetMap, h: FinSetMap) -> bool:
    """``Hom_{/B}(f*h, g) ≅ Hom_{/A}(h, Π_f g)`` via the transpose, checked exhaustively."""
    pi = dependent_product(f, g)
    PB, pb_b, pb_y = pullback(f, h)
    left = list(maps_over(pb_b, g))
    right = list(maps_over(h, pi))
    if len(left) != len(right):
        return False
    transposed = set()
    for u in right:
        # (b, y) ↦ u(y)'s section evaluated at b
        t = FinSetMap(
            PB,
            g.dom,
            lambda e: u(e[1])[1][f.fibre(f(e[0])).index(e[0])],
            check=False,
        )
        transposed.add(t)
    return transposed == set(left)


def beck_chevalley(f: FinSetMap, g: FinSetMap, k: FinSetMap) -> bool:
    """``k*(Π_f g) ≅ Π_{k*f}(k*g)`` fibrewise, for ``k: C -> A``."""
    pi = dependent_product(f, g)
    _, _, left = pullback(pi, k)
    PB, pb_b, pb_c = pullback(f, k)  # k*f = pb_c : PB -> C
    PX, _, px_pb = pullback(g, pb_b)  # k*g : PX -> PB
    right = dependent_product(pb_c, px_pb)
    return all(len(left.fibre(c)) == len(right.fibre(c)) for c in k.dom.carrier)


# ---------------------------------------------------------------- the ambient


class FinSet(Ambient):
    kind = "finset"
    regular = True

    def hom(self, X, Y):
        return hom(X, Y)

    def identity(self, X):
        return identity(X)

    def terminal(self):
        return terminal()

    def to_terminal(self, X):
        return to_terminal(X)

    def product(self, X, Y):
        return product(X, Y)

    def pullback(self, f, g):
        return pullback(f, g)

    def pair(self, u, v, P):
        return pair(u, v, P)

    def lifts(self, h, e):
        if h.cod != e.cod:
            raise ShapeMismatch("lift problem with mismatched codomains")
        ef = e.fibres()
        for images in itertools.product(*(ef[h(x)] for x in h.dom.carrier)):
            yield FinSetMap(h.dom, e.dom, dict(zip(h.dom.carrier, images)), check=False)

    def is_cover(self, f):
        return f.is_surjective()

    def is_mono(self, f):
        return f.is_injective()

    def find_iso(self, X, Y):
        if len(X) != len(Y):
            return None
        return FinSetMap(X, Y, dict(zip(X.carrier, Y.carrier)), check=False)

    def image(self, f):
        return image_factorization(f)

    def subobjects(self, X):
        out = []
        for mask in range(1 << len(X)):
            S = FinSetObj(tuple(x for i, x in enumerate(X.carrier) if mask >> i & 1))
            out.append(FinSetMap(S, X, lambda x: x, check=False))
        return out

    def canonical_cover(self, X):
        return identity(X)

    def objects_up_to(self, bound):
        for n in range(bound + 1):
            yield nat(n)

    def __repr__(self):
        return "FinSet"
