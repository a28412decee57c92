"""Classes of small maps, representations, and the two constructions linking
representable classes with strong collection squares.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

from ..core.presheaf import NatTrans, search_nat
from ..errors import AmbientMismatch, NotARepresentation, NotInClass, NotSurjective, PredToposError, SquareNotStrongCollection
from ..finset import FinSetMap, FinSetObj, nat, pullback, surjections
from .squares import Square, fibre, is_collection_square, is_covering_square


@dataclass
class Membership:
    value: bool
    witness: Any = None  # chosen c per point when true, failing point when false

    def __bool__(self):
        return self.value


class SmallMapClass:
    """Maps ``g: T -> S`` such that every fibre ``T_s`` is a quotient of some fibre ``D_c`` of ``rho``.

    Internally: ``(∀s ∈ S)(∃c ∈ C)(∃ surjection D_c ↠ T_s)``.  The class is
    represented by ``rho`` itself.  ``square`` records the strong collection
    square the class was built from, when there is one.
    """

    def __init__(self, rho, provenance: str = "", square: Square | None = None):
        if not isinstance(rho, (FinSetMap, NatTrans)):
            raise NotARepresentation("a class needs a finite-set or presheaf map as generator", witness=rho)
        self.rho = rho
        self.provenance = provenance
        self.square = square
        self._cache: dict = {}

    @classmethod
    def from_representation(cls, pi) -> "SmallMapClass":
        return cls(pi, provenance="representation")

    @property
    def representation(self):
        return self.rho

    @property
    def is_finset(self) -> bool:
        return isinstance(self.rho, FinSetMap)

    def __repr__(self):
        return f"<SmallMapClass {self.provenance or 'generated'} by {self.rho!r}>"

    # -- membership
    def fibre_sizes(self) -> set[int]:
        return {len(v) for v in self.rho.fibres().values()}

    def allowed_sizes(self) -> set[int]:
        """Fibre sizes ``k`` admitting a surjection from some ``D_c`` (finite sets only)."""
        out = set()
        for n in self.fibre_sizes():
            out |= {0} if n == 0 else set(range(1, n + 1))
        return out

    def member(self, g) -> Membership:
        hit = self._cache.get(g)
        if hit is None:
            hit = self._member_finset(g) if self.is_finset else self._member_presheaf(g)
            self._cache[g] = hit
        return hit

    def __contains__(self, g) -> bool:
        return bool(self.member(g))

    def _member_finset(self, g: FinSetMap) -> Membership:
        if not isinstance(g, FinSetMap):
            raise AmbientMismatch("class over finite sets queried with a presheaf map")
        dfib = self.rho.fibres()
        chosen = {}
        for s, Ts in g.fibres().items():
            c = next((c for c, Dc in dfib.items() if (len(Dc) >= len(Ts) and (len(Ts) > 0 or len(Dc) == 0))), None)
            if c is None:
                return Membership(False, s)
            chosen[s] = c
        return Membership(True, chosen)

    def _member_presheaf(self, g: NatTrans) -> Membership:
        if not isinstance(g, NatTrans) or g.base != self.rho.base:
            raise AmbientMismatch("class over presheaves queried with a map on another base")
        cat = g.base
        chosen = {}
        for Y in cat.objects:
            for s in g.cod.stalks[Y]:
                Ts = fibre(g, Y, s)
                targets = {Z: set(Ts.stalks[Z]) for Z in cat.objects}
                index: dict = {}
                for Z in cat.objects:
                    for e in Ts.stalks[Z]:
                        index.setdefault((Z, e[0]), []).append(e)
                found = None
                for c in self.rho.cod.stalks[Y]:
                    Dc = fibre(self.rho, Y, c)
                    k = next(search_nat(
                        Dc, Ts,
                        lambda Z, e: index.get((Z, e[0]), ()),
                        lambda comps: all(set(comps[Z].values()) == targets[Z] for Z in targets),
                    ), None)
                    if k is not None:
                        found = c
                        break
                if found is None:
                    return Membership(False, (Y, s))
                chosen[(Y, s)] = found
        return Membership(True, chosen)

    # -- representation diagram
    def represent(self, f: FinSetMap) -> dict:
        """Cover ``f`` by a pullback of the representation.

        Returns the maps of the diagram ``Y <- A' -> E`` over ``X <- B' -> U``
        with the left square covering and the right square a pullback.
        """
        m = self.member(f)
        if not m:
            raise NotInClass(f"{f!r} is not in the class", witness=m.witness)
        pi = self.rho
        pifib = pi.fibres()
        Bp = FinSetObj(tuple((x, m.witness[x]) for x in f.cod.carrier))
        to_U = FinSetMap(Bp, pi.cod, lambda e: e[1])
        to_X = FinSetMap(Bp, f.cod, lambda e: e[0])
        Ap, left, top = pullback(to_U, pi)
        fib = f.fibres()

        def hit(e):
            (x, u), el = e
            Eu = pifib[u]
            return fib[x][min(Eu.index(el), len(fib[x]) - 1)]

        to_Y = FinSetMap(Ap, f.dom, hit)
        cov = Square(f, left, to_X, to_Y)
        if not is_covering_square(cov):
            raise PredToposError("representation diagram is not covering", witness=f)
        return {"B'": Bp, "A'": Ap, "left": cov, "pullback": (left, to_U, top, pi)}


def small_class_from_square(sq: Square) -> SmallMapClass:
    """The class generated by the left map of a covering strong collection square."""
    if not is_covering_square(sq):
        raise SquareNotStrongCollection("square is not covering", witness=is_covering_square(sq).witness)
    res = is_collection_square(sq, strong=True)
    if not res:
        raise SquareNotStrongCollection("square is not a strong collection square", witness=res.witness)
    cls = SmallMapClass(sq.g, provenance="square", square=sq)
    if not cls.member(sq.f):
        raise PredToposError("generated class misses the right-hand map", witness=sq.f)
    return cls


def rp_square_from_representation(f: FinSetMap, cls: SmallMapClass, check: bool = True) -> Square:
    """The covering strong collection square built from a representation ``π: E -> U``.

    ``C = {(a, u, p) | p: E_u ↠ B_a}`` and ``D = {(a, u, p, e) | e ∈ E_u}``;
    surjections ``p`` are written as image tuples in ``E_u`` order.
    """
    pi = cls.representation
    if not isinstance(pi, FinSetMap) or not isinstance(f, FinSetMap):
        raise AmbientMismatch("the construction is implemented over finite sets")
    if not cls.member(pi):
        raise NotARepresentation("π is not in its class", witness=pi)
    if not cls.member(f):
        raise NotInClass("f is not in the class", witness=cls.member(f).witness)
    Efib = pi.fibres()
    Bfib = f.fibres()
    Cel, Del = [], []
    for a in f.cod.carrier:
        Ba = FinSetObj(tuple(Bfib[a]))
        for u in pi.cod.carrier:
            Eu = FinSetObj(tuple(Efib[u]))
            for s in surjections(Eu, Ba):
                c = (a, u, s.images)
                Cel.append(c)
                Del.extend(c + (e,) for e in Eu.carrier)
    C, D = FinSetObj(tuple(Cel)), FinSetObj(tuple(Del))
    pos = {u: {e: i for i, e in enumerate(Efib[u])} for u in pi.cod.carrier}
    g = FinSetMap(D, C, lambda d: d[:3], check=False)
    p = FinSetMap(C, f.cod, lambda c: c[0], check=False)
    q = FinSetMap(D, f.dom, lambda d: d[2][pos[d[1]][d[3]]], check=False)
    sq = Square(f, g, p, q)
    if check:
        if not is_covering_square(sq):
            raise PredToposError("constructed square is not covering", witness=is_covering_square(sq).witness)
        res = is_collection_square(sq, strong=True)
        if not res:
            raise PredToposError("constructed square is not strong collection", witness=res.witness)
    return sq


# ---------------------------------------------------------------- the axioms


@dataclass
class AxiomCheck:
    axiom: str
    instance: str
    passed: bool
    witness: Any = None


@dataclass
class AxiomReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_axiom(self, axiom: str) -> list:
        return [c for c in self.checks if c.axiom == axiom]


def check_s1(cls: SmallMapClass, f: FinSetMap, k: FinSetMap) -> AxiomCheck:
    """Pullback of a member along ``k`` is a member."""
    _, _, g = pullback(f, k)
    ok = (not cls.member(f)) or bool(cls.member(g))
    return AxiomCheck("S1", f"pullback along {k!r}", ok, None if ok else g)


def check_s2(cls: SmallMapClass, sq: Square) -> AxiomCheck:
    """A covering square with a member on the left has a member on the right."""
    if not is_covering_square(sq):
        return AxiomCheck("S2", "square is not covering", True, "not applicable")
    ok = (not cls.member(sq.g)) or bool(cls.member(sq.f))
    return AxiomCheck("S2", "given covering square", ok, None if ok else sq)


def s2_search(cls: SmallMapClass, f: FinSetMap, bound: int) -> AxiomCheck:
    """Search every covering square onto ``f`` with ``|C|, |D| <= bound`` for an S2 counterexample.

    Squares are enumerated up to isomorphism: a covering square is determined,
    as far as membership is concerned, by the multiset of pairs
    ``(p(c), |D_c|)``, subject to ``|D_c| >= |B_p(c)|`` and ``D_c = ∅`` iff
    ``B_p(c) = ∅``.  Each profile is realised by a concrete square and
    re-checked.
    """
    A = list(f.cod.carrier)
    fib = f.fibres()
    options = []
    for a in A:
        n = len(fib[a])
        sizes = [0] if n == 0 else list(range(n, bound + 1))
        options.extend((a, k) for k in sizes)
    examined = 0

    def build(profile):
        C = nat(len(profile))
        D = FinSetObj(tuple((c, j) for c, (_, k) in enumerate(profile) for j in range(k)))
        g = FinSetMap(D, C, lambda d: d[0], check=False)
        p = FinSetMap(C, f.cod, lambda c: profile[c][0], check=False)
        q = FinSetMap(D, f.dom, lambda d: fib[profile[d[0]][0]][min(d[1], len(fib[profile[d[0]][0]]) - 1)], check=False)
        return Square(f, g, p, q)

    def rec(start, profile, dsize):
        nonlocal examined
        if profile and {a for a, _ in profile} == set(A):
            examined += 1
            sq = build(profile)
            if is_covering_square(sq) and cls.member(sq.g) and not cls.member(f):
                return sq
        if len(profile) == bound:
            return None
        for i in range(start, len(options)):
            a, k = options[i]
            if dsize + k > bound:
                continue
            hit = rec(i, profile + [options[i]], dsize + k)
            if hit is not None:
                return hit
        return None

    if not A:
        return AxiomCheck("S2", "empty codomain", True, "not applicable")
    found = rec(0, [], 0)
    return AxiomCheck("S2", f"exhaustive search at bound {bound} ({examined} squares)", found is None, found)


def _strong_lift(sq: Square, c, r: FinSetMap):
    """``c'`` with ``p(c') = p(c)`` and ``k: D_c' -> F`` with ``r∘k`` a cover over ``B``."""
    Dfib = sq.g.fibres()
    Dc = set(Dfib[c])
    for c2 in [c] + [x for x in sq.C.carrier if x != c and sq.p(x) == sq.p(c)]:
        src = Dfib[c2]
        choices = [[z for z in r.dom.carrier if sq.q(r(z)) == sq.q(d)] for d in src]
        for pick in itertools.product(*choices):
            if {r(z) for z in pick} == Dc:
                return c2, dict(zip(src, pick))
    return None


def check_s3(cls: SmallMapClass, p: FinSetMap, f: FinSetMap) -> AxiomCheck:
    """Build the covering square of the collection axiom for a cover ``p: Y ↠ X`` and member ``f: X -> A``."""
    if not p.is_surjective() or p.cod != f.dom:
        return AxiomCheck("S3", "not a cover of dom(f)", True, "not applicable")
    mem = cls.member(f)
    if not mem:
        return AxiomCheck("S3", "f is not a member", True, "not applicable")
    Xfib = f.fibres()
    rows = []  # (a, c', {d' : (d, y)})
    if cls.square is None:
        # any class over finite sets: covers split, so f itself works
        sec = {x: p.fibre(x)[0] for x in p.cod.carrier}
        Z = f.dom
        g = f
        z_to_y = FinSetMap(Z, p.dom, sec)
        h = FinSetMap(f.cod, f.cod, {a: a for a in f.cod.carrier})
    else:
        sq = cls.square
        Dfib = sq.g.fibres()
        for a in f.cod.carrier:
            Xa = FinSetObj(tuple(Xfib[a]))
            c = mem.witness[a]
            Dc = FinSetObj(tuple(Dfib[c]))
            r0 = next(surjections(Dc, Xa))
            F = FinSetObj(tuple((d, y) for d in Dc.carrier for y in p.dom.carrier if p(y) == r0(d)))
            r = FinSetMap(F, Dc, lambda e: e[0], check=False)
            lift = _strong_lift(sq, c, r)
            if lift is None:
                return AxiomCheck("S3", f"fibre over {a!r}", False, {"a": a, "c": c})
            rows.append((a, lift[0], lift[1]))
        B = FinSetObj(tuple((a, c2) for a, c2, _ in rows))
        Z = FinSetObj(tuple((a, c2, d) for a, c2, k in rows for d in k))
        kmap = {(a, c2): k for a, c2, k in rows}
        g = FinSetMap(Z, B, lambda z: z[:2], check=False)
        z_to_y = FinSetMap(Z, p.dom, lambda z: kmap[z[:2]][z[2]][1], check=False)
        h = FinSetMap(B, f.cod, lambda b: b[0], check=False)
    out = Square(f, g, h, z_to_y.then(p))
    ok = bool(is_covering_square(out)) and bool(cls.member(g))
    return AxiomCheck("S3", f"cover {p!r}", ok, out)


def standard_instances(cls: SmallMapClass, bound: int = 3, limit: int = 40) -> list:
    """A deterministic battery of S1/S2/S3 instances built from members between small sets."""
    members = []
    for n in range(bound + 1):
        for m in range(1, bound + 1):
            for images in itertools.product(range(m), repeat=n):
                g = FinSetMap(nat(n), nat(m), dict(enumerate(images)), check=False)
                if cls.member(g):
                    members.append(g)
    members = members[:limit]
    inst = []
    for g in members:
        for n in range(3):
            for k in itertools.islice(_maps(nat(n), g.cod), 4):
                inst.append(("S1", g, k))
        inst.append(("S2-search", g, bound + 1))
        for n in range(len(g.dom), len(g.dom) + 2):
            for p in itertools.islice(surjections(nat(n), g.dom), 2):
                inst.append(("S3", p, g))
    return inst


def _maps(X: FinSetObj, Y: FinSetObj):
    for images in itertools.product(Y.carrier, repeat=len(X)):
        yield FinSetMap(X, Y, dict(zip(X.carrier, images)), check=False)


def check_small_axioms(cls: SmallMapClass, instances=None, bound: int = 3) -> AxiomReport:
    """Run S1/S2/S3 on ``instances`` (default: :func:`standard_instances`).

    Instances are tuples ``("S1", f, k)``, ``("S2", square)``,
    ``("S2-search", f, bound)`` or ``("S3", p, f)``.
    """
    if not cls.is_finset:
        raise AmbientMismatch("axiom checks are implemented over finite sets")
    report = AxiomReport()
    for inst in instances if instances is not None else standard_instances(cls, bound):
        kind = inst[0]
        if kind == "S1":
            report.checks.append(check_s1(cls, inst[1], inst[2]))
        elif kind == "S2":
            report.checks.append(check_s2(cls, inst[1]))
        elif kind == "S2-search":
            report.checks.append(s2_search(cls, inst[1], inst[2]))
        elif kind == "S3":
            report.checks.append(check_s3(cls, inst[1], inst[2]))
        else:
            raise ValueError(f"unknown instance kind {kind!r}")
    return report


# ---------------------------------------------------------------- AMC for finite sets


@dataclass
class SetAmcVerdict:
    value: bool
    examined: int
    witness: Any = None

    def __bool__(self):
        return self.value


def _canonical_surjections(X: FinSetObj, z_bound: int):
    """One surjection ``Z ↠ X`` per isomorphism class over ``X``, with ``|Z| <= z_bound``."""
    n = len(X)
    for total in range(n, z_bound + 1):
        for sizes in itertools.product(range(1, total + 1), repeat=n):
            if sum(sizes) != total:
                continue
            labels = [x for x, k in zip(X.carrier, sizes) for _ in range(k)]
            yield FinSetMap(nat(total), X, dict(enumerate(labels)), check=False)


def set_amc_check(X: FinSetObj, family: list, z_bound: int) -> SetAmcVerdict:
    """Every surjection ``q: Z ↠ X`` (``|Z| <= z_bound``) is factored through by some family member."""
    for i, pi in enumerate(family):
        if pi.cod != X or not pi.is_surjective():
            raise NotSurjective(f"family member {i} is not a surjection onto X", witness=i)
    examined = 0
    for q in _canonical_surjections(X, z_bound):
        examined += 1
        qf = q.fibres()
        ok = False
        for pi in family:
            choices = [qf[pi(y)] for y in pi.dom.carrier]
            if all(choices):
                lift = FinSetMap(pi.dom, q.dom, {y: ch[0] for y, ch in zip(pi.dom.carrier, choices)}, check=False)
                ok = lift.then(q) == pi
                if ok:
                    break
        if not ok:
            return SetAmcVerdict(False, examined, q)
    return SetAmcVerdict(True, examined)
