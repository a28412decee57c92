"""Presheaves on a finite category as an ambient."""

from __future__ import annotations

from ..errors import BaseMismatch
from .ambient import Ambient
from .category import FiniteCategory
from . import presheaf as ps
from .presheaf import NatTrans, Presheaf


class FinPsh(Ambient):
    """``Psh(C)`` for a finite category ``C``; regular, with enough projectives."""

    kind = "finpsh"
    regular = True

    def __init__(self, base: FiniteCategory):
        self.base = base

    def __repr__(self):
        return f"FinPsh({self.base.name or self.base!r})"

    def __eq__(self, other):
        return isinstance(other, FinPsh) and other.base == self.base

    def __hash__(self):
        return hash(("finpsh", self.base))

    def _own(self, P: Presheaf) -> None:
        if P.base != self.base:
            raise BaseMismatch("presheaf lives on a different base", witness=P)

    def hom(self, X, Y):
        self._own(X)
        return ps.search_nat(X, Y)

    def identity(self, X):
        return ps.identity_nat(X)

    def terminal(self):
        return ps.terminal_presheaf(self.base)

    def initial(self):
        return ps.empty_presheaf(self.base)

    def to_terminal(self, X):
        T = self.terminal()
        return NatTrans(X, T, {x: {p: "*" for p in X.stalks[x]} for x in self.base.objects}, check=False)

    def product(self, X, Y):
        return ps.product(X, Y)

    def coproduct(self, X, Y):
        return ps.coproduct(X, Y)

    def pullback(self, f, g):
        return ps.pullback(f, g)

    def pair(self, u, v, P):
        comps = {x: {w: (u(x, w), v(x, w)) for w in u.dom.stalks[x]} for x in self.base.objects}
        return NatTrans(u.dom, P, comps)

    def equalizer(self, f, g):
        keep = {x: [p for p in f.dom.stalks[x] if f(x, p) == g(x, p)] for x in self.base.objects}
        return ps.subpresheaf(f.dom, keep)

    def lifts(self, h, e):
        if h.cod != e.cod:
            raise BaseMismatch("lift problem with mismatched codomains")
        fibre: dict = {}
        for x in self.base.objects:
            for z in e.dom.stalks[x]:
                fibre.setdefault((x, e(x, z)), []).append(z)
        return ps.search_nat(h.dom, e.dom, lambda x, p: fibre.get((x, h(x, p)), ()))

    def is_cover(self, f):
        return f.is_surjective()

    def is_mono(self, f):
        return f.is_injective()

    def find_iso(self, X, Y):
        return ps.find_iso(X, Y)

    def image(self, f):
        keep = {x: set(f.comps[x].values()) for x in self.base.objects}
        I, mono = ps.subpresheaf(f.cod, keep)
        cover = NatTrans(f.dom, I, f.comps, check=False)
        return cover, mono

    def subobjects(self, X):
        return [ps.subpresheaf(X, keep)[1] for keep in ps.subpresheaves(X)]

    def canonical_cover(self, X):
        return ps.canonical_cover(X)[1]

    def objects_up_to(self, bound):
        return ps.enumerate_presheaves(self.base, bound)

    def representable(self, x: str) -> Presheaf:
        return ps.yoneda_embed(self.base, x)

    def sum_of_representables(self, objs) -> tuple[Presheaf, list[NatTrans]]:
        """``y(c1) + ... + y(cn)`` with labels ``(i, arrow)`` and its injections."""
        C = self.base
        stalks = {w: [(i, a) for i, c in enumerate(objs) for a in C.hom(w, c)] for w in C.objects}
        action = {}
        for f, (y, x) in C.arrows.items():
            for i, a in stalks[x]:
                action[(f, (i, a))] = (i, C.compose(a, f))
        S = Presheaf(C, stalks, action, name="+".join(f"y{c}" for c in objs) or "0", check=False)
        injections = []
        for i, c in enumerate(objs):
            Y = ps.yoneda_embed(C, c)
            injections.append(NatTrans(Y, S, {w: {a: (i, a) for a in Y.stalks[w]} for w in C.objects}, check=False))
        return S, injections
