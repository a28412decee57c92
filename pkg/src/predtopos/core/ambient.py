"""The finite-limit environments that constructions are executed in.

Three concrete ambients implement this interface: finite sets
(:class:`predtopos.finset.FinSet`), finite topological spaces
(:class:`predtopos.topspace.FinTop`) and presheaves on a finite category
(:class:`predtopos.core.psh.FinPsh`).  Pullback and product objects always
have pairs ``(x, y)`` as elements, which is what :meth:`pair` relies on.
"""

from __future__ import annotations

from typing import Any, Iterator

Obj = Any
Map = Any


class Ambient:
    kind: str = "abstract"
    regular: bool = False

    # -- category structure
    def hom(self, X: Obj, Y: Obj) -> Iterator[Map]:
        raise NotImplementedError

    def identity(self, X: Obj) -> Map:
        raise NotImplementedError

    def compose(self, g: Map, f: Map) -> Map:
        """``g ∘ f``."""
        return f.then(g)

    def dom(self, f: Map) -> Obj:
        return f.dom

    def cod(self, f: Map) -> Obj:
        return f.cod

    # -- finite limits
    def terminal(self) -> Obj:
        raise NotImplementedError

    def product(self, X: Obj, Y: Obj) -> tuple[Obj, Map, Map]:
        raise NotImplementedError

    def pullback(self, f: Map, g: Map) -> tuple[Obj, Map, Map]:
        raise NotImplementedError

    def pair(self, u: Map, v: Map, P: Obj) -> Map:
        """The map ``w ↦ (u w, v w)`` into a product or pullback object ``P``."""
        raise NotImplementedError

    def to_terminal(self, X: Obj) -> Map:
        raise NotImplementedError

    # -- maps
    def lifts(self, h: Map, e: Map) -> Iterator[Map]:
        """Every ``k`` with ``e ∘ k == h``."""
        raise NotImplementedError

    def find_lift(self, h: Map, e: Map) -> Map | None:
        return next(self.lifts(h, e), None)

    def is_cover(self, f: Map) -> bool:
        raise NotImplementedError

    def is_mono(self, f: Map) -> bool:
        raise NotImplementedError

    def is_iso(self, f: Map) -> bool:
        return self.is_cover(f) and self.is_mono(f)

    def find_iso(self, X: Obj, Y: Obj) -> Map | None:
        return next((f for f in self.hom(X, Y) if self.is_iso(f)), None)

    # -- regular structure (not every ambient has it)
    def image(self, f: Map) -> tuple[Map, Map]:
        raise NotImplementedError(f"{self.kind} has no image factorization")

    def subobjects(self, X: Obj) -> list[Map]:
        raise NotImplementedError(f"{self.kind} does not enumerate subobjects")

    def canonical_cover(self, X: Obj) -> Map | None:
        """A weakly initial cover of ``X`` whose domain is projective, if the ambient exposes one."""
        return None

    # -- sampling
    def objects_up_to(self, bound: int) -> Iterator[Obj]:
        raise NotImplementedError
