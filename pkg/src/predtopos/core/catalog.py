"""Small named base categories used throughout tests, demos and the CLI."""

from __future__ import annotations

from .category import FiniteCategory, free_category, monoid_category, preorder_category


def terminal() -> FiniteCategory:
    return free_category(["*"], {}, name="terminal")


def arrow() -> FiniteCategory:
    """``0 --u--> 1``."""
    return free_category(["0", "1"], {"u": ("0", "1")}, name="arrow")


def discrete(n: int) -> FiniteCategory:
    return free_category([str(i) for i in range(n)], {}, name=f"discrete{n}")


def span() -> FiniteCategory:
    return free_category(["a", "b", "c"], {"x": ("c", "a"), "y": ("c", "b")}, name="span")


def cospan() -> FiniteCategory:
    return free_category(["a", "b", "c"], {"x": ("a", "c"), "y": ("b", "c")}, name="cospan")


def chain3() -> FiniteCategory:
    return free_category(["0", "1", "2"], {"a": ("0", "1"), "b": ("1", "2")}, name="chain3")


def parallel() -> FiniteCategory:
    return free_category(["0", "1"], {"s": ("0", "1"), "t": ("0", "1")}, name="parallel")


def vee3() -> FiniteCategory:
    """Poset with a bottom below two incomparable tops."""
    return preorder_category(["0", "1", "2"], [("0", "1"), ("0", "2")], name="vee3")


def idempotent() -> FiniteCategory:
    mult = {("1", "1"): "1", ("1", "e"): "e", ("e", "1"): "e", ("e", "e"): "e"}
    return monoid_category(["1", "e"], mult, "1", name="idempotent")


def z2() -> FiniteCategory:
    mult = {("1", "1"): "1", ("1", "s"): "s", ("s", "1"): "s", ("s", "s"): "1"}
    return monoid_category(["1", "s"], mult, "1", name="z2")


def all_small() -> list[FiniteCategory]:
    return [terminal(), arrow(), discrete(2), span(), cospan(), chain3(), parallel(), vee3(), idempotent(), z2()]
