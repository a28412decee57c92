import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import presheaves_on, small_categories
from predtopos.core import (
    FiniteCategory,
    NatTrans,
    Presheaf,
    catalog,
    presheaf_hom,
    validate_category,
    yoneda_embed,
)
from predtopos.core.presheaf import empty_presheaf, product, subpresheaves, terminal_presheaf
from predtopos.errors import BaseMismatch, MissingIdentity, NonAssociative, PresheafLawError, UnknownObject


def arrow_table(unit_ok=True):
    arrows = {"id_0": ("0", "0"), "id_1": ("1", "1"), "u": ("0", "1")}
    comp = {("id_0", "id_0"): "id_0", ("id_1", "id_1"): "id_1", ("id_1", "u"): "u", ("u", "id_0"): "u"}
    cat = FiniteCategory(["0", "1"], arrows, comp)
    if not unit_ok:
        cat.arrows["v"] = ("0", "1")
        cat.comp[("u", "id_0")] = "v"
        cat.comp[("id_1", "v")] = "v"
        cat.comp[("v", "id_0")] = "v"
    return cat


class TestValidateCategory:
    def test_terminal(self):
        cat = FiniteCategory(["*"], {"id_*": ("*", "*")}, {("id_*", "id_*"): "id_*"})
        assert validate_category(cat) is cat

    def test_arrow(self):
        assert validate_category(arrow_table()).hom("0", "1") == ["u"]

    def test_broken_unit_law(self):
        with pytest.raises(MissingIdentity) as e:
            validate_category(arrow_table(unit_ok=False))
        assert e.value.witness == ("u", "id_0")

    def test_non_associative(self):
        # monoid {1, a, b} with a∘a = b, b∘a = a but a∘b = b: (a∘a)∘a = b∘a = a, a∘(a∘a) = a∘b = b
        els = ["1", "a", "b"]
        mult = {("1", x): x for x in els} | {(x, "1"): x for x in els}
        mult |= {("a", "a"): "b", ("b", "a"): "a", ("a", "b"): "b", ("b", "b"): "b"}
        cat = FiniteCategory(["*"], {e: ("*", "*") for e in els}, mult, {"*": "1"})
        with pytest.raises(NonAssociative):
            validate_category(cat)

    @given(small_categories())
    def test_generated_categories_validate(self, cat):
        assert validate_category(cat) is cat


class TestYoneda:
    def test_terminal(self):
        y = yoneda_embed(catalog.terminal(), "*")
        assert y.sizes() == {"*": 1}

    def test_arrow_at_1(self):
        y = yoneda_embed(catalog.arrow(), "1")
        assert set(y.stalks["1"]) == {"id_1"} and set(y.stalks["0"]) == {"u"}

    def test_arrow_at_0(self):
        y = yoneda_embed(catalog.arrow(), "0")
        assert y.stalks["1"] == () and set(y.stalks["0"]) == {"id_0"}

    def test_unknown_object(self):
        with pytest.raises(UnknownObject):
            yoneda_embed(catalog.arrow(), "2")

    @given(small_categories(max_objects=4))
    def test_full_and_faithful(self, cat):
        for x in cat.objects:
            for y in cat.objects:
                assert len(presheaf_hom(yoneda_embed(cat, x), yoneda_embed(cat, y))) == len(cat.hom(x, y))


class TestPresheafHom:
    def test_representable_endo(self):
        y1 = yoneda_embed(catalog.arrow(), "1")
        assert len(presheaf_hom(y1, y1)) == 1

    @given(st.sampled_from(catalog.all_small()), st.data())
    def test_terminal_and_initial(self, cat, data):
        P = data.draw(st.sampled_from(presheaves_on(cat)))
        assert len(presheaf_hom(P, terminal_presheaf(cat))) == 1
        assert len(presheaf_hom(empty_presheaf(cat), P)) == 1

    def test_base_mismatch(self):
        with pytest.raises(BaseMismatch):
            presheaf_hom(terminal_presheaf(catalog.arrow()), terminal_presheaf(catalog.span()))

    @given(st.sampled_from(catalog.all_small()), st.data())
    def test_homs_are_natural(self, cat, data):
        P = data.draw(st.sampled_from(presheaves_on(cat)))
        Q = data.draw(st.sampled_from(presheaves_on(cat)))
        for h in presheaf_hom(P, Q):
            for f, (d, c) in cat.arrows.items():
                for p in P.stalks[c]:
                    assert h(d, P.act(p, f)) == Q.act(h(c, p), f)


class TestPresheafLaws:
    def test_action_into_wrong_stalk(self):
        with pytest.raises(PresheafLawError):
            Presheaf(catalog.arrow(), {"1": ["x"], "0": ["d"]}, {("u", "x"): "nope"})

    def test_non_functorial_action(self):
        # z2: s∘s = 1 so acting twice by s must be the identity
        with pytest.raises(PresheafLawError):
            Presheaf(catalog.z2(), {"*": ["a", "b", "c"]}, {("s", "a"): "b", ("s", "b"): "c", ("s", "c"): "a"})

    def test_non_natural_transformation(self):
        C = catalog.arrow()
        P = Presheaf(C, {"1": ["x", "y"], "0": ["d", "e"]}, {("u", "x"): "d", ("u", "y"): "e"})
        with pytest.raises(PresheafLawError):
            NatTrans(P, P, {"1": {"x": "x", "y": "y"}, "0": {"d": "e", "e": "d"}})

    @given(st.sampled_from(catalog.all_small()), st.data())
    def test_constructions_satisfy_laws(self, cat, data):
        P = data.draw(st.sampled_from(presheaves_on(cat)))
        Q = data.draw(st.sampled_from(presheaves_on(cat)))
        PQ, p1, p2 = product(P, Q)
        assert PQ.sizes() == {x: len(P.stalks[x]) * len(Q.stalks[x]) for x in cat.objects}
        for keep in subpresheaves(P):
            for f, (d, c) in cat.arrows.items():
                assert all(P.act(p, f) in keep[d] for p in keep[c])

    def test_empty_category_and_stalks_are_legal(self):
        E = validate_category(FiniteCategory([], {}, {}))
        P = Presheaf(E, {}, {})
        assert P.total_size() == 0
        assert len(presheaf_hom(P, P)) == 1
