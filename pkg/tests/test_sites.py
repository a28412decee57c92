import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gen import random_site
from oracles import cov_level_counts
from predtopos.core import catalog
from predtopos.core.presheaf import coproduct, empty_presheaf, find_iso, terminal_presheaf, yoneda_embed
from predtopos.errors import ShapeMismatch, SiteAxiomCViolated, TopologyMismatch
from predtopos.sites import (
    Site,
    as_sheaf,
    check_L,
    check_M,
    check_site,
    check_universal,
    compatible_families,
    demo_site,
    family,
    generate_cov,
    generated_sieve,
    is_collection_site,
    is_sheaf,
    maximal_topology,
    refine_to_collection_site,
    sheaf_colimits,
    sheaf_equivalence_check,
    sheafify,
    sheaves_up_to,
    sieve_saturate,
    two_over_one,
    unit_is_iso,
)
from conftest import presheaves_on

ARROW = catalog.arrow()
SITE_CATS = [catalog.terminal(), catalog.arrow(), catalog.span(), catalog.cospan(), catalog.chain3(), catalog.vee3()]


def maximal_site(cat):
    return Site(cat, {C: [(cat.id(C),)] for C in cat.objects})


def random_sites(n, seed=0):
    rng = random.Random(seed)
    return [random_site(rng, rng.choice(SITE_CATS)) for _ in range(n)]


def multiset(s):
    return {C: sorted(sorted(U.arrows) for U in s.cov[C]) for C in s.cat.objects}


sites = st.builds(lambda seed, cat: random_site(random.Random(seed), cat), st.integers(0, 10**6), st.sampled_from(SITE_CATS))


class TestAxioms:
    @pytest.mark.parametrize("cat", SITE_CATS, ids=lambda c: c.name)
    def test_maximal_families_pass(self, cat):
        s = maximal_site(cat)
        assert check_site(s) and check_M(s) and check_L(s)

    def test_demo_passes_C(self):
        assert check_site(demo_site())

    def test_missing_family_below(self):
        rep = check_site(Site(ARROW, {"1": [("u",)]}))
        assert not rep and rep.witness["arrow"] == "u"

    def test_demo_lacks_M_at_top(self):
        rep = check_M(demo_site())
        assert not rep and rep.witness == {"object": "1"}

    def test_family_helper(self):
        U = family(ARROW, "1", "u", "u")
        assert len(U) == 2 and U.arrows == ("u", "u")

    def test_bad_codomain_rejected(self):
        with pytest.raises(ShapeMismatch):
            Site(ARROW, {"0": [("u",)]})

    @given(sites)
    def test_generated_sites_satisfy_C(self, s):
        assert check_site(s)


class TestCollection:
    def test_demo(self):
        v = is_collection_site(demo_site())
        assert v and "split" in v.note
        assert is_collection_site(demo_site(), strong=True)

    def test_rejects_other_presentations(self):
        with pytest.raises(ShapeMismatch):
            is_collection_site(maximal_topology(ARROW))

    @given(sites, st.booleans())
    def test_finite_sites_always_collection(self, s, strong):
        assert is_collection_site(s, strong=strong)

    def test_refine_demo_isomorphic(self):
        s = demo_site()
        assert multiset(refine_to_collection_site(s)) == multiset(s)

    def test_refine_keeps_duplicates(self):
        s = Site(ARROW, {"1": [("u", "u")], "0": [("id_0",)]})
        assert multiset(refine_to_collection_site(s))["1"] == [["u", "u"]]

    @given(sites)
    def test_refine_sheaf_equivalent(self, s):
        assert sheaf_equivalence_check(s, refine_to_collection_site(s), 1)


def level_recurrence(s, depth):
    return cov_level_counts({C: [U.arrows for U in s.cov[C]] for C in s.cat.objects}, s.cat.dom, s.cat.objects, depth)


class TestGenerateCov:
    def test_no_families(self):
        g = generate_cov(Site(ARROW, {}), 3)
        for C in ARROW.objects:
            assert [U.arrows for _, U in g.families[C]] == [(ARROW.id(C),)]

    def test_demo_levels(self):
        g = generate_cov(demo_site(), 4)
        assert [L["1"] for L in g.level_sizes] == [1, 2, 3, 4, 5]
        assert [L["0"] for L in g.level_sizes] == [1, 2, 3, 4, 5]
        assert g.equation_holds()

    def test_depth_zero(self):
        g = generate_cov(demo_site(), 0)
        assert {C: len(v) for C, v in g.families.items()} == {"0": 1, "1": 1}

    def test_negative_depth(self):
        with pytest.raises(ValueError):
            generate_cov(demo_site(), -1)

    def test_requires_C(self):
        with pytest.raises(SiteAxiomCViolated):
            generate_cov(Site(ARROW, {"1": [("u",)]}), 2)

    def test_output_passes_axioms(self):
        g = generate_cov(demo_site(), 2)
        assert check_M(g.site) and check_site(g.site) and check_L(g.site)

    def test_composite_arrows(self):
        g = generate_cov(demo_site(), 2)
        arrows = {U.arrows for _, U in g.families["1"]}
        assert arrows == {("id_1",), ("u",)}

    @given(sites, st.integers(0, 3))
    def test_level_sizes_follow_recurrence(self, s, depth):
        g = generate_cov(s, depth)
        assert g.level_sizes == level_recurrence(s, depth)
        assert g.equation_holds()

    @given(sites)
    def test_identity_family_always_present(self, s):
        assert check_M(generate_cov(s, 1).site)


class TestSaturation:
    def test_no_families_gives_maximal(self):
        assert sieve_saturate(Site(ARROW, {})) == maximal_topology(ARROW)

    def test_demo(self):
        J = sieve_saturate(demo_site())
        assert J.sieves["1"] == {frozenset({"u"}), frozenset({"u", "id_1"})}
        assert J.sieves["0"] == {frozenset({"id_0"})}

    @given(sites)
    def test_is_topology(self, s):
        assert all(sieve_saturate(s).check().values())

    @given(sites)
    def test_idempotent(self, s):
        J = sieve_saturate(s)
        again = Site(s.cat, {C: [tuple(sorted(S)) for S in J.sieves[C] if S] for C in s.cat.objects})
        assert sieve_saturate(again) == J

    def test_generated_sieve(self):
        assert generated_sieve(ARROW, "1", ["u"]) == frozenset({"u"})


class TestCompatibleFamilies:
    @pytest.mark.parametrize("P", presheaves_on(ARROW, 2)[:12], ids=str)
    def test_identity_family(self, P):
        fams = compatible_families(P, ("id_1",))
        assert sorted(fams, key=repr) == sorted(((p,) for p in P.stalks["1"]), key=repr)

    def test_demo(self):
        assert compatible_families(two_over_one(), ("u",)) == [("d",)]

    def test_empty_stalk(self):
        assert compatible_families(empty_presheaf(ARROW), ("u",)) == []
        assert compatible_families(empty_presheaf(ARROW), ()) == [()]

    def test_repeats_must_agree(self):
        P = terminal_presheaf(ARROW)
        assert len(compatible_families(P, ("u", "u"))) == 1
        Q = yoneda_embed(ARROW, "0")
        assert compatible_families(Q, ("u", "u")) == [("id_0", "id_0")]


class TestSheaves:
    @pytest.mark.parametrize("cat", SITE_CATS, ids=lambda c: c.name)
    def test_maximal_topology_everything_sheaf(self, cat):
        J = maximal_topology(cat)
        assert all(is_sheaf(P, J) for P in presheaves_on(cat, 1))

    def test_two_over_one_not_sheaf(self):
        v = is_sheaf(two_over_one(), demo_site())
        assert not v
        assert v.witness["elements"] == ("d",) and v.witness["amalgamations"] == ["x", "x'"]

    def test_representables(self):
        assert is_sheaf(yoneda_embed(ARROW, "1"), demo_site())
        v = is_sheaf(yoneda_embed(ARROW, "0"), demo_site())
        assert not v and v.witness["amalgamations"] == []


class TestSheafify:
    def test_sheaf_unit_iso(self):
        res = sheafify(yoneda_embed(ARROW, "1"), demo_site())
        assert unit_is_iso(res)

    def test_two_over_one(self):
        res = sheafify(two_over_one(), demo_site())
        assert res.sheaf.sizes() == {"0": 1, "1": 1}
        assert res.unit.comps["1"]["x"] == res.unit.comps["1"]["x'"]

    def test_empty_stays_empty(self):
        res = sheafify(empty_presheaf(ARROW), demo_site())
        assert res.sheaf.sizes() == {"0": 0, "1": 0}

    @given(sites, st.data())
    def test_result_is_sheaf_and_idempotent(self, s, data):
        P = data.draw(st.sampled_from(presheaves_on(s.cat, 2)))
        res = sheafify(P, s)
        assert is_sheaf(res.sheaf, res.topology)
        again = sheafify(res.sheaf, res.topology)
        assert unit_is_iso(again)
        assert find_iso(again.sheaf, res.sheaf) is not None

    @given(sites, st.data())
    def test_unit_iso_exactly_on_sheaves(self, s, data):
        P = data.draw(st.sampled_from(presheaves_on(s.cat, 2)))
        J = sieve_saturate(s)
        assert unit_is_iso(sheafify(P, J)) == bool(is_sheaf(P, J))

    @pytest.mark.parametrize("P", presheaves_on(ARROW, 2)[:10], ids=str)
    def test_universal_property(self, P):
        J = sieve_saturate(demo_site())
        ok, witness = check_universal(sheafify(P, J), sheaves_up_to(J, 2))
        assert ok, witness


class TestSheafConstructions:
    def test_sum_of_terminals_trivial_topology(self):
        J = maximal_topology(ARROW)
        T = as_sheaf(terminal_presheaf(ARROW), J)
        S = sheaf_colimits("sum", T, T)
        assert S.presheaf.sizes() == {"0": 2, "1": 2}

    def test_sum_on_demo_is_sheaf(self):
        J = sieve_saturate(demo_site())
        T = as_sheaf(terminal_presheaf(ARROW), J)
        S = sheaf_colimits("sum", T, T)
        assert is_sheaf(S.presheaf, J)
        assert S.presheaf.sizes() == {"0": 2, "1": 2}

    def test_quotient_by_diagonal(self):
        J = sieve_saturate(demo_site())
        F = as_sheaf(yoneda_embed(ARROW, "1"), J)
        classes = {C: {p: p for p in F.presheaf.stalks[C]} for C in ARROW.objects}
        Q = sheaf_colimits("quotient", F, classes)
        assert find_iso(Q.presheaf, F.presheaf) is not None

    def test_pullback_is_sheaf(self):
        J = sieve_saturate(demo_site())
        T = terminal_presheaf(ARROW)
        S, inl, inr = coproduct(T, T)
        SS = sheafify(S, J)
        f, g = inl.then(SS.unit), inr.then(SS.unit)
        P = sheaf_colimits("pullback", f, f, J)
        assert is_sheaf(P.presheaf, J)
        E = sheaf_colimits("pullback", f, g, J)
        assert E.presheaf.sizes() == {"0": 0, "1": 0}

    def test_mismatched_topologies(self):
        T = terminal_presheaf(ARROW)
        a = as_sheaf(T, maximal_topology(ARROW))
        b = as_sheaf(T, sieve_saturate(demo_site()))
        with pytest.raises(TopologyMismatch):
            sheaf_colimits("sum", a, b)

    def test_not_a_sheaf(self):
        with pytest.raises(TopologyMismatch):
            as_sheaf(two_over_one(), demo_site())


class TestEquivalence:
    def test_self(self):
        assert sheaf_equivalence_check(demo_site(), demo_site(), 2)

    def test_generated(self):
        assert sheaf_equivalence_check(demo_site(), generate_cov(demo_site(), 3), 2)

    def test_saturated(self):
        assert sheaf_equivalence_check(demo_site(), sieve_saturate(demo_site()), 2)

    def test_discrepancy(self):
        v = sheaf_equivalence_check(demo_site(), maximal_topology(ARROW), 2)
        assert not v and v.discrepancy["first"] is False and v.discrepancy["second"] is True

    @pytest.mark.parametrize("s", random_sites(6, seed=3), ids=lambda s: s.cat.name)
    def test_triangle(self, s):
        g = generate_cov(s, 2)
        J = sieve_saturate(s)
        assert sheaf_equivalence_check(s, g, 2)
        assert sheaf_equivalence_check(g, J, 2)
