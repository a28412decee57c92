import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import congruence_class_count, terms_up_to, w_chain_counts, w_kind_by_iteration
from predtopos import finset as fs
from predtopos.errors import SignatureMismatch
from predtopos.sites import cov_functor, demo_site
from predtopos.wtypes import (
    DepPolyFunctor,
    PolyFunctor,
    WTree,
    apply_poly,
    dep_fixpoint,
    enumerate_terms,
    free_algebra,
    morphisms_from_w,
    parse_pattern,
    rank,
    rank_closure_demo,
    rank_signature,
    wfold,
    wtype,
)

BIN = PolyFunctor.from_arities({"leaf": 0, "node": 2})
LEAF = WTree("leaf")


def node(l, r):
    return WTree("node", ((0, l), (1, r)))


arities = st.lists(st.integers(0, 4), min_size=1, max_size=3)


class TestApplyPoly:
    def test_empty_fibre(self):
        pf = PolyFunctor(fs.FinSetMap(fs.initial(), fs.fset("a"), {}))
        for n in range(4):
            assert len(apply_poly(pf, fs.nat(n))) == 1

    def test_binary(self):
        assert len(apply_poly(BIN, fs.nat(3))) == 10

    @given(arities)
    def test_empty_argument(self, ar):
        pf = PolyFunctor.from_arities({f"a{i}": k for i, k in enumerate(ar)})
        assert len(apply_poly(pf, fs.initial())) == sum(k == 0 for k in ar)

    @given(arities, st.integers(0, 3))
    def test_size_formula(self, ar, n):
        pf = PolyFunctor.from_arities({f"a{i}": k for i, k in enumerate(ar)})
        assert len(apply_poly(pf, fs.nat(n))) == sum(n**k for k in ar)


class TestWType:
    def test_empty(self):
        assert wtype(PolyFunctor.from_arities({"a": 1}), 5).kind == "empty"

    def test_finite(self):
        res = wtype(PolyFunctor.from_arities({"x": 0, "y": 0}), 3)
        assert res.kind == "finite" and len(res.carrier) == 2
        sup = res.sup_map()
        assert sup.is_injective() and len(sup.cod) == 2

    def test_binary_chain(self):
        res = wtype(BIN, 4)
        assert res.kind == "infinite-truncated" and res.sizes == [0, 1, 2, 5, 26]

    @given(arities)
    def test_trichotomy_matches_iteration(self, ar):
        pf = PolyFunctor.from_arities({f"a{i}": k for i, k in enumerate(ar)})
        assert wtype(pf, 2).kind == w_kind_by_iteration(ar)

    @given(st.lists(st.integers(0, 2), min_size=1, max_size=3))
    def test_levels_are_trees_of_bounded_height(self, ar):
        pf = PolyFunctor.from_arities({f"a{i}": k for i, k in enumerate(ar)})
        res = wtype(pf, 4)
        if res.kind != "infinite-truncated":
            return
        assert res.sizes == w_chain_counts(ar, 4)
        for n in range(1, len(res.levels)):
            assert set(res.levels[n - 1].carrier) <= set(res.levels[n].carrier)
            assert all(t.height() <= n for t in res.levels[n])
            assert {t for t in res.levels[-1] if t.height() <= n} == set(res.levels[n].carrier)


class TestFold:
    def test_height(self):
        h = ("N", lambda a, v: 0 if a == "leaf" else 1 + max(v))
        assert wfold(BIN, h, LEAF) == 0
        assert wfold(BIN, h, node(LEAF, LEAF)) == 1

    def test_constant(self):
        assert wfold(BIN, (fs.fset("*"), lambda a, v: "*"), node(LEAF, node(LEAF, LEAF))) == "*"

    def test_size(self):
        size = ("N", lambda a, v: 1 + sum(v))
        assert wfold(BIN, size, node(LEAF, node(LEAF, LEAF))) == 5

    def test_signature_mismatch(self):
        with pytest.raises(SignatureMismatch):
            wfold(BIN, ("N", lambda a, v: 0), WTree("node", ((0, LEAF),)))

    @given(st.lists(st.integers(0, 0), min_size=1, max_size=3), st.integers(1, 3), st.randoms(use_true_random=False))
    def test_initiality(self, ar, n, rng):
        pf = PolyFunctor.from_arities({f"a{i}": k for i, k in enumerate(ar)})
        W = wtype(pf, 2).carrier
        X = fs.nat(n)
        table = {(a, ()): rng.randrange(n) for a in pf.labels}
        s = fs.FinSetMap(apply_poly(pf, X), X, table)
        ms = morphisms_from_w(pf, W, (X, s))
        assert len(ms) == 1
        assert ms[0] == {t: wfold(pf, (X, s), t) for t in W}


class TestRank:
    def test_leaf(self):
        assert rank(WTree(0)) == 0

    def test_successor(self):
        assert rank(WTree(1, ((0, WTree(0)),))) == 1

    def test_sup(self):
        def succ(t, k):
            for _ in range(k):
                t = WTree(1, ((0, t),))
            return t

        kids = (("x", succ(WTree(0), 0)), ("y", succ(WTree(0), 1)), ("z", succ(WTree(0), 3)))
        assert rank(WTree(("sup", 0), kids)) == 3

    def test_not_a_rank_tree(self):
        with pytest.raises(SignatureMismatch):
            rank(WTree("leaf"))

    def test_equations_on_enumerated_trees(self):
        X = fs.nat(2)
        family = [fs.identity(X), fs.FinSetMap(fs.nat(3), X, {0: 0, 1: 0, 2: 1})]
        pf = rank_signature(family)
        res = wtype(pf, 3)
        for t in res.carrier:
            r = rank(t)
            if t.label == 0:
                assert r == 0
            elif t.label == 1:
                assert r == rank(t.child(0)) + 1
            else:
                assert r == max((rank(c) for _, c in t.children), default=0)


class TestRankClosure:
    def test_one_identity(self):
        one = fs.terminal()
        for d in range(1, 5):
            rep = rank_closure_demo(one, [fs.identity(one)], d)
            assert rep.ranks_by_level[-1] == list(range(d))
            assert rep.ok

    def test_complete_family(self):
        X = fs.nat(2)
        family = [s for n in range(1, 4) for s in fs.surjections(fs.nat(n), X)]
        for d in range(1, 4):
            assert rank_closure_demo(X, family, d).sup_closed

    def test_empty_family(self):
        rep = rank_closure_demo(fs.nat(2), [], 2)
        assert not rep.sup_closed and rep.counterexample is not None


class TestDepFixpoint:
    def test_no_arities(self):
        F = DepPolyFunctor(("c", "d"), {"c": [("k", ())]})
        res = dep_fixpoint(F, 5)
        assert res.stabilized and res.sizes[-1] == {"c": 2, "d": 1} and len(res.levels) == 2

    def test_unary(self):
        res = dep_fixpoint(DepPolyFunctor(("c",), {"c": [("s", ("c",))]}), 5)
        assert [s["c"] for s in res.sizes] == [0, 1, 2, 3, 4, 5] and not res.stabilized
        assert res.equation_holds()

    def test_cov_functor_of_demo_site(self):
        res = dep_fixpoint(cov_functor(demo_site()), 4)
        assert res.equation_holds()

    @given(st.lists(st.tuples(st.integers(0, 1), st.lists(st.integers(0, 1), max_size=2)), max_size=3))
    def test_equation_at_every_level(self, cons):
        F = DepPolyFunctor((0, 1), {c: [] for c in (0, 1)})
        for k, (c, ar) in enumerate(cons):
            F.constructors[c].append((f"k{k}", tuple(ar)))
        assert dep_fixpoint(F, 3).equation_holds()


class TestFreeAlgebra:
    def test_constant_only(self):
        A = free_algebra({"e": 0}, fs.fset("g1", "g2"), cap=2)
        assert len(A.terms) == 3 and A.universal.ok

    def test_unary(self):
        A = free_algebra({"f": 1}, fs.fset("g"), cap=4)
        assert len(A.terms) == 5 and A.universal.ok

    def test_monoid_classes(self):
        eqs = [("m(m(x,y),z)", "m(x,m(y,z))"), ("m(e(),x)", "x"), ("m(x,e())", "x")]
        sig = {"e": 0, "m": 2}
        A = free_algebra(sig, fs.fset("g"), eqs, cap=3, check_universal=False)
        assert A.approximate
        oracle_terms = terms_up_to(sig, ["g"], 3)
        assert len(A.terms) == len(oracle_terms) == 1446
        pat = [(parse_pattern(l), parse_pattern(r)) for l, r in eqs]
        assert len(A.classes) == congruence_class_count(oracle_terms, pat) == 11

    def test_monoid_cap_two_universal(self):
        eqs = [("m(m(x,y),z)", "m(x,m(y,z))"), ("m(e(),x)", "x"), ("m(x,e())", "x")]
        A = free_algebra({"e": 0, "m": 2}, fs.fset("g"), eqs, cap=2, algebra_bound=2)
        assert len(A.classes) == 5 and A.universal.ok

    @given(st.dictionaries(st.sampled_from(["a", "b", "c"]), st.integers(0, 2), max_size=2), st.integers(0, 2))
    def test_terms_match_oracle(self, sig, cap):
        got = enumerate_terms(sig, fs.fset("g"), cap)
        assert sorted(got, key=repr) == terms_up_to(sig, ["g"], cap)
