import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from predtopos import finset as fs
from predtopos.errors import NotEquivalenceRelation, ShapeMismatch


@st.composite
def maps(draw, max_dom=4, max_cod=4, min_cod=0):
    n = draw(st.integers(0, max_dom))
    m = draw(st.integers(min_cod if n == 0 else max(1, min_cod), max_cod))
    images = draw(st.lists(st.integers(0, m - 1), min_size=n, max_size=n)) if m else []
    return fs.FinSetMap(fs.nat(n), fs.nat(m), dict(enumerate(images)))


@st.composite
def partitions(draw, max_size=5):
    n = draw(st.integers(0, max_size))
    labels = draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    X = fs.nat(n)
    return X, {(a, b) for a in X for b in X if labels[a] == labels[b]}


class TestImage:
    def test_constant(self):
        X = fs.nat(2)
        cover, mono = fs.image_factorization(fs.constant(X, X, 0))
        assert cover.cod.carrier == (0,)
        assert mono.then is not None and cover.then(mono) == fs.constant(X, X, 0)

    def test_identity(self):
        X = fs.fset("a", "b")
        cover, mono = fs.image_factorization(fs.identity(X))
        assert cover == fs.identity(X) and mono == fs.identity(X)

    def test_onto(self):
        f = fs.FinSetMap(fs.fset(1, 2, 3), fs.fset("x", "y"), {1: "x", 2: "x", 3: "y"})
        cover, mono = fs.image_factorization(f)
        assert cover.cod.carrier == ("x", "y") and mono == fs.identity(f.cod)

    @given(maps())
    def test_factorization_properties(self, f):
        cover, mono = fs.image_factorization(f)
        assert cover.then(mono) == f
        assert cover.is_surjective() and mono.is_injective()
        assert set(cover.cod.carrier) == set(f.images)

    @given(maps(), st.randoms(use_true_random=False))
    def test_factorizations_unique_up_to_unique_iso(self, f, rng):
        cover, mono = fs.image_factorization(f)
        # relabel the middle object to get a second factorization
        I = cover.cod
        perm = list(I.carrier)
        rng.shuffle(perm)
        J = fs.FinSetObj(tuple(("j", x) for x in perm))
        to_j = fs.FinSetMap(I, J, {x: ("j", x) for x in I.carrier})
        from_j = fs.FinSetMap(J, I, {("j", x): x for x in I.carrier})
        second = (cover.then(to_j), from_j.then(mono))
        iso = fs.factorization_iso((cover, mono), second)
        assert iso == to_j


class TestQuotient:
    def test_diagonal(self):
        X = fs.fset("a", "b")
        q, rep = fs.quotient_equiv(X, {("a", "a"), ("b", "b")})
        assert len(q.cod) == 2 and rep.ok

    def test_total(self):
        X = fs.fset("a", "b", "c")
        q, rep = fs.quotient_equiv(X, set(itertools.product(X, X)))
        assert len(q.cod) == 1 and rep.ok

    def test_generated(self):
        X = fs.fset("a", "b", "c")
        R = {(x, x) for x in X} | {("a", "b"), ("b", "a")}
        q, rep = fs.quotient_equiv(X, R)
        assert q.fibres() == {"a": ["a", "b"], "c": ["c"]}
        assert rep.kernel_pair_matches and rep.coequalizes

    def test_not_symmetric(self):
        X = fs.fset("a", "b")
        with pytest.raises(NotEquivalenceRelation) as e:
            fs.quotient_equiv(X, {("a", "a"), ("b", "b"), ("a", "b")})
        assert e.value.witness == ("a", "b")

    def test_pair_of_maps_form(self):
        X = fs.fset("a", "b")
        R = fs.fset(0, 1, 2, 3)
        r0 = fs.FinSetMap(R, X, {0: "a", 1: "b", 2: "a", 3: "b"})
        r1 = fs.FinSetMap(R, X, {0: "a", 1: "b", 2: "b", 3: "a"})
        q, rep = fs.quotient_equiv(X, (r0, r1))
        assert len(q.cod) == 1 and rep.ok

    @given(partitions())
    def test_exact_on_every_equivalence(self, XR):
        X, R = XR
        q, rep = fs.quotient_equiv(X, R)
        assert rep.ok
        assert fs.kernel_pair(q) == R


class TestDependentProduct:
    def test_six_sections(self):
        A = fs.fset("a")
        B = fs.fset("b1", "b2")
        f = fs.constant(B, A, "a")
        X = fs.fset(*range(5))
        g = fs.FinSetMap(X, B, {0: "b1", 1: "b1", 2: "b2", 3: "b2", 4: "b2"})
        assert len(fs.dependent_product(f, g).fibre("a")) == 6

    def test_empty_fibre_gives_singleton(self):
        f = fs.FinSetMap(fs.initial(), fs.fset("a"), {})
        g = fs.FinSetMap(fs.initial(), fs.initial(), {})
        assert len(fs.dependent_product(f, g).fibre("a")) == 1

    def test_no_sections(self):
        B = fs.fset("b1", "b2")
        f = fs.constant(B, fs.fset("a"), "a")
        g = fs.FinSetMap(fs.fset(0), B, {0: "b1"})
        assert fs.dependent_product(f, g).fibre("a") == []

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            fs.dependent_product(fs.identity(fs.nat(2)), fs.identity(fs.nat(3)))

    @given(maps(3, 2, min_cod=1), st.data())
    def test_adjunction(self, f, data):
        B = f.dom
        xs = data.draw(st.lists(st.sampled_from(B.carrier), max_size=3)) if len(B) else []
        g = fs.FinSetMap(fs.nat(len(xs)), B, dict(enumerate(xs)))
        ys = data.draw(st.lists(st.sampled_from(f.cod.carrier), max_size=2))
        h = fs.FinSetMap(fs.FinSetObj(tuple(("h", i) for i in range(len(ys)))), f.cod, {("h", i): y for i, y in enumerate(ys)})
        assert fs.check_pi_adjunction(f, g, h)

    @given(maps(3, 2, min_cod=1), st.data())
    def test_beck_chevalley(self, f, data):
        xs = data.draw(st.lists(st.sampled_from(f.dom.carrier), max_size=3)) if len(f.dom) else []
        g = fs.FinSetMap(fs.nat(len(xs)), f.dom, dict(enumerate(xs)))
        ks = data.draw(st.lists(st.sampled_from(f.cod.carrier), max_size=3))
        k = fs.FinSetMap(fs.FinSetObj(tuple(("c", i) for i in range(len(ks)))), f.cod, {("c", i): a for i, a in enumerate(ks)})
        assert fs.beck_chevalley(f, g, k)


class TestColimits:
    def test_sum_is_disjoint(self):
        S, inl, inr = fs.coproduct(fs.fset("a"), fs.fset("a"))
        assert len(S) == 2 and inl("a") != inr("a")

    def test_coequalizer_of_equal_maps(self):
        f = fs.FinSetMap(fs.nat(2), fs.fset("x", "y", "z"), {0: "x", 1: "z"})
        Q, q = fs.coequalizer(f, f)
        assert len(Q) == 3 and q.is_injective()

    def test_injections_pull_back_to_empty(self):
        _, inl, inr = fs.coproduct(fs.nat(2), fs.nat(3))
        P, _, _ = fs.pullback(inl, inr)
        assert len(P) == 0

    @given(st.integers(0, 3), st.integers(0, 3), st.data())
    def test_sums_stable(self, n, m, data):
        S, _, _ = fs.coproduct(fs.nat(n), fs.nat(m))
        sample = []
        if len(S):
            for _ in range(3):
                xs = data.draw(st.lists(st.sampled_from(S.carrier), max_size=3))
                sample.append(fs.FinSetMap(fs.nat(len(xs)), S, dict(enumerate(xs))))
        assert fs.check_sums(fs.nat(n), fs.nat(m), sample)["ok"]


class TestSplitting:
    @given(maps(4, 3))
    def test_surjections_split(self, f):
        if f.is_surjective():
            assert fs.section(f).then(f) == fs.identity(f.cod)
        else:
            with pytest.raises(ShapeMismatch):
                fs.section(f)

    def test_ambient_lifts_against_covers(self):
        amb = fs.FinSet()
        e = fs.FinSetMap(fs.nat(3), fs.nat(2), {0: 0, 1: 0, 2: 1})
        for h in amb.hom(fs.nat(2), fs.nat(2)):
            assert amb.find_lift(h, e) is not None
