import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from predtopos.errors import NotContinuous, ShapeMismatch, TopologyError
from predtopos.topspace import (
    ContinuousMap,
    FinSpace,
    FinTop,
    discrete,
    generate_opens,
    indiscrete,
    is_continuous,
    sierpinski,
    subspace,
)

T = FinTop()
SPACES = list(T.objects_up_to(3))


def preimage(table, V):
    return frozenset(x for x, y in table.items() if y in V)


def continuous_by_definition(X, Y, table):
    return all(preimage(table, V) in X.opens for V in Y.opens)


def quotient_by_definition(f):
    if set(f.table.values()) != set(f.cod.points):
        return False
    subsets = [frozenset(c) for r in range(len(f.cod) + 1) for c in itertools.combinations(f.cod.points, r)]
    return {V for V in subsets if preimage(f.table, V) in f.dom.opens} == set(f.cod.opens)


spaces = st.sampled_from(SPACES)


class TestSpaces:
    def test_topology_counts(self):
        counts = [sum(1 for X in SPACES if len(X) == n) for n in range(4)]
        assert counts == [1, 1, 4, 29]

    def test_generate_opens(self):
        assert generate_opens([0, 1, 2], [{0, 1}, {1, 2}]) == {
            frozenset(), frozenset({1}), frozenset({0, 1}), frozenset({1, 2}), frozenset({0, 1, 2})
        }

    def test_named_spaces(self):
        assert len(discrete([0, 1, 2]).opens) == 8
        assert indiscrete([0, 1, 2]).opens == {frozenset(), frozenset({0, 1, 2})}
        assert sierpinski().opens == {frozenset(), frozenset({1}), frozenset({0, 1})}

    @pytest.mark.parametrize("opens", [[(0,)], [(), (0,), (1,), (0, 1, 2)], [(), (0, 1), (1, 2), (0, 1, 2)]])
    def test_rejects_non_topologies(self, opens):
        with pytest.raises(TopologyError):
            FinSpace((0, 1, 2), opens)

    @given(spaces)
    def test_opens_closed_under_union_and_meet(self, X):
        O = X.opens
        assert frozenset() in O and frozenset(X.points) in O
        assert all(u | v in O and u & v in O for u in O for v in O)

    @given(spaces, st.data())
    def test_subspace_opens_are_traces(self, X, data):
        keep = data.draw(st.sets(st.sampled_from(X.points))) if len(X) else set()
        S = subspace(X, keep)
        assert set(S.opens) == {u & frozenset(S.points) for u in X.opens}


class TestMaps:
    def test_sierpinski_maps(self):
        S = sierpinski()
        assert len(list(T.hom(S, S))) == 3
        with pytest.raises(NotContinuous):
            ContinuousMap(S, S, {0: 1, 1: 0})

    def test_outside_codomain(self):
        with pytest.raises(ShapeMismatch):
            ContinuousMap(sierpinski(), sierpinski(), {0: 0, 1: 7})

    @given(spaces, spaces)
    def test_hom_matches_definition(self, X, Y):
        tables = [dict(zip(X.points, ys)) for ys in itertools.product(Y.points, repeat=len(X))]
        want = sum(1 for t in tables if continuous_by_definition(X, Y, t))
        assert len(list(T.hom(X, Y))) == want
        assert all(is_continuous(X, Y, t) == continuous_by_definition(X, Y, t) for t in tables)

    @given(spaces, spaces)
    def test_quotient_matches_definition(self, X, Y):
        for f in itertools.islice(T.hom(X, Y), 30):
            assert f.is_quotient() == quotient_by_definition(f)
            assert T.is_cover(f) == f.is_quotient()

    def test_surjection_not_quotient(self):
        f = ContinuousMap(discrete([0, 1]), sierpinski(), {0: 0, 1: 1})
        assert f.is_surjective() and not f.is_quotient()


class TestLimits:
    @given(spaces, spaces)
    def test_product_universal(self, X, Y):
        P, p1, p2 = T.product(X, Y)
        for Z in SPACES[:6]:
            pairs = list(itertools.product(T.hom(Z, X), T.hom(Z, Y)))
            into = list(T.hom(Z, P))
            assert len(into) == len(pairs)
            assert {(h.then(p1), h.then(p2)) for h in into} == set(pairs)

    @given(spaces, spaces, spaces, st.data())
    def test_pullback_universal(self, X, Y, B, data):
        fs_ = list(T.hom(X, B))
        gs_ = list(T.hom(Y, B))
        if not fs_ or not gs_:
            return
        f, g = data.draw(st.sampled_from(fs_)), data.draw(st.sampled_from(gs_))
        P, p1, p2 = T.pullback(f, g)
        for Z in SPACES[:6]:
            cones = [(u, v) for u in T.hom(Z, X) for v in T.hom(Z, Y) if u.then(f) == v.then(g)]
            into = list(T.hom(Z, P))
            assert {(h.then(p1), h.then(p2)) for h in into} == set(cones)
            assert len(into) == len(cones)

    @given(spaces, st.data())
    def test_equalizer(self, X, data):
        S = sierpinski()
        homs = list(T.hom(X, S))
        f, g = data.draw(st.sampled_from(homs)), data.draw(st.sampled_from(homs))
        E, e = T.equalizer(f, g)
        assert e.then(f) == e.then(g) and T.is_mono(e)

    def test_terminal(self):
        for X in SPACES:
            assert len(list(T.hom(X, T.terminal()))) == 1

    @given(spaces, spaces, st.data())
    def test_lifts_are_lifts(self, X, Y, data):
        covers = [e for e in T.hom(X, Y) if T.is_cover(e)]
        if not covers:
            return
        e = data.draw(st.sampled_from(covers))
        for h in itertools.islice(T.hom(Y, Y), 5):
            for s in itertools.islice(T.lifts(h, e), 5):
                assert s.then(e) == h
