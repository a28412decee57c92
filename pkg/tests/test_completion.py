import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from predtopos import finset as fs
from predtopos import topspace as top
from predtopos.completion import (
    ExLex,
    ExReg,
    RestrictedAmbient,
    check_recog_exlex,
    check_recog_exreg,
    discrete,
    exlex_hom,
    exlex_quotient,
    exlex_structure,
    identity_embedding,
    kernel,
    proj_coincidence,
    relation_from_pairs,
    total,
    unit_embedding,
)
from predtopos.core import FinPsh, catalog
from predtopos.errors import AmbientMismatch, HypothesisFailed

FS = fs.FinSet()
EX = ExLex(FS)


def exlex_objects(bound=3):
    return list(EX.objects_up_to(bound))


def tracker_classes(A, B):
    """Count hom classes straight from the definition: trackers respecting relations, modulo B's relation."""
    rA = set(zip(A.r0.images, A.r1.images))
    rB = set(zip(B.r0.images, B.r1.images))
    trackers = [f for f in fs.hom(A.X, B.X) if all((f(a), f(b)) in rB for a, b in rA)]
    classes = []
    for f in trackers:
        if not any(all((f(x), g(x)) in rB for x in A.X) for g in classes):
            classes.append(f)
    return len(classes)


class TestHom:
    def test_discrete(self):
        for n, m in itertools.product(range(3), repeat=2):
            assert len(exlex_hom(discrete(FS, fs.nat(n)), discrete(FS, fs.nat(m)))) == m**n

    def test_total_codomain(self):
        for n in range(3):
            assert len(exlex_hom(discrete(FS, fs.nat(n)), total(FS, fs.nat(2)))) == 1

    def test_sierpinski_collapse(self):
        T = top.FinTop()
        S = top.sierpinski()
        D = top.discrete([0, 1])
        assert len(list(T.hom(D, S))) == 4
        assert len(exlex_hom(discrete(T, D), total(T, S))) == 1
        assert len(exlex_hom(discrete(T, D), discrete(T, S))) == 4

    def test_ambient_mismatch(self):
        with pytest.raises(AmbientMismatch):
            exlex_hom(discrete(FS, fs.nat(1)), discrete(top.FinTop(), top.sierpinski()))

    @pytest.mark.parametrize("i", range(0, 40, 3))
    def test_matches_definition(self, i):
        objs = exlex_objects(2)
        A = objs[i % len(objs)]
        for B in objs:
            assert len(exlex_hom(A, B)) == tracker_classes(A, B)

    def test_unit_full_and_faithful(self):
        for n, m in itertools.product(range(3), repeat=2):
            X, Y = fs.nat(n), fs.nat(m)
            maps = list(fs.hom(X, Y))
            images = [EX.y_map(f) for f in maps]
            assert len(exlex_hom(EX.y(X), EX.y(Y))) == len(maps)
            assert all(images[i] != images[j] for i, j in itertools.combinations(range(len(images)), 2))


class TestStructure:
    def test_product_of_discrete(self):
        P, _, _ = exlex_structure("product", discrete(FS, fs.nat(2)), discrete(FS, fs.nat(2)))
        assert EX.find_iso(P, EX.y(fs.nat(4))) is not None

    def test_quotient_of_total(self):
        A = EX.y(fs.nat(2))
        R, p0, p1 = FS.product(fs.nat(2), fs.nat(2))
        res = exlex_quotient(A, R, p0, p1)
        assert res.exact
        assert EX.find_iso(res.quotient, EX.terminal()) is not None

    def test_quotient_in_fintop(self):
        T = top.FinTop()
        S = top.sierpinski()
        R, p0, p1 = T.product(S, S)
        res = exlex_quotient(discrete(T, S), R, p0, p1)
        assert res.coequalizes and res.kernel_matches

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_quotients_stably_exact(self, n):
        X = fs.nat(n)
        A = EX.y(X)
        for f in fs.hom(X, fs.nat(2)):
            R, k0, k1 = fs.pullback(f, f)
            res = exlex_quotient(A, R, k0, k1)
            assert res.exact
            for m in range(3):
                for c in exlex_hom(EX.y(fs.nat(m)), res.quotient):
                    _, _, leg = EX.pullback(res.q, c)
                    assert EX.is_cover(leg)

    def test_image(self):
        f = EX.y_map(fs.FinSetMap(fs.nat(3), fs.nat(2), {0: 0, 1: 0, 2: 1}))
        q, m = exlex_structure("image", f)
        assert EX.is_cover(q) and EX.is_mono(m)


class TestUnit:
    @pytest.mark.parametrize("A", exlex_objects(3), ids=lambda A: A.name)
    def test_every_object_covered_by_unit(self, A):
        assert EX.is_cover(EX.unit_cover(A))

    @pytest.mark.parametrize("n", range(4))
    def test_unit_images_projective(self, n):
        yX = EX.y(fs.nat(n))
        assert EX.is_projective(yX)
        for B in exlex_objects(2):
            for e in exlex_hom(B, yX):
                if EX.is_cover(e):
                    assert next(EX.lifts(EX.identity(yX), e), None) is not None

    def test_fintop_units_projective(self):
        T = top.FinTop()
        E = ExLex(T)
        for X in T.objects_up_to(2):
            assert E.is_projective(E.y(X))


class TestRecognition:
    sample = list(FS.objects_up_to(2))

    def test_identity_on_finset(self):
        assert check_recog_exlex(identity_embedding(FS), self.sample)

    def test_unit_into_exlex(self):
        rep = check_recog_exlex(unit_embedding(EX), self.sample)
        assert rep.ok and rep.conclusion.startswith("consistent with")

    def test_non_covering(self):
        rep = check_recog_exlex(unit_embedding(EX), [fs.nat(0)], list(EX.objects_up_to(2)))
        assert not rep.checks["covering"] and "covering" in rep.witnesses

    def test_unit_into_exreg(self):
        assert check_recog_exreg(unit_embedding(ExReg(FS)), self.sample)

    def test_identity_exreg(self):
        assert check_recog_exreg(identity_embedding(FS), self.sample)

    def test_missing_subobject(self):
        G = ExReg(FS)
        y = unit_embedding(G)
        src = RestrictedAmbient(FS, lambda X: len(X) != 1, name="no-singletons")
        F = type(y)(src, G, y.on_obj, y.on_map, "y'")
        rep = check_recog_exreg(F, self.sample)
        assert not rep.checks["full on subobjects"]
        assert rep.witnesses["full on subobjects"]["mono"] is not None


class TestProjCoincidence:
    def test_finset(self):
        assert proj_coincidence(FS, 2)

    def test_presheaves_on_arrow(self):
        rep = proj_coincidence(FinPsh(catalog.arrow()), 2)
        assert rep.ok and rep.sample_sizes["projectives"] > 0

    def test_without_enough_projectives(self):
        from predtopos.amc import is_projective

        C = RestrictedAmbient(FinPsh(catalog.arrow()), lambda X: not is_projective(X))
        with pytest.raises(HypothesisFailed):
            proj_coincidence(C, 2)


class TestPseudoRelations:
    def test_kernel_is_equivalence(self):
        f = fs.FinSetMap(fs.nat(3), fs.nat(2), {0: 0, 1: 0, 2: 1})
        K = kernel(FS, f)
        assert K.related(fs.constant(fs.nat(1), fs.nat(3), 0), fs.constant(fs.nat(1), fs.nat(3), 1))

    @given(st.integers(1, 3), st.data())
    def test_non_monic_copy_iso_to_monic(self, n, data):
        X = fs.nat(n)
        labels = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
        pairs = [(a, b) for a in X for b in X if labels[a] == labels[b]]
        A = relation_from_pairs(X, pairs)
        B = relation_from_pairs(X, pairs + [(x, x) for x in X])
        assert EX.find_iso(A, B) is not None


class TestFactorisation:
    @given(st.data())
    def test_lift_matches_pointwise_search(self, data):
        from predtopos.completion import _factors_through

        k = data.draw(st.integers(1, 3))
        X = fs.nat(k)
        labels = data.draw(st.lists(st.integers(0, k - 1), min_size=k, max_size=k))
        rel = {(a, b) for a in X for b in X if labels[a] == labels[b]}
        A = relation_from_pairs(X, sorted(rel))

        def some_map(n):
            D = fs.nat(n)
            return fs.FinSetMap(D, X, {x: data.draw(st.sampled_from(list(X))) for x in D})

        p, q = data.draw(st.integers(0, 3)), data.draw(st.integers(0, 3))
        pl, pr, kl, kr = some_map(p), some_map(p), some_map(q), some_map(q)
        want = all(any((kl(y), pl(x)) in rel and (kr(y), pr(x)) in rel for y in kl.dom) for x in pl.dom)
        assert _factors_through(A, kl, kr, pl, pr) == want
