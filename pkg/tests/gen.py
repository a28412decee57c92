"""Random test objects shared by the module tests and the acceptance suite."""

from __future__ import annotations

from predtopos import finset as fs
from predtopos.amc import Square
from predtopos.core import FinPsh, NatTrans, canonical_cover, presheaf_hom
from predtopos.core.presheaf import coproduct, identity_nat
from predtopos.core.presheaf import pullback as psh_pullback


def random_finset_map(rng, max_dom=4, max_cod=4, min_cod=1) -> fs.FinSetMap:
    n = rng.randint(0, max_dom)
    m = rng.randint(min_cod, max_cod)
    X, Y = fs.nat(n), fs.FinSetObj(tuple(f"y{i}" for i in range(m)))
    return fs.FinSetMap(X, Y, {x: rng.choice(Y.carrier) for x in X})


def random_finset_cover_onto(rng, X: fs.FinSetObj, extra=2, tag="c") -> fs.FinSetMap:
    """A surjection onto ``X`` with up to ``extra`` additional points."""
    labels = list(X.carrier) + [rng.choice(X.carrier) for _ in range(rng.randint(0, extra) if len(X) else 0)]
    rng.shuffle(labels)
    Z = fs.FinSetObj(tuple((tag, i) for i in range(len(labels))))
    return fs.FinSetMap(Z, X, dict(zip(Z.carrier, labels)))


def random_finset_covering_square(rng) -> Square:
    f = random_finset_map(rng)
    p = random_finset_cover_onto(rng, f.cod, tag="c")
    P, pc, pb = fs.pullback(p, f)
    k = random_finset_cover_onto(rng, P, tag="d")
    return Square(f, k.then(pc), p, k.then(pb))


def _fold(P):
    S, inl, inr = coproduct(P, P)
    comps = {x: {**{(0, a): a for a in P.stalks[x]}, **{(1, a): a for a in P.stalks[x]}} for x in P.base.objects}
    return NatTrans(S, P, comps, check=False)


def random_psh_cover(rng, P) -> NatTrans:
    """One of: identity, the canonical cover (generators or all elements), the fold ``P + P -> P``."""
    k = rng.randrange(4)
    if k == 0:
        return identity_nat(P)
    if k == 1:
        return canonical_cover(P)[1]
    if k == 2:
        return canonical_cover(P, full=True)[1]
    return _fold(P)


def random_psh_covering_square(rng, cat, objects) -> Square | None:
    """A covering square over presheaves on ``cat`` with ``f`` between two of ``objects``."""
    A, B = rng.choice(objects), rng.choice(objects)
    homs = presheaf_hom(B, A)
    if not homs:
        return None
    f = rng.choice(homs)
    p = random_psh_cover(rng, A)
    P, pc, pb = psh_pullback(p, f)
    k = random_psh_cover(rng, P)
    return Square(f, k.then(pc), p, k.then(pb), FinPsh(cat))


def random_site(rng, cat, max_families=2):
    """Random families, then pullback families added until axiom (C) holds."""
    from predtopos.sites import Site, generated_sieve, pullback_sieve

    cov = {}
    for C in cat.objects:
        into = cat.arrows_into(C)
        cov[C] = [tuple(rng.sample(into, rng.randint(1, len(into)))) for _ in range(rng.randint(0, max_families))]
    changed = True
    while changed:
        changed = False
        for C in cat.objects:
            for U in list(cov[C]):
                S = generated_sieve(cat, C, U)
                for f in cat.arrows_into(C):
                    D = cat.dom(f)
                    pulled = pullback_sieve(cat, S, f)
                    if not any(generated_sieve(cat, D, V) <= pulled for V in cov[D]):
                        cov[D].append(tuple(sorted(pulled)))
                        changed = True
    return Site(cat, cov)
