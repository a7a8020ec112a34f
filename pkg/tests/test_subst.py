"""Randomized checks that substitution preserves every judgment form.

One thousand seeded draws across four properties: well-formedness of
skeletons, dirts, and types; coercion endpoints; term typing; and
validity of composition. Ground instantiations come from the sampler,
composition legs from the canonicalizing reduction.
"""

import random

import pytest

from coersimp.check import (
    check_dco,
    check_vco,
    derived_empty,
    derived_refl_dirt,
    derived_refl_vty,
    type_of_value,
    wf_dirt,
    wf_skeleton,
    wf_vtype,
)
from coersimp.corpus import load_bundled
from coersimp.reduce import reduce_context
from coersimp.sample import sample_eta
from coersimp.subst import (
    Substitution,
    apply_dco,
    apply_dirt,
    apply_skel,
    apply_value,
    apply_vco,
    apply_vty,
    check_validity,
    compose,
    identity,
)
from coersimp.syntax import (
    CCoercion,
    DCoParam,
    Dirt,
    EMPTY_CONTEXT,
    SkelParam,
    TyParam,
    VCoArrow,
    VCoCompose,
    VCoParam,
    dirt,
)

from gen import TEST_SIG, random_context, random_dirt, random_vty


def random_vco(rng, ctx, depth=1):
    opts = ["refl"]
    if ctx.ty_cos:
        opts += ["param", "param", "compose"]
    if depth > 0 and ctx.dirt_cos and ctx.ty_cos:
        opts.append("arrow")
    kind = rng.choice(opts)
    if kind == "refl":
        return derived_refl_vty(random_vty(rng, ctx, depth=1))
    if kind == "param":
        return VCoParam(rng.choice([n for n, _, _ in ctx.ty_cos]))
    if kind == "compose":
        name, _, hi = rng.choice(ctx.ty_cos)
        return VCoCompose(derived_refl_vty(hi), VCoParam(name))
    arg = random_vco(rng, ctx, depth - 1)
    res = random_vco(rng, ctx, depth - 1)
    return VCoArrow(arg, CCoercion(res, DCoParam(rng.choice(
        [n for n, _, _ in ctx.dirt_cos]))))


def random_dco(rng, ctx):
    opts = ["refl", "empty"]
    if ctx.dirt_cos:
        opts += ["param", "param"]
    kind = rng.choice(opts)
    if kind == "refl":
        return derived_refl_dirt(random_dirt(rng, ctx))
    if kind == "empty":
        return derived_empty(random_dirt(rng, ctx))
    return DCoParam(rng.choice([n for n, _, _ in ctx.dirt_cos]))


def test_wf_preservation_randomized():
    """Skeleton, dirt, and type judgments survive grounding (300 draws)."""
    rng = random.Random(401)
    for i in range(300):
        ctx = random_context(rng)
        eta = sample_eta(TEST_SIG, ctx, rng)
        check_validity(TEST_SIG, ctx, eta, EMPTY_CONTEXT)
        d = random_dirt(rng, ctx)
        wf_dirt(TEST_SIG, ctx, d)
        wf_dirt(TEST_SIG, EMPTY_CONTEXT, apply_dirt(eta, d))
        t = random_vty(rng, ctx)
        sk = wf_vtype(TEST_SIG, ctx, t)
        wf_skeleton(ctx, sk)
        got = wf_vtype(TEST_SIG, EMPTY_CONTEXT, apply_vty(eta, t))
        assert got == apply_skel(eta, sk)
        wf_skeleton(EMPTY_CONTEXT, got)


def test_coercion_preservation_randomized():
    """Coercion endpoints commute with grounding (300 draws)."""
    rng = random.Random(402)
    for i in range(300):
        ctx = random_context(rng)
        eta = sample_eta(TEST_SIG, ctx, rng)
        co = random_vco(rng, ctx)
        lo, hi = check_vco(TEST_SIG, ctx, co)
        glo, ghi = check_vco(TEST_SIG, EMPTY_CONTEXT, apply_vco(eta, co))
        assert glo == apply_vty(eta, lo)
        assert ghi == apply_vty(eta, hi)
        dco = random_dco(rng, ctx)
        dlo, dhi = check_dco(TEST_SIG, ctx, dco)
        gdlo, gdhi = check_dco(TEST_SIG, EMPTY_CONTEXT, apply_dco(eta, dco))
        assert gdlo == apply_dirt(eta, dlo)
        assert gdhi == apply_dirt(eta, dhi)


def test_typing_preservation_randomized():
    """Ground instances of the corpus terms keep their types (200 draws)."""
    rng = random.Random(403)
    items = [i for i in load_bundled() if i.term is not None]
    for i in range(200):
        item = items[i % len(items)]
        eta = sample_eta(item.signature, item.context, rng)
        got = type_of_value(item.signature, EMPTY_CONTEXT, (),
                            apply_value(eta, item.term))
        assert got == apply_vty(eta, item.poltype), item.name


def test_composition_validity_randomized():
    """Reduction leg composed with a grounding leg stays valid (200 draws)."""
    rng = random.Random(404)
    for i in range(200):
        ctx = random_context(rng)
        red = reduce_context(TEST_SIG, ctx)
        check_validity(TEST_SIG, ctx, red.subst, red.context)
        eta = sample_eta(TEST_SIG, red.context, rng)
        both = compose(eta, red.subst)
        check_validity(TEST_SIG, ctx, both, EMPTY_CONTEXT)
        for name, _ in ctx.ty_params:
            assert apply_vty(both, TyParam(name)) == apply_vty(
                eta, apply_vty(red.subst, TyParam(name)))
        for name in ctx.dirt_params:
            probe = Dirt(frozenset(), name)
            assert apply_dirt(both, probe) == apply_dirt(
                eta, apply_dirt(red.subst, probe))


def test_identity_and_compose_units():
    ident = identity()
    assert ident.is_identity()
    sub = Substitution(ty={"a1": TyParam("a2")})
    assert compose(ident, sub).ty == sub.ty
    assert compose(sub, ident).ty == sub.ty


def test_check_validity_rejects_wrong_endpoint():
    from coersimp.check import CheckError

    rng = random.Random(7)
    ctx = random_context(rng)
    while not ctx.dirt_cos:
        ctx = random_context(rng)
    name, _, _ = ctx.dirt_cos[0]
    eta = sample_eta(TEST_SIG, ctx, random.Random(8))
    broken = eta.copy()
    broken.dco[name] = derived_refl_dirt(dirt(("Random", "Fail")))
    with pytest.raises(CheckError):
        check_validity(TEST_SIG, ctx, broken, EMPTY_CONTEXT)
