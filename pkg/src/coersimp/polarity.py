"""Positive/negative parameter occurrences and coercion families.

The polarity of a type or dirt parameter records on which side of the arrow
it occurs: argument positions flip polarity, result positions keep it, and
operation sets contribute nothing. A parameter can end up in both sets
(bipolar) or in neither (it does not occur).

A coercion family assigns one coercion to each tracked parameter and acts as
a directed bridge between two substitutions: checked against `(sub1, sub2)`
at polarity set `F`, the family must run `sub1(p) <= sub2(p)` for positive
`p` and `sub2(p) <= sub1(p)` for negative `p`. Bipolar parameters therefore
need both directions at once, which forces equal images and a reflexivity
witness. Families extend homomorphically to whole types, compose pointwise,
and precompose with substitutions; those three operations are what the
simplifier's completeness witnesses are assembled from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .check import CheckError, EndpointMismatch, check_dco, check_vco
from .subst import Substitution, apply_dirt, apply_vty
from .syntax import (
    CCoercion,
    CompType,
    DCoCompose,
    DCoReflEmpty,
    DCoUnionBoth,
    DCoercion,
    Dirt,
    ParamContext,
    Signature,
    TyArrow,
    TyBase,
    TyParam,
    TyUnit,
    TypingContext,
    VCoArrow,
    VCoCompose,
    VCoReflBase,
    VCoReflUnit,
    VCoercion,
    ValueType,
)


@dataclass(frozen=True)
class FreeParamSet:
    pos: frozenset[str] = frozenset()
    neg: frozenset[str] = frozenset()

    def swap(self) -> FreeParamSet:
        return FreeParamSet(self.neg, self.pos)

    def union(self, other: FreeParamSet) -> FreeParamSet:
        return FreeParamSet(self.pos | other.pos, self.neg | other.neg)

    def members(self) -> frozenset[str]:
        return self.pos | self.neg

    def bipolar(self) -> frozenset[str]:
        return self.pos & self.neg

    def __str__(self) -> str:
        def fmt(names):
            return "{" + ",".join(sorted(names)) + "}"

        return f"<+{fmt(self.pos)} -{fmt(self.neg)}>"


EMPTY_FPS = FreeParamSet()


def fp_dirt(d: Dirt) -> FreeParamSet:
    if d.tail is None:
        return EMPTY_FPS
    return FreeParamSet(pos=frozenset({d.tail}))


def fp_vty(t: ValueType) -> FreeParamSet:
    if isinstance(t, TyParam):
        return FreeParamSet(pos=frozenset({t.name}))
    if isinstance(t, (TyUnit, TyBase)):
        return EMPTY_FPS
    if isinstance(t, TyArrow):
        return fp_vty(t.dom).swap().union(fp_cty(t.cod))
    raise TypeError(f"not a value type: {t!r}")


def fp_cty(c: CompType) -> FreeParamSet:
    return fp_vty(c.ty).union(fp_dirt(c.dirt))


def fp_tyctx(tyctx: TypingContext) -> FreeParamSet:
    out = EMPTY_FPS
    for _, t in tyctx:
        out = out.union(fp_vty(t))
    return out


def subst_fps(sub: Substitution, fps: FreeParamSet) -> FreeParamSet:
    """Image of a polarity set under a substitution.

    Positive members contribute the occurrences of their image as-is,
    negative members contribute them swapped; a parameter the substitution
    does not mention is its own image.
    """

    def image(name: str) -> FreeParamSet:
        if name in sub.ty:
            return fp_vty(sub.ty[name])
        if name in sub.dirt:
            return fp_dirt(sub.dirt[name])
        return FreeParamSet(pos=frozenset({name}))

    out = EMPTY_FPS
    for name in fps.pos:
        out = out.union(image(name))
    for name in fps.neg:
        out = out.union(image(name).swap())
    return out


# ---------------------------------------------------------------------------
# Coercion families

class FamilyError(CheckError):
    pass


@dataclass
class CoercionFamily:
    vco: dict[str, VCoercion] = field(default_factory=dict)
    dco: dict[str, DCoercion] = field(default_factory=dict)

    def members(self) -> set[str]:
        return set(self.vco) | set(self.dco)


def extend_family_dirt(fam: CoercionFamily, d: Dirt) -> DCoercion:
    if d.tail is None:
        body: DCoercion = DCoReflEmpty()
    else:
        try:
            body = fam.dco[d.tail]
        except KeyError:
            raise FamilyError(f"family has no entry for dirt parameter {d.tail}")
    for op in reversed(d.sorted_ops()):
        body = DCoUnionBoth(op, body)
    return body


def extend_family_vty(fam: CoercionFamily, t: ValueType) -> VCoercion:
    if isinstance(t, TyParam):
        try:
            return fam.vco[t.name]
        except KeyError:
            raise FamilyError(f"family has no entry for type parameter {t.name}")
    if isinstance(t, TyUnit):
        return VCoReflUnit()
    if isinstance(t, TyBase):
        return VCoReflBase(t.name)
    if isinstance(t, TyArrow):
        return VCoArrow(
            extend_family_vty(fam, t.dom),
            CCoercion(
                extend_family_vty(fam, t.cod.ty),
                extend_family_dirt(fam, t.cod.dirt),
            ),
        )
    raise TypeError(f"not a value type: {t!r}")


def compose_families(
    after: CoercionFamily, before: CoercionFamily, fps: FreeParamSet
) -> CoercionFamily:
    """Pointwise composition of `before : s1 <= s2` and `after : s2 <= s3`
    into a family for `s1 <= s3`.

    At positive parameters the entries chain left to right, so `before` runs
    first. At strictly negative parameters both entries point the other way
    (`s2(p) <= s1(p)` and `s3(p) <= s2(p)`), so `after` must run first for
    the middles to meet. Bipolar entries have equal endpoints on both sides
    and either order typechecks; the positive order is used.
    """
    flipped = fps.neg - fps.pos
    out = CoercionFamily()
    for name, g in before.vco.items():
        if name not in after.vco:
            raise FamilyError(f"composition: no matching entry for {name}")
        f = after.vco[name]
        out.vco[name] = VCoCompose(g, f) if name in flipped else VCoCompose(f, g)
    for name, g in before.dco.items():
        if name not in after.dco:
            raise FamilyError(f"composition: no matching entry for {name}")
        f = after.dco[name]
        out.dco[name] = DCoCompose(g, f) if name in flipped else DCoCompose(f, g)
    return out


def precompose_family(fam: CoercionFamily, sub: Substitution, names) -> CoercionFamily:
    """The family `a -> extend(fam, sub(a))` over the given parameter names."""
    out = CoercionFamily()
    for name in names:
        if name in sub.ty:
            out.vco[name] = extend_family_vty(fam, sub.ty[name])
        elif name in sub.dirt:
            out.dco[name] = extend_family_dirt(fam, sub.dirt[name])
        elif name in fam.vco:
            out.vco[name] = fam.vco[name]
        elif name in fam.dco:
            out.dco[name] = fam.dco[name]
        else:
            raise FamilyError(f"cannot precompose: {name} unknown to family")
    return out


def invert_family(fam: CoercionFamily) -> CoercionFamily:
    """A family witnessing `sub1 <=_F sub2` also witnesses `sub2 <= sub1`
    at the swapped polarity set; the data is unchanged."""
    return CoercionFamily(dict(fam.vco), dict(fam.dco))


def check_family(
    sig: Signature,
    use_ctx: ParamContext,
    fam: CoercionFamily,
    sub1: Substitution,
    sub2: Substitution,
    fps: FreeParamSet,
) -> None:
    """Check `fam : sub1 <=_fps sub2` into `use_ctx`.

    Every tracked parameter needs an entry whose endpoints are the two
    images, in the direction its polarity demands (both for bipolar ones).
    """

    for name in sorted(fps.members()):
        if name in fam.vco:
            got = check_vco(sig, use_ctx, fam.vco[name])
            img1 = apply_vty(sub1, TyParam(name))
            img2 = apply_vty(sub2, TyParam(name))
        elif name in fam.dco:
            got = check_dco(sig, use_ctx, fam.dco[name])
            img1 = apply_dirt(sub1, Dirt(frozenset(), name))
            img2 = apply_dirt(sub2, Dirt(frozenset(), name))
        else:
            raise FamilyError(f"family has no entry for {name}")
        if name in fps.pos and got != (img1, img2):
            raise EndpointMismatch(
                f"family entry for positive {name}: endpoints {got[0]} <= {got[1]}, "
                f"need {img1} <= {img2}"
            )
        if name in fps.neg and got != (img2, img1):
            raise EndpointMismatch(
                f"family entry for negative {name}: endpoints {got[0]} <= {got[1]}, "
                f"need {img2} <= {img1}"
            )
