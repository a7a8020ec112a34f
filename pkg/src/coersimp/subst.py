"""Substitutions over the five parameter kinds, their application, validity
checking, and composition.

A substitution is five finite maps. Mappings that are omitted are identities:
applying a substitution to a parameter outside its domain leaves it alone.
Application is homomorphic on all syntax, with two non-obvious clauses:

* reflexivity coercions on parameters turn into the *derived* reflexivity of
  the image (`refl_a` under `{a -> unit -> unit!d}` becomes the full arrow
  reflexivity), and
* the empty-below-tail coercion turns into the derived empty coercion of the
  image dirt.

Dirt application flattens: substituting a tail re-canonicalizes the op set.

Validity of `sub : src -> dst` is checked parameter by parameter, left to
right through `src`, against the substituted classifier. A parameter without
a mapping must itself exist (suitably classified) in `dst`; if it does not,
the failure is reported as `UnmappedParam`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .check import (
    CheckError,
    EndpointMismatch,
    SkeletonMismatch,
    check_dco,
    check_vco,
    derived_empty,
    derived_refl_dirt,
    derived_refl_vty,
    wf_dirt,
    wf_skeleton,
    wf_vtype,
)
from .syntax import (
    App,
    CastC,
    CastV,
    CCoercion,
    CompTerm,
    CompType,
    DCoCompose,
    DCoEmptyUnder,
    DCoParam,
    DCoReflEmpty,
    DCoReflParam,
    DCoUnionBoth,
    DCoUnionRight,
    DCoercion,
    Dirt,
    Do,
    Lam,
    LetVal,
    OpCall,
    ParamContext,
    Return,
    Signature,
    SkelArrow,
    SkelBase,
    SkelParam,
    SkelUnit,
    Skeleton,
    TyArrow,
    TyBase,
    TyParam,
    TyUnit,
    TypingContext,
    UnitVal,
    VCoArrow,
    VCoCompose,
    VCoParam,
    VCoReflBase,
    VCoReflParam,
    VCoReflUnit,
    VCoercion,
    ValueTerm,
    ValueType,
    Var,
)


class UnmappedParam(CheckError):
    """A source parameter has no image and does not survive into the target."""


@dataclass
class Substitution:
    skel: dict[str, Skeleton] = field(default_factory=dict)
    dirt: dict[str, Dirt] = field(default_factory=dict)
    ty: dict[str, ValueType] = field(default_factory=dict)
    dco: dict[str, DCoercion] = field(default_factory=dict)
    vco: dict[str, VCoercion] = field(default_factory=dict)

    def is_identity(self) -> bool:
        return not (self.skel or self.dirt or self.ty or self.dco or self.vco)

    def domain(self) -> set[str]:
        return (
            set(self.skel)
            | set(self.dirt)
            | set(self.ty)
            | set(self.dco)
            | set(self.vco)
        )

    def copy(self) -> Substitution:
        return Substitution(
            dict(self.skel), dict(self.dirt), dict(self.ty), dict(self.dco), dict(self.vco)
        )


def identity() -> Substitution:
    return Substitution()


# ---------------------------------------------------------------------------
# Application

def apply_skel(sub: Substitution, s: Skeleton) -> Skeleton:
    if isinstance(s, SkelParam):
        return sub.skel.get(s.name, s)
    if isinstance(s, (SkelUnit, SkelBase)):
        return s
    if isinstance(s, SkelArrow):
        return SkelArrow(apply_skel(sub, s.dom), apply_skel(sub, s.cod))
    raise TypeError(f"not a skeleton: {s!r}")


def apply_dirt(sub: Substitution, d: Dirt) -> Dirt:
    if d.tail is None or d.tail not in sub.dirt:
        return d
    image = sub.dirt[d.tail]
    return Dirt(d.ops | image.ops, image.tail)


def apply_vty(sub: Substitution, t: ValueType) -> ValueType:
    if isinstance(t, TyParam):
        return sub.ty.get(t.name, t)
    if isinstance(t, (TyUnit, TyBase)):
        return t
    if isinstance(t, TyArrow):
        return TyArrow(apply_vty(sub, t.dom), apply_cty(sub, t.cod))
    raise TypeError(f"not a value type: {t!r}")


def apply_cty(sub: Substitution, c: CompType) -> CompType:
    return CompType(apply_vty(sub, c.ty), apply_dirt(sub, c.dirt))


def apply_dco(sub: Substitution, g: DCoercion) -> DCoercion:
    if isinstance(g, DCoParam):
        return sub.dco.get(g.name, g)
    if isinstance(g, DCoReflParam):
        if g.name in sub.dirt:
            return derived_refl_dirt(sub.dirt[g.name])
        return g
    if isinstance(g, DCoReflEmpty):
        return g
    if isinstance(g, DCoEmptyUnder):
        if g.tail in sub.dirt:
            return derived_empty(sub.dirt[g.tail])
        return g
    if isinstance(g, DCoUnionBoth):
        return DCoUnionBoth(g.op, apply_dco(sub, g.body))
    if isinstance(g, DCoUnionRight):
        return DCoUnionRight(g.op, apply_dco(sub, g.body))
    if isinstance(g, DCoCompose):
        return DCoCompose(apply_dco(sub, g.after), apply_dco(sub, g.before))
    raise TypeError(f"not a dirt coercion: {g!r}")


def apply_vco(sub: Substitution, g: VCoercion) -> VCoercion:
    if isinstance(g, VCoParam):
        return sub.vco.get(g.name, g)
    if isinstance(g, VCoReflParam):
        if g.name in sub.ty:
            return derived_refl_vty(sub.ty[g.name])
        return g
    if isinstance(g, (VCoReflUnit, VCoReflBase)):
        return g
    if isinstance(g, VCoArrow):
        return VCoArrow(apply_vco(sub, g.arg), apply_cco(sub, g.res))
    if isinstance(g, VCoCompose):
        return VCoCompose(apply_vco(sub, g.after), apply_vco(sub, g.before))
    raise TypeError(f"not a value coercion: {g!r}")


def apply_cco(sub: Substitution, g: CCoercion) -> CCoercion:
    return CCoercion(apply_vco(sub, g.vco), apply_dco(sub, g.dco))


def apply_value(sub: Substitution, v: ValueTerm) -> ValueTerm:
    if isinstance(v, (Var, UnitVal)):
        return v
    if isinstance(v, Lam):
        return Lam(v.var, apply_vty(sub, v.ty), apply_comp(sub, v.body))
    if isinstance(v, CastV):
        return CastV(apply_value(sub, v.val), apply_vco(sub, v.co))
    raise TypeError(f"not a value term: {v!r}")


def apply_comp(sub: Substitution, c: CompTerm) -> CompTerm:
    if isinstance(c, Return):
        return Return(apply_value(sub, c.val))
    if isinstance(c, OpCall):
        return OpCall(
            c.op,
            apply_value(sub, c.arg),
            c.bind,
            apply_vty(sub, c.bind_ty),
            apply_comp(sub, c.cont),
        )
    if isinstance(c, Do):
        return Do(c.var, apply_comp(sub, c.first), apply_comp(sub, c.rest))
    if isinstance(c, App):
        return App(apply_value(sub, c.fn), apply_value(sub, c.arg))
    if isinstance(c, LetVal):
        return LetVal(c.var, apply_value(sub, c.val), apply_comp(sub, c.body))
    if isinstance(c, CastC):
        return CastC(apply_comp(sub, c.comp), apply_cco(sub, c.co))
    raise TypeError(f"not a computation term: {c!r}")


def apply_tyctx(sub: Substitution, tyctx: TypingContext) -> TypingContext:
    return tuple((x, apply_vty(sub, t)) for x, t in tyctx)


def apply_context(sub: Substitution, ctx: ParamContext) -> ParamContext:
    """Target context of a strengthening: mapped parameters are dropped,
    surviving classifiers are substituted."""
    dom = sub.domain()
    return ParamContext(
        skel_params=tuple(s for s in ctx.skel_params if s not in dom),
        dirt_params=tuple(d for d in ctx.dirt_params if d not in dom),
        ty_params=tuple(
            (n, apply_skel(sub, s)) for n, s in ctx.ty_params if n not in dom
        ),
        dirt_cos=tuple(
            (n, apply_dirt(sub, lo), apply_dirt(sub, hi))
            for n, lo, hi in ctx.dirt_cos
            if n not in dom
        ),
        ty_cos=tuple(
            (n, apply_vty(sub, lo), apply_vty(sub, hi))
            for n, lo, hi in ctx.ty_cos
            if n not in dom
        ),
    )


# ---------------------------------------------------------------------------
# Composition: (compose(s2, s1))(p) = s2(s1(p))

def compose(s2: Substitution, s1: Substitution) -> Substitution:
    out = Substitution()
    out.skel = {n: apply_skel(s2, s) for n, s in s1.skel.items()}
    out.dirt = {n: apply_dirt(s2, d) for n, d in s1.dirt.items()}
    out.ty = {n: apply_vty(s2, t) for n, t in s1.ty.items()}
    out.dco = {n: apply_dco(s2, g) for n, g in s1.dco.items()}
    out.vco = {n: apply_vco(s2, g) for n, g in s1.vco.items()}
    for n, s in s2.skel.items():
        out.skel.setdefault(n, s)
    for n, d in s2.dirt.items():
        out.dirt.setdefault(n, d)
    for n, t in s2.ty.items():
        out.ty.setdefault(n, t)
    for n, g in s2.dco.items():
        out.dco.setdefault(n, g)
    for n, g in s2.vco.items():
        out.vco.setdefault(n, g)
    return out


# ---------------------------------------------------------------------------
# Validity

def check_validity(
    sig: Signature, src: ParamContext, sub: Substitution, dst: ParamContext
) -> None:
    """Check `sub : src -> dst`, left to right through `src`."""

    for name in src.skel_params:
        s = sub.skel.get(name, SkelParam(name))
        try:
            wf_skeleton(dst, s)
        except CheckError as e:
            _fail(name, name not in sub.skel, e)

    for name in src.dirt_params:
        d = sub.dirt.get(name, Dirt(frozenset(), name))
        try:
            wf_dirt(sig, dst, d)
        except CheckError as e:
            _fail(name, name not in sub.dirt, e)

    for name, skel in src.ty_params:
        t = sub.ty.get(name, TyParam(name))
        want = apply_skel(sub, skel)
        try:
            got = wf_vtype(sig, dst, t)
        except CheckError as e:
            _fail(name, name not in sub.ty, e)
        else:
            if got != want:
                raise SkeletonMismatch(
                    f"image of {name} has skeleton {got}, classifier demands {want}"
                )

    for name, lo, hi in src.dirt_cos:
        g = sub.dco.get(name, DCoParam(name))
        want = (apply_dirt(sub, lo), apply_dirt(sub, hi))
        try:
            got = check_dco(sig, dst, g)
        except CheckError as e:
            _fail(name, name not in sub.dco, e)
        else:
            if got != want:
                raise EndpointMismatch(
                    f"image of {name} has endpoints {got[0]} <= {got[1]}, "
                    f"classifier demands {want[0]} <= {want[1]}"
                )

    for name, lo, hi in src.ty_cos:
        g = sub.vco.get(name, VCoParam(name))
        want = (apply_vty(sub, lo), apply_vty(sub, hi))
        try:
            got = check_vco(sig, dst, g)
        except CheckError as e:
            _fail(name, name not in sub.vco, e)
        else:
            if got != want:
                raise EndpointMismatch(
                    f"image of {name} has endpoints {got[0]} <= {got[1]}, "
                    f"classifier demands {want[0]} <= {want[1]}"
                )


def _fail(name: str, unmapped: bool, cause: CheckError):
    if unmapped:
        raise UnmappedParam(
            f"parameter {name} is unmapped and absent from the target context"
        ) from cause
    raise cause
