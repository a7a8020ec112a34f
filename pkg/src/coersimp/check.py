"""Well-formedness, coercion endpoint checking, and term typing.

The judgments here are all syntax-directed and total: each function either
returns the classifying object (a skeleton for types, an endpoint pair for
coercions, a type for terms) or raises a `CheckError` subclass.

Two conventions worth spelling out, both load-bearing for everything built
on top:

* The arrow coercion is contravariant on the argument side. If
  `cv : A <= A'` and `cc : C <= C'` then `(cv -> cc) : (A' -> C) <= (A -> C')`.
  (Some presentations of this rule circulate with the primes swapped in the
  conclusion; that version contradicts both the semantic reading of the
  coercion as a function-space injection and the way arrow constraints are
  decomposed during reduction, so it is not used here.)

* The admissible "empty below a dirt" coercion for a compound dirt is built
  by *right* extension over the tail: `empty({Op} u d)` is `{Op} u+ empty(d)`,
  with endpoints `{} <= {Op}+d`. Extending both sides instead would produce
  the wrong lower endpoint.
"""

from __future__ import annotations

from .syntax import (
    CCoercion,
    CompTerm,
    CompType,
    CastC,
    CastV,
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
    App,
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
    dirt,
)


class CheckError(Exception):
    pass


class UnknownName(CheckError):
    pass


class IllFormed(CheckError):
    pass


class SkeletonMismatch(CheckError):
    pass


class EndpointMismatch(CheckError):
    pass


class TypeMismatch(CheckError):
    pass


class NoWitness(CheckError):
    """No canonical coercion exists between the requested endpoints."""


# ---------------------------------------------------------------------------
# Well-formedness

def wf_skeleton(ctx: ParamContext, s: Skeleton) -> None:
    if isinstance(s, SkelParam):
        if s.name not in ctx.skel_params:
            raise UnknownName(f"skeleton parameter {s.name} not in context")
    elif isinstance(s, (SkelUnit, SkelBase)):
        pass
    elif isinstance(s, SkelArrow):
        wf_skeleton(ctx, s.dom)
        wf_skeleton(ctx, s.cod)
    else:
        raise IllFormed(f"not a skeleton: {s!r}")


def wf_dirt(sig: Signature, ctx: ParamContext, d: Dirt) -> None:
    for op in d.ops:
        if op not in sig:
            raise UnknownName(f"operation {op} not in signature")
    if d.tail is not None and d.tail not in ctx.dirt_params:
        raise UnknownName(f"dirt parameter {d.tail} not in context")


def wf_vtype(sig: Signature, ctx: ParamContext, t: ValueType) -> Skeleton:
    """Check well-formedness and return the type's skeleton."""
    if isinstance(t, TyParam):
        s = ctx.ty_param_skeleton(t.name)
        if s is None:
            raise UnknownName(f"type parameter {t.name} not in context")
        return s
    if isinstance(t, TyUnit):
        return SkelUnit()
    if isinstance(t, TyBase):
        return SkelBase(t.name)
    if isinstance(t, TyArrow):
        sd = wf_vtype(sig, ctx, t.dom)
        sc = wf_ctype(sig, ctx, t.cod)
        return SkelArrow(sd, sc)
    raise IllFormed(f"not a value type: {t!r}")


def wf_ctype(sig: Signature, ctx: ParamContext, c: CompType) -> Skeleton:
    s = wf_vtype(sig, ctx, c.ty)
    wf_dirt(sig, ctx, c.dirt)
    return s


def is_closed_vty(t: ValueType) -> bool:
    if isinstance(t, (TyUnit, TyBase)):
        return True
    if isinstance(t, TyParam):
        return False
    if isinstance(t, TyArrow):
        return (
            is_closed_vty(t.dom)
            and is_closed_vty(t.cod.ty)
            and t.cod.dirt.is_closed
        )
    raise IllFormed(f"not a value type: {t!r}")


def is_ground_vty(t: ValueType) -> bool:
    """Ground types: built from unit and bases only (no arrows, no params)."""
    return isinstance(t, (TyUnit, TyBase))


def wf_signature(sig: Signature) -> None:
    """Every entry type closed; every result type ground."""
    seen = set()
    for name, entry in sig.ops:
        if name in seen:
            raise IllFormed(f"duplicate operation {name}")
        seen.add(name)
        if not is_closed_vty(entry.arg):
            raise IllFormed(f"operation {name}: argument type not closed")
        if not is_ground_vty(entry.result):
            raise IllFormed(f"operation {name}: result type not ground")


def wf_context(sig: Signature, ctx: ParamContext) -> None:
    """Check the whole parameter context, in dependency order.

    Coercion classifiers must relate types of equal skeleton; dirt coercion
    classifiers just need two well-formed dirts.
    """
    seen: set[str] = set()

    def declare(name: str) -> None:
        if name in seen:
            raise IllFormed(f"duplicate parameter {name}")
        seen.add(name)

    for s in ctx.skel_params:
        declare(s)
    for d in ctx.dirt_params:
        declare(d)
    for name, skel in ctx.ty_params:
        declare(name)
        wf_skeleton(ctx, skel)
    for name, lo, hi in ctx.dirt_cos:
        declare(name)
        wf_dirt(sig, ctx, lo)
        wf_dirt(sig, ctx, hi)
    for name, lo, hi in ctx.ty_cos:
        declare(name)
        slo = wf_vtype(sig, ctx, lo)
        shi = wf_vtype(sig, ctx, hi)
        if slo != shi:
            raise SkeletonMismatch(
                f"coercion parameter {name} relates skeletons {slo} and {shi}"
            )


def wf_typing_context(sig: Signature, ctx: ParamContext, tyctx: TypingContext) -> None:
    for _, t in tyctx:
        wf_vtype(sig, ctx, t)


# ---------------------------------------------------------------------------
# Coercion endpoints

def check_dco(sig: Signature, ctx: ParamContext, g: DCoercion) -> tuple[Dirt, Dirt]:
    if isinstance(g, DCoParam):
        cls = ctx.dirt_co_classifier(g.name)
        if cls is None:
            raise UnknownName(f"dirt coercion parameter {g.name} not in context")
        return cls
    if isinstance(g, DCoReflParam):
        if g.name not in ctx.dirt_params:
            raise UnknownName(f"dirt parameter {g.name} not in context")
        d = dirt((), g.name)
        return d, d
    if isinstance(g, DCoReflEmpty):
        return dirt(), dirt()
    if isinstance(g, DCoEmptyUnder):
        if g.tail not in ctx.dirt_params:
            raise UnknownName(f"dirt parameter {g.tail} not in context")
        return dirt(), dirt((), g.tail)
    if isinstance(g, DCoUnionBoth):
        if g.op not in sig:
            raise UnknownName(f"operation {g.op} not in signature")
        lo, hi = check_dco(sig, ctx, g.body)
        return lo.with_ops({g.op}), hi.with_ops({g.op})
    if isinstance(g, DCoUnionRight):
        if g.op not in sig:
            raise UnknownName(f"operation {g.op} not in signature")
        lo, hi = check_dco(sig, ctx, g.body)
        return lo, hi.with_ops({g.op})
    if isinstance(g, DCoCompose):
        lo1, hi1 = check_dco(sig, ctx, g.before)
        lo2, hi2 = check_dco(sig, ctx, g.after)
        if hi1 != lo2:
            raise EndpointMismatch(
                f"dirt coercion composition: {hi1} vs {lo2}"
            )
        return lo1, hi2
    raise IllFormed(f"not a dirt coercion: {g!r}")


def check_vco(sig: Signature, ctx: ParamContext, g: VCoercion) -> tuple[ValueType, ValueType]:
    if isinstance(g, VCoParam):
        cls = ctx.ty_co_classifier(g.name)
        if cls is None:
            raise UnknownName(f"type coercion parameter {g.name} not in context")
        return cls
    if isinstance(g, VCoReflParam):
        if ctx.ty_param_skeleton(g.name) is None:
            raise UnknownName(f"type parameter {g.name} not in context")
        t = TyParam(g.name)
        return t, t
    if isinstance(g, VCoReflUnit):
        return TyUnit(), TyUnit()
    if isinstance(g, VCoReflBase):
        t = TyBase(g.name)
        return t, t
    if isinstance(g, VCoArrow):
        a, a2 = check_vco(sig, ctx, g.arg)
        c, c2 = check_cco(sig, ctx, g.res)
        return TyArrow(a2, c), TyArrow(a, c2)
    if isinstance(g, VCoCompose):
        lo1, hi1 = check_vco(sig, ctx, g.before)
        lo2, hi2 = check_vco(sig, ctx, g.after)
        if hi1 != lo2:
            raise EndpointMismatch(
                f"value coercion composition: {hi1} vs {lo2}"
            )
        return lo1, hi2
    raise IllFormed(f"not a value coercion: {g!r}")


def check_cco(sig: Signature, ctx: ParamContext, g: CCoercion) -> tuple[CompType, CompType]:
    a1, a2 = check_vco(sig, ctx, g.vco)
    d1, d2 = check_dco(sig, ctx, g.dco)
    return CompType(a1, d1), CompType(a2, d2)


# ---------------------------------------------------------------------------
# Derived (admissible) coercions

def both_extend(ops, body: DCoercion) -> DCoercion:
    """Add the given operations to both endpoints of a dirt coercion."""
    for op in sorted(ops, reverse=True):
        body = DCoUnionBoth(op, body)
    return body


def right_extend(ops, body: DCoercion) -> DCoercion:
    """Add the given operations to the upper endpoint only."""
    for op in sorted(ops, reverse=True):
        body = DCoUnionRight(op, body)
    return body


def derived_empty(d: Dirt) -> DCoercion:
    """The admissible coercion `{} <= d`, built by right extension."""
    body: DCoercion
    body = DCoReflEmpty() if d.tail is None else DCoEmptyUnder(d.tail)
    for op in reversed(d.sorted_ops()):
        body = DCoUnionRight(op, body)
    return body


def derived_refl_dirt(d: Dirt) -> DCoercion:
    body: DCoercion
    body = DCoReflEmpty() if d.tail is None else DCoReflParam(d.tail)
    for op in reversed(d.sorted_ops()):
        body = DCoUnionBoth(op, body)
    return body


def derived_refl_vty(t: ValueType) -> VCoercion:
    if isinstance(t, TyParam):
        return VCoReflParam(t.name)
    if isinstance(t, TyUnit):
        return VCoReflUnit()
    if isinstance(t, TyBase):
        return VCoReflBase(t.name)
    if isinstance(t, TyArrow):
        return VCoArrow(derived_refl_vty(t.dom), derived_refl_cty(t.cod))
    raise IllFormed(f"not a value type: {t!r}")


def derived_refl_cty(c: CompType) -> CCoercion:
    return CCoercion(derived_refl_vty(c.ty), derived_refl_dirt(c.dirt))


# ---------------------------------------------------------------------------
# Canonical inclusion witnesses
#
# These decide derivable subtyping and produce the witness, for the shapes
# the simplifier needs: dirt inclusions that only add operations, and closed
# value types. There is deliberately no rule placing an operation "under" a
# tail parameter, so {Op} <= d has no witness even though some instantiation
# of d may contain Op.

def dirt_inclusion_coercion(lo: Dirt, hi: Dirt) -> DCoercion:
    if lo.tail is not None and lo.tail != hi.tail:
        raise NoWitness(f"no dirt coercion {lo} <= {hi}")
    if not lo.ops <= hi.ops:
        raise NoWitness(f"no dirt coercion {lo} <= {hi}")
    if lo.tail == hi.tail:
        body = derived_refl_dirt(Dirt(frozenset(), lo.tail))
        for op in reversed(sorted(hi.ops - lo.ops)):
            body = DCoUnionRight(op, body)
    else:
        # lo is closed, hi has a tail.
        body = derived_empty(Dirt(hi.ops - lo.ops, hi.tail))
    for op in reversed(sorted(lo.ops)):
        body = DCoUnionBoth(op, body)
    return body


def value_inclusion_coercion(lo: ValueType, hi: ValueType) -> VCoercion:
    """Witness `lo <= hi` for closed types (and identical parameters)."""
    if lo == hi:
        return derived_refl_vty(lo)
    if isinstance(lo, TyArrow) and isinstance(hi, TyArrow):
        arg = value_inclusion_coercion(hi.dom, lo.dom)
        res_v = value_inclusion_coercion(lo.cod.ty, hi.cod.ty)
        res_d = dirt_inclusion_coercion(lo.cod.dirt, hi.cod.dirt)
        return VCoArrow(arg, CCoercion(res_v, res_d))
    raise NoWitness(f"no value coercion {lo} <= {hi}")


# ---------------------------------------------------------------------------
# Term typing

def _lookup(tyctx: TypingContext, x: str) -> ValueType:
    for name, t in reversed(tyctx):
        if name == x:
            return t
    raise UnknownName(f"unbound variable {x}")


def type_of_value(
    sig: Signature, ctx: ParamContext, tyctx: TypingContext, v: ValueTerm
) -> ValueType:
    if isinstance(v, Var):
        return _lookup(tyctx, v.name)
    if isinstance(v, UnitVal):
        return TyUnit()
    if isinstance(v, Lam):
        wf_vtype(sig, ctx, v.ty)
        c = type_of_comp(sig, ctx, tyctx + ((v.var, v.ty),), v.body)
        return TyArrow(v.ty, c)
    if isinstance(v, CastV):
        a = type_of_value(sig, ctx, tyctx, v.val)
        lo, hi = check_vco(sig, ctx, v.co)
        if a != lo:
            raise TypeMismatch(f"cast source {lo} but value has type {a}")
        return hi
    raise IllFormed(f"not a value term: {v!r}")


def type_of_comp(
    sig: Signature, ctx: ParamContext, tyctx: TypingContext, c: CompTerm
) -> CompType:
    if isinstance(c, Return):
        return CompType(type_of_value(sig, ctx, tyctx, c.val), dirt())
    if isinstance(c, OpCall):
        entry = sig.get(c.op)
        if entry is None:
            raise UnknownName(f"operation {c.op} not in signature")
        a = type_of_value(sig, ctx, tyctx, c.arg)
        if a != entry.arg:
            raise TypeMismatch(
                f"operation {c.op} expects {entry.arg}, argument has {a}"
            )
        if c.bind_ty != entry.result:
            raise TypeMismatch(
                f"operation {c.op} binds {entry.result}, annotation says {c.bind_ty}"
            )
        body = type_of_comp(sig, ctx, tyctx + ((c.bind, entry.result),), c.cont)
        if c.op not in body.dirt.ops:
            raise TypeMismatch(
                f"operation {c.op} not covered by the continuation dirt {body.dirt}"
            )
        return body
    if isinstance(c, Do):
        first = type_of_comp(sig, ctx, tyctx, c.first)
        rest = type_of_comp(sig, ctx, tyctx + ((c.var, first.ty),), c.rest)
        if rest.dirt != first.dirt:
            raise TypeMismatch(
                f"do branches have dirts {first.dirt} and {rest.dirt}"
            )
        return rest
    if isinstance(c, App):
        f = type_of_value(sig, ctx, tyctx, c.fn)
        if not isinstance(f, TyArrow):
            raise TypeMismatch(f"application head has non-arrow type {f}")
        a = type_of_value(sig, ctx, tyctx, c.arg)
        if a != f.dom:
            raise TypeMismatch(f"function expects {f.dom}, argument has {a}")
        return f.cod
    if isinstance(c, LetVal):
        a = type_of_value(sig, ctx, tyctx, c.val)
        return type_of_comp(sig, ctx, tyctx + ((c.var, a),), c.body)
    if isinstance(c, CastC):
        got = type_of_comp(sig, ctx, tyctx, c.comp)
        lo, hi = check_cco(sig, ctx, c.co)
        if got != lo:
            raise TypeMismatch(f"cast source {lo} but computation has type {got}")
        return hi
    raise IllFormed(f"not a computation term: {c!r}")
