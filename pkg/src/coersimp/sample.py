"""Random ground instantiations of well-formed contexts.

Dirt parameters are seeded at or above their forced content (the least
fixpoint pushed up by concrete operations on lower bounds) plus random
noise, then repaired by shrinking lower tails only; shrinking is monotone,
so the loop always lands on a valid assignment. Type upper bounds are
overwritten with their lower bound when no inclusion coercion exists.
Constraint names then get actual inclusion coercions.

An `enumerable` sample additionally keeps the carriers demanded by a term
evaluation finite: skeleton parameters become first-order shapes and every
dirt parameter occurring inside a function argument position (where lambda
tables force enumeration) is pinned to its forced content, usually empty.
The pinning is conservative; callers still catch `DomainTooLarge` and
retry with `strict=True`, which pins every parameter.
"""

from __future__ import annotations

import random

from .check import (
    NoWitness,
    dirt_inclusion_coercion,
    value_inclusion_coercion,
)
from .subst import Substitution, apply_dirt, apply_skel, apply_vty, check_validity
from .syntax import (
    CastV,
    CompType,
    Dirt,
    EMPTY_CONTEXT,
    Lam,
    ParamContext,
    Signature,
    SkelArrow,
    SkelBase,
    SkelUnit,
    Skeleton,
    TyArrow,
    TyBase,
    TyParam,
    TyUnit,
    ValueTerm,
    ValueType,
    App,
    CastC,
    Do,
    LetVal,
    OpCall,
    Return,
)


class SampleError(Exception):
    pass


def _collect_all(t: ValueType, acc: set[str]) -> None:
    if isinstance(t, TyParam):
        acc.add(t.name)
    elif isinstance(t, TyArrow):
        _collect_all(t.dom, acc)
        _collect_all(t.cod.ty, acc)
        if t.cod.dirt.tail is not None:
            acc.add(t.cod.dirt.tail)


def _walk_domains(t: ValueType, acc: set[str], in_dom: bool) -> None:
    if isinstance(t, TyParam):
        if in_dom:
            acc.add(t.name)
    elif isinstance(t, TyArrow):
        if in_dom:
            _collect_all(t.dom, acc)
        else:
            _walk_domains(t.dom, acc, True)
        if in_dom and t.cod.dirt.tail is not None:
            acc.add(t.cod.dirt.tail)
        _walk_domains(t.cod.ty, acc, in_dom)


def _walk_term(t, acc: set[str]) -> None:
    if isinstance(t, Lam):
        _collect_all(t.ty, acc)  # the whole annotation gets enumerated
        _walk_term(t.body, acc)
    elif isinstance(t, CastV):
        _walk_term(t.val, acc)
    elif isinstance(t, Return):
        _walk_term(t.val, acc)
    elif isinstance(t, OpCall):
        _walk_term(t.arg, acc)
        _walk_term(t.cont, acc)
    elif isinstance(t, Do):
        _walk_term(t.first, acc)
        _walk_term(t.rest, acc)
    elif isinstance(t, App):
        _walk_term(t.fn, acc)
        _walk_term(t.arg, acc)
    elif isinstance(t, LetVal):
        _walk_term(t.val, acc)
        _walk_term(t.body, acc)
    elif isinstance(t, CastC):
        _walk_term(t.comp, acc)


def buried_params(poltype: ValueType | None, term=None) -> set[str]:
    """Parameters whose instantiations must stay finitely enumerable."""
    acc: set[str] = set()
    if poltype is not None:
        _walk_domains(poltype, acc, False)
    if term is not None:
        _walk_term(term, acc)
    return acc


def _sample_skeleton(rng: random.Random, enumerable: bool) -> Skeleton:
    picks = ["unit", "bool", "bit"]
    if not enumerable:
        picks += ["arrow"]
    kind = rng.choice(picks)
    if kind == "unit":
        return SkelUnit()
    if kind == "arrow":
        return SkelArrow(SkelUnit(), SkelUnit())
    return SkelBase(kind)


def _sample_dirt(rng: random.Random, ops, pinned: bool) -> Dirt:
    if pinned:
        return Dirt(frozenset(), None)
    return Dirt(frozenset(op for op in ops if rng.random() < 0.4), None)


def forced_dirt_content(ctx: ParamContext) -> dict[str, frozenset]:
    """Least operations each dirt parameter must carry.

    Concrete operations on a lower bound propagate into open upper tails;
    iterating to a fixpoint yields the smallest solution of all the dirt
    constraints. A closed pair that cannot hold even there is
    unsatisfiable.
    """
    least = {d: frozenset() for d in ctx.dirt_params}
    changed = True
    while changed:
        changed = False
        for name, lo, hi in ctx.dirt_cos:
            req = lo.ops
            if lo.tail is not None:
                req = req | least[lo.tail]
            if hi.tail is not None:
                need = req - hi.ops
                if not need <= least[hi.tail]:
                    least[hi.tail] = least[hi.tail] | need
                    changed = True
            elif not req <= hi.ops:
                raise SampleError(f"unsatisfiable constraint {name}: {lo} <= {hi}")
    return least


def _join_vty(a: ValueType, b: ValueType) -> ValueType:
    """Least upper bound of two ground types with a common skeleton."""
    if a == b:
        return a
    if isinstance(a, TyArrow) and isinstance(b, TyArrow):
        return TyArrow(
            _meet_vty(a.dom, b.dom),
            CompType(_join_vty(a.cod.ty, b.cod.ty),
                     Dirt(a.cod.dirt.ops | b.cod.dirt.ops, None)),
        )
    raise SampleError(f"no join of {a} and {b}")


def _meet_vty(a: ValueType, b: ValueType) -> ValueType:
    if a == b:
        return a
    if isinstance(a, TyArrow) and isinstance(b, TyArrow):
        return TyArrow(
            _join_vty(a.dom, b.dom),
            CompType(_meet_vty(a.cod.ty, b.cod.ty),
                     Dirt(a.cod.dirt.ops & b.cod.dirt.ops, None)),
        )
    raise SampleError(f"no meet of {a} and {b}")


def _ground_of_skeleton(s: Skeleton, rng: random.Random, ops, pinned: bool) -> ValueType:
    if isinstance(s, SkelUnit):
        return TyUnit()
    if isinstance(s, SkelBase):
        return TyBase(s.name)
    if isinstance(s, SkelArrow):
        return TyArrow(
            _ground_of_skeleton(s.dom, rng, ops, pinned),
            CompType(_ground_of_skeleton(s.cod, rng, ops, pinned),
                     _sample_dirt(rng, ops, pinned)),
        )
    raise SampleError(f"cannot ground skeleton {s}")


def sample_eta(
    sig: Signature,
    ctx: ParamContext,
    rng: random.Random,
    enumerable: bool = False,
    poltype: ValueType | None = None,
    term: ValueTerm | None = None,
    strict: bool = False,
) -> Substitution:
    """One ground instantiation of `ctx`, validated before returning."""
    enumerable = enumerable or strict
    ops = sorted(sig.names())
    if strict:
        pinned = set(ctx.dirt_params) | {n for n, _ in ctx.ty_params}
    elif enumerable:
        pinned = buried_params(poltype, term)
    else:
        pinned = set()

    sub = Substitution()
    for s in ctx.skel_params:
        sub.skel[s] = _sample_skeleton(rng, enumerable)
    least = forced_dirt_content(ctx)
    for d in ctx.dirt_params:
        extra = _sample_dirt(rng, ops, d in pinned)
        sub.dirt[d] = Dirt(least[d] | extra.ops, None)

    # Repair dirt inclusions by shrinking lower tails. Forced content never
    # goes missing (the upper side carries it by construction), so each
    # pass only strips random noise and the loop terminates.
    for _ in range(len(ctx.dirt_params) * max(1, len(ops)) + 2):
        settled = True
        for name, lo, hi in ctx.dirt_cos:
            glo = apply_dirt(sub, lo)
            ghi = apply_dirt(sub, hi)
            missing = glo.ops - ghi.ops
            if not missing:
                continue
            settled = False
            if lo.tail is None or not missing <= sub.dirt[lo.tail].ops:
                raise SampleError(f"cannot satisfy {name}: {lo} <= {hi}")
            sub.dirt[lo.tail] = Dirt(sub.dirt[lo.tail].ops - missing, None)
        if settled:
            break
    else:
        raise SampleError("dirt repair did not converge")

    for name, skel in ctx.ty_params:
        gskel = apply_skel(sub, skel)
        sub.ty[name] = _ground_of_skeleton(gskel, rng, ops, name in pinned)

    # Repair type inclusions by raising the upper image to its join with
    # the lower one. Joins only climb a finite lattice, so this settles.
    for _ in range(64):
        settled = True
        for _, lo, hi in ctx.ty_cos:
            try:
                value_inclusion_coercion(apply_vty(sub, lo), apply_vty(sub, hi))
            except NoWitness:
                if not isinstance(hi, TyParam):
                    raise SampleError(f"cannot satisfy {lo} <= {hi}")
                sub.ty[hi.name] = _join_vty(apply_vty(sub, lo), apply_vty(sub, hi))
                settled = False
        if settled:
            break
    else:
        raise SampleError("type repair did not converge")

    for name, lo, hi in ctx.dirt_cos:
        sub.dco[name] = dirt_inclusion_coercion(apply_dirt(sub, lo), apply_dirt(sub, hi))
    for name, lo, hi in ctx.ty_cos:
        sub.vco[name] = value_inclusion_coercion(apply_vty(sub, lo), apply_vty(sub, hi))

    check_validity(sig, ctx, sub, EMPTY_CONTEXT)
    return sub
