import pytest

from coersimp.syntax import (
    CompType,
    Dirt,
    NameSupply,
    ParamContext,
    SkelArrow,
    SkelParam,
    SkelUnit,
    TyArrow,
    TyBase,
    TyParam,
    TyUnit,
    alpha_equivalent,
    dirt,
    signature,
)


def test_dirt_helper_normalizes():
    d = dirt(("Random", "Fail"), "d1")
    assert d.ops == frozenset({"Random", "Fail"})
    assert d.tail == "d1"
    assert dirt().ops == frozenset()
    assert dirt().tail is None


def test_printing():
    assert str(Dirt(frozenset(), None)) == "{}"
    assert str(Dirt(frozenset({"Random"}), "d1")) == "{Random}+d1"
    t = TyArrow(TyUnit(), CompType(TyBase("bit"), Dirt(frozenset(), "d1")))
    assert str(t) == "(unit -> bit!d1)"
    assert str(SkelArrow(SkelUnit(), SkelParam("s1"))) == "(unit -> s1)"


def test_types_are_hashable_values():
    a = TyArrow(TyParam("a"), CompType(TyUnit(), dirt()))
    b = TyArrow(TyParam("a"), CompType(TyUnit(), dirt()))
    assert a == b
    assert hash(a) == hash(b)
    assert a != TyArrow(TyParam("b"), CompType(TyUnit(), dirt()))


def test_signature_lookup():
    sig = signature(Random=(TyUnit(), TyBase("bit")))
    assert "Random" in sig
    assert "Fail" not in sig
    assert sig.get("Random").result == TyBase("bit")
    assert sig.names() == ["Random"]


def test_name_supply_avoids_seeded_names():
    ctx = ParamContext(("s1",), ("d2",), (("a1", SkelParam("s1")),), (), ())
    supply = NameSupply.seeded(ctx)
    assert supply.fresh("s") == "s2"
    assert supply.fresh("d") != "d2"
    seen = {supply.fresh("a") for _ in range(10)}
    assert len(seen) == 10
    assert "a1" not in seen


def test_alpha_equivalence_renames_consistently():
    a = TyArrow(TyParam("a"), CompType(TyParam("a"), Dirt(frozenset(), "d")))
    same = TyArrow(TyParam("x"), CompType(TyParam("x"), Dirt(frozenset(), "e")))
    diff = TyArrow(TyParam("x"), CompType(TyParam("y"), Dirt(frozenset(), "e")))
    assert alpha_equivalent(a, same)
    assert not alpha_equivalent(a, diff)


def test_alpha_equivalence_is_injective():
    # two distinct parameters cannot collapse onto one
    a = TyArrow(TyParam("x"), CompType(TyParam("y"), dirt()))
    b = TyArrow(TyParam("z"), CompType(TyParam("z"), dirt()))
    assert not alpha_equivalent(a, b)


def test_alpha_equivalence_respects_ops():
    a = Dirt(frozenset({"Random"}), "d")
    assert alpha_equivalent(
        TyArrow(TyUnit(), CompType(TyUnit(), a)),
        TyArrow(TyUnit(), CompType(TyUnit(), Dirt(frozenset({"Random"}), "e"))),
    )
    assert not alpha_equivalent(
        TyArrow(TyUnit(), CompType(TyUnit(), a)),
        TyArrow(TyUnit(), CompType(TyUnit(), Dirt(frozenset({"Fail"}), "e"))),
    )


def test_context_describe_and_names():
    ctx = ParamContext(
        ("s1",), ("d1",), (("a1", SkelParam("s1")),),
        (("p1", dirt((), "d1"), dirt(("Random",), None)),),
        (("w1", TyParam("a1"), TyParam("a1")),),
    )
    assert ctx.all_names() == {"s1", "d1", "a1", "p1", "w1"}
    assert "a1:s1" in ctx.describe()
