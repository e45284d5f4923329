"""Topological groupoids of models: algebra, continuity, preimage
identities, openness certificates, restriction morphisms."""

import pytest

from modform.groupoid import (
    build_model_groupoid,
    build_S_groupoid,
    identity_morphism,
    mod_on_interpretation,
    open_image_d,
    structure_map_preimages,
)
from modform.logic import (
    EQUALITY_THEORY,
    Eq,
    Exists,
    INCONSISTENT_THEORY,
    Interpretation,
    Rel,
    TOP,
    Var,
    fic,
    identity_interpretation,
    initial_interpretation,
)
from modform.models import IndexSet, IndexedStructure, model_class
from modform.parser import parse_theory
from modform.topology import (
    BasicOpenI,
    BasicOpenM,
    basic_open_arrows,
    basic_open_points,
    trivial_open_m,
)

SYM_E = "rel E/2\naxiom E(x,y) |- [x,y] E(y,x)"


def test_equality_groupoid_counts():
    mc = model_class(EQUALITY_THEORY, IndexSet(2))
    g = build_model_groupoid(mc)
    assert g.objects.size == 5 and g.arrows.size == 12
    assert g.check_algebra() == []


def test_equality_groupoid_at_one_index():
    mc = model_class(EQUALITY_THEORY, IndexSet(1))
    g = build_model_groupoid(mc)
    assert g.objects.size == 2 and g.arrows.size == 2
    assert all(g.e[x] in range(2) for x in range(2))
    assert g.check_algebra() == []


def test_inconsistent_theory_gives_empty_groupoid():
    mc = model_class(INCONSISTENT_THEORY, IndexSet(2))
    g = build_model_groupoid(mc)
    assert g.objects.size == 0 and g.arrows.size == 0
    assert g.check_algebra() == []


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("text", ["", SYM_E])
def test_algebra_and_continuity_small_sizes(text, n):
    theory = parse_theory(text) if text else EQUALITY_THEORY
    mc = model_class(theory, IndexSet(n))
    g = build_model_groupoid(mc)
    assert g.check_algebra() == []
    assert all(g.check_continuity().values())


def test_s_groupoid_is_equality_groupoid():
    for n in (1, 2):
        S = IndexSet(n)
        gs = build_S_groupoid(S)
        g = build_model_groupoid(model_class(EQUALITY_THEORY, S))
        assert gs is g


def test_preimage_identities_all_pairs():
    mc = model_class(EQUALITY_THEORY, IndexSet(2))
    for a in range(2):
        for b in range(2):
            r = structure_map_preimages(mc, a, b)
            assert all(v["ok"] for v in r.values()), (a, b)


def test_preimage_identity_e_value():
    mc = model_class(EQUALITY_THEORY, IndexSet(2))
    r = structure_map_preimages(mc, 0, 0)
    want = basic_open_points(mc, BasicOpenM(fic(["x", "y"], Eq(Var("x"), Var("y"))), (0, 0)))
    assert r["e"]["computed"] == want
    assert len(want) == 3


def test_preimage_identity_i_value():
    mc = model_class(EQUALITY_THEORY, IndexSet(2))
    r = structure_map_preimages(mc, 0, 1)
    flip = basic_open_arrows(mc, BasicOpenI(trivial_open_m(), ((1, 0),), trivial_open_m()))
    assert r["i"]["computed"] == flip


def test_preimage_identities_symmetric_relation():
    t = parse_theory(SYM_E)
    mc = model_class(t, IndexSet(2))
    for a in range(2):
        for b in range(2):
            r = structure_map_preimages(mc, a, b)
            assert all(v["ok"] for v in r.values())


def test_openness_trivial_cover():
    mc = model_class(EQUALITY_THEORY, IndexSet(2))
    res = open_image_d(mc, BasicOpenI(trivial_open_m(), (), trivial_open_m()))
    assert res["status"] == "verified"
    assert res["image"] == frozenset(range(5))


def test_openness_preservation_only():
    mc = model_class(EQUALITY_THEORY, IndexSet(2))
    res = open_image_d(mc, BasicOpenI(trivial_open_m(), ((0, 1),), trivial_open_m()))
    assert res["status"] == "verified"
    assert res["image"] == basic_open_points(mc, BasicOpenM(fic(["x"], TOP), (0,)))


def test_openness_symmetric_condition():
    mc = model_class(EQUALITY_THEORY, IndexSet(2))
    cond = BasicOpenM(fic(["x"], TOP), (0,))
    res = open_image_d(mc, BasicOpenI(cond, ((0, 0),), cond))
    assert res["status"] == "verified"
    assert res["image"] == basic_open_points(mc, cond)


def test_openness_gated_instance():
    # gluing both indices into one block cannot be undone at |S| = 2
    mc = model_class(EQUALITY_THEORY, IndexSet(2))
    cod = BasicOpenM(fic(["x", "y"], Eq(Var("x"), Var("y"))), (0, 1))
    res = open_image_d(mc, BasicOpenI(trivial_open_m(), ((0, 0), (0, 1)), cod))
    assert res["status"] == "gated"
    assert res["image"] < res["union"]


def test_openness_gate_shrinks_with_headroom():
    # at |S| = 3 the only still-missing model is the three-block one, which
    # would need a fourth index to absorb the glued pair
    mc = model_class(EQUALITY_THEORY, IndexSet(3))
    cod = BasicOpenM(fic(["x", "y"], Eq(Var("x"), Var("y"))), (0, 1))
    res = open_image_d(mc, BasicOpenI(trivial_open_m(), ((0, 0), (0, 1)), cod))
    assert res["status"] == "gated"
    missing = res["union"] - res["image"]
    assert missing == {mc.find_model(IndexedStructure([0, 1, 2], [(0,), (1,), (2,)]))}


def test_certificate_union_equals_image():
    mc = model_class(EQUALITY_THEORY, IndexSet(2))
    v = BasicOpenI(
        BasicOpenM(fic(["x"], TOP), (0,)), ((0, 1),), BasicOpenM(fic(["x"], TOP), (1,))
    )
    res = open_image_d(mc, v)
    assert res["status"] == "verified"
    union = frozenset()
    for bop in res["certificate"]:
        union |= basic_open_points(mc, bop)
    assert union == res["image"]


def test_mod_on_identity_interpretation():
    t = parse_theory(SYM_E)
    m, report = mod_on_interpretation(identity_interpretation(t), IndexSet(2))
    ident = identity_morphism(m.src)
    assert m.f0 == ident.f0 and m.f1 == ident.f1
    assert all(r["ok"] for r in report)


def test_forgetful_morphism():
    t = parse_theory(SYM_E)
    m, report = mod_on_interpretation(initial_interpretation(t), IndexSet(2))
    assert m.check() == []
    assert all(r["ok"] for r in report)
    gs = build_S_groupoid(IndexSet(2))
    assert m.dst is gs
    # the object map forgets structure: carriers agree
    smc = model_class(EQUALITY_THEORY, IndexSet(2))
    tmc = model_class(t, IndexSet(2))
    for i, M in enumerate(tmc.models):
        assert smc.models[m.f0[i]].domain == M.domain
        assert smc.models[m.f0[i]].blocks == M.blocks


def test_mod_on_formula_interpretation():
    src = parse_theory("rel P/1")
    tgt = parse_theory(SYM_E)
    F = Interpretation(
        src, tgt, (("P", fic(["x"], Exists("y", Rel("E", (Var("x"), Var("y")))))),), ()
    )
    m, report = mod_on_interpretation(F, IndexSet(2))
    assert m.check() == []
    assert all(r["ok"] for r in report)
    # the displayed identity on one concrete basic open
    mc_src = model_class(tgt, IndexSet(2))
    mc_dst = model_class(src, IndexSet(2))
    b = BasicOpenM(fic(["x"], Rel("P", (Var("x"),))), (0,))
    pts = basic_open_points(mc_dst, b)
    lhs = frozenset(x for x in range(m.src.objects.size) if m.f0[x] in pts)
    translated = BasicOpenM(fic(["x"], F.translate(Rel("P", (Var("x"),)))), (0,))
    assert lhs == basic_open_points(mc_src, translated)


@pytest.mark.parametrize("n", [2, 3])
def test_openness_shortfalls_are_always_headroom(n):
    # gluing arrows keep d from being an open map at small index sizes;
    # every such shortfall must diagnose as a headroom gate, never a failure
    from modform.topology import minimal_varray

    mc = model_class(EQUALITY_THEORY, IndexSet(n))
    g = build_model_groupoid(mc)
    assert not g.is_open()
    saw_gate = False
    for j in range(g.arrows.size):
        res = open_image_d(mc, minimal_varray(mc, j))
        assert res["status"] in ("verified", "gated")
        img = frozenset(g.d[x] for x in g.arrows.minimal_nbhd(j))
        if not g.objects.is_open(img):
            assert res["status"] == "gated"
            saw_gate = True
    assert saw_gate
