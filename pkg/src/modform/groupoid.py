"""Finite topological groupoids of models and isomorphisms.

The groupoid of a model class has the models as objects and the
isomorphisms as arrows, both carrying the logical topology.  Structure
maps are explicit finite functions; composition is a precomputed table.
Continuity and open-map checks run on minimal neighborhoods, which is
exact for finite spaces.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SignatureError
from .logic import EQUALITY_THEORY, conj, fic, substitute, Var
from .models import ModelClass, model_class, reduct, star_headroom
from .topology import (
    BasicOpenI,
    BasicOpenM,
    FinSpace,
    arrow_space,
    atomic_opens,
    basic_open_arrows,
    basic_open_points,
    model_space,
    trivial_open_m,
)


class TopGroupoid:
    """Object and arrow spaces with d, c, e, i and a composition table."""

    def __init__(self, objects: FinSpace, arrows: FinSpace, d, c, e, i, comp):
        self.objects = objects
        self.arrows = arrows
        self.d = tuple(d)
        self.c = tuple(c)
        self.e = tuple(e)
        self.i = tuple(i)
        self.comp = dict(comp)

    def composable(self):
        """Pairs (g, f) with d(g) = c(f); composition is g after f."""
        for g in range(self.arrows.size):
            for f in range(self.arrows.size):
                if self.d[g] == self.c[f]:
                    yield g, f

    def m(self, g, f):
        return self.comp[(g, f)]

    # -- algebraic axioms ---------------------------------------------------

    def check_algebra(self):
        """All groupoid identities, exactly; returns a list of violations."""
        bad = []
        n_obj, n_arr = self.objects.size, self.arrows.size
        if len(self.d) != n_arr or len(self.c) != n_arr or len(self.e) != n_obj:
            bad.append("structure map sizes disagree with the spaces")
            return bad
        for x in range(n_obj):
            if self.d[self.e[x]] != x or self.c[self.e[x]] != x:
                bad.append(f"e({x}) is not an endo-arrow at {x}")
        for f in range(n_arr):
            if self.i[self.i[f]] != f:
                bad.append(f"i not involutive at {f}")
            if self.d[self.i[f]] != self.c[f] or self.c[self.i[f]] != self.d[f]:
                bad.append(f"i swaps d and c incorrectly at {f}")
        comp_domain = set(self.comp)
        want = {(g, f) for g, f in self.composable()}
        if comp_domain != want:
            bad.append("composition table domain is not the composable pairs")
            return bad
        for g, f in want:
            gf = self.comp[(g, f)]
            if self.d[gf] != self.d[f] or self.c[gf] != self.c[g]:
                bad.append(f"m({g},{f}) has wrong endpoints")
        for f in range(n_arr):
            if self.comp[(self.e[self.c[f]], f)] != f or self.comp[(f, self.e[self.d[f]])] != f:
                bad.append(f"unit law fails at {f}")
            if self.comp[(self.i[f], f)] != self.e[self.d[f]]:
                bad.append(f"inverse law fails at {f}")
            if self.comp[(f, self.i[f])] != self.e[self.c[f]]:
                bad.append(f"inverse law (other side) fails at {f}")
        for h in range(n_arr):
            for g in range(n_arr):
                if self.d[h] != self.c[g]:
                    continue
                hg = self.comp[(h, g)]
                for f in range(n_arr):
                    if self.d[g] != self.c[f]:
                        continue
                    if self.comp[(hg, f)] != self.comp[(h, self.comp[(g, f)])]:
                        bad.append(f"associativity fails at ({h},{g},{f})")
        return bad

    # -- continuity ---------------------------------------------------------

    def check_continuity(self):
        """Continuity of d, c, e, i and of composition on the fibered
        product with its subspace-of-product topology."""
        out = {}
        out["d"] = self.arrows.continuous(self.d, self.objects)
        out["c"] = self.arrows.continuous(self.c, self.objects)
        out["e"] = self.objects.continuous(self.e, self.arrows)
        out["i"] = self.arrows.continuous(self.i, self.arrows)
        ok = True
        for g, f in self.composable():
            target = self.arrows.minimal_nbhd(self.comp[(g, f)])
            for g2 in self.arrows.minimal_nbhd(g):
                for f2 in self.arrows.minimal_nbhd(f):
                    if self.d[g2] == self.c[f2] and self.comp[(g2, f2)] not in target:
                        ok = False
        out["m"] = ok
        return out

    def is_open(self):
        """Whether d and c are open maps."""
        return self.arrows.open_map(self.d, self.objects) and self.arrows.open_map(
            self.c, self.objects
        )

    def to_json(self):
        return {
            "objects": self.objects.size,
            "arrows": self.arrows.size,
            "d": list(self.d),
            "c": list(self.c),
            "e": list(self.e),
            "i": list(self.i),
            "m": sorted([g, f, gf] for (g, f), gf in self.comp.items()),
            "object_subbasis": [
                [name, sorted(pts)] for name, pts in self.objects.subbasis
            ],
            "arrow_subbasis": [
                [name, sorted(pts)] for name, pts in self.arrows.subbasis
            ],
        }


@dataclass
class GroupoidMorphism:
    """A continuous functor between finite topological groupoids."""

    src: TopGroupoid
    dst: TopGroupoid
    f0: tuple
    f1: tuple

    def check(self):
        bad = []
        for j in range(self.src.arrows.size):
            if self.dst.d[self.f1[j]] != self.f0[self.src.d[j]]:
                bad.append(f"d square fails at arrow {j}")
            if self.dst.c[self.f1[j]] != self.f0[self.src.c[j]]:
                bad.append(f"c square fails at arrow {j}")
            if self.f1[self.src.i[j]] != self.dst.i[self.f1[j]]:
                bad.append(f"i square fails at arrow {j}")
        for x in range(self.src.objects.size):
            if self.f1[self.src.e[x]] != self.dst.e[self.f0[x]]:
                bad.append(f"e square fails at object {x}")
        for g, f in self.src.composable():
            if self.f1[self.src.comp[(g, f)]] != self.dst.comp[(self.f1[g], self.f1[f])]:
                bad.append(f"m square fails at ({g},{f})")
        if not self.src.objects.continuous(self.f0, self.dst.objects):
            bad.append("object map not continuous")
        if not self.src.arrows.continuous(self.f1, self.dst.arrows):
            bad.append("arrow map not continuous")
        return bad

    def compose(self, other):
        """self after other."""
        if other.dst is not self.src:
            raise SignatureError("morphisms not composable")
        return GroupoidMorphism(
            other.src,
            self.dst,
            tuple(self.f0[x] for x in other.f0),
            tuple(self.f1[j] for j in other.f1),
        )


def identity_morphism(g: TopGroupoid):
    return GroupoidMorphism(g, g, tuple(range(g.objects.size)), tuple(range(g.arrows.size)))


# ---------------------------------------------------------------------------
# building the model groupoid


def build_model_groupoid(mc: ModelClass) -> TopGroupoid:
    """The topological groupoid of models and isomorphisms of a class."""
    cached = getattr(mc, "_groupoid", None)
    if cached is not None:
        return cached
    objects = model_space(mc)
    arrows = arrow_space(mc, objects)
    g = TopGroupoid(
        objects,
        arrows,
        mc.iso_dom,
        mc.iso_cod,
        mc.identity_of,
        mc.inverse_of,
        mc.comp,
    )
    mc._groupoid = g
    return g


def build_S_groupoid(S) -> TopGroupoid:
    """The groupoid of indexed sets: the model groupoid of the empty theory."""
    return build_model_groupoid(model_class(EQUALITY_THEORY, S))


# ---------------------------------------------------------------------------
# the three structure-map preimage identities


def structure_map_preimages(mc: ModelClass, a, b):
    """Compute the i, e and m preimages of <a->b> and verify the identities
    i^-1<a->b> = <b->a>,  e^-1<a->b> = <[x,y|x=y],a,b>,  and
    m^-1<a->b> = union over c of <c->b> x <a->c> on composable pairs."""
    g = build_model_groupoid(mc)
    pres = lambda p, q: basic_open_arrows(
        mc, BasicOpenI(trivial_open_m(), ((p, q),), trivial_open_m())
    )
    target = pres(a, b)
    i_pre = frozenset(j for j in range(g.arrows.size) if g.i[j] in target)
    i_expect = pres(b, a)
    e_pre = frozenset(x for x in range(g.objects.size) if g.e[x] in target)
    from .logic import Eq

    e_expect = basic_open_points(
        mc, BasicOpenM(fic(["x", "y"], Eq(Var("x"), Var("y"))), (a, b))
    )
    m_pre = frozenset((gj, fj) for gj, fj in g.composable() if g.comp[(gj, fj)] in target)
    m_expect = set()
    for c in mc.S.elements():
        left = pres(c, b)
        right = pres(a, c)
        for gj in left:
            for fj in right:
                if g.d[gj] == g.c[fj]:
                    m_expect.add((gj, fj))
    return {
        "i": {"computed": i_pre, "expected": i_expect, "ok": i_pre == i_expect},
        "e": {"computed": e_pre, "expected": e_expect, "ok": e_pre == e_expect},
        "m": {"computed": m_pre, "expected": frozenset(m_expect), "ok": m_pre == frozenset(m_expect)},
    }


# ---------------------------------------------------------------------------
# openness of the domain map, with certificates


def _merge_duplicate_entries(formula_in_context, params):
    """Collapse repeated parameter entries by equating context variables."""
    f = formula_in_context
    ctx = list(f.context)
    phi = f.formula
    params = list(params)
    while True:
        dup = None
        for j in range(len(params)):
            for i in range(j):
                if params[i] == params[j]:
                    dup = (i, j)
                    break
            if dup:
                break
        if not dup:
            break
        i, j = dup
        ren = {v: Var(v) for v in ctx}
        ren[ctx[j]] = Var(ctx[i])
        phi = substitute(phi, ren)
        del ctx[j]
        del params[j]
    return fic(ctx, phi), tuple(params)


def _normalize_v_array(v: BasicOpenI):
    """Rewrite to distinct codomain parameters and duplicate-free
    preservation sources and targets, preserving the arrow set."""
    from .logic import Eq

    dom_f, dom_p = v.dom.formula, list(v.dom.params)
    cod_f, cod_p = v.cod.formula, list(v.cod.params)
    pairs = list(v.pairs)
    dom_extra = []  # equations to conjoin onto the domain condition
    cod_extra = []

    # duplicate sources: f([b]) single-valued, so equate the targets
    out = []
    for bsrc, ctgt in pairs:
        hit = next((p for p in out if p[0] == bsrc), None)
        if hit is None:
            out.append((bsrc, ctgt))
        elif hit[1] != ctgt:
            cod_extra.append((hit[1], ctgt))
    pairs = out
    # duplicate targets: f injective on blocks, so equate the sources
    out = []
    for bsrc, ctgt in pairs:
        hit = next((p for p in out if p[1] == ctgt), None)
        if hit is None:
            out.append((bsrc, ctgt))
        elif hit[0] != bsrc:
            dom_extra.append((hit[0], bsrc))
    pairs = out

    def extend(formula, params, extra):
        ctx = list(formula.context)
        phi = formula.formula
        params = list(params)
        parts = [phi]
        for p, q in extra:
            u, w = f"x{len(ctx)}", f"x{len(ctx) + 1}"
            ctx += [u, w]
            params += [p, q]
            parts.append(Eq(Var(u), Var(w)))
        return fic(ctx, conj(parts)), tuple(params)

    dom_fc, dom_params = extend(dom_f, dom_p, dom_extra)
    cod_fc, cod_params = extend(cod_f, cod_p, cod_extra)
    cod_fc, cod_params = _merge_duplicate_entries(cod_fc, cod_params)
    return BasicOpenI(
        BasicOpenM(dom_fc, dom_params), tuple(pairs), BasicOpenM(cod_fc, cod_params)
    )


def open_image_d(mc: ModelClass, v: BasicOpenI):
    """The image of a basic open arrow set under the domain map, with a
    certificate: a list of basic opens of the model space whose union is
    the image.

    The certificate follows the openness proof: merge the domain and
    codomain formulas, pick for every codomain parameter a preimage index
    (smallest available, forced to the preservation source when the
    parameter is a preservation target), and record the combined basic
    open.  Instances whose star-construction lacks index headroom are
    reported as gated rather than failed.
    """
    norm = _normalize_v_array(v)
    arrows = basic_open_arrows(mc, norm)
    if arrows != basic_open_arrows(mc, v):
        raise SignatureError("normalization changed the arrow set")  # internal guard
    d_image = frozenset(mc.iso_dom[j] for j in arrows)

    dom_fc, a_params = norm.dom.formula, norm.dom.params
    cod_fc, e_params = norm.cod.formula, norm.cod.params
    pairs = norm.pairs
    p, q, r = len(a_params), len(e_params), len(pairs)
    ctx = [f"x{i}" for i in range(p + q + r)]
    phi = substitute(dom_fc.formula, {w: Var(ctx[i]) for i, w in enumerate(dom_fc.context)})
    psi = substitute(cod_fc.formula, {w: Var(ctx[p + i]) for i, w in enumerate(cod_fc.context)})
    merged = conj([phi, psi])

    target_of = {}  # forced star targets: source index -> target index
    for bsrc, ctgt in pairs:
        target_of[bsrc] = ctgt

    certificate = []
    seen_opens = set()
    for j in sorted(arrows):
        f = mc.isos[j]
        M, N = f.dom, f.cod
        inv = {w: k for k, w in f.mapping.items()}
        ks = []
        for pos, ej in enumerate(e_params):
            forced = next((bsrc for bsrc, ctgt in pairs if ctgt == ej), None)
            if forced is not None:
                ks.append(forced)
                continue
            pre_key = inv[N.block_key(ej)]
            block = next(blk for blk in M.blocks if blk[0] == pre_key)
            taken = {b for b, _ in pairs} | set(ks)
            choice = next((x for x in block if x not in taken), block[0])
            ks.append(choice)
        all_params = tuple(a_params) + tuple(ks) + tuple(b for b, _ in pairs)
        bop = BasicOpenM(fic(ctx, merged), all_params)
        key = (bop.formula, bop.params)
        if key not in seen_opens:
            seen_opens.add(key)
            certificate.append((bop, tuple(ks)))

    union = frozenset()
    for bop, _ in certificate:
        union |= basic_open_points(mc, bop)
    assert d_image <= union, "domain image must be covered by its certificate"

    gates = []
    failures = []
    if union != d_image:
        for bop, ks in certificate:
            for K_idx in sorted(basic_open_points(mc, bop) - d_image):
                K = mc.models[K_idx]
                sources = tuple(ks) + tuple(b for b, _ in pairs)
                targets = tuple(e_params) + tuple(c for _, c in pairs)
                dedup = {}
                consistent = True
                for s, t in zip(sources, targets):
                    if dedup.get(t, s) != s:
                        consistent = False
                    dedup[t] = s
                srcs = tuple(dedup[t] for t in dedup)
                tgts = tuple(dedup)
                if consistent and star_headroom(K, srcs, tgts, mc.S):
                    failures.append((K_idx, bop))
                else:
                    gates.append((K_idx, bop))
    status = "failed" if failures else ("gated" if gates else "verified")
    return {
        "image": d_image,
        "certificate": [bop for bop, _ in certificate],
        "union": union,
        "status": status,
        "gates": gates,
        "failures": failures,
    }


# ---------------------------------------------------------------------------
# Mod on interpretations


def mod_on_interpretation(interp, S, limit=None):
    """The groupoid morphism of restriction along an interpretation.

    For F: T -> T' the object map sends a T'-model to its reduct and the
    arrow map keeps the underlying block bijection.  Returns the morphism
    together with the basic-open preimage report.
    """
    from .models import DEFAULT_LIMIT, StructIso

    limit = limit or DEFAULT_LIMIT
    mc_src = model_class(interp.target, S, limit)  # models of T'
    mc_dst = model_class(interp.source, S, limit)  # models of T
    g_src = build_model_groupoid(mc_src)
    g_dst = build_model_groupoid(mc_dst)
    f0 = []
    for M in mc_src.models:
        f0.append(mc_dst.find_model(reduct(M, interp)))
    f1 = []
    for j, iso in enumerate(mc_src.isos):
        image = StructIso(
            mc_dst.models[f0[mc_src.iso_dom[j]]],
            mc_dst.models[f0[mc_src.iso_cod[j]]],
            iso.mapping,
        )
        f1.append(mc_dst.find_iso(image))
    morphism = GroupoidMorphism(g_src, g_dst, tuple(f0), tuple(f1))
    report = []
    for name, pts, bop in atomic_opens(mc_dst):
        translated = BasicOpenM(
            fic(bop.formula.context, interp.translate(bop.formula.formula)), bop.params
        )
        lhs = frozenset(x for x in range(g_src.objects.size) if f0[x] in pts)
        rhs = basic_open_points(mc_src, translated)
        report.append({"open": name, "ok": lhs == rhs, "preimage": lhs, "translated": rhs})
    return morphism, report
