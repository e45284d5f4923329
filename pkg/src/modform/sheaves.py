"""Equivariant sheaves over finite groupoids.

An equivariant sheaf is a finite etale space over the object space with a
continuous arrow action.  Definable sheaves carry the family of extensions
of a formula across all models, acted on by application of isomorphisms.
Site objects quotient an arrow set by a Moerdijk-style relation; sections
lift to morphisms out of site objects.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import SignatureError, SiteError
from .groupoid import TopGroupoid, build_model_groupoid
from .logic import Eq, Exists, Var, conj, fic, substitute
from .models import ModelClass, star_headroom
from .topology import (
    BasicOpenI,
    BasicOpenM,
    FinSpace,
    basic_open_arrows,
    basic_open_points,
    symmetric_varray,
)


class EquivariantSheaf:
    """An etale space over the objects of a groupoid with an arrow action.

    points are arbitrary payloads; space is their topology; r maps point
    index to object index; act maps (arrow index, point index) to a point
    index, defined exactly when the point sits over the arrow's domain.
    """

    def __init__(self, base: TopGroupoid, points, space: FinSpace, r, act, mc=None):
        self.base = base
        self.points = list(points)
        self.space = space
        self.r = tuple(r)
        self.act = dict(act)
        self.point_index = {p: i for i, p in enumerate(self.points)}
        self.mc = mc

    def __len__(self):
        return len(self.points)

    def fiber(self, obj):
        return [i for i, o in enumerate(self.r) if o == obj]

    def apply(self, arrow, pidx):
        if self.r[pidx] != self.base.d[arrow]:
            raise SignatureError("point does not sit over the arrow's domain")
        return self.act[(arrow, pidx)]

    # -- invariants ----------------------------------------------------------

    def check_invariants(self):
        bad = []
        g = self.base
        if not self.space.continuous(self.r, g.objects):
            bad.append("projection not continuous")
        for p in range(len(self.points)):
            u = self.space.minimal_nbhd(p)
            img = [self.r[q] for q in u]
            if len(set(img)) != len(img):
                bad.append(f"projection not injective near point {p}")
            if not g.objects.is_open(frozenset(img)):
                bad.append(f"projection image of a minimal neighborhood not open at {p}")
        want = {(a, p) for a in range(g.arrows.size) for p in range(len(self.points)) if self.r[p] == g.d[a]}
        if set(self.act) != want:
            bad.append("action domain is not the fibered product")
            return bad
        for (a, p), q in self.act.items():
            if self.r[q] != g.c[a]:
                bad.append(f"action of {a} leaves the codomain fiber at {p}")
        for p in range(len(self.points)):
            if self.act[(g.e[self.r[p]], p)] != p:
                bad.append(f"unit axiom fails at point {p}")
        for gq, f in g.composable():
            gf = g.comp[(gq, f)]
            for p in range(len(self.points)):
                if self.r[p] != g.d[f]:
                    continue
                if self.act[(gf, p)] != self.act[(gq, self.act[(f, p)])]:
                    bad.append(f"composition axiom fails at ({gq},{f},{p})")
        for (a, p), q in self.act.items():
            target = self.space.minimal_nbhd(q)
            for a2 in g.arrows.minimal_nbhd(a):
                for p2 in self.space.minimal_nbhd(p):
                    if self.r[p2] == g.d[a2] and self.act[(a2, p2)] not in target:
                        bad.append(f"action not continuous at ({a},{p})")
        return bad

    # -- stability -----------------------------------------------------------

    def stabilize(self, subset):
        """Orbit closure under the action; the least stable superset."""
        out = set(subset)
        frontier = list(out)
        g = self.base
        while frontier:
            p = frontier.pop()
            for a in range(g.arrows.size):
                if g.d[a] == self.r[p]:
                    q = self.act[(a, p)]
                    if q not in out:
                        out.add(q)
                        frontier.append(q)
        return frozenset(out)

    def is_stable(self, subset):
        subset = frozenset(subset)
        return self.stabilize(subset) == subset

    def minimal_stable_open(self, pidx):
        """The least stable open set containing the point."""
        cur = frozenset([pidx])
        while True:
            nxt = self.space.open_hull(self.stabilize(cur))
            if nxt == cur:
                return cur
            cur = nxt

    def stable_opens(self, limit=300_000):
        """All stable open subsets: the union closure of the minimal ones."""
        gens = sorted(
            {self.minimal_stable_open(p) for p in range(len(self.points))},
            key=lambda s: (len(s), sorted(s)),
        )
        seen = {frozenset()}
        frontier = [frozenset()]
        while frontier:
            cur = frontier.pop()
            for gset in gens:
                nxt = cur | gset
                if nxt not in seen:
                    if len(seen) >= limit:
                        from .errors import LimitExceeded

                        raise LimitExceeded("stable-open lattice too large", len(seen))
                    seen.add(nxt)
                    frontier.append(nxt)
        return sorted(seen, key=lambda s: (len(s), sorted(s)))


@dataclass
class SheafMorphism:
    """A fiber-preserving, equivariant, continuous map of total spaces."""

    src: EquivariantSheaf
    dst: EquivariantSheaf
    point_map: tuple

    def check(self):
        bad = []
        for p in range(len(self.src.points)):
            if self.dst.r[self.point_map[p]] != self.src.r[p]:
                bad.append(f"not fiber-preserving at {p}")
        for (a, p), q in self.src.act.items():
            if self.dst.act[(a, self.point_map[p])] != self.point_map[q]:
                bad.append(f"not equivariant at ({a},{p})")
        if not self.src.space.continuous(self.point_map, self.dst.space):
            bad.append("not continuous")
        return bad

    def is_bijective(self):
        return len(set(self.point_map)) == len(self.point_map) == len(self.dst.points)

    def is_isomorphism(self):
        if not self.is_bijective() or self.check():
            return False
        inv = [0] * len(self.dst.points)
        for p, q in enumerate(self.point_map):
            inv[q] = p
        return self.dst.space.continuous(tuple(inv), self.src.space)

    def image(self):
        return frozenset(self.point_map)


# ---------------------------------------------------------------------------
# definable sheaves


class DefinableSheaf(EquivariantSheaf):
    """The extension family of a formula-in-context with the application
    action; points are (model index, tuple of block keys)."""

    def __init__(self, mc: ModelClass, formula, base, points, space, r, act):
        super().__init__(base, points, space, r, act, mc=mc)
        self.formula = formula

    def section_image(self, params):
        """The image of the section at an index tuple: all points whose
        coordinates are the blocks of the parameters."""
        out = set()
        for i, M in enumerate(self.mc.models):
            if all(M.has(p) for p in params):
                key = (i, tuple(M.block_key(p) for p in params))
                if key in self.point_index:
                    out.add(self.point_index[key])
        return frozenset(out)

    def basic_open(self, psi, params):
        """The basic open <[x,y|psi], b>: points whose model satisfies psi
        at (their coordinates, the blocks of the parameters).  psi is a
        formula-in-context of length len(self.formula) + len(params)."""
        if len(psi) != len(self.formula) + len(params):
            raise SignatureError("psi context must extend the sheaf context by the parameters")
        out = set()
        for idx, (i, t) in enumerate(self.points):
            M = self.mc.models[i]
            if not all(M.has(p) for p in params):
                continue
            b = tuple(M.block_key(p) for p in params)
            if (t + b) in self.mc.ext(i, psi):
                out.add(idx)
        return frozenset(out)


def definable_sheaf(mc: ModelClass, f) -> DefinableSheaf:
    """Materialize the definable sheaf of a formula-in-context.

    Topology: coarsest with continuous projection and open section images;
    the subbasis is projection preimages of the atomic opens together with
    one section image per parameter tuple.
    """
    from .topology import atomic_opens

    g = build_model_groupoid(mc)
    k = len(f)
    points = []
    for i in range(len(mc.models)):
        for t in sorted(mc.ext(i, f)):
            points.append((i, t))
    index = {p: n for n, p in enumerate(points)}
    r = tuple(i for i, _ in points)
    sub = []
    for name, pts, _ in atomic_opens(mc):
        sub.append((f"p1{name}", frozenset(n for n, (i, _) in enumerate(points) if i in pts)))
    for params in itertools.product(mc.S.elements(), repeat=k):
        img = set()
        for n, (i, t) in enumerate(points):
            M = mc.models[i]
            if all(M.has(p) for p in params) and t == tuple(M.block_key(p) for p in params):
                img.add(n)
        label = ",".join(map(str, params)) or "*"
        sub.append((f"s[{label}]", frozenset(img)))
    space = FinSpace(len(points), sub)
    act = {}
    for j in range(g.arrows.size):
        iso = mc.isos[j]
        for n, (i, t) in enumerate(points):
            if i == mc.iso_dom[j]:
                act[(j, n)] = index[(mc.iso_cod[j], iso.apply_tuple(t))]
    return DefinableSheaf(mc, f, g, points, space, r, act)


def act_theta(sheaf: DefinableSheaf, iso_idx, point_idx):
    """Apply an isomorphism to a point of a definable sheaf."""
    return sheaf.apply(iso_idx, point_idx)


def stabilize(sheaf: EquivariantSheaf, subset):
    return sheaf.stabilize(subset)


def conjunction_with_exists(f, psi_context, psi):
    """The formula-in-context [x | phi and exists y. psi] from [x|phi] and
    psi over the joint context (x, y)."""
    k = len(f.context)
    body = psi
    for v in reversed(psi_context):
        body = Exists(v, body)
    return fic(f.context, conj([f.formula, body]))


def projection_image_identity(mc, sheaf: DefinableSheaf, psi, params):
    """Both sides of the projection identity for a basic open of a
    definable sheaf: the pointwise image of the basic open under the
    projection, and the basic open of the existentially closed formula.
    Returns (image, definable, equal)."""
    basic = sheaf.basic_open(psi, params)
    image = frozenset(sheaf.r[p] for p in basic)
    k = len(sheaf.formula)
    m = len(params)
    # [y | exists x. phi(x) and psi(x,y)] with the sheaf context projected out
    body = conj([sheaf.formula.formula, psi.formula])
    inner = substitute(
        body,
        {f"x{i}": Var(f"u{i}") for i in range(k)}
        | {f"x{k + j}": Var(f"y{j}") for j in range(m)},
    )
    for i in reversed(range(k)):
        inner = Exists(f"u{i}", inner)
    closed = fic([f"y{j}" for j in range(m)], inner)
    definable = basic_open_points(mc, BasicOpenM(closed, params))
    return image, definable, image == definable


def definable_morphism(mc, src: DefinableSheaf, dst: DefinableSheaf, graph):
    """The sheaf morphism of a functional relation between two definable
    sheaves.

    graph is a formula-in-context over the joined contexts whose extension
    is fiberwise a total single-valued relation from the source extension
    to the target extension; the induced point map is checked to be
    continuous and equivariant.
    """
    j, k = len(src.formula), len(dst.formula)
    if len(graph) != j + k:
        raise SignatureError("graph context must join the two sheaf contexts")
    point_map = []
    for i, (m, t) in enumerate(src.points):
        images = [w[j:] for w in mc.ext(m, graph) if w[:j] == t]
        if len(images) != 1:
            raise SignatureError(f"graph not functional at point {i}")
        point_map.append(dst.point_index[(m, images[0])])
    morphism = SheafMorphism(src, dst, tuple(point_map))
    bad = morphism.check()
    if bad:
        raise SignatureError(f"definable morphism fails checks: {bad[:3]}")
    return morphism


def definable_morphism_preimage_identity(mc, src, dst, graph, morphism, xi, params):
    """Both sides of the preimage identity for a basic open of the target:
    the pointwise preimage under the morphism, and the basic open of the
    graph composed with the condition.  Returns (preimage, definable, equal)."""
    j, k = len(src.formula), len(dst.formula)
    m = len(params)
    target_open = dst.basic_open(xi, params)
    preimage = frozenset(
        p for p in range(len(src.points)) if morphism.point_map[p] in target_open
    )
    # [x, z | exists y. graph(x, y) and xi(y, z)]
    names = (
        {f"x{i}": Var(f"x{i}") for i in range(j)}
        | {f"x{j + i}": Var(f"v{i}") for i in range(k)}
    )
    graph_part = substitute(graph.formula, names)
    xi_names = {f"x{i}": Var(f"v{i}") for i in range(k)} | {
        f"x{k + i}": Var(f"z{i}") for i in range(m)
    }
    xi_part = substitute(xi.formula, xi_names)
    body = conj([graph_part, xi_part])
    for i in reversed(range(k)):
        body = Exists(f"v{i}", body)
    joint = fic([f"x{i}" for i in range(j)] + [f"z{i}" for i in range(m)], body)
    definable = src.basic_open(joint, params)
    return preimage, definable, preimage == definable


# ---------------------------------------------------------------------------
# Moerdijk site objects


class MoerdijkSiteObject:
    """The pair (U, N) with its induced sheaf of arrow classes.

    classes partition the arrows with domain in U = d(N); two arrows are
    identified when they share a codomain and differ by an N-arrow.
    """

    def __init__(self, mc, groupoid, N, U, classes, class_of, sheaf, sheaf_violations=()):
        self.mc = mc
        self.groupoid = groupoid
        self.N = N
        self.U = U
        self.classes = classes
        self.class_of = class_of
        self.sheaf = sheaf
        # etale-ness of the quotient is a theorem for open groupoids; at
        # small index sets the groupoid may fail to be open and these record
        # the shortfall instead of blocking the construction
        self.sheaf_violations = tuple(sheaf_violations)


def arrow_set_closed(g: TopGroupoid, N):
    """Whether an arrow set is closed under inverses and composition."""
    N = frozenset(N)
    for f in N:
        if g.i[f] not in N:
            return False
    for a in N:
        for b in N:
            if g.d[a] == g.c[b] and g.comp[(a, b)] not in N:
                return False
    return True


def moerdijk_classes(g: TopGroupoid, N):
    """The raw quotient data of d^{-1}(U) by the N-relation (no topology)."""
    N = frozenset(N)
    U = frozenset(g.d[f] for f in N)
    dom_arrows = [f for f in range(g.arrows.size) if g.d[f] in U]
    parent = {f: f for f in dom_arrows}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f in dom_arrows:
        for h in dom_arrows:
            if g.c[f] == g.c[h] and g.comp[(g.i[h], f)] in N:
                rf, rh = find(f), find(h)
                if rf != rh:
                    parent[max(rf, rh)] = min(rf, rh)
    groups = {}
    for f in dom_arrows:
        groups.setdefault(find(f), []).append(f)
    classes = [frozenset(v) for _, v in sorted(groups.items())]
    class_of = {}
    for ci, cl in enumerate(classes):
        for f in cl:
            class_of[f] = ci
    return U, classes, class_of


def moerdijk_sheaf(mc: ModelClass, N) -> MoerdijkSiteObject:
    """Build the site object for an open, inverse- and composition-closed
    arrow set; verifies all equivariant-sheaf invariants."""
    g = build_model_groupoid(mc)
    N = frozenset(N)
    if not g.arrows.is_open(N):
        raise SiteError("arrow set is not open")
    if not arrow_set_closed(g, N):
        raise SiteError("arrow set is not closed under inverses and composition")
    U = frozenset(g.d[f] for f in N)
    if frozenset(g.c[f] for f in N) != U:
        raise SiteError("d(N) and c(N) disagree")
    U2, classes, class_of = moerdijk_classes(g, N)
    assert U2 == U
    # the N-relation must be an equivalence here; verify symmetry/transitivity
    for ci, cl in enumerate(classes):
        for f in cl:
            for h in cl:
                if g.c[f] == g.c[h] and g.comp[(g.i[h], f)] not in N:
                    raise SiteError("the N-relation is not transitive on a class")
    dom_arrows = sorted(class_of)
    dom_set = frozenset(dom_arrows)
    # quotient topology: iterate saturation against the subspace open hull
    minimal = []
    for ci in range(len(classes)):
        W = {ci}
        while True:
            pre = set()
            for cj in W:
                pre |= classes[cj]
            hull = set()
            for f in pre:
                hull |= g.arrows.minimal_nbhd(f) & dom_set
            W2 = {class_of[f] for f in hull}
            if W2 == W:
                break
            W = W2
        minimal.append(frozenset(W))
    space = FinSpace(len(classes), [(f"q{ci}", m) for ci, m in enumerate(minimal)])
    r = tuple(g.c[min(cl)] for cl in classes)
    # well-definedness of the codomain projection on classes
    for cl in classes:
        if len({g.c[f] for f in cl}) != 1:
            raise SiteError("codomain not constant on a class")
    act = {}
    for a in range(g.arrows.size):
        for ci, cl in enumerate(classes):
            if g.d[a] == r[ci]:
                rep = min(cl)
                act[(a, ci)] = class_of[g.comp[(a, rep)]]
    points = [("class", ci) for ci in range(len(classes))]
    sheaf = EquivariantSheaf(g, points, space, r, act, mc=mc)
    bad = sheaf.check_invariants()
    action_bad = [v for v in bad if "action" in v or "fiber" in v or "axiom" in v]
    if action_bad:
        raise SiteError(f"site sheaf invariants fail: {action_bad[:3]}")
    return MoerdijkSiteObject(mc, g, N, U, classes, class_of, sheaf, bad)


def stable_opens_of_site(site: MoerdijkSiteObject, limit=300_000):
    """The lattice of open subsets of U closed under N, together with the
    subsheaf constructor V -> classes with domain in V, and the bijection
    check against the stable opens of the induced sheaf."""
    g = site.groupoid
    N = site.N
    U = site.U

    def minimal_stable(x):
        cur = g.objects.minimal_nbhd(x)  # x in U open, so this stays in U
        while True:
            sat = set(cur)
            for f in N:
                if g.d[f] in sat:
                    sat.add(g.c[f])
            hull = set()
            for y in sat:
                hull |= g.objects.minimal_nbhd(y)
            nxt = frozenset(hull)
            if nxt == cur:
                return cur
            cur = nxt

    gens = sorted({minimal_stable(x) for x in U}, key=lambda s: (len(s), sorted(s)))
    seen = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        cur = frontier.pop()
        for gset in gens:
            nxt = cur | gset
            if nxt not in seen:
                if len(seen) >= limit:
                    from .errors import LimitExceeded

                    raise LimitExceeded("stable-open lattice too large", len(seen))
                seen.add(nxt)
                frontier.append(nxt)
    lattice = sorted(seen, key=lambda s: (len(s), sorted(s)))

    def subsheaf(V):
        return frozenset(ci for ci, cl in enumerate(site.classes) if g.d[min(cl)] in V)

    sheaf_lattice = site.sheaf.stable_opens(limit)
    image = sorted({subsheaf(V) for V in lattice}, key=lambda s: (len(s), sorted(s)))
    return {
        "lattice": lattice,
        "subsheaf": subsheaf,
        "sheaf_lattice": sheaf_lattice,
        "isomorphic": image == sheaf_lattice and len(lattice) == len(sheaf_lattice),
    }


# ---------------------------------------------------------------------------
# sections and their lifts


def lift_section(sheaf: EquivariantSheaf, U, section):
    """Lift a continuous section over an open set to a site-object morphism.

    section maps object indices in U to point indices.  Returns the arrow
    set N_s, the site object, and the morphism s-hat with s = s-hat after
    the unit section.
    """
    g = sheaf.base
    U = frozenset(U)
    if not g.objects.is_open(U):
        raise SignatureError("section domain is not open")
    for x in U:
        if sheaf.r[section[x]] != x:
            raise SignatureError("not a section of the projection")
        image = {section[y] for y in g.objects.minimal_nbhd(x)}
        if not image <= sheaf.space.minimal_nbhd(section[x]):
            raise SignatureError("section not continuous")
    N_s = frozenset(
        f
        for f in range(g.arrows.size)
        if g.d[f] in U and g.c[f] in U and sheaf.act[(f, section[g.d[f]])] == section[g.c[f]]
    )
    site = moerdijk_sheaf(sheaf_mc(sheaf), N_s)
    point_map = []
    for cl in site.classes:
        images = {sheaf.act[(f, section[g.d[f]])] for f in cl}
        if len(images) != 1:
            raise SiteError("lift not well-defined on a class")
        point_map.append(images.pop())
    hat = SheafMorphism(site.sheaf, sheaf, tuple(point_map))
    bad = hat.check()
    if bad:
        raise SiteError(f"lifted morphism fails checks: {bad[:3]}")
    for x in U:
        if point_map[site.class_of[g.e[x]]] != section[x]:
            raise SiteError("lift does not restrict to the section on units")
    return N_s, site, hat


def sheaf_mc(sheaf):
    mc = getattr(sheaf, "mc", None)
    if mc is None:
        raise SignatureError("sheaf does not carry a model class")
    return mc


# ---------------------------------------------------------------------------
# symmetric rewriting and density


def rewrite_symmetric(mc: ModelClass, v: BasicOpenI, model_idx):
    """Shrink a basic open arrow neighborhood of an identity to symmetric
    shape: equal domain and codomain conditions over one distinct parameter
    tuple, preserved pointwise.

    The moves: merge the domain and codomain conditions, promote every
    mentioned index to the preservation condition, and replace a
    preservation pair b -> c with distinct entries by b -> b plus the
    equation b = c on both sides.
    """
    g = build_model_groupoid(mc)
    ident = mc.identity_of[model_idx]
    varr = basic_open_arrows(mc, v)
    if ident not in varr:
        raise SignatureError("the identity of the model is not in the given basic open")
    M = mc.models[model_idx]
    mentioned = []
    for p in v.dom.params + v.cod.params:
        if p not in mentioned:
            mentioned.append(p)
    for a, b in v.pairs:
        for p in (a, b):
            if p not in mentioned:
                mentioned.append(p)
    m = tuple(mentioned)
    pos = {p: i for i, p in enumerate(m)}
    ctx = [f"x{i}" for i in range(len(m))]
    dom_sub = {w: Var(ctx[pos[v.dom.params[i]]]) for i, w in enumerate(v.dom.formula.context)}
    cod_sub = {w: Var(ctx[pos[v.cod.params[i]]]) for i, w in enumerate(v.cod.formula.context)}
    parts = [
        substitute(v.dom.formula.formula, dom_sub),
        substitute(v.cod.formula.formula, cod_sub),
    ]
    for a, b in v.pairs:
        if a != b:
            parts.append(Eq(Var(ctx[pos[a]]), Var(ctx[pos[b]])))
    chi = fic(ctx, conj(parts))
    cond = BasicOpenM(chi, m)
    result = BasicOpenI(cond, tuple((p, p) for p in m), cond)
    got = basic_open_arrows(mc, result)
    if ident not in got:
        raise SignatureError("rewriting lost the identity arrow")
    if not got <= varr:
        raise SignatureError("rewriting left the original neighborhood")
    return result


def _subset_order(domain):
    elems = sorted(domain)
    for size in range(len(elems) + 1):
        for combo in itertools.combinations(elems, size):
            yield combo


def density_certificate(mc: ModelClass, site: MoerdijkSiteObject, class_idx):
    """Exhibit a definable sheaf covering a given element of a site object.

    Searches symmetric basic neighborhoods of the identity at the element's
    domain model, smallest parameter set first; for the first one inside N
    whose section lift is an isomorphism, returns the definable sheaf, the
    morphism into the site sheaf, and the preimage point.  Surjectivity of
    the lift is where index headroom enters; shortfalls are classified and
    reported as gated.
    """
    g = site.groupoid
    rep = min(site.classes[class_idx])
    model_idx = g.d[rep]
    M = mc.models[model_idx]
    attempts = []
    fitted = 0
    for subset in _subset_order(M.domain):
        varr = symmetric_varray(M, subset)
        arrows = basic_open_arrows(mc, varr)
        if not arrows <= site.N:
            continue
        fitted += 1
        chi = varr.dom.formula
        params = varr.dom.params
        D = definable_sheaf(mc, chi)
        Uopen = basic_open_points(mc, varr.dom)
        section = {}
        for x in Uopen:
            Mx = mc.models[x]
            section[x] = D.point_index[(x, tuple(Mx.block_key(p) for p in params))]
        N_s, inner_site, hat = lift_section(D, Uopen, section)
        if N_s != arrows:
            raise SiteError("computed stabilizer differs from the symmetric array")
        if hat.is_isomorphism():
            inv = {q: p for p, q in enumerate(hat.point_map)}
            embed = []
            for ci in range(len(inner_site.classes)):
                f = min(inner_site.classes[ci])
                embed.append(site.class_of[f])
            morphism = SheafMorphism(
                D, site.sheaf, tuple(embed[inv[p]] for p in range(len(D.points)))
            )
            bad = morphism.check()
            if bad:
                raise SiteError(f"density morphism fails checks: {bad[:3]}")
            pre_class = inner_site.class_of[rep]
            preimage = hat.point_map[pre_class]
            if morphism.point_map[preimage] != class_idx:
                raise SiteError("density certificate misses its element")
            return {
                "status": "verified",
                "formula": chi,
                "params": params,
                "definable": D,
                "morphism": morphism,
                "preimage": preimage,
                "element": class_idx,
            }
        # diagnose the gate: some point of D has no arrow reaching it
        missing = sorted(set(range(len(D.points))) - set(hat.point_map))
        gate_ok = True
        for pidx in missing:
            (li, t) = D.points[pidx]
            L = mc.models[li]
            reps = tuple(next(x for x in L.domain if L.block_key(x) == key) for key in t)
            if star_headroom(L, reps, params, mc.S):
                gate_ok = False
        attempts.append(
            {
                "params": params,
                "missing": missing,
                "headroom_explains": gate_ok,
            }
        )
    if fitted == 0:
        raise SiteError("no symmetric neighborhood fits inside N")  # full diagram always fits
    if all(a["headroom_explains"] for a in attempts):
        return {"status": "gated", "attempts": attempts, "element": class_idx}
    return {"status": "failed", "attempts": attempts, "element": class_idx}
