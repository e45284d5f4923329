"""Finite topological spaces presented by subbases, and the logical
topologies on model and isomorphism sets.

A finite topology is handled through its minimal basis: the minimal open
neighborhood of a point is the intersection of all subbasic sets containing
it.  A set is open iff it contains the minimal neighborhood of each of its
points, so membership, interior, meets and joins never need the full open
lattice.  The lattice itself (all unions of minimal neighborhoods) is
generated lazily and only where an operation genuinely enumerates opens.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import LimitExceeded, SignatureError
from .logic import Eq, Rel, TOP, Var, fic
from .models import ModelClass

DEFAULT_LATTICE_LIMIT = 300_000


class FinSpace:
    """Points 0..n-1 with a named subbasis of point sets."""

    def __init__(self, size, subbasis):
        self.size = size
        self.subbasis = [(name, frozenset(s)) for name, s in subbasis]
        full = frozenset(range(size))
        for name, s in self.subbasis:
            if not s <= full:
                raise SignatureError(f"subbasic set {name} not within the point set")
        minimal = []
        for x in range(size):
            nbhd = full
            for _, s in self.subbasis:
                if x in s:
                    nbhd &= s
            minimal.append(nbhd)
        self.minimal = minimal
        self._opens = None

    @property
    def points(self):
        return range(self.size)

    def minimal_nbhd(self, x):
        return self.minimal[x]

    def is_open(self, subset):
        subset = frozenset(subset)
        return all(self.minimal[x] <= subset for x in subset)

    def interior(self, subset):
        subset = frozenset(subset)
        return frozenset(x for x in subset if self.minimal[x] <= subset)

    def open_hull(self, subset):
        """The smallest open superset."""
        out = set()
        for x in subset:
            out |= self.minimal[x]
        return frozenset(out)

    def opens(self, limit=DEFAULT_LATTICE_LIMIT):
        """Every open set: the union closure of the minimal basis.

        Returned sorted by (size, sorted points); cached.
        """
        if self._opens is None:
            seen = {frozenset()}
            frontier = [frozenset()]
            gens = sorted(set(self.minimal), key=lambda s: (len(s), sorted(s)))
            while frontier:
                cur = frontier.pop()
                for g in gens:
                    nxt = cur | g
                    if nxt not in seen:
                        if len(seen) >= limit:
                            raise LimitExceeded("open lattice too large", len(seen))
                        seen.add(nxt)
                        frontier.append(nxt)
            self._opens = sorted(seen, key=lambda s: (len(s), sorted(s)))
        return self._opens

    def same_topology(self, other):
        return self.size == other.size and self.minimal == other.minimal

    def continuous(self, f, target):
        """Whether the point map f into target is continuous."""
        for x in self.points:
            image = {f[y] for y in self.minimal[x]}
            if not image <= target.minimal[f[x]]:
                return False
        return True

    def open_map(self, f, target):
        """Whether the point map f into target is an open map."""
        for x in self.points:
            if not target.is_open({f[y] for y in self.minimal[x]}):
                return False
        return True


def discrete_space(size):
    return FinSpace(size, [(f"{{{i}}}", {i}) for i in range(size)])


def indiscrete_space(size):
    return FinSpace(size, [])


def generate_opens(space, limit=DEFAULT_LATTICE_LIMIT):
    """The open-set lattice of a FinSpace (all unions of finite
    intersections of subbasic sets, with the empty intersection giving the
    whole space)."""
    return space.opens(limit)


# ---------------------------------------------------------------------------
# basic opens of the logical topology


@dataclass(frozen=True)
class BasicOpenM:
    """A formula-in-context with an index parameter tuple of equal length."""

    formula: object  # FormulaInContext
    params: tuple

    def __post_init__(self):
        if len(self.formula) != len(self.params):
            raise SignatureError("parameter tuple length differs from context length")

    def __str__(self):
        inner = ",".join(str(p) for p in self.params) or "*"
        return f"<{self.formula}, {inner}>"


TRIVIAL_M = None  # set below once fic is importable


def trivial_open_m():
    return BasicOpenM(fic((), TOP), ())


@dataclass(frozen=True)
class BasicOpenI:
    """Domain, preservation and codomain conditions for isomorphisms."""

    dom: BasicOpenM
    pairs: tuple  # ordered (a, b) index pairs
    cod: BasicOpenM

    def __str__(self):
        pairs = ",".join(f"{a}->{b}" for a, b in self.pairs) or "-"
        return f"({self.dom} / {pairs} / {self.cod})"


def trivial_open_i():
    return BasicOpenI(trivial_open_m(), (), trivial_open_m())


def basic_open_points(mc: ModelClass, b: BasicOpenM):
    """Models in which the parameters are defined and satisfy the formula."""
    out = set()
    for i, M in enumerate(mc.models):
        if all(M.has(p) for p in b.params):
            key = tuple(M.block_key(p) for p in b.params)
            if key in mc.ext(i, b.formula):
                out.add(i)
    return frozenset(out)


def basic_open_arrows(mc: ModelClass, v: BasicOpenI):
    """Arrows satisfying the domain, preservation and codomain conditions."""
    dom_set = basic_open_points(mc, v.dom)
    cod_set = basic_open_points(mc, v.cod)
    out = set()
    for j, f in enumerate(mc.isos):
        if mc.iso_dom[j] not in dom_set or mc.iso_cod[j] not in cod_set:
            continue
        ok = True
        for a, b in v.pairs:
            if not (f.dom.has(a) and f.cod.has(b)):
                ok = False
                break
            if f.apply(f.dom.block_key(a)) != f.cod.block_key(b):
                ok = False
                break
        if ok:
            out.add(j)
    return frozenset(out)


# ---------------------------------------------------------------------------
# logical subbases


def _var_tuple(k):
    return tuple(Var(f"x{i}") for i in range(k))


def atomic_opens(mc: ModelClass):
    """The subbasic opens of the logical topology on the model set.

    Yields (name, point set, BasicOpenM): definedness sets, equality sets,
    relation sets and function-equation sets, in a fixed order.
    """
    sig = mc.theory.signature
    S = mc.S
    out = []
    for a in S.elements():
        b = BasicOpenM(fic(["x0"], TOP), (a,))
        out.append((f"<{a}>", basic_open_points(mc, b), b))
    for a in S.elements():
        for bb in S.elements():
            op = BasicOpenM(fic(["x0", "x1"], Eq(Var("x0"), Var("x1"))), (a, bb))
            out.append((f"({a}~{bb})", basic_open_points(mc, op), op))
    for name, arity in sig.rels:
        for t in itertools.product(S.elements(), repeat=arity):
            op = BasicOpenM(
                fic([f"x{i}" for i in range(arity)], Rel(name, _var_tuple(arity))), t
            )
            label = f"<{name},({','.join(map(str, t))})>"
            out.append((label, basic_open_points(mc, op), op))
    for name, arity in sig.funs:
        from .logic import App

        for t in itertools.product(S.elements(), repeat=arity + 1):
            args, val = t[:arity], t[arity]
            phi = Eq(App(name, _var_tuple(arity)), Var(f"x{arity}"))
            op = BasicOpenM(fic([f"x{i}" for i in range(arity + 1)], phi), t)
            label = f"<{name}({','.join(map(str, args))})={val}>"
            out.append((label, basic_open_points(mc, op), op))
    return out


def model_space(mc: ModelClass):
    """The model set with the logical topology (subbasis of atomic opens)."""
    return FinSpace(len(mc.models), [(name, pts) for name, pts, _ in atomic_opens(mc)])


def arrow_space(mc: ModelClass, space=None):
    """The isomorphism set with the logical topology.

    Subbasis: domain and codomain preimages of the model subbasis plus the
    preservation sets <a->b>.
    """
    if space is None:
        space = model_space(mc)
    sub = []
    for name, pts, _ in atomic_opens(mc):
        sub.append((f"d{name}", frozenset(j for j in range(len(mc.isos)) if mc.iso_dom[j] in pts)))
        sub.append((f"c{name}", frozenset(j for j in range(len(mc.isos)) if mc.iso_cod[j] in pts)))
    for a in mc.S.elements():
        for b in mc.S.elements():
            v = BasicOpenI(trivial_open_m(), ((a, b),), trivial_open_m())
            sub.append((f"<{a}->{b}>", basic_open_arrows(mc, v)))
    return FinSpace(len(mc.isos), sub)


def horn_diagram(M, subset=None):
    """The atomic diagram of a structure restricted to a subset of its
    carrier domain, as a basic open: one context variable per index, a Horn
    conjunction of every atomic fact among them, the indices as parameters.

    The resulting basic open is the intersection of all subbasic opens
    containing M that only mention indices in the subset.
    """
    from .logic import App

    elements = sorted(M.domain if subset is None else subset)
    pos = {a: i for i, a in enumerate(elements)}
    ctx = [f"x{i}" for i in range(len(elements))]
    parts = []
    for a in elements:
        for b in elements:
            if a < b and M.block_key(a) == M.block_key(b):
                parts.append(Eq(Var(ctx[pos[a]]), Var(ctx[pos[b]])))
    for name, ts in sorted(M.rels.items()):
        arity = len(next(iter(ts))) if ts else None
        if arity is None:
            continue
        for combo in itertools.product(elements, repeat=arity):
            if tuple(M.block_key(x) for x in combo) in ts:
                parts.append(Rel(name, tuple(Var(ctx[pos[x]]) for x in combo)))
    for name, g in sorted(M.funs.items()):
        for args, val in sorted(g.items()):
            arity = len(args)
            for combo in itertools.product(elements, repeat=arity):
                if tuple(M.block_key(x) for x in combo) != args:
                    continue
                for v in elements:
                    if M.block_key(v) == val:
                        parts.append(
                            Eq(App(name, tuple(Var(ctx[pos[x]]) for x in combo)), Var(ctx[pos[v]]))
                        )
    from .logic import conj

    return BasicOpenM(fic(ctx, conj(parts)), tuple(elements))


def minimal_varray(mc: ModelClass, iso_idx):
    """The minimal basic open neighborhood of an arrow, as an explicit
    domain / preservation / codomain array."""
    f = mc.isos[iso_idx]
    dom = horn_diagram(f.dom)
    cod = horn_diagram(f.cod)
    pairs = tuple(
        (a, b)
        for a in f.dom.domain
        for b in f.cod.domain
        if f.apply(f.dom.block_key(a)) == f.cod.block_key(b)
    )
    return BasicOpenI(dom, pairs, cod)


def symmetric_varray(M, subset=None):
    """A symmetric basic open around the identity of M: the Horn diagram on
    the subset both as domain and codomain condition, with every subset
    element preserved."""
    diagram = horn_diagram(M, subset)
    return BasicOpenI(diagram, tuple((p, p) for p in diagram.params), diagram)


# ---------------------------------------------------------------------------
# completely prime filters and sobriety


class CPFilter:
    """A completely prime filter of opens, stored by its minimum element."""

    def __init__(self, space, min_open):
        self.space = space
        self.min_open = frozenset(min_open)

    def contains(self, subset):
        subset = frozenset(subset)
        return self.space.is_open(subset) and self.min_open <= subset

    def members(self, limit=DEFAULT_LATTICE_LIMIT):
        return [o for o in self.space.opens(limit) if self.min_open <= o]

    def __eq__(self, other):
        return isinstance(other, CPFilter) and self.min_open == other.min_open

    def __hash__(self):
        return hash(self.min_open)

    def __repr__(self):
        return f"CPFilter(min={sorted(self.min_open)})"


def neighborhood_filter(space, x):
    return CPFilter(space, space.minimal_nbhd(x))


def cp_filters(space, limit=DEFAULT_LATTICE_LIMIT):
    """All completely prime filters, by exhaustive scan of the lattice.

    In a finite lattice every such filter is the up-set of an open that is
    not the union of its proper open subsets; the scan checks exactly that.
    """
    lattice = space.opens(limit)
    out = []
    for m in lattice:
        if not m:
            continue
        below = frozenset().union(*(o for o in lattice if o < m)) if len(m) else frozenset()
        if below != m:
            out.append(CPFilter(space, m))
    return out


def filter_to_model(mc: ModelClass, filt: CPFilter):
    """Rebuild the structure whose neighborhood filter is the given one.

    Carrier: indices a with the definedness open in the filter; equality,
    relations and functions by filter membership of their atomic opens.
    """
    from .models import IndexedStructure

    sig = mc.theory.signature
    S = mc.S
    A = [a for a in S.elements() if filt.contains(basic_open_points(mc, BasicOpenM(fic(["x0"], TOP), (a,))))]
    eq = fic(["x0", "x1"], Eq(Var("x0"), Var("x1")))
    related = {
        (a, b)
        for a in A
        for b in A
        if filt.contains(basic_open_points(mc, BasicOpenM(eq, (a, b))))
    }
    blocks = []
    seen = set()
    for a in A:
        if a in seen:
            continue
        blk = tuple(b for b in A if (a, b) in related)
        seen.update(blk)
        blocks.append(blk)
    key_of = {}
    for blk in blocks:
        for x in blk:
            key_of[x] = blk[0]
    rels = {}
    for name, arity in sig.rels:
        got = set()
        phi = fic([f"x{i}" for i in range(arity)], Rel(name, _var_tuple(arity)))
        for t in itertools.product(A, repeat=arity):
            if filt.contains(basic_open_points(mc, BasicOpenM(phi, t))):
                got.add(tuple(key_of[x] for x in t))
        rels[name] = frozenset(got)
    funs = {}
    for name, arity in sig.funs:
        from .logic import App

        phi = fic(
            [f"x{i}" for i in range(arity + 1)],
            Eq(App(name, _var_tuple(arity)), Var(f"x{arity}")),
        )
        g = {}
        for t in itertools.product(A, repeat=arity + 1):
            if filt.contains(basic_open_points(mc, BasicOpenM(phi, t))):
                g[tuple(key_of[x] for x in t[:arity])] = key_of[t[arity]]
        funs[name] = g
    return IndexedStructure(A, blocks, rels, funs)


def sobriety_report(mc: ModelClass, limit=DEFAULT_LATTICE_LIMIT):
    """Test sobriety of the truncated model space.

    At finite scale sobriety is the T0 property; the report says whether
    completely prime filters biject with models and whether every filter
    round-trips through filter_to_model.
    """
    space = model_space(mc)
    filters = cp_filters(space, limit)
    nbhd = [neighborhood_filter(space, i) for i in range(len(mc.models))]
    t0 = len(set(f.min_open for f in nbhd)) == len(mc.models)
    bijective = t0 and len(filters) == len(mc.models) and set(filters) == set(nbhd)
    roundtrips = []
    for f in filters:
        M = filter_to_model(mc, f)
        idx = mc.model_index.get(M._key)
        ok = idx is not None and neighborhood_filter(space, idx) == f
        roundtrips.append((f, idx, ok))
    return {
        "t0": t0,
        "filters": len(filters),
        "models": len(mc.models),
        "bijection": bijective,
        "round_trip": all(ok for _, _, ok in roundtrips),
        "details": roundtrips,
    }
