"""Indexed structures: enumeration, evaluation, isomorphisms, entailment.

A structure here is a quotient of a subset of the finite index set
{0, ..., n-1}: a sorted carrier domain, a partition of it into blocks, and
relation/function interpretations over the blocks.  Blocks are keyed by
their minimal element.  Enumeration order is fixed once and for all:
subsets in binary counting order, partitions in restricted-growth-string
order, relation interpretations in bitmask order, function interpretations
in base-(number of blocks) counting order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .errors import HeadroomError, InterpretationError, LimitExceeded, SignatureError
from .logic import (
    And,
    App,
    Bot,
    Eq,
    Exists,
    FormulaInContext,
    Or,
    Rel,
    Sequent,
    Theory,
    Top,
    Var,
)

DEFAULT_LIMIT = 200_000


@dataclass(frozen=True)
class IndexSet:
    """The fixed finite index set; elements are 0..size-1."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("index set must be nonempty")

    def elements(self):
        return range(self.size)


class IndexedStructure:
    """Carrier domain, partition into blocks, and symbol interpretations.

    rels maps a relation name to a frozenset of tuples of block keys; funs
    maps a function name to a dict from argument key tuples to a key.
    Instances are immutable by convention and hashable by canonical form.
    """

    __slots__ = ("domain", "blocks", "rels", "funs", "_block_of", "_key", "_hash")

    def __init__(self, domain, blocks, rels=None, funs=None):
        domain = tuple(sorted(domain))
        blocks = tuple(tuple(sorted(b)) for b in blocks)
        blocks = tuple(sorted(blocks, key=lambda b: b[0])) if blocks else ()
        flat = [x for b in blocks for x in b]
        if sorted(flat) != list(domain) or len(flat) != len(set(flat)):
            raise SignatureError("blocks do not partition the domain")
        self.domain = domain
        self.blocks = blocks
        self._block_of = {}
        for b in blocks:
            for x in b:
                self._block_of[x] = b[0]
        keys = set(b[0] for b in blocks)
        rels = {name: frozenset(tuple(t) for t in ts) for name, ts in (rels or {}).items()}
        funs = {name: dict(g) for name, g in (funs or {}).items()}
        for name, ts in rels.items():
            for t in ts:
                if not set(t) <= keys:
                    raise SignatureError(f"relation {name} references unknown block {t}")
        for name, g in funs.items():
            for args, val in g.items():
                if not set(args) <= keys or val not in keys:
                    raise SignatureError(f"function {name} references unknown block")
        self.rels = rels
        self.funs = funs
        self._key = (
            self.domain,
            self.blocks,
            tuple(sorted((n, tuple(sorted(ts))) for n, ts in rels.items())),
            tuple(sorted((n, tuple(sorted(g.items()))) for n, g in funs.items())),
        )
        self._hash = hash(self._key)

    @property
    def keys(self):
        return tuple(b[0] for b in self.blocks)

    def block_key(self, element):
        return self._block_of[element]

    def has(self, element):
        return element in self._block_of

    def rel(self, name):
        return self.rels.get(name, frozenset())

    def fun(self, name):
        return self.funs[name]

    def __eq__(self, other):
        return isinstance(other, IndexedStructure) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"IndexedStructure(domain={self.domain}, blocks={self.blocks})"

    def to_json(self):
        """Canonical JSON form, byte-stable under the canonical ordering."""
        return {
            "domain": list(self.domain),
            "blocks": [list(b) for b in self.blocks],
            "rels": {
                n: [list(t) for t in sorted(ts)] for n, ts in sorted(self.rels.items())
            },
            "funs": {
                n: [[list(a), v] for a, v in sorted(g.items())]
                for n, g in sorted(self.funs.items())
            },
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def validate_structure(sig, M):
    """Check that M interprets every symbol of sig with the right shape."""
    keys = M.keys
    for name, arity in sig.rels:
        for t in M.rel(name):
            if len(t) != arity:
                raise SignatureError(f"tuple arity mismatch in {name}")
    for name, arity in sig.funs:
        g = M.funs.get(name)
        if g is None:
            raise SignatureError(f"missing interpretation of function {name}")
        want = set(itertools.product(keys, repeat=arity))
        if set(g) != want:
            raise SignatureError(f"function {name} not total")


# ---------------------------------------------------------------------------
# enumeration


def _partitions_rgs(elements):
    """Set partitions in restricted-growth-string order; blocks listed by
    first occurrence, which equals minimal-element order."""
    n = len(elements)
    if n == 0:
        yield ()
        return
    rgs = [0] * n
    while True:
        nblocks = max(rgs) + 1
        blocks = [[] for _ in range(nblocks)]
        for i, lab in enumerate(rgs):
            blocks[lab].append(elements[i])
        yield tuple(tuple(b) for b in blocks)
        # next restricted growth string
        i = n - 1
        while i > 0:
            if rgs[i] <= max(rgs[:i]):
                break
            i -= 1
        if i == 0:
            return
        rgs[i] += 1
        for j in range(i + 1, n):
            rgs[j] = 0


def count_structures(sig, S):
    """Exact count of the enumeration, for limit checks."""
    total = 0
    n = S.size
    for mask in range(1 << n):
        elements = [i for i in range(n) if mask >> i & 1]
        for blocks in _partitions_rgs(elements):
            b = len(blocks)
            cnt = 1
            for _, arity in sig.rels:
                cnt *= 1 << (b**arity)
            for _, arity in sig.funs:
                cnt *= b ** (b**arity)
            total += cnt
    return total


def enumerate_structures(sig, S, limit=DEFAULT_LIMIT):
    """All indexed structures over sig, complete and duplicate-free."""
    est = count_structures(sig, S)
    if est > limit:
        raise LimitExceeded("structure enumeration too large", est)
    return list(_iter_structures(sig, S))


def _rel_choices(keys, arity):
    tuples = sorted(itertools.product(keys, repeat=arity))
    for mask in range(1 << len(tuples)):
        yield frozenset(t for i, t in enumerate(tuples) if mask >> i & 1)


def _fun_choices(keys, arity):
    argtuples = sorted(itertools.product(keys, repeat=arity))
    if not keys:
        if argtuples:
            return  # a constant needs a value; no interpretation exists
        yield {}
        return
    for values in itertools.product(keys, repeat=len(argtuples)):
        yield dict(zip(argtuples, values))


def _iter_structures(sig, S):
    n = S.size
    for mask in range(1 << n):
        elements = [i for i in range(n) if mask >> i & 1]
        for blocks in _partitions_rgs(elements):
            keys = tuple(b[0] for b in blocks)
            rel_opts = [(name, list(_rel_choices(keys, a))) for name, a in sig.rels]
            fun_opts = [(name, list(_fun_choices(keys, a))) for name, a in sig.funs]
            for rel_pick in itertools.product(*(opts for _, opts in rel_opts)):
                rels = {name: pick for (name, _), pick in zip(rel_opts, rel_pick)}
                for fun_pick in itertools.product(*(opts for _, opts in fun_opts)):
                    funs = {name: pick for (name, _), pick in zip(fun_opts, fun_pick)}
                    yield IndexedStructure(elements, blocks, rels, funs)


# ---------------------------------------------------------------------------
# evaluation


def _eval_term(M, t, env):
    if isinstance(t, Var):
        return env[t.name]
    args = tuple(_eval_term(M, a, env) for a in t.args)
    return M.fun(t.fn)[args]


def satisfies(M, phi, env):
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bot):
        return False
    if isinstance(phi, Eq):
        return _eval_term(M, phi.left, env) == _eval_term(M, phi.right, env)
    if isinstance(phi, Rel):
        t = tuple(_eval_term(M, a, env) for a in phi.args)
        return t in M.rel(phi.name)
    if isinstance(phi, And):
        return all(satisfies(M, p, env) for p in phi.parts)
    if isinstance(phi, Or):
        return any(satisfies(M, p, env) for p in phi.parts)
    if isinstance(phi, Exists):
        for key in M.keys:
            env2 = dict(env)
            env2[phi.var] = key
            if satisfies(M, phi.body, env2):
                return True
        return False
    raise TypeError(f"not a formula: {phi!r}")


def eval_formula(M, f: FormulaInContext):
    """The Tarskian extension: all context assignments satisfying the formula.

    With an empty context the result is a subset of {()}.
    """
    out = set()
    for assignment in itertools.product(M.keys, repeat=len(f.context)):
        env = dict(zip(f.context, assignment))
        if satisfies(M, f.formula, env):
            out.add(assignment)
    return out


def holds(M, seq: Sequent):
    for assignment in itertools.product(M.keys, repeat=len(seq.context)):
        env = dict(zip(seq.context, assignment))
        if satisfies(M, seq.lhs, env) and not satisfies(M, seq.rhs, env):
            return False
    return True


def is_model(M, theory: Theory):
    return all(holds(M, ax) for ax in theory.axioms)


# ---------------------------------------------------------------------------
# isomorphisms


class StructIso:
    """A block bijection between two structures preserving all structure."""

    __slots__ = ("dom", "cod", "mapping", "_key")

    def __init__(self, dom, cod, mapping):
        mapping = dict(mapping)
        if sorted(mapping) != sorted(dom.keys) or sorted(mapping.values()) != sorted(cod.keys):
            raise SignatureError("mapping is not a bijection between the block sets")
        self.dom = dom
        self.cod = cod
        self.mapping = mapping
        self._key = (dom._key, cod._key, tuple(sorted(mapping.items())))

    def apply(self, key):
        return self.mapping[key]

    def apply_tuple(self, t):
        return tuple(self.mapping[k] for k in t)

    def preserves_structure(self):
        sigma = self.mapping
        for name in set(self.dom.rels) | set(self.cod.rels):
            image = {tuple(sigma[k] for k in t) for t in self.dom.rel(name)}
            if image != set(self.cod.rel(name)):
                return False
        for name in set(self.dom.funs) | set(self.cod.funs):
            g, h = self.dom.funs.get(name), self.cod.funs.get(name)
            if g is None or h is None:
                return False
            for args, val in g.items():
                if h[tuple(sigma[k] for k in args)] != sigma[val]:
                    return False
        return True

    def inverse(self):
        return StructIso(self.cod, self.dom, {v: k for k, v in self.mapping.items()})

    def compose(self, other):
        """self after other (other: A->B, self: B->C)."""
        return StructIso(other.dom, self.cod, {k: self.mapping[v] for k, v in other.mapping.items()})

    def __eq__(self, other):
        return isinstance(other, StructIso) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"StructIso({dict(sorted(self.mapping.items()))})"


def enumerate_isomorphisms(M, N):
    """All structure-preserving bijections between the block sets, in
    permutation order of the codomain keys."""
    mk, nk = M.keys, N.keys
    if len(mk) != len(nk):
        return []
    out = []
    for perm in itertools.permutations(nk):
        iso = StructIso(M, N, dict(zip(mk, perm)))
        if iso.preserves_structure():
            out.append(iso)
    return out


# ---------------------------------------------------------------------------
# the model class


class ModelClass:
    """All S-indexed models of a theory with all isomorphisms between them."""

    def __init__(self, theory, S, models, isos):
        self.theory = theory
        self.S = S
        self.models = list(models)
        self.isos = list(isos)
        self.model_index = {M._key: i for i, M in enumerate(self.models)}
        self.iso_index = {f._key: i for i, f in enumerate(self.isos)}
        self.iso_dom = [self.model_index[f.dom._key] for f in self.isos]
        self.iso_cod = [self.model_index[f.cod._key] for f in self.isos]
        self.identity_of = [None] * len(self.models)
        for j, f in enumerate(self.isos):
            if self.iso_dom[j] == self.iso_cod[j] and all(k == v for k, v in f.mapping.items()):
                self.identity_of[self.iso_dom[j]] = j
        self.inverse_of = [self.iso_index[f.inverse()._key] for f in self.isos]
        self.comp = {}
        for gj, g in enumerate(self.isos):
            for fj, f in enumerate(self.isos):
                if self.iso_dom[gj] == self.iso_cod[fj]:
                    self.comp[(gj, fj)] = self.iso_index[g.compose(f)._key]
        self._ext_cache = {}

    def __repr__(self):
        return (
            f"ModelClass({self.theory}, |S|={self.S.size}, "
            f"{len(self.models)} models, {len(self.isos)} isos)"
        )

    def find_model(self, M):
        return self.model_index[M._key]

    def find_iso(self, iso):
        return self.iso_index[iso._key]

    def ext(self, model_idx, f: FormulaInContext):
        key = (model_idx, f)
        hit = self._ext_cache.get(key)
        if hit is None:
            hit = frozenset(eval_formula(self.models[model_idx], f))
            self._ext_cache[key] = hit
        return hit

    def entails(self, seq: Sequent):
        """Membership in the semantic closure: true in every listed model."""
        lhs = FormulaInContext(seq.context, seq.lhs)
        rhs = FormulaInContext(seq.context, seq.rhs)
        for i in range(len(self.models)):
            if not self.ext(i, lhs) <= self.ext(i, rhs):
                return False
        return True

    def extension_family(self, f: FormulaInContext):
        """Per-model extensions, the semantic value of a formula-in-context."""
        return tuple(self.ext(i, f) for i in range(len(self.models)))

    def star(self, model_idx, a, b):
        """Star construction located inside the class: returns (N index, iso index)."""
        N, iso = star_lemma(self.models[model_idx], a, b, self.S)
        return self.model_index[N._key], self.iso_index[iso._key]


def _axiom_symbols(seq):
    return _formula_symbols(seq.lhs) | _formula_symbols(seq.rhs)


def _definition_map(theory, symbols):
    """Relation symbols pinned by a biconditional axiom pair over earlier
    symbols: name -> defining formula.  The search evaluates the formula
    instead of enumerating interpretations; results are unchanged because
    any other interpretation would fail the axiom pair."""
    atoms = {}
    for idx, (kind, name, arity) in enumerate(symbols):
        if kind == "rel":
            atoms[name] = (idx, Rel(name, tuple(Var(f"x{i}") for i in range(arity))))
    forward = {}  # name -> formulas phi with axiom  atom |- phi
    backward = {}  # name -> formula set, with axiom  phi |- atom
    for ax in theory.axioms:
        lhs, rhs = ax.lhs, ax.rhs
        if isinstance(lhs, Rel) and lhs.name in atoms:
            idx, atom = atoms[lhs.name]
            if len(ax.context) == len(atom.args) and lhs == atom:
                forward.setdefault(lhs.name, []).append(rhs)
        if isinstance(rhs, Rel) and rhs.name in atoms:
            idx, atom = atoms[rhs.name]
            if len(ax.context) == len(atom.args) and rhs == atom:
                backward.setdefault(rhs.name, set()).add(lhs)
    defs = {}
    for name, (idx, atom) in atoms.items():
        earlier = {symbols[j][1] for j in range(idx)}
        for phi in forward.get(name, []):
            if phi in backward.get(name, set()) and _formula_symbols(phi) <= earlier:
                defs[name] = phi
                break
    return defs


def _formula_symbols(phi):
    """Relation and function names occurring in a formula."""
    syms = set()

    def walk(p):
        if isinstance(p, Rel):
            syms.add(p.name)
            for t in p.args:
                walk_term(t)
        elif isinstance(p, Eq):
            walk_term(p.left)
            walk_term(p.right)
        elif isinstance(p, (And, Or)):
            for q in p.parts:
                walk(q)
        elif isinstance(p, Exists):
            walk(p.body)

    def walk_term(t):
        if isinstance(t, App):
            syms.add(t.fn)
            for a in t.args:
                walk_term(a)

    walk(phi)
    return syms


def _search_models(theory, S, limit=None):
    """Depth-first interpretation search, pruning with every axiom whose
    symbols are already decided.  Yields exactly the structures that
    enumerate_structures + is_model would keep, in the same order.

    limit bounds the number of candidate nodes the search may visit.
    """
    sig = theory.signature
    budget = [limit if limit is not None else float("inf")]
    symbols = [("rel", n, a) for n, a in sig.rels] + [("fun", n, a) for n, a in sig.funs]
    defs = _definition_map(theory, symbols)
    ax_syms = [(ax, _axiom_symbols(ax)) for ax in theory.axioms]
    stage_axioms = {i: [] for i in range(len(symbols) + 1)}
    for ax, syms in ax_syms:
        decided = set()
        stage = 0
        for i, (_, n, _a) in enumerate(symbols, start=1):
            decided.add(n)
            if syms <= decided:
                stage = i
                break
        if not syms:
            stage = 0
        stage_axioms[stage].append(ax)

    n = S.size
    for mask in range(1 << n):
        elements = [i for i in range(n) if mask >> i & 1]
        for blocks in _partitions_rgs(elements):
            keys = tuple(b[0] for b in blocks)

            def descend(i, rels, funs):
                budget[0] -= 1
                if budget[0] < 0:
                    raise LimitExceeded("model search exceeded its node budget")
                probe = IndexedStructure(elements, blocks, rels, funs)
                for ax in stage_axioms[i]:
                    if not holds(probe, ax):
                        return
                if i == len(symbols):
                    yield probe
                    return
                kind, name, arity = symbols[i]
                if kind == "rel":
                    phi = defs.get(name)
                    if phi is not None:
                        ext = eval_formula(
                            probe, FormulaInContext(tuple(f"x{m}" for m in range(arity)), phi)
                        )
                        yield from descend(i + 1, {**rels, name: frozenset(ext)}, funs)
                        return
                    for pick in _rel_choices(keys, arity):
                        yield from descend(i + 1, {**rels, name: pick}, funs)
                else:
                    for pick in _fun_choices(keys, arity):
                        yield from descend(i + 1, rels, {**funs, name: pick})

            yield from descend(0, {}, {})


def build_model_class(theory, S, limit=DEFAULT_LIMIT):
    """All S-indexed models of the theory and all isomorphisms between them.

    The limit bounds the nodes visited by the pruned interpretation search,
    so heavily axiomatized theories stay cheap even when the raw structure
    count is large.
    """
    models = list(_search_models(theory, S, limit))
    isos = []
    for i, M in enumerate(models):
        for j, N in enumerate(models):
            isos.extend(enumerate_isomorphisms(M, N))
    return ModelClass(theory, S, models, isos)


_class_cache = {}


def model_class(theory, S, limit=DEFAULT_LIMIT):
    """Cached build_model_class; theories are hashable values."""
    key = (theory, S.size)
    if key not in _class_cache:
        _class_cache[key] = build_model_class(theory, S, limit)
    return _class_cache[key]


def entails(theory, S, seq, limit=DEFAULT_LIMIT):
    return model_class(theory, S, limit).entails(seq)


# ---------------------------------------------------------------------------
# reduct and star lemma


def reduct(Mprime, interp):
    """Restrict a model of the target theory along an interpretation.

    Same carrier and partition; relations and function graphs evaluate the
    image formulas in Mprime.
    """
    rels = {}
    for name, arity in interp.source.signature.rels:
        rels[name] = frozenset(eval_formula(Mprime, interp.rel_image(name)))
    funs = {}
    for name, arity in interp.source.signature.funs:
        graph = eval_formula(Mprime, interp.fun_image(name))
        g = {}
        for t in graph:
            args, val = t[:arity], t[arity]
            if args in g:
                raise InterpretationError(f"image of {name} not single-valued on {args}")
            g[args] = val
        for args in itertools.product(Mprime.keys, repeat=arity):
            if args not in g:
                raise InterpretationError(f"image of {name} not total on {args}")
        funs[name] = g
    return IndexedStructure(Mprime.domain, Mprime.blocks, rels, funs)


def star_headroom(M, a, b, S):
    """Whether a surjection S ->> blocks(M) extending b_i -> [a_i] exists."""
    keys = M.keys
    if len(a) != len(b):
        raise SignatureError("tuples a and b must have equal length")
    if len(set(b)) != len(b):
        raise SignatureError("entries of b must be pairwise distinct")
    for x in a:
        if not M.has(x):
            raise SignatureError(f"{x} is not in the carrier domain")
    if not keys:
        return S.size == 0
    hit = {M.block_key(x) for x in a}
    free = S.size - len(b)
    return free >= len(set(keys) - hit)


def star_lemma(M, a, b, S):
    """Move the marked elements of M onto the prescribed fresh labels.

    Returns a model N carried by all of S together with an isomorphism
    f: M -> N with f([a_i]) = [b_i].  Deterministic fill: unhit blocks take
    the smallest unused index elements in block order, every remaining
    index element lands in the first block.
    """
    if not star_headroom(M, a, b, S):
        raise HeadroomError(
            f"no surjection of {S.size} indices onto {len(M.keys)} blocks extends the assignment"
        )
    p = {}
    for x, y in zip(a, b):
        p[y] = M.block_key(x)
    unused = [s for s in S.elements() if s not in p]
    unhit = [k for k in M.keys if k not in set(p.values())]
    for k in unhit:
        p[unused.pop(0)] = k
    first = M.keys[0]
    for s in unused:
        p[s] = first
    fibers = {}
    for s in sorted(p):
        fibers.setdefault(p[s], []).append(s)
    sigma = {k: min(f) for k, f in fibers.items()}
    blocks = [tuple(sorted(f)) for f in fibers.values()]
    rels = {
        name: frozenset(tuple(sigma[k] for k in t) for t in ts) for name, ts in M.rels.items()
    }
    funs = {
        name: {tuple(sigma[k] for k in args): sigma[val] for args, val in g.items()}
        for name, g in M.funs.items()
    }
    N = IndexedStructure(list(S.elements()), blocks, rels, funs)
    return N, StructIso(M, N, sigma)


# ---------------------------------------------------------------------------
# interpretation validation


def functionality_sequents(interp):
    """Totality and single-valuedness sequents for every function image."""
    out = []
    for name, arity in interp.source.signature.funs:
        img = interp.fun_image(name)
        ctx = [f"x{i}" for i in range(arity)]
        body = img.formula
        total = Sequent(tuple(ctx), Top(), Exists(f"x{arity}", body))
        ren = {f"x{i}": Var(f"x{i}") for i in range(arity)}
        ren[f"x{arity}"] = Var(f"x{arity + 1}")
        body2 = _substitute_total(body, ren)
        unique = Sequent(
            tuple(ctx + [f"x{arity}", f"x{arity + 1}"]),
            And((body, body2)),
            Eq(Var(f"x{arity}"), Var(f"x{arity + 1}")),
        )
        out.append((name, total, unique))
    return out


def _substitute_total(phi, ren):
    from .logic import substitute

    return substitute(phi, ren)


def check_interpretation(interp, S, limit=DEFAULT_LIMIT):
    """Semantic validation of an interpretation against the target class.

    Checks that every function image is provably functional and that every
    translated source axiom holds in all target models.  Returns a list of
    failure descriptions, empty when valid.
    """
    mc = model_class(interp.target, S, limit)
    failures = []
    for name, total, unique in functionality_sequents(interp):
        if not mc.entails(total):
            failures.append(f"image of {name} is not total")
        if not mc.entails(unique):
            failures.append(f"image of {name} is not single-valued")
    for ax in interp.source.axioms:
        if not mc.entails(interp.translate_sequent(ax)):
            failures.append(f"translated axiom fails: {ax}")
    return failures
