"""Centralizers of L_Q(E), represented by their values on the vertices.

A map ``tau: E^0 -> L`` with ``tau(s(f)) f = f tau(r(f))`` and
``tau(r(f)) f* = f* tau(s(f))`` for every edge extends uniquely to a
centralizer; such a map is a :class:`CentralizerSeed`.  Every routine here
works with seeds and never materializes the infinite linear map.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .algebra import Element, EngineError, Key, LeavittAlgebra, format_key, in_corner, partial_B
from .graph import (
    Cycle,
    Graph,
    acyclic_depth,
    closure_levels,
    cycle_exits,
    cycle_vertices,
    cycles,
    gamma_sets,
    hs_closure,
    is_acyclic,
    is_comet,
    is_simple,
    mt3,
    paths_to_H,
)
from .laurent import LaurentPoly
from .linalg import nullspace


class SeedError(EngineError):
    pass


@dataclass
class CentralizerSeed:
    alg: LeavittAlgebra
    values: dict[str, Element]

    def __eq__(self, other):
        if not isinstance(other, CentralizerSeed):
            return NotImplemented
        return self.values == other.values

    def __getitem__(self, v: str) -> Element:
        return self.values[v]

    @classmethod
    def scalar(cls, alg: LeavittAlgebra, k=1) -> "CentralizerSeed":
        return cls(alg, {v: alg.vertex(v).scale(k) for v in alg.graph.vertices})

    def __add__(self, other: "CentralizerSeed") -> "CentralizerSeed":
        return CentralizerSeed(self.alg, {v: self.values[v] + other.values[v] for v in self.values})

    def scale(self, k) -> "CentralizerSeed":
        return CentralizerSeed(self.alg, {v: x.scale(k) for v, x in self.values.items()})

    def compose(self, other: "CentralizerSeed") -> "CentralizerSeed":
        """Seed of ``self o other``."""
        return CentralizerSeed(self.alg, {v: evaluate(self, x, check=False) for v, x in other.values.items()})

    def is_scalar(self) -> Fraction | None:
        g = self.alg.graph
        k = None
        for v in g.vertices:
            x = self.values[v]
            if x.terms and set(x.terms) != {((), (), v)}:
                return None
            kv = x.coefficient(((), (), v))
            if k is None:
                k = kv
            elif kv != k:
                return None
        return k if k is not None else Fraction(0)

    def to_json(self) -> dict:
        return {
            "basis": self.alg.basis_header(),
            "values": {v: str(self.values[v]) for v in self.alg.graph.vertices},
        }


@dataclass
class SeedCheck:
    ok: bool
    edge: str | None = None
    identity: str | None = None

    def __bool__(self):
        return self.ok


def validate_seed(seed: CentralizerSeed) -> SeedCheck:
    alg = seed.alg
    g = alg.graph
    for v in g.vertices:
        if not in_corner(seed.values[v], v):
            raise SeedError(f"value at {v} does not lie in the corner {v}L{v}")
    # all edges against the first identity before any against the second
    for f in g.edges:
        a, b = seed.values[g.source[f]], seed.values[g.range[f]]
        if a * alg.edge(f) != alg.edge(f) * b:
            return SeedCheck(False, f, "tau(s(f)) f = f tau(r(f))")
    for f in g.edges:
        a, b = seed.values[g.source[f]], seed.values[g.range[f]]
        if b * alg.edge_star(f) != alg.edge_star(f) * a:
            return SeedCheck(False, f, "tau(r(f)) f* = f* tau(s(f))")
    return SeedCheck(True)


def evaluate(seed: CentralizerSeed, x: Element, check: bool = True) -> Element:
    """The centralizer extending ``seed``, applied to ``x``."""
    if check:
        res = validate_seed(seed)
        if not res:
            raise SeedError(f"invalid seed: fails at edge {res.edge} ({res.identity})")
    alg = seed.alg
    out = alg.zero()
    by_source: dict[str, dict[Key, Fraction]] = {}
    for k, c in x.terms.items():
        by_source.setdefault(alg.s_of(k[0], k[2]), {})[k] = c
    for v, terms in by_source.items():
        out = out + seed.values[v] * Element(alg, terms)
    return out


# ---------------------------------------------------------------- seed spaces

def cycle_length_unit(g: Graph) -> int:
    """Length of the longest cycle without exits (1 when there is none)."""
    lengths = [len(c) for c in cycles(g) if not cycle_exits(g, c)]
    return max(lengths, default=1)


def truncation_budgets(g: Graph, d: int) -> dict[str, int]:
    """Per-vertex length bound used to truncate seed values at degree ``d``.

    ``d`` counts traversals of a no-exit cycle; the acyclic depth of a vertex is
    added so that a vertex far up a tail sees the same cycle powers as the
    cycle itself.
    """
    unit = cycle_length_unit(g)
    depth = acyclic_depth(g)
    return {v: d * unit + depth[v] for v in g.vertices}


@dataclass
class SeedSpace:
    graph: Graph
    degree: int
    budgets: dict[str, int]
    basis: list[CentralizerSeed]
    unknowns: int
    equations: int

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "dimension": self.dimension,
            "unknowns": self.unknowns,
            "equations": self.equations,
            "budgets": self.budgets,
            "basis": [s.to_json() for s in self.basis],
        }


def _seed_unknowns(alg: LeavittAlgebra, budgets: dict[str, int]) -> list[tuple[str, Key]]:
    return [(v, k) for v in alg.graph.vertices for k in alg.corner_keys(v, budgets[v])]


def seed_space(alg: LeavittAlgebra, d: int, budgets: dict[str, int] | None = None) -> SeedSpace:
    """Exact solution space of the intertwining equations on truncated corners."""
    g = alg.graph
    if d < 0:
        raise ValueError("degree bound must be non-negative")
    if budgets is None:
        budgets = truncation_budgets(g, d)
    unknowns = _seed_unknowns(alg, budgets)
    by_vertex: dict[str, list[tuple[int, Key]]] = {v: [] for v in g.vertices}
    for i, (v, k) in enumerate(unknowns):
        by_vertex[v].append((i, k))
    rows: list[dict[int, Fraction]] = []
    mul = alg._key_mul
    for f in g.edges:
        a, b = g.source[f], g.range[f]
        fk: Key = ((f,), (), b)
        fs: Key = ((), (f,), b)
        for left_vertex, left, right_vertex, right in ((a, fk, b, fk), (b, fs, a, fs)):
            # sum x_i (key_i * left)  -  sum y_j (right * key_j) = 0
            eqs: dict[Key, dict[int, Fraction]] = {}
            for i, k in by_vertex[left_vertex]:
                for mk, c in mul(k, left):
                    row = eqs.setdefault(mk, {})
                    row[i] = row.get(i, 0) + c
            for j, k in by_vertex[right_vertex]:
                for mk, c in mul(right, k):
                    row = eqs.setdefault(mk, {})
                    row[j] = row.get(j, 0) - c
            rows.extend({i: Fraction(c) for i, c in r.items() if c} for r in eqs.values())
    rows = [r for r in rows if r]
    basis = []
    for vec in nullspace(rows, len(unknowns)):
        values = {v: {} for v in g.vertices}
        for i, c in vec.items():
            v, k = unknowns[i]
            values[v][k] = c
        basis.append(CentralizerSeed(alg, {v: Element(alg, t) for v, t in values.items()}))
    basis = _normalize_basis(basis)
    return SeedSpace(g, d, dict(budgets), basis, len(unknowns), len(rows))


def _normalize_basis(basis: list[CentralizerSeed]) -> list[CentralizerSeed]:
    """Scale each basis seed so its first nonzero coefficient (vertex order) is 1."""
    out = []
    for s in basis:
        lead = None
        for v in s.alg.graph.vertices:
            terms = s.values[v].sorted_terms()
            if terms:
                lead = terms[0][1]
                break
        out.append(s.scale(1 / lead) if lead not in (None, 1) else s)
    return out


@dataclass
class SeedDims:
    dims: dict[int, int]
    stable: bool
    model: str | None  # "K", "K[x,x^-1]" or None


def seed_dims(alg: LeavittAlgebra, d: int) -> SeedDims:
    """Seed-space dimensions at ``d`` and ``d+1`` and the centroid model they fit."""
    dims = {k: seed_space(alg, k).dimension for k in (d, d + 1)}
    if all(n == 1 for n in dims.values()):
        model = "K"
    elif all(n == 2 * k + 1 for k, n in dims.items()):
        model = "K[x,x^-1]"
    else:
        model = None
    return SeedDims(dims, model is not None, model)


def commutant_center(alg: LeavittAlgebra, budgets: dict[str, int]) -> list[Element]:
    """Central elements supported on the truncated corners, by commutation with generators.

    Independent of the seed formulation: unknown ``z`` in the span of the
    truncated corner bases with ``z g = g z`` for every vertex, edge and ghost edge.
    """
    unknowns = _seed_unknowns(alg, budgets)
    rows = []
    mul = alg._key_mul
    gens: list[Key] = [((), (), v) for v in alg.graph.vertices]
    gens += [((e,), (), alg.graph.range[e]) for e in alg.graph.edges]
    gens += [((), (e,), alg.graph.range[e]) for e in alg.graph.edges]
    for gk in gens:
        eqs: dict[Key, dict[int, Fraction]] = {}
        for i, (_, k) in enumerate(unknowns):
            for mk, c in mul(k, gk):
                row = eqs.setdefault(mk, {})
                row[i] = row.get(i, 0) + c
            for mk, c in mul(gk, k):
                row = eqs.setdefault(mk, {})
                row[i] = row.get(i, 0) - c
        rows.extend({i: Fraction(c) for i, c in r.items() if c} for r in eqs.values())
    out = []
    for vec in nullspace([r for r in rows if r], len(unknowns)):
        out.append(Element(alg, {unknowns[i][1]: c for i, c in vec.items()}))
    return out


# ---------------------------------------------------------------- corner centers

@dataclass
class CornerDecomposition:
    vertex: str
    k: Fraction
    xi: dict[str, Element]

    def reconstruct(self, alg: LeavittAlgebra) -> Element:
        out = alg.vertex(self.vertex).scale(self.k)
        for f, x in self.xi.items():
            out = out + alg.edge(f) * x * alg.edge_star(f)
        return out


def corner_center_decompose(alg: LeavittAlgebra, z: Element, u: str, d: int = 3, check: bool = True) -> CornerDecomposition:
    """Write a central element of uLu as ``k u + sum_f f xi_f f*``."""
    g = alg.graph
    if u in cycle_vertices(g):
        raise SeedError(f"{u} lies on a cycle")
    if not in_corner(z, u):
        raise SeedError(f"element does not lie in the corner {u}L{u}")
    if check:
        for b in alg.corner_basis(u, d):
            if z * b != b * z:
                raise SeedError(f"element does not commute with {b} in {u}L{u}")
    k = z.coefficient(((), (), u))
    rest = z - alg.vertex(u).scale(k)
    xi = {f: alg.edge_star(f) * rest * alg.edge(f) for f in g.out_edges(u)}
    dec = CornerDecomposition(u, k, xi)
    if dec.reconstruct(alg) != z:
        raise SeedError("decomposition does not reconstruct the element")
    return dec


def corner_center_basis(alg: LeavittAlgebra, u: str, max_len: int) -> list[Element]:
    """Center of the span of corner walks of length <= max_len, by dense commutation."""
    keys = alg.corner_keys(u, max_len)
    mul = alg._key_mul
    rows = []
    for bk in keys:
        eqs: dict[Key, dict[int, Fraction]] = {}
        for i, k in enumerate(keys):
            for mk, c in mul(k, bk):
                row = eqs.setdefault(mk, {})
                row[i] = row.get(i, 0) + c
            for mk, c in mul(bk, k):
                row = eqs.setdefault(mk, {})
                row[i] = row.get(i, 0) - c
        rows.extend({i: Fraction(c) for i, c in r.items() if c} for r in eqs.values())
    return [Element(alg, {keys[i]: c for i, c in vec.items()}) for vec in nullspace([r for r in rows if r], len(keys))]


def acyclic_corner_center(alg: LeavittAlgebra, u: str) -> list[Element]:
    """Basis of the exact center of uLu for an acyclic graph (uLu is finite dimensional)."""
    g = alg.graph
    if not is_acyclic(g):
        raise SeedError("acyclic_corner_center needs an acyclic graph")
    longest = acyclic_depth(g)[u]
    return corner_center_basis(alg, u, longest)


def diagonal_terms_only(x: Element) -> bool:
    """True when every basis term has the form alpha alpha*."""
    return all(a == b for (a, b, _) in x.terms)


# ---------------------------------------------------------------- S-map

@dataclass(frozen=True)
class SMapContext:
    alg: LeavittAlgebra
    cycle: Cycle

    @property
    def base(self) -> str:
        return self.cycle.base

    @property
    def c_key(self) -> Key:
        return (self.cycle.edges, (), self.base)

    @property
    def cstar_key(self) -> Key:
        return ((), self.cycle.edges, self.base)

    def power_key(self, m: int) -> Key:
        if m >= 0:
            return (self.cycle.edges * m, (), self.base)
        return ((), self.cycle.edges * (-m), self.base)


def s_apply(ctx: SMapContext, x: Element) -> Element:
    alg = ctx.alg
    if not in_corner(x, ctx.base):
        raise SeedError(f"S acts on the corner at {ctx.base}")
    c = Element(alg, {ctx.c_key: Fraction(1)})
    cs = Element(alg, {ctx.cstar_key: Fraction(1)})
    return cs * x * c


def s_step(ctx: SMapContext, w: Key) -> Key | None:
    """One application of S to a walk, using (CK1) only."""
    alg = ctx.alg
    left = alg.walk_product(ctx.cstar_key, w)
    if left is None:
        return None
    return alg.walk_product(left, ctx.c_key)


def cycle_power_of(ctx: SMapContext, w: Key) -> int | None:
    a, b, v = w
    if v != ctx.base:
        return None
    c = ctx.cycle.edges
    for p, sign in ((a, 1), (b, -1)):
        other = b if sign == 1 else a
        if other:
            continue
        if len(p) % len(c) == 0 and p == c * (len(p) // len(c)):
            return sign * (len(p) // len(c))
    return None


@dataclass(frozen=True)
class CollapseOutcome:
    kind: str  # "dies", "collapses" or "survives"
    steps: int
    power: int | None = None
    first_path_step: int | None = None


def collapse_bound(w: Key) -> int:
    return 2 * max(len(w[0]), len(w[1])) + 2


def s_collapse(ctx: SMapContext, w: Key | tuple, bound: int | None = None) -> CollapseOutcome:
    """Iterate S on a walk until it vanishes or settles on a power of the cycle.

    ``first_path_step`` records the first iterate lying in Path(E) or Path(E)*.
    """
    if len(w) == 2:
        w = ctx.alg.validate_walk(tuple(w[0]), tuple(w[1]), ctx.base if not w[0] and not w[1] else None)
    a, b, _ = w
    alg = ctx.alg
    if alg.s_of(a, w[2]) != ctx.base or alg.s_of(b, w[2]) != ctx.base:
        raise SeedError(f"walk is not in the corner at {ctx.base}")
    if bound is None:
        bound = collapse_bound(w)
    first = None
    cur: Key | None = w
    for n in range(bound + 1):
        if cur is None:
            return CollapseOutcome("dies", n, None, first)
        if first is None and (not cur[0] or not cur[1]):
            first = n
        m = cycle_power_of(ctx, cur)
        if m is not None:
            return CollapseOutcome("collapses", n, m, first)
        cur = s_step(ctx, cur)
    return CollapseOutcome("dies" if cur is None else "survives", bound + 1 if cur is None else bound, None, first)


# ---------------------------------------------------------------- Laurent values

@dataclass
class LaurentExtraction:
    poly: LaurentPoly | None
    offending: str | None = None

    def __bool__(self):
        return self.poly is not None


def cycle_power(alg: LeavittAlgebra, c: Cycle, m: int) -> Element:
    ctx = SMapContext(alg, c)
    return alg.element({ctx.power_key(m): Fraction(1)})


def laurent_value(alg: LeavittAlgebra, c: Cycle, p: LaurentPoly) -> Element:
    """p(c, c*) in the corner at the base of ``c``."""
    out = alg.zero()
    for m, coeff in p.coeffs.items():
        out = out + cycle_power(alg, c, m).scale(coeff)
    return out


def laurent_extract(alg: LeavittAlgebra, c: Cycle, x: Element) -> LaurentExtraction:
    ctx = SMapContext(alg, c)
    coeffs = {}
    for k, coeff in x.sorted_terms():
        m = cycle_power_of(ctx, k)
        if m is None:
            return LaurentExtraction(None, f"{coeff}*{format_key(k)}")
        coeffs[m] = coeff
    return LaurentExtraction(LaurentPoly(coeffs))


def _cycle_prefix(g: Graph, c: Cycle, v: str) -> tuple[str, ...]:
    """sigma with c = sigma sigma' and s(sigma') = v."""
    for i, e in enumerate(c.edges):
        if g.source[e] == v:
            return c.edges[:i]
    raise KeyError(v)


def comet_centralizer_from_laurent(alg: LeavittAlgebra, p: LaurentPoly) -> CentralizerSeed:
    g = alg.graph
    test = is_comet(g)
    if not test:
        raise SeedError(f"not a comet: {test.reason}")
    c = test.cycle
    u = c.base
    top = laurent_value(alg, c, p)
    values: dict[str, Element] = {}
    for v in g.sorted_vertices(c.vertex_set):
        sigma = _cycle_prefix(g, c, v)
        if sigma:
            values[v] = alg.ghost(sigma) * top * alg.path(sigma)
        else:
            values[v] = top
    _propagate_up(alg, values, closure_levels(g, [u]))
    return CentralizerSeed(alg, {v: values[v] for v in g.vertices})


def _propagate_up(alg: LeavittAlgebra, values: dict[str, Element], levels: dict[str, int]):
    g = alg.graph
    for n in range(1, max(levels.values(), default=0) + 1):
        for w in g.vertices:
            if levels.get(w) != n or w in values:
                continue
            acc = alg.zero()
            for e in g.out_edges(w):
                acc = acc + alg.edge(e) * values[g.range[e]] * alg.edge_star(e)
            values[w] = acc


def omega(seed: CentralizerSeed, u: str) -> Element:
    return seed.values[u]


@dataclass
class Reconstruction:
    seed: CentralizerSeed | None
    witness: tuple | None = None
    reason: str | None = None

    def __bool__(self):
        return self.seed is not None


def reconstruct_from_value(alg: LeavittAlgebra, u: str, x: Element, path_bound: int | None = None) -> Reconstruction:
    """Rebuild the seed with value ``x`` at ``u`` (down trees, then up saturation levels)."""
    g = alg.graph
    if not mt3(g):
        raise SeedError("reconstruction needs a graph satisfying MT3")
    if hs_closure(g, [u]) != frozenset(g.vertices):
        raise SeedError(f"the hereditary saturated closure of {u} is not the whole graph")
    if not in_corner(x, u):
        raise SeedError(f"value does not lie in the corner {u}L{u}")
    if path_bound is None:
        path_bound = len(g.vertices)
    values: dict[str, Element] = {}
    first_path: dict[str, tuple[str, ...]] = {}
    for p in alg.paths(u, path_bound):
        v = g.range[p[-1]] if p else u
        val = alg.ghost(p) * x * alg.path(p) if p else x
        if v not in values:
            values[v] = val
            first_path[v] = p
        elif values[v] != val:
            return Reconstruction(None, (first_path[v], p), f"value at {v} depends on the path")
    _propagate_up(alg, values, closure_levels(g, [u]))
    seed = CentralizerSeed(alg, {v: values[v] for v in g.vertices})
    check = validate_seed(seed)
    if not check:
        return Reconstruction(None, (check.edge,), f"intertwining fails at edge {check.edge}")
    return Reconstruction(seed)


@dataclass
class MembershipReport:
    vertex: str
    degree: int
    dimension: int
    scalar_values: bool
    values: list[str]


def path_membership_checks(alg: LeavittAlgebra, u: str, d: int = 3) -> MembershipReport:
    """For a simple graph, every seed-space basis value at ``u`` must be a multiple of ``u``."""
    if not is_simple(alg.graph):
        raise SeedError("path membership checks need a simple graph")
    space = seed_space(alg, d)
    vals = [s.values[u] for s in space.basis]
    ok = all(set(x.terms) <= {((), (), u)} for x in vals)
    return MembershipReport(u, d, space.dimension, ok, [str(x) for x in vals])


# ---------------------------------------------------------------- lemma checks

def pi_identity(alg: LeavittAlgebra, v: str, H: Iterable[str]) -> Element:
    """sum of alpha alpha* over the paths from ``v`` entering ``H`` at their end."""
    out = alg.zero()
    for p in paths_to_H(alg.graph, v, H):
        out = out + alg.path(p.edges) * alg.ghost(p.edges)
    return out


def descent_violations(seed: CentralizerSeed) -> list[tuple[str, str]]:
    """Pairs (u, g) where a non-scalar value at a non-cycle vertex fails to drop in ∂_B along g."""
    alg = seed.alg
    g = alg.graph
    on_cycle = cycle_vertices(g)
    bad = []
    for u in g.vertices:
        x = seed.values[u]
        if u in on_cycle or set(x.terms) <= {((), (), u)}:
            continue
        first_edges = {p[0] for (a, b, _) in x.terms for p in (a, b) if p}
        for e in g.out_edges(u):
            if e in first_edges and partial_B(x) <= partial_B(seed.values[g.range[e]]):
                bad.append((u, e))
    return bad


def gamma_dichotomy_violations(seed: CentralizerSeed, H: Iterable[str]) -> list[tuple[str, str, str]]:
    """Triples (v, f, g) with xi_f = 0 for f in Gamma_1(v) but xi_g != 0 for g in Gamma_2(v)."""
    alg = seed.alg
    g = alg.graph
    H = frozenset(H)
    on_cycle = cycle_vertices(g)
    bad = []
    for v in g.vertices:
        if v in H or v in on_cycle:
            continue
        dec = corner_center_decompose(alg, seed.values[v], v, check=False)
        gamma1, gamma2 = gamma_sets(g, v, H)
        dead = [f for f in gamma1 if not dec.xi[f]]
        alive = [h for h in gamma2 if dec.xi[h]]
        if dead and alive:
            bad.append((v, dead[0], alive[0]))
    return bad
