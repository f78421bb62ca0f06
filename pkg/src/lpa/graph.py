"""Finite directed graphs and the structural predicates used by the classifier.

Graphs are immutable; every vertex/edge listing follows declaration order so
that all derived output is reproducible.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator


class GraphError(ValueError):
    """Raised for malformed graphs or unsupported graph operations."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")


@dataclass(frozen=True)
class Graph:
    vertices: tuple[str, ...]
    edges: tuple[str, ...]
    source: dict[str, str] = field(compare=False)
    range: dict[str, str] = field(compare=False)
    inf_emitters: frozenset[str] = frozenset()

    def __post_init__(self):
        seen = set()
        for name in self.vertices + self.edges:
            if name in seen:
                raise GraphError(f"duplicate identifier {name!r}")
            seen.add(name)
        vs = set(self.vertices)
        for e in self.edges:
            if self.source.get(e) not in vs or self.range.get(e) not in vs:
                raise GraphError(f"edge {e!r} has an undeclared endpoint")
        for v in self.inf_emitters:
            if v not in vs:
                raise GraphError(f"undeclared vertex {v!r} flagged as infinite emitter")
            if not any(self.source[e] == v for e in self.edges):
                raise GraphError(f"infinite emitter {v!r} has no declared outgoing edge")
        out: dict[str, tuple[str, ...]] = {v: () for v in self.vertices}
        into: dict[str, tuple[str, ...]] = {v: () for v in self.vertices}
        for e in self.edges:
            out[self.source[e]] += (e,)
            into[self.range[e]] += (e,)
        object.__setattr__(self, "_out", out)
        object.__setattr__(self, "_in", into)
        object.__setattr__(self, "_vindex", {v: i for i, v in enumerate(self.vertices)})
        object.__setattr__(self, "_eindex", {e: i for i, e in enumerate(self.edges)})

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and self.inf_emitters == other.inf_emitters
            and all(self.source[e] == other.source[e] and self.range[e] == other.range[e] for e in self.edges)
        )

    def __hash__(self):
        return hash((self.vertices, self.edges, tuple((self.source[e], self.range[e]) for e in self.edges)))

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable[tuple[str, str, str]], inf_emitters=()) -> "Graph":
        """Build from vertex ids and ``(edge, source, range)`` triples."""
        edges = list(edges)
        return cls(
            tuple(vertices),
            tuple(e for e, _, _ in edges),
            {e: s for e, s, _ in edges},
            {e: r for e, _, r in edges},
            frozenset(inf_emitters),
        )

    def out_edges(self, v: str) -> tuple[str, ...]:
        return self._out[v]

    def in_edges(self, v: str) -> tuple[str, ...]:
        return self._in[v]

    def vertex_index(self, v: str) -> int:
        return self._vindex[v]

    def edge_index(self, e: str) -> int:
        return self._eindex[e]

    def is_vertex(self, name: str) -> bool:
        return name in self._vindex

    def is_edge(self, name: str) -> bool:
        return name in self._eindex

    @property
    def row_finite(self) -> bool:
        return not self.inf_emitters

    def is_regular(self, v: str) -> bool:
        return bool(self._out[v]) and v not in self.inf_emitters

    def sorted_vertices(self, vs: Iterable[str]) -> list[str]:
        return sorted(vs, key=self._vindex.__getitem__)

    def require_row_finite(self, what: str):
        if self.inf_emitters:
            raise GraphError(f"{what} requires row-finite graph")


@dataclass(frozen=True)
class Path:
    """A path ``e1...en``; trivial paths carry their base vertex."""

    source: str
    edges: tuple[str, ...]
    target: str

    def __len__(self):
        return len(self.edges)

    @classmethod
    def trivial(cls, v: str) -> "Path":
        return cls(v, (), v)

    @classmethod
    def of(cls, g: Graph, edges: Iterable[str]) -> "Path":
        edges = tuple(edges)
        if not edges:
            raise GraphError("use Path.trivial for length-0 paths")
        for a, b in zip(edges, edges[1:]):
            if g.range[a] != g.source[b]:
                raise GraphError(f"edges {a!r} and {b!r} do not concatenate")
        return cls(g.source[edges[0]], edges, g.range[edges[-1]])

    def __str__(self):
        return ".".join(self.edges) if self.edges else self.source


@dataclass(frozen=True)
class Cycle:
    """A cycle up to rotation; ``edges`` starts at its smallest vertex."""

    edges: tuple[str, ...]
    vertex_set: frozenset[str]
    base: str

    @property
    def rep(self) -> Path:
        return Path(self.base, self.edges, self.base)

    def __len__(self):
        return len(self.edges)

    def edge_at(self, g: Graph, v: str) -> str:
        for e in self.edges:
            if g.source[e] == v:
                return e
        raise KeyError(v)

    def rotation_at(self, g: Graph, v: str) -> tuple[str, ...]:
        """The cycle read starting from vertex ``v``."""
        for i, e in enumerate(self.edges):
            if g.source[e] == v:
                return self.edges[i:] + self.edges[:i]
        raise KeyError(v)

    def __str__(self):
        return ".".join(self.edges)


def canonical_cycle(g: Graph, edges: Iterable[str]) -> Cycle:
    edges = tuple(edges)
    i = min(range(len(edges)), key=lambda k: g.vertex_index(g.source[edges[k]]))
    rot = edges[i:] + edges[:i]
    return Cycle(rot, frozenset(g.source[e] for e in rot), g.source[rot[0]])


# ---------------------------------------------------------------- DSL

def parse_graph(text: str) -> Graph:
    vertices: list[str] = []
    edges: list[tuple[str, str, str]] = []
    flagged: list[str] = []
    seen: dict[str, int] = {}
    edge_lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "vertex":
            if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] != "!inf"):
                raise GraphError("expected 'vertex <id> [!inf]'", lineno)
            names = [parts[1]]
        elif kind == "edge":
            if len(parts) != 4:
                raise GraphError("expected 'edge <id> <src> <dst>'", lineno)
            names = [parts[1]]
        else:
            raise GraphError(f"unknown declaration {kind!r}", lineno)
        for name in parts[1:2] + (parts[2:4] if kind == "edge" else []):
            if not _IDENT.match(name):
                raise GraphError(f"bad identifier {name!r}", lineno)
        name = names[0]
        if name in seen:
            raise GraphError(f"duplicate identifier {name!r} (first declared on line {seen[name]})", lineno)
        seen[name] = lineno
        if kind == "vertex":
            vertices.append(name)
            if len(parts) == 3:
                flagged.append(name)
        else:
            edges.append((name, parts[2], parts[3]))
            edge_lines[name] = lineno
    vs = set(vertices)
    for e, s, r in edges:
        for end in (s, r):
            if end not in vs:
                raise GraphError(f"edge {e!r} uses undeclared vertex {end!r}", edge_lines[e])
    for v in flagged:
        if not any(s == v for _, s, _ in edges):
            raise GraphError(f"infinite emitter {v!r} has no declared outgoing edge", seen[v])
    return Graph.build(vertices, edges, flagged)


def serialize_graph(g: Graph) -> str:
    lines = [f"vertex {v}" + (" !inf" if v in g.inf_emitters else "") for v in g.vertices]
    lines += [f"edge {e} {g.source[e]} {g.range[e]}" for e in g.edges]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- structure

@dataclass(frozen=True)
class VertexKinds:
    sinks: tuple[str, ...]
    regular: tuple[str, ...]
    inf_emitters: tuple[str, ...]


def vertex_kinds(g: Graph) -> VertexKinds:
    sinks, regular, inf = [], [], []
    for v in g.vertices:
        if v in g.inf_emitters:
            inf.append(v)
        elif g.out_edges(v):
            regular.append(v)
        else:
            sinks.append(v)
    return VertexKinds(tuple(sinks), tuple(regular), tuple(inf))


def tree(g: Graph, X: Iterable[str]) -> frozenset[str]:
    seen = set(X)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for e in g.out_edges(v):
            w = g.range[e]
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return frozenset(seen)


def reaches(g: Graph, u: str, v: str) -> bool:
    return v in tree(g, [u])


def closure_levels(g: Graph, X: Iterable[str]) -> dict[str, int]:
    """Level at which each vertex of the hereditary saturated closure enters.

    Level 0 is the tree of ``X``; level n+1 adds regular vertices all of whose
    edges land in level <= n.
    """
    level = {v: 0 for v in tree(g, X)}
    n = 0
    while True:
        n += 1
        new = [
            v for v in g.vertices
            if v not in level and g.is_regular(v)
            and all(g.range[e] in level for e in g.out_edges(v))
        ]
        if not new:
            return level
        for v in new:
            level[v] = n


def hs_closure(g: Graph, X: Iterable[str]) -> frozenset[str]:
    return frozenset(closure_levels(g, X))


def is_hereditary(g: Graph, H: Iterable[str]) -> bool:
    H = set(H)
    return all(g.range[e] in H for v in H for e in g.out_edges(v))


def is_saturated(g: Graph, H: Iterable[str]) -> bool:
    H = set(H)
    for v in g.vertices:
        if v not in H and g.is_regular(v) and all(g.range[e] in H for e in g.out_edges(v)):
            return False
    return True


def hereditary_subsets(g: Graph) -> Iterator[frozenset[str]]:
    """All hereditary subsets, by brute-force enumeration (small graphs only)."""
    n = len(g.vertices)
    for mask in range(1 << n):
        H = frozenset(v for i, v in enumerate(g.vertices) if mask >> i & 1)
        if is_hereditary(g, H):
            yield H


def hs_subsets(g: Graph) -> list[frozenset[str]]:
    return [H for H in hereditary_subsets(g) if is_saturated(g, H)]


# ---------------------------------------------------------------- cycles

def cycles(g: Graph) -> list[Cycle]:
    """All cycles up to rotation.

    A cycle is recorded from its smallest vertex ``s`` by a DFS that only
    visits vertices larger than ``s``; each rotation class is hit exactly once.
    """
    found: list[Cycle] = []
    idx = g.vertex_index
    for s in g.vertices:
        stack: list[tuple[str, int]] = [(s, 0)]
        path: list[str] = []
        on_path = {s}
        while stack:
            v, i = stack[-1]
            outs = g.out_edges(v)
            if i >= len(outs):
                stack.pop()
                if path:
                    on_path.discard(v)
                    path.pop()
                continue
            stack[-1] = (v, i + 1)
            e = outs[i]
            w = g.range[e]
            if w == s:
                found.append(canonical_cycle(g, path + [e]))
            elif idx(w) > idx(s) and w not in on_path:
                path.append(e)
                on_path.add(w)
                stack.append((w, 0))
    return found


def cycle_exits(g: Graph, c: Cycle) -> list[tuple[str, str | None]]:
    """Exits of ``c`` as ``(vertex, edge)``.

    ``edge`` is None for an infinite emitter on ``c`` whose only declared edge
    is the cycle edge: its undeclared edges are exits.
    """
    exits: list[tuple[str, str | None]] = []
    for ce in c.edges:
        v = g.source[ce]
        others = [e for e in g.out_edges(v) if e != ce]
        exits.extend((v, e) for e in others)
        if v in g.inf_emitters and not others:
            exits.append((v, None))
    return exits


def cycle_vertices(g: Graph) -> frozenset[str]:
    out: set[str] = set()
    for c in cycles(g):
        out |= c.vertex_set
    return frozenset(out)


def condition_L(g: Graph) -> bool:
    return all(cycle_exits(g, c) for c in cycles(g))


def mt3_witness(g: Graph) -> tuple[str, str] | None:
    """A pair of vertices without common descendant, or None if MT3 holds."""
    trees = {v: tree(g, [v]) for v in g.vertices}
    for v, w in combinations(g.vertices, 2):
        if not trees[v] & trees[w]:
            return (v, w)
    return None


def mt3(g: Graph) -> bool:
    return mt3_witness(g) is None


def common_descendant(g: Graph, v: str, w: str) -> str | None:
    both = tree(g, [v]) & tree(g, [w])
    return g.sorted_vertices(both)[0] if both else None


@dataclass(frozen=True)
class CometTest:
    ok: bool
    cycle: Cycle | None
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_comet(g: Graph) -> CometTest:
    """Comet test for finite row-finite graphs.

    In a finite graph any infinite path eventually runs around a cycle, so once
    the cycle is unique the "infinite paths end in c" clause is automatic.
    """
    g.require_row_finite("comet test")
    cs = cycles(g)
    if len(cs) != 1:
        return CometTest(False, None, f"graph has {len(cs)} cycles")
    c = cs[0]
    for v in g.vertices:
        if not tree(g, [v]) & c.vertex_set:
            return CometTest(False, c, f"vertex {v} does not reach the cycle")
    return CometTest(True, c)


def is_graded_simple(g: Graph) -> bool:
    """Only trivial hereditary saturated subsets: closure of each vertex is everything."""
    g.require_row_finite("graded-simplicity criterion")
    everything = frozenset(g.vertices)
    return bool(everything) and all(hs_closure(g, [v]) == everything for v in g.vertices)


def is_simple(g: Graph) -> bool:
    g.require_row_finite("simplicity criterion")
    return is_graded_simple(g) and condition_L(g)


def is_acyclic(g: Graph) -> bool:
    return not cycles(g)


def acyclic_depth(g: Graph) -> dict[str, int]:
    """Longest path from each vertex that avoids cycle vertices except at its end."""
    on_cycle = cycle_vertices(g)
    depth: dict[str, int] = {}

    def visit(v: str) -> int:
        if v in on_cycle:
            return 0
        if v not in depth:
            depth[v] = max((1 + visit(g.range[e]) for e in g.out_edges(v)), default=0)
        return depth[v]

    return {v: visit(v) for v in g.vertices}


# ---------------------------------------------------------------- paths

def paths_from(g: Graph, v: str, max_len: int) -> list[tuple[str, ...]]:
    """All edge sequences from ``v`` of length <= max_len (trivial path included)."""
    out: list[tuple[str, ...]] = [()]
    frontier: list[tuple[tuple[str, ...], str]] = [((), v)]
    for _ in range(max_len):
        nxt = []
        for p, w in frontier:
            for e in g.out_edges(w):
                q = p + (e,)
                out.append(q)
                nxt.append((q, g.range[e]))
        frontier = nxt
    return out


def paths_to_H(g: Graph, v: str, H: Iterable[str]) -> list[Path]:
    """Paths from ``v`` that enter ``H`` exactly at their last vertex."""
    H = frozenset(H)
    if v in H:
        raise GraphError(f"{v} lies in H")
    levels = closure_levels(g, H)
    if v not in levels:
        raise GraphError(f"{v} is outside the hereditary saturated closure of H")
    result: list[Path] = []

    def walk(w: str, edges: tuple[str, ...]):
        for e in g.out_edges(w):
            r = g.range[e]
            if r in H:
                result.append(Path(v, edges + (e,), r))
            else:
                walk(r, edges + (e,))

    walk(v, ())
    return result


def gamma_sets(g: Graph, v: str, H: Iterable[str]) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Outgoing edges of ``v`` split by whether their range avoids or hits ``H``."""
    H = frozenset(H)
    out = g.out_edges(v)
    return (tuple(e for e in out if g.range[e] not in H), tuple(e for e in out if g.range[e] in H))
