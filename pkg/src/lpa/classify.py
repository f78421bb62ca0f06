"""Centroid classification of L_Q(E) with self-contained, re-checkable certificates."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path as FsPath

from .algebra import LeavittAlgebra
from .centroid import seed_dims
from .graph import (
    Graph,
    GraphError,
    common_descendant,
    condition_L,
    cycle_exits,
    cycles,
    is_comet,
    is_graded_simple,
    is_simple,
    mt3_witness,
    parse_graph,
    reaches,
    tree,
    vertex_kinds,
)

VERDICTS = ("NotPrime", "Simple_K", "Prime_K", "Prime_Laurent", "Unsupported")
BRANCHES = ("Acyclic", "CycleWithExits", "InfiniteEmitter", "UniqueNoExitCycle_NonComet", "Comet")
CERTIFY_MAX_VERTICES = 10


@dataclass
class Classification:
    verdict: str
    branch: str | None
    certificate: dict
    centroid: str | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "branch": self.branch,
            "centroid": self.centroid,
            "certificate": self.certificate,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Classification":
        return cls(doc["verdict"], doc.get("branch"), dict(doc.get("certificate") or {}), doc.get("centroid"))


def topological_order(g: Graph, vertices) -> list[str] | None:
    """Order of ``vertices`` with every edge between them pointing forward, or None."""
    vs = set(vertices)
    indeg = {v: 0 for v in vs}
    for e in g.edges:
        if g.source[e] in vs and g.range[e] in vs:
            indeg[g.range[e]] += 1
    ready = [v for v in g.vertices if v in vs and indeg[v] == 0]
    out = []
    while ready:
        v = ready.pop(0)
        out.append(v)
        for e in g.out_edges(v):
            w = g.range[e]
            if w in vs:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
    return out if len(out) == len(vs) else None


def mt3_bounds(g: Graph) -> dict[str, str]:
    return {f"{v}|{w}": common_descendant(g, v, w) for v, w in combinations(g.vertices, 2)}


def properties(g: Graph) -> dict:
    kinds = vertex_kinds(g)
    cs = cycles(g)
    props = {
        "vertices": len(g.vertices),
        "edges": len(g.edges),
        "row_finite": g.row_finite,
        "sinks": list(kinds.sinks),
        "regular": list(kinds.regular),
        "inf_emitters": list(kinds.inf_emitters),
        "cycles": [
            {"cycle": list(c.edges), "base": c.base, "exits": [[v, e] for v, e in cycle_exits(g, c)]}
            for c in cs
        ],
        "acyclic": not cs,
        "condition_L": condition_L(g),
        "mt3": mt3_witness(g) is None,
    }
    if g.row_finite:
        props["comet"] = bool(is_comet(g))
        props["graded_simple"] = is_graded_simple(g)
        props["simple"] = is_simple(g)
    else:
        props["comet"] = props["graded_simple"] = props["simple"] = None
    return props


def classify(g: Graph) -> Classification:
    witness = mt3_witness(g)
    if witness is not None:
        v, w = witness
        return Classification("NotPrime", None, {"mt3_witness": [v, w]})
    cert: dict = {"mt3_bounds": mt3_bounds(g)}
    cs = cycles(g)
    if not cs:
        cert["topological_order"] = topological_order(g, g.vertices)
        return _prime_k(g, "Acyclic", cert)
    for c in cs:
        exits = cycle_exits(g, c)
        if exits:
            v, e = exits[0]
            cert["cycle"] = list(c.edges)
            cert["exit"] = {"vertex": v, "edge": e}
            return _prime_k(g, "CycleWithExits", cert)
    if g.inf_emitters:
        cert["emitter"] = g.sorted_vertices(g.inf_emitters)[0]
        return _prime_k(g, "InfiniteEmitter", cert)
    test = is_comet(g)
    if test:
        c = test.cycle
        cert["cycle"] = list(c.edges)
        cert["base"] = c.base
        cert["tail_order"] = topological_order(g, [v for v in g.vertices if v not in c.vertex_set])
        return Classification("Prime_Laurent", "Comet", cert, "K[x,x^-1]")
    # Unreachable for finite graphs: MT3 plus a unique no-exit cycle forces every
    # vertex to reach it.  Kept so the decision tree stays total.
    no_exit = [c for c in cs if not cycle_exits(g, c)]
    cert["cycle"] = list(no_exit[0].edges)
    cert["reason"] = test.reason
    return Classification("Prime_K", "UniqueNoExitCycle_NonComet", cert, "K")


def _prime_k(g: Graph, branch: str, cert: dict) -> Classification:
    if g.row_finite and is_simple(g):
        return Classification("Simple_K", branch, cert, "K")
    return Classification("Prime_K", branch, cert, "K")


# ---------------------------------------------------------------- certification

@dataclass
class CertifyReport:
    ok: bool
    failures: list[str] = field(default_factory=list)
    seed_dims: dict[int, int] | None = None
    stable: bool | None = None

    def __bool__(self):
        return self.ok


def _check_cycle(g: Graph, edges) -> str | None:
    edges = list(edges or [])
    if not edges or any(not g.is_edge(e) for e in edges):
        return "cycle uses unknown edges"
    for a, b in zip(edges, edges[1:] + edges[:1]):
        if g.range[a] != g.source[b]:
            return "cycle edges do not chain"
    sources = [g.source[e] for e in edges]
    if len(set(sources)) != len(sources):
        return "cycle repeats a vertex"
    return None


def _check_certificate(g: Graph, cl: Classification) -> list[str]:
    cert = cl.certificate
    bad = []
    if cl.verdict == "NotPrime":
        v, w = cert.get("mt3_witness", (None, None))
        if not (g.is_vertex(v) and g.is_vertex(w)):
            return ["MT3 witness names unknown vertices"]
        if tree(g, [v]) & tree(g, [w]):
            bad.append(f"MT3 witness ({v},{w}) has a common descendant")
        return bad
    bounds = cert.get("mt3_bounds", {})
    for v, w in combinations(g.vertices, 2):
        u = bounds.get(f"{v}|{w}")
        if u is None or not g.is_vertex(u) or not (reaches(g, v, u) and reaches(g, w, u)):
            bad.append(f"no valid MT3 bound for ({v},{w})")
    if cl.branch == "Acyclic":
        order = cert.get("topological_order") or []
        pos = {v: i for i, v in enumerate(order)}
        if sorted(pos) != sorted(g.vertices) or any(pos[g.source[e]] >= pos[g.range[e]] for e in g.edges):
            bad.append("topological order is invalid")
    elif cl.branch == "CycleWithExits":
        why = _check_cycle(g, cert.get("cycle"))
        if why:
            bad.append(why)
        else:
            ex = cert.get("exit") or {}
            v, e = ex.get("vertex"), ex.get("edge")
            cyc = cert["cycle"]
            on = {g.source[x]: x for x in cyc}
            if v not in on:
                bad.append(f"exit vertex {v} is not on the cycle")
            elif e is None:
                if v not in g.inf_emitters:
                    bad.append(f"exit at {v} has no edge and {v} is not an infinite emitter")
            elif not g.is_edge(e) or g.source[e] != v or e == on[v]:
                bad.append(f"edge {e} is not an exit of the cycle at {v}")
    elif cl.branch == "InfiniteEmitter":
        if cert.get("emitter") not in g.inf_emitters:
            bad.append("certified emitter is not flagged")
    elif cl.branch == "Comet":
        why = _check_cycle(g, cert.get("cycle"))
        if why:
            return bad + [why]
        if g.inf_emitters:
            bad.append("comet certificate on a flagged graph")
        cyc = set(cert["cycle"])
        cverts = {g.source[e] for e in cyc}
        for v in cverts:
            if any(e not in cyc for e in g.out_edges(v)):
                bad.append(f"cycle has an exit at {v}")
        order = cert.get("tail_order") or []
        pos = {v: i for i, v in enumerate(order)}
        if sorted(pos) != sorted(set(g.vertices) - cverts):
            bad.append("tail order does not list the non-cycle vertices")
        else:
            for v in order:
                outs = g.out_edges(v)
                if not outs:
                    bad.append(f"tail vertex {v} is a sink")
                for e in outs:
                    w = g.range[e]
                    if w not in cverts and pos[w] <= pos[v]:
                        bad.append(f"tail edge {e} points backwards")
    return bad


def certify(g: Graph, cl: Classification, d: int = 3) -> CertifyReport:
    """Re-check the certificate and, for small row-finite graphs, the seed-space dimensions."""
    failures = _check_certificate(g, cl)
    fresh = classify(g)
    if (fresh.verdict, fresh.branch) != (cl.verdict, cl.branch):
        failures.append(f"verdict {cl.verdict}/{cl.branch} disagrees with {fresh.verdict}/{fresh.branch}")
    dims = stable = None
    if g.row_finite and len(g.vertices) <= CERTIFY_MAX_VERTICES and cl.verdict != "NotPrime":
        sd = seed_dims(LeavittAlgebra(g), d)
        dims = sd.dims
        expected = {k: (2 * k + 1 if cl.centroid == "K[x,x^-1]" else 1) for k in dims}
        stable = sd.stable
        for k, n in dims.items():
            if n != expected[k]:
                failures.append(f"seed space has dimension {n} at degree {k}, expected {expected[k]}")
    return CertifyReport(not failures, failures, dims, stable)


# ---------------------------------------------------------------- corpus

def analyze_row(name: str, g: Graph, d: int = 3, do_certify: bool = True) -> dict:
    cl = classify(g)
    row = {"graph": name, "properties": properties(g)}
    row.update(cl.to_dict())
    if do_certify:
        rep = certify(g, cl, d)
        row.update(
            certified=rep.ok,
            failures=rep.failures,
            seed_dims={str(k): v for k, v in rep.seed_dims.items()} if rep.seed_dims else None,
            stable=rep.stable,
        )
    return row


def corpus_run(directory, d: int = 3, do_certify: bool = True, timings: bool = False) -> list[dict]:
    """One row per ``*.graph`` file, sorted by filename; unreadable files become error rows."""
    rows = []
    for path in sorted(FsPath(directory).glob("*.graph"), key=lambda p: p.name):
        t0 = time.perf_counter()
        try:
            g = parse_graph(path.read_text(encoding="utf-8"))
            row = analyze_row(path.stem, g, d, do_certify)
        except (OSError, UnicodeDecodeError, GraphError) as exc:
            row = {"graph": path.stem, "error": str(exc)}
        if timings:
            row["time_ms"] = round(1000 * (time.perf_counter() - t0), 1)
        rows.append(row)
    return rows
