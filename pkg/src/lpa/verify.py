"""Invariant battery over a corpus of graphs; one check per acceptance property."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable

from .algebra import LeavittAlgebra, verify_relations
from .centroid import (
    SMapContext,
    acyclic_corner_center,
    comet_centralizer_from_laurent,
    cycle_power_of,
    evaluate,
    laurent_extract,
    omega,
    pi_identity,
    reconstruct_from_value,
    s_collapse,
    seed_space,
    validate_seed,
    diagonal_terms_only,
)
from .classify import Classification, certify, classify
from .graph import Graph, cycles, hereditary_subsets, hs_closure, is_acyclic, is_comet, mt3
from .laurent import LaurentMatrix, LaurentPoly
from .limits import (
    CometMatrixModel,
    MatrixCentralizer,
    corner_embedding,
    corner_tower,
    inverse_limit_stabilize,
    is_central,
    matrix_center,
    sigma_map,
)
from .linalg import rank
from .sampling import WalkSampler

COMET_SAMPLES = ("1", "x", "x^-1", "2*x^3 - x^-2")


@dataclass
class CheckResult:
    criterion: int
    name: str
    ok: bool
    detail: list[str] = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f" ({self.detail[0]})" if self.detail and not self.ok else ""
        return f"[{status}] {self.criterion}. {self.name}: {self.seconds:.2f}s{extra}"

    def to_json(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "ok": self.ok, "detail": self.detail}


Corpus = list[tuple[str, Graph]]


def _row_finite(graphs: Corpus) -> Corpus:
    return [(n, g) for n, g in graphs if g.row_finite]


def _comets(graphs: Corpus) -> Corpus:
    return [(n, g) for n, g in _row_finite(graphs) if is_comet(g)]


def check_conformance(graphs: Corpus, d: int = 3, certificates: dict[str, Classification] | None = None) -> list[str]:
    """Certify every graph; a supplied certificate replaces the freshly computed one."""
    bad = []
    certificates = certificates or {}
    for name, g in graphs:
        cl = certificates.get(name) or classify(g)
        rep = certify(g, cl, d)
        if not rep:
            bad.extend(f"{name}: {f}" for f in rep.failures)
        if g.row_finite and cl.verdict != "NotPrime" and (cl.verdict == "Prime_Laurent") != bool(is_comet(g)):
            bad.append(f"{name}: Laurent verdict disagrees with comet test")
    return bad


def check_relations(graphs: Corpus, triples: int = 300, max_len: int = 4, seed: int = 0) -> list[str]:
    bad = []
    for name, g in _row_finite(graphs):
        alg = LeavittAlgebra(g)
        for r in verify_relations(alg):
            if not r.ok:
                bad.append(f"{name}: relation {r.name} fails at {r.counterexample}")
        smp = WalkSampler(alg, max_len, seed)
        for _ in range(triples):
            x, y, z = smp.element(), smp.element(), smp.element()
            if (x * y) * z != x * (y * z):
                bad.append(f"{name}: associativity fails on {x} | {y} | {z}")
                break
    return bad


def _prime_base(g: Graph) -> str | None:
    for v in g.vertices:
        if hs_closure(g, [v]) == frozenset(g.vertices):
            return v
    return None


def check_centroid_law(graphs: Corpus, pairs: int = 200, d: int = 2, max_len: int = 2, seed: int = 0) -> list[str]:
    bad = []
    for name, g in _row_finite(graphs):
        alg = LeavittAlgebra(g)
        smp = WalkSampler(alg, max_len, seed)
        samples = [(smp.element(), smp.element()) for _ in range(pairs)]
        space = seed_space(alg, d)
        u = _prime_base(g) if mt3(g) else None
        for s in space.basis:
            for x, y in samples:
                txy = evaluate(s, x * y, check=False)
                if not (txy == evaluate(s, x, check=False) * y == x * evaluate(s, y, check=False)):
                    bad.append(f"{name}: centroid law fails for seed {s.to_json()['values']} on {x}, {y}")
                    break
            if u is not None:
                rec = reconstruct_from_value(alg, u, omega(s, u))
                if not rec or rec.seed != s:
                    bad.append(f"{name}: seed is not determined by its value at {u}")
                    continue
                for x, _ in samples:
                    if evaluate(rec.seed, x, check=False) != evaluate(s, x, check=False):
                        bad.append(f"{name}: seeds equal on vertices differ on {x}")
                        break
    return bad


def check_comet_construction(graphs: Corpus, seed: int = 0) -> list[str]:
    bad = []
    polys = [LaurentPoly.parse(p) for p in COMET_SAMPLES]
    for name, g in _comets(graphs):
        alg = LeavittAlgebra(g)
        base = is_comet(g).cycle
        seeds = {}
        for p in polys:
            s = comet_centralizer_from_laurent(alg, p)
            seeds[p] = s
            if not validate_seed(s):
                bad.append(f"{name}: seed for {p} is invalid")
                continue
            ex = laurent_extract(alg, base, omega(s, base.base))
            if not ex or ex.poly != p:
                bad.append(f"{name}: omega/laurent_extract returns {ex.poly or ex.offending} for {p}")
        smp = WalkSampler(alg, 2, seed)
        xs = [smp.element() for _ in range(10)]
        for p, q in product(polys, repeat=2):
            pq = comet_centralizer_from_laurent(alg, p * q)
            if pq != seeds[p].compose(seeds[q]):
                bad.append(f"{name}: p -> tau not multiplicative at ({p}) * ({q})")
            for x in xs:
                if evaluate(pq, x) != evaluate(seeds[p], evaluate(seeds[q], x)):
                    bad.append(f"{name}: composite differs on {x}")
                    break
    return bad


def check_s_collapse(graphs: Corpus, walks: int = 100, max_len: int = 4, seed: int = 0) -> list[str]:
    bad = []
    for name, g in _row_finite(graphs):
        cs = cycles(g)
        if not cs:
            continue
        alg = LeavittAlgebra(g)
        smp = WalkSampler(alg, max_len, seed)
        for c in cs:
            ctx = SMapContext(alg, c)
            for _ in range(walks):
                w = smp.corner_walk(c.base)
                out = s_collapse(ctx, w)
                if out.kind == "survives":
                    bad.append(f"{name}: walk {w} survives S along {c}")
                elif out.kind == "collapses":
                    cur = w
                    for _ in range(out.steps):
                        cur = alg.walk_product(alg.walk_product(ctx.cstar_key, cur), ctx.c_key)
                    if cycle_power_of(ctx, cur) != out.power:
                        bad.append(f"{name}: collapse of {w} is not the reported cycle power")
    return bad


def check_pi_identity(graphs: Corpus, max_vertices: int = 8) -> list[str]:
    bad = []
    for name, g in _row_finite(graphs):
        if len(g.vertices) > max_vertices:
            continue
        alg = LeavittAlgebra(g)
        for H in hereditary_subsets(g):
            for v in hs_closure(g, H) - H:
                if pi_identity(alg, v, H) != alg.vertex(v):
                    bad.append(f"{name}: Pi identity fails at v={v}, H={sorted(H)}")
    return bad


def check_limits(max_n: int = 3, d: int = 3, stages: int = 5) -> list[str]:
    bad = []
    rep = inverse_limit_stabilize(corner_tower(stages), min(d, 2))
    if not rep.stabilized or rep.limit != "K[x,x^-1]":
        bad.append(f"corner tower: {rep.to_json()}")
    emb = {(a, b): corner_embedding(a, b) for a in range(1, 5) for b in range(a, 5)}
    for a, b, c in combinations(range(1, 5), 3):
        direct = emb[(a, b)].compose(emb[(b, c)])
        for k in range(-d, d + 1):
            tau = MatrixCentralizer.scalar(c, LaurentPoly.monomial(k, 2) + 1)
            two_step = sigma_map(emb[(a, b)], sigma_map(emb[(b, c)], tau))
            if two_step != sigma_map(direct, tau):
                bad.append(f"sigma composition fails on {a}->{b}->{c} for {tau.parameter}")
    for n in range(1, max_n + 1):
        for k in range(0, d + 1):
            try:
                center = matrix_center(n, k)
            except AssertionError as exc:
                bad.append(str(exc))
                continue
            if center.dimension != 2 * k + 1:
                bad.append(f"center of M_{n} at degree {k} has dimension {center.dimension}")
            for z in center.basis:
                if z.scalar_value() is None or not is_central(z)[0]:
                    bad.append(f"non-scalar or non-central {z}")
    return bad


def check_comet_iso(graphs: Corpus, pairs: int = 200, max_len: int = 3, seed: int = 0) -> list[str]:
    bad = []
    polys = [LaurentPoly.parse(p) for p in COMET_SAMPLES]
    for name, g in _comets(graphs):
        alg = LeavittAlgebra(g)
        phi = CometMatrixModel(alg)
        smp = WalkSampler(alg, max_len, seed)
        for _ in range(pairs):
            x, y = smp.element(), smp.element()
            if phi(x * y) != phi(x) * phi(y):
                bad.append(f"{name}: not multiplicative on {x}, {y}")
                break
            if phi(x.star()) != phi(x).conjugate_transpose():
                bad.append(f"{name}: involution not intertwined on {x}")
                break
        keys = alg.all_keys(3)
        rows = []
        for k in keys:
            m = phi(alg.element({k: 1}))
            row = {}
            for i, r in enumerate(m.rows):
                for j, p in enumerate(r):
                    for e, cf in p.coeffs.items():
                        row[((i * phi.size + j) * 1000) + e + 500] = cf
            rows.append(row)
        if rank(rows) != len(keys):
            bad.append(f"{name}: not injective on the degree <= 3 basis")
        base = phi.position[()]
        for p in polys:
            s = comet_centralizer_from_laurent(alg, p)
            corner = LaurentMatrix.unit(phi.size, base, base, p)
            if phi(omega(s, phi.base)) != corner:
                bad.append(f"{name}: image of tau(v0) for {p} is {phi(omega(s, phi.base))}")
            if phi(evaluate(s, alg.one())) != LaurentMatrix.identity(phi.size, p):
                bad.append(f"{name}: tau(1) does not map to ({p}) I")
    return bad


def check_acyclic_corners(graphs: Corpus) -> list[str]:
    bad = []
    for name, g in _row_finite(graphs):
        if not is_acyclic(g):
            continue
        alg = LeavittAlgebra(g)
        prime = mt3(g)
        for u in g.vertices:
            basis = acyclic_corner_center(alg, u)
            if prime:
                if len(basis) != 1 or set(basis[0].terms) != {((), (), u)}:
                    bad.append(f"{name}: center of the corner at {u} is not Q.{u}: {[str(z) for z in basis]}")
            elif not all(diagonal_terms_only(z) for z in basis):
                bad.append(f"{name}: non-diagonal central element at {u}")
    return bad


CRITERIA: list[tuple[int, str, Callable[..., list[str]]]] = [
    (1, "classification conformance", lambda gs, seed, certs=None: check_conformance(gs, certificates=certs)),
    (2, "relations and associativity", lambda gs, seed: check_relations(gs, seed=seed)),
    (3, "centroid law and uniqueness", lambda gs, seed: check_centroid_law(gs, seed=seed)),
    (4, "constructive comet centroid", lambda gs, seed: check_comet_construction(gs, seed=seed)),
    (5, "S-map collapse", lambda gs, seed: check_s_collapse(gs, seed=seed)),
    (6, "Pi identity", lambda gs, seed: check_pi_identity(gs)),
    (7, "limits", lambda gs, seed: check_limits()),
    (8, "comet isomorphism", lambda gs, seed: check_comet_iso(gs, seed=seed)),
    (9, "acyclic corners", lambda gs, seed: check_acyclic_corners(gs)),
]


def run_check(criterion: int, graphs: Corpus, seed: int = 0, certificates=None) -> CheckResult:
    num, name, fn = CRITERIA[criterion - 1]
    t0 = time.perf_counter()
    try:
        bad = fn(graphs, seed, certificates) if certificates else fn(graphs, seed)
    except Exception as exc:  # a crash is a failed check, reported by name
        bad = [f"{type(exc).__name__}: {exc}"]
    return CheckResult(num, name, not bad, bad, time.perf_counter() - t0)


def run_battery(graphs: Corpus, seed: int = 0, certificates=None) -> list[CheckResult]:
    return [run_check(n, graphs, seed, certificates if n == 1 else None) for n, _, _ in CRITERIA]
