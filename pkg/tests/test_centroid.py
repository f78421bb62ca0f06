from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from lpa import families as fam
from lpa.algebra import Element, LeavittAlgebra, in_corner
from lpa.centroid import (
    CentralizerSeed,
    SMapContext,
    SeedError,
    acyclic_corner_center,
    collapse_bound,
    comet_centralizer_from_laurent,
    commutant_center,
    corner_center_decompose,
    descent_violations,
    diagonal_terms_only,
    evaluate,
    gamma_dichotomy_violations,
    laurent_extract,
    omega,
    path_membership_checks,
    pi_identity,
    reconstruct_from_value,
    s_apply,
    s_collapse,
    seed_dims,
    seed_space,
    truncation_budgets,
    validate_seed,
)
from lpa.classify import classify
from lpa.graph import Graph, cycles, hereditary_subsets, hs_closure, is_comet, mt3
from lpa.laurent import LaurentPoly
from lpa.linalg import rank
from lpa.sampling import WalkSampler

X = LaurentPoly.monomial(1)


def A(g):
    return LeavittAlgebra(g)


def seed(alg, **values):
    return CentralizerSeed(alg, {v: alg.parse(t) for v, t in values.items()})


# ---------------------------------------------------------------- validation and evaluation

def test_scalar_seed_is_valid():
    for g in (fam.loop(), fam.toeplitz(), fam.E(2), fam.diamond()):
        assert validate_seed(CentralizerSeed.scalar(A(g), Fraction(5, 2)))


def test_loop_seed_c_is_valid():
    alg = A(fam.loop())
    assert validate_seed(seed(alg, v="c"))


def test_toeplitz_seed_fails_at_exit():
    alg = A(fam.toeplitz())
    res = validate_seed(seed(alg, u="c", w="w"))
    assert not res and res.edge == "e"


def test_value_outside_corner_raises():
    alg = A(fam.toeplitz())
    with pytest.raises(SeedError):
        validate_seed(seed(alg, u="e", w="w"))


def test_evaluate_examples():
    alg = A(fam.toeplitz())
    x = alg.parse("3*c.e~e - 1/2*e~ + w")
    assert evaluate(CentralizerSeed.scalar(alg, 3), x) == x.scale(3)
    loop = A(fam.loop())
    assert evaluate(seed(loop, v="c"), loop.parse("~c")) == loop.vertex("v")


def test_evaluate_rejects_invalid_seed():
    alg = A(fam.toeplitz())
    with pytest.raises(SeedError):
        evaluate(seed(alg, u="c", w="w"), alg.vertex("u"))


# ---------------------------------------------------------------- seed spaces

@pytest.mark.parametrize(
    "graph, d, dim",
    [
        (fam.rose(2), 3, 1),
        (fam.loop(), 3, 7),
        (fam.E(2), 3, 1),
        (fam.comet_A(3), 3, 7),
        (fam.toeplitz(), 3, 1),
        (fam.truncated_tail(3), 2, 5),
        (fam.cycle2_comet(), 2, 5),
        (fam.fan(2), 2, 2),
        (fam.two_sinks(), 2, 2),
        (Graph.build(["a", "b"], [("c", "a", "a"), ("d", "b", "b")]), 2, 10),
    ],
)
def test_seed_space_dimensions(graph, d, dim):
    space = seed_space(A(graph), d)
    assert space.dimension == dim
    assert all(validate_seed(s) for s in space.basis)


def test_loop_dimension_is_2d_plus_1():
    alg = A(fam.loop())
    assert [seed_space(alg, d).dimension for d in range(6)] == [1, 3, 5, 7, 9, 11]


def test_literal_truncation_undercounts_tails():
    # |alpha|, |beta| <= d at every vertex misses c^k at the top of a tail
    alg = A(fam.comet_A(3))
    literal = {v: 3 for v in alg.graph.vertices}
    assert seed_space(alg, 3, literal).dimension == 3
    assert seed_space(alg, 3).dimension == 7
    assert truncation_budgets(alg.graph, 3) == {"v1": 5, "v2": 4, "v3": 3}


def test_budget_uses_cycle_length():
    g = fam.cycle2_comet()
    assert truncation_budgets(g, 2) == {"t": 5, "u": 4, "v": 4}


def _same_space(alg, space, central):
    """Seed totals sum_v tau(v) and commutant vectors span the same space."""
    idx = {}

    def row(x: Element):
        return {idx.setdefault(k, len(idx)): c for k, c in x.terms.items()}

    totals = [sum((s.values[v] for v in alg.graph.vertices), alg.zero()) for s in space.basis]
    a, b = [row(x) for x in totals], [row(x) for x in central]
    return rank(a) == rank(b) == rank(a + b) == len(a)


@pytest.mark.parametrize(
    "graph",
    [fam.loop(), fam.rose(2), fam.toeplitz(), fam.comet_A(3), fam.E(1), fam.E(2), fam.diamond(), fam.fan(2), fam.cycle2_comet(), fam.truncated_tail(3)],
)
@pytest.mark.parametrize("d", [1, 2, 3])
def test_seed_space_matches_commutant_oracle(graph, d):
    alg = A(graph)
    space = seed_space(alg, d)
    central = commutant_center(alg, space.budgets)
    assert len(central) == space.dimension
    assert _same_space(alg, space, central)


@st.composite
def mt3_graphs(draw):
    n = draw(st.integers(1, 4))
    vs = [f"v{i}" for i in range(n)]
    m = draw(st.integers(0, 5))
    edges = [(f"e{j}", draw(st.sampled_from(vs)), draw(st.sampled_from(vs))) for j in range(m)]
    return Graph.build(vs, edges)


@given(mt3_graphs())
@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
def test_seed_dims_agree_with_classification(g):
    if not mt3(g):
        return
    cl = classify(g)
    sd = seed_dims(A(g), 2)
    if cl.centroid == "K[x,x^-1]":
        assert sd.dims == {2: 5, 3: 7}
    else:
        assert sd.dims == {2: 1, 3: 1}
    assert sd.stable


def test_seed_dims_reports_model():
    assert seed_dims(A(fam.loop()), 3).model == "K[x,x^-1]"
    assert seed_dims(A(fam.rose(2)), 3).model == "K"
    assert not seed_dims(A(fam.fan(2)), 2).stable


def test_seed_json_has_basis_header():
    doc = seed_space(A(fam.rose(2)), 1).basis[0].to_json()
    assert doc["basis"] == {"v": "f"}
    assert doc["values"] == {"v": "1*v"}


# ---------------------------------------------------------------- corner centers

def test_decompose_scalar():
    alg = A(fam.diamond())
    dec = corner_center_decompose(alg, alg.vertex("a").scale(3), "a")
    assert dec.k == 3 and all(not x for x in dec.xi.values())


def test_decompose_fan_vertex():
    alg = A(fam.fan(2))
    dec = corner_center_decompose(alg, alg.vertex("v").scale(2), "v")
    assert dec.k == 2 and set(dec.xi) == {"f1", "f2"} and not any(dec.xi.values())


def test_decompose_two_level_acyclic():
    g = Graph.build(["t", "v", "w1", "w2"], [("a", "t", "v"), ("f1", "v", "w1"), ("f2", "v", "w2")])
    alg = A(g)
    for z in acyclic_corner_center(alg, "t"):
        dec = corner_center_decompose(alg, z, "t", d=3)
        assert dec.reconstruct(alg) == z
        for f, xi in dec.xi.items():
            r = g.range[f]
            assert in_corner(xi, r) or not xi
            for b in alg.corner_basis(r, 2):
                assert xi * b == b * xi


def test_decompose_rejects_cycle_vertex_and_noncentral():
    alg = A(fam.toeplitz())
    with pytest.raises(SeedError):
        corner_center_decompose(alg, alg.vertex("u"), "u")
    # two parallel edges: vLv is a full 2x2 matrix algebra
    par = A(Graph.build(["v", "w"], [("a", "v", "w"), ("b", "v", "w")]))
    with pytest.raises(SeedError):
        corner_center_decompose(par, par.parse("a~b"), "v")


def test_acyclic_corner_examples():
    g = fam.chain(2)
    alg = A(g)
    (z,) = acyclic_corner_center(alg, "v1")
    assert set(z.terms) == {((), (), "v1")}
    # v1 = e1 e1* in the algebra, and the basis records it as v1
    assert alg.walk(("e1",), ("e1",)) == alg.vertex("v1")
    diamond = A(fam.diamond())
    for u in "abcd":
        (z,) = acyclic_corner_center(diamond, u)
        assert set(z.terms) == {((), (), u)}


def test_acyclic_corner_non_mt3_is_diagonal():
    alg = A(fam.fan(2))
    basis = acyclic_corner_center(alg, "v")
    assert len(basis) == 2
    assert all(diagonal_terms_only(z) for z in basis)


def test_acyclic_corner_requires_acyclic():
    with pytest.raises(SeedError):
        acyclic_corner_center(A(fam.loop()), "v")


# ---------------------------------------------------------------- S-map

def test_s_collapse_loop_example():
    alg = A(fam.loop())
    (c,) = cycles(alg.graph)
    out = s_collapse(SMapContext(alg, c), (("c", "c"), ("c", "c", "c")))
    assert (out.kind, out.steps, out.power) == ("collapses", 2, -1)


def test_s_collapse_vertex():
    alg = A(fam.toeplitz())
    (c,) = cycles(alg.graph)
    ctx = SMapContext(alg, c)
    assert s_apply(ctx, alg.vertex("u")) == alg.vertex("u")
    out = s_collapse(ctx, ((), (), "u"))
    assert (out.kind, out.steps, out.power) == ("collapses", 0, 0)


def test_s_collapse_rose_dies():
    alg = A(fam.rose(2))
    c = next(c for c in cycles(alg.graph) if c.edges == ("e",))
    out = s_collapse(SMapContext(alg, c), (("f",), ("f",)))
    assert (out.kind, out.steps) == ("dies", 1)


def test_s_apply_is_linear_and_matches_product():
    alg = A(fam.toeplitz())
    (c,) = cycles(alg.graph)
    ctx = SMapContext(alg, c)
    smp = WalkSampler(alg, 3, seed=1)
    for _ in range(50):
        x, y = smp.corner_element("u"), smp.corner_element("u")
        assert s_apply(ctx, x + y) == s_apply(ctx, x) + s_apply(ctx, y)
        assert s_apply(ctx, x) == alg.parse("~c") * x * alg.parse("c")


def test_s_apply_outside_corner():
    alg = A(fam.toeplitz())
    (c,) = cycles(alg.graph)
    with pytest.raises(SeedError):
        s_apply(SMapContext(alg, c), alg.vertex("w"))
    with pytest.raises(SeedError):
        s_collapse(SMapContext(alg, c), ((), (), "w"))


@pytest.mark.parametrize("graph", [fam.loop(), fam.rose(2), fam.toeplitz(), fam.E(2), fam.cycle2_comet(), fam.truncated_tail(2)])
@given(seed_=st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_s_collapse_terminates(graph, seed_):
    alg = A(graph)
    smp = WalkSampler(alg, 5, seed_)
    for c in cycles(graph):
        ctx = SMapContext(alg, c)
        w = smp.corner_walk(c.base)
        out = s_collapse(ctx, w)
        assert out.kind in ("dies", "collapses")
        assert out.steps <= collapse_bound(w) + 1
        if out.kind == "collapses":
            assert out.first_path_step is not None and out.first_path_step <= out.steps


# ---------------------------------------------------------------- Laurent values and comet seeds

def test_laurent_extract_examples():
    alg = A(fam.loop())
    (c,) = cycles(alg.graph)
    assert laurent_extract(alg, c, alg.parse("2*c + 3*~c")).poly == LaurentPoly.parse("2*x + 3*x^-1")
    assert laurent_extract(alg, c, alg.vertex("v")).poly == LaurentPoly.const(1)
    t = A(fam.toeplitz())
    (ct,) = cycles(t.graph)
    bad = laurent_extract(t, ct, t.parse("c~c + c"))
    assert not bad and bad.offending == "1*c~c"


def test_loop_seed_space_values_are_laurent():
    alg = A(fam.loop())
    (c,) = cycles(alg.graph)
    polys = [laurent_extract(alg, c, s.values["v"]).poly for s in seed_space(alg, 3).basis]
    assert all(p is not None for p in polys)
    assert sorted(e for p in polys for e in p.support) == list(range(-3, 4))


def test_comet_seed_examples():
    loop = A(fam.loop())
    s = comet_centralizer_from_laurent(loop, X)
    assert s.values == {"v": loop.parse("c")}
    a2 = A(fam.comet_A(2))
    s2 = comet_centralizer_from_laurent(a2, X)
    assert s2.values["v2"] == a2.parse("c")
    assert s2.values["v1"] == a2.parse("e.c~e")
    assert validate_seed(s2)
    for g in (fam.comet_A(3), fam.cycle2_comet()):
        alg = A(g)
        assert comet_centralizer_from_laurent(alg, LaurentPoly.const(1)) == CentralizerSeed.scalar(alg, 1)


def test_comet_seed_rejects_non_comet():
    with pytest.raises(SeedError):
        comet_centralizer_from_laurent(A(fam.rose(2)), X)


def test_comet_seed_on_two_cycle():
    alg = A(fam.cycle2_comet())
    s = comet_centralizer_from_laurent(alg, X)
    assert validate_seed(s)
    assert s.values["u"] == alg.parse("a.b")
    assert s.values["v"] == alg.parse("b.a")
    assert s.values["t"] == alg.parse("g.a.b~g")


laurent_polys = st.dictionaries(st.integers(-3, 3), st.integers(-4, 4), max_size=3).map(LaurentPoly)


@given(p=laurent_polys, q=laurent_polys)
@settings(max_examples=40, deadline=None)
def test_comet_seed_map_is_injective_ring_map(p, q):
    alg = A(fam.comet_A(3))
    base = is_comet(alg.graph).cycle
    sp, sq = comet_centralizer_from_laurent(alg, p), comet_centralizer_from_laurent(alg, q)
    assert validate_seed(sp)
    assert laurent_extract(alg, base, omega(sp, base.base)).poly == p
    assert comet_centralizer_from_laurent(alg, p * q) == sp.compose(sq)
    assert comet_centralizer_from_laurent(alg, p + q) == sp + sq
    assert (sp == sq) == (p == q)


def test_reconstruct_matches_comet_seed():
    alg = A(fam.loop())
    rec = reconstruct_from_value(alg, "v", alg.parse("c.c"))
    assert rec and rec.seed == comet_centralizer_from_laurent(alg, X * X)


@pytest.mark.parametrize("graph", [fam.comet_A(3), fam.truncated_tail(3), fam.E(2), fam.rose(2), fam.cycle2_comet()])
def test_reconstruct_inverts_omega(graph):
    alg = A(graph)
    for u in graph.vertices:
        if hs_closure(graph, [u]) != frozenset(graph.vertices):
            continue
        for s in seed_space(alg, 2).basis:
            rec = reconstruct_from_value(alg, u, omega(s, u))
            assert rec and rec.seed == s
            assert omega(rec.seed, u) == omega(s, u)


def test_reconstruct_reports_path_witness():
    alg = A(fam.rose(2))
    rec = reconstruct_from_value(alg, "v", alg.edge("e"))
    assert not rec
    assert rec.witness == ((), ("f",))


def test_reconstruct_preconditions():
    with pytest.raises(SeedError):
        reconstruct_from_value(A(fam.fan(2)), "v", A(fam.fan(2)).vertex("v"))
    t = A(fam.toeplitz())
    with pytest.raises(SeedError):
        reconstruct_from_value(t, "w", t.vertex("w"))


# ---------------------------------------------------------------- simple graphs and lemma checks

def test_path_membership_rose():
    rep = path_membership_checks(A(fam.rose(2)), "v", 3)
    assert rep.dimension == 1 and rep.scalar_values


def test_path_membership_complete_graph():
    g = Graph.build(["a", "b"], [("la", "a", "a"), ("lb", "b", "b"), ("ab", "a", "b"), ("ba", "b", "a")])
    for u in "ab":
        assert path_membership_checks(A(g), u, 3).scalar_values


def test_path_membership_refuses_comet():
    with pytest.raises(SeedError):
        path_membership_checks(A(fam.comet_A(2)), "v1")


@pytest.mark.parametrize("graph", [fam.toeplitz(), fam.E(2), fam.diamond(), fam.truncated_tail(3), fam.cycle2_comet(), fam.fan(2)])
def test_pi_identity(graph):
    alg = A(graph)
    checked = 0
    for H in hereditary_subsets(graph):
        for v in hs_closure(graph, H) - H:
            assert pi_identity(alg, v, H) == alg.vertex(v)
            checked += 1
    if graph not in (fam.fan(2), fam.toeplitz()):
        assert checked > 0


@pytest.mark.parametrize("graph", [fam.comet_A(3), fam.truncated_tail(3), fam.fan(2), fam.E(2), fam.diamond(), fam.cycle2_comet()])
def test_partial_B_descends_along_tails(graph):
    alg = A(graph)
    for s in seed_space(alg, 2).basis:
        assert descent_violations(s) == []


def test_descent_sees_nonscalar_tail_values():
    alg = A(fam.comet_A(3))
    s = comet_centralizer_from_laurent(alg, X)
    assert s.values["v1"] == alg.parse("e1.e2.c~e1.e2")
    assert descent_violations(s) == []


@pytest.mark.parametrize("graph, H", [(fam.E(2), {"vm1"}), (fam.E(3), {"vm1"}), (fam.toeplitz(), {"w"})])
def test_gamma_dichotomy_on_prime_graphs(graph, H):
    alg = A(graph)
    for s in seed_space(alg, 3).basis:
        assert gamma_dichotomy_violations(s, H) == []


def test_gamma_dichotomy_needs_primeness():
    alg = A(fam.fan(2))
    # f2 f2* = v - f1 f1* in normal form, so k = 1, xi_f1 = -w1, xi_f2 = 0
    s = seed(alg, v="f2~f2", w1="0*w1", w2="w2")
    assert validate_seed(s)
    assert gamma_dichotomy_violations(s, {"w1"}) == [("v", "f2", "f1")]
