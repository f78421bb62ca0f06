from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lpa import families as fam
from lpa.algebra import (
    ElementParseError,
    EngineError,
    LeavittAlgebra,
    corner_project,
    format_element,
    grade,
    involution,
    multiply,
    parse_element,
    parse_expression,
    partial_B,
    verify_relations,
)
from lpa.graph import Graph, GraphError, paths_from
from lpa.sampling import WalkSampler

TEST_GRAPHS = {
    "loop": fam.loop(),
    "rose2": fam.rose(2),
    "toeplitz": fam.toeplitz(),
    "comet_A3": fam.comet_A(3),
    "E_2": fam.E(2),
    "diamond": fam.diamond(),
}


def alg_of(name):
    return LeavittAlgebra(TEST_GRAPHS[name])


# ---------------------------------------------------------------- independent oracles

def acyclic_matrix_image(alg: LeavittAlgebra, x):
    """For acyclic graphs: alpha beta* -> sum over paths lam from r(alpha) to a sink of E(alpha lam, beta lam).

    Built from the raw walks of ``x`` without the engine's normal form; the map
    is an isomorphism onto a product of full matrix algebras indexed by sinks.
    """
    g = alg.graph
    to_sink = {}
    for v in g.vertices:
        to_sink[v] = [p for p in paths_from(g, v, len(g.vertices)) if not g.out_edges(g.range[p[-1]] if p else v)]
    out = {}
    for (a, b, w), c in x.terms.items():
        sa = g.source[a[0]] if a else w
        sb = g.source[b[0]] if b else w
        for lam in to_sink[w]:
            # paths carry their source so trivial paths at different sinks stay distinct
            key = ((sa, a + lam), (sb, b + lam))
            out[key] = out.get(key, 0) + c
    return {k: v for k, v in out.items() if v}


def matmul_sparse(x, y):
    out = {}
    for (p, q), c in x.items():
        for (r, s), d in y.items():
            if q == r:
                out[(p, s)] = out.get((p, s), 0) + c * d
    return {k: v for k, v in out.items() if v}


def loop_laurent(x):
    """Single-loop graph: c^a (c^b)* -> x^(a-b)."""
    out = {}
    for (a, b, _), c in x.terms.items():
        out[len(a) - len(b)] = out.get(len(a) - len(b), 0) + c
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------- multiplication

def test_ck1_and_vertex_products():
    alg = alg_of("rose2")
    e, f, v = alg.edge("e"), alg.edge("f"), alg.vertex("v")
    assert alg.edge_star("e") * e == v
    assert alg.edge_star("e") * f == alg.zero()
    assert v * v == v
    t = alg_of("toeplitz")
    assert t.vertex("u") * t.vertex("w") == t.zero()


def test_walk_product_rules():
    alg = alg_of("rose2")
    k1 = (("e",), ("f",), "v")
    k2 = (("f", "e"), (), "v")
    assert alg.walk_product(k1, k2) == (("e", "e"), (), "v")
    k3 = ((), ("f", "e"), "v")
    assert alg.walk_product(k3, (("f",), (), "v")) == ((), ("e",), "v")
    assert alg.walk_product(((), ("e",), "v"), (("f",), (), "v")) is None


def test_ck2_rewrite_special_edge():
    alg = alg_of("rose2")
    assert alg.special["v"] == "f"
    ff = alg.edge("f") * alg.edge_star("f")
    assert ff == alg.vertex("v") - alg.edge("e") * alg.edge_star("e")
    assert str(ff) == "1*v - 1*e~e"


def test_vertex_is_basic_and_projection_idempotent():
    alg = LeavittAlgebra(fam.rose(2), special={"v": "e"})
    assert alg.normal_form([(1, (), (), "v")]) == alg.vertex("v")
    p = alg.edge("e") * alg.edge_star("e")
    assert p * p == p
    assert p == alg.vertex("v") - alg.walk(("f",), ("f",))


def test_bad_special_edge():
    with pytest.raises(EngineError):
        LeavittAlgebra(fam.rose(2), special={"v": "zz"})


def test_flagged_graph_rejected():
    with pytest.raises((GraphError, EngineError)):
        LeavittAlgebra(fam.inf_emitter_comet())


@pytest.mark.parametrize("name", list(TEST_GRAPHS))
def test_relations_hold(name):
    checks = verify_relations(alg_of(name))
    assert [c.name for c in checks] == ["V", "E1", "E2", "CK1", "CK2"]
    assert all(c.ok for c in checks), [c for c in checks if not c.ok]


def test_e1_e2_examples():
    alg = alg_of("toeplitz")
    e = alg.edge("e")
    assert alg.vertex("u") * e == e == e * alg.vertex("w")
    es = alg.edge_star("e")
    assert alg.vertex("w") * es == es == es * alg.vertex("u")


@pytest.mark.parametrize("name", list(TEST_GRAPHS))
def test_associativity_random(name):
    alg = alg_of(name)
    smp = WalkSampler(alg, 3, seed=11)
    for _ in range(300 if name != "E_2" else 150):
        x, y, z = smp.element(), smp.element(), smp.element()
        assert (x * y) * z == x * (y * z)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_distributive_and_linear(seed):
    alg = alg_of("toeplitz")
    smp = WalkSampler(alg, 3, seed)
    x, y, z = smp.element(), smp.element(), smp.element()
    assert x * (y + z) == x * y + x * z
    assert (x + y) * z == x * z + y * z
    assert (x * y).scale(Fraction(3, 2)) == x.scale(Fraction(3, 2)) * y


# ---------------------------------------------------------------- normal form against oracles

@pytest.mark.parametrize("graph", [fam.diamond(), fam.chain(3), fam.fan(2), Graph.build(["v", "w"], [("a", "v", "w"), ("b", "v", "w")])])
def test_acyclic_matrix_model(graph):
    alg = LeavittAlgebra(graph)
    smp = WalkSampler(alg, 3, seed=5)
    for _ in range(150):
        # raw walks and their normal forms have the same matrix image
        raw = [(smp.coefficient(), *smp.walk()) for _ in range(3)]
        x = alg.normal_form(raw)
        raw_img = {}
        for c, a, b, w in raw:
            for k, v in acyclic_matrix_image(alg, _Raw({(a, b, w): c})).items():
                raw_img[k] = raw_img.get(k, 0) + v
        assert acyclic_matrix_image(alg, x) == {k: v for k, v in raw_img.items() if v}
        y = smp.element()
        assert acyclic_matrix_image(alg, x * y) == matmul_sparse(acyclic_matrix_image(alg, x), acyclic_matrix_image(alg, y))
    # the normal basis maps to linearly independent matrix units: count them
    longest = len(graph.vertices)
    basis = alg.all_keys(longest)
    sinks = [v for v in graph.vertices if not graph.out_edges(v)]
    into = {s: sum(1 for v in graph.vertices for p in paths_from(graph, v, longest) if (graph.range[p[-1]] if p else v) == s) for s in sinks}
    assert len(basis) == sum(n * n for n in into.values())


class _Raw:
    def __init__(self, terms):
        self.terms = terms


def test_loop_algebra_is_laurent():
    alg = alg_of("loop")
    smp = WalkSampler(alg, 4, seed=3)
    for _ in range(200):
        x, y = smp.element(), smp.element()
        lx, ly, lxy = loop_laurent(x), loop_laurent(y), loop_laurent(x * y)
        prod = {}
        for a, c in lx.items():
            for b, d in ly.items():
                prod[a + b] = prod.get(a + b, 0) + c * d
        assert lxy == {k: v for k, v in prod.items() if v}


def test_corner_basis_single_loop():
    alg = alg_of("loop")
    assert [str(b) for b in alg.corner_basis("v", 2)] == ["1*v", "1*~c", "1*~c.c", "1*c", "1*c.c"]
    for d in range(6):
        assert len(alg.corner_basis("v", d)) == 2 * d + 1


def test_corner_basis_toeplitz():
    alg = alg_of("toeplitz")
    assert [str(b) for b in alg.corner_basis("u", 1)] == ["1*u", "1*~c", "1*c", "1*c~c"]


def test_corner_project():
    alg = alg_of("toeplitz")
    assert corner_project(alg.vertex("w"), "u") == alg.zero()
    x = alg.parse("c + e + e~e + w")
    assert corner_project(x, "u") == alg.parse("c + e~e")


# ---------------------------------------------------------------- involution, grading, partial_B

def test_involution_examples():
    alg = alg_of("rose2")
    assert involution(alg.walk(("e",), ("f",))) == alg.walk(("f",), ("e",))
    assert involution(alg.vertex("v")) == alg.vertex("v")


@pytest.mark.parametrize("name", ["rose2", "toeplitz", "comet_A3"])
def test_involution_anti_automorphism(name):
    alg = alg_of(name)
    smp = WalkSampler(alg, 3, seed=2)
    for _ in range(100):
        x, y = smp.element(), smp.element()
        assert (x * y).star() == y.star() * x.star()
        assert x.star().star() == x


def test_grade_and_partial_B_examples():
    alg = alg_of("rose2")
    parts = grade(alg.parse("e + f~"))
    assert parts == {1: alg.edge("e"), -1: alg.edge_star("f")}
    assert partial_B(alg.vertex("v")) == 0
    assert partial_B(alg.zero()) == 0
    assert partial_B(alg.parse("e.f~e + v")) == 2


@pytest.mark.parametrize("name", ["rose2", "E_2"])
def test_grading_is_multiplicative(name):
    alg = alg_of(name)
    smp = WalkSampler(alg, 3, seed=4)
    for _ in range(100):
        x, y = smp.element(), smp.element()
        gx, gy = grade(x), grade(y)
        assert sum(gx.values(), alg.zero()) == x
        for m, xm in gx.items():
            for n, yn in gy.items():
                assert set(grade(xm * yn)) <= {m + n}


# ---------------------------------------------------------------- text syntax

def test_parse_and_print_roundtrip():
    alg = alg_of("rose2")
    for text in ["3/2*e.f~e - 2*v", "1*~e", "e~", "1*e.e~f", "-1/3*f.f"]:
        x = parse_element(alg, text)
        assert parse_element(alg, format_element(x)) == x


def test_ghost_spellings_agree():
    alg = alg_of("toeplitz")
    assert alg.parse("e~") == alg.parse("~e") == alg.edge_star("e")


def test_bare_scalar_is_scalar_identity():
    alg = alg_of("toeplitz")
    assert alg.parse("2") == alg.one().scale(2)


def test_expression_products():
    alg = alg_of("toeplitz")
    assert parse_expression(alg, "e~ * e") == alg.vertex("w")
    assert parse_expression(alg, "u * w") == alg.zero()
    assert parse_expression(alg, "(c + e) * (c~ + e~)") == alg.vertex("u")
    assert parse_expression(alg, "2*c * c~") == alg.parse("2*c~c")


@pytest.mark.parametrize(
    "text, pos",
    [("c.e.c", 4), ("zz", 0), ("e +", 3), ("c~e", 0), ("3/2*", 4)],
)
def test_parse_errors_have_positions(text, pos):
    alg = alg_of("toeplitz")
    with pytest.raises(ElementParseError) as info:
        parse_element(alg, text)
    assert info.value.position == pos


def test_multiply_helper_matches_operator():
    alg = alg_of("rose2")
    x, y = alg.parse("e + f~"), alg.parse("e~e")
    assert multiply(x, y) == x * y
