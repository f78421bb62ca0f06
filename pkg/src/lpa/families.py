"""Named graph families used in tests, scripts and the shipped corpus."""

from __future__ import annotations

from .graph import Graph


def loop() -> Graph:
    return Graph.build(["v"], [("c", "v", "v")])


def rose(petals: int = 2) -> Graph:
    names = "efghijk"
    return Graph.build(["v"], [(names[i], "v", "v") for i in range(petals)])


def toeplitz() -> Graph:
    return Graph.build(["u", "w"], [("c", "u", "u"), ("e", "u", "w")])


def chain(n: int) -> Graph:
    vs = [f"v{i}" for i in range(1, n + 1)]
    return Graph.build(vs, [(f"e{i}", f"v{i}", f"v{i + 1}") for i in range(1, n)])


def two_sinks() -> Graph:
    return Graph.build(["s1", "s2"], [])


def comet_A(n: int) -> Graph:
    """v1 -> v2 -> ... -> vn with a loop at vn."""
    vs = [f"v{i}" for i in range(1, n + 1)]
    edges = [(f"e{i}" if n > 2 else "e", f"v{i}", f"v{i + 1}") for i in range(1, n)]
    return Graph.build(vs, edges + [("c", f"v{n}", f"v{n}")])


def E(n: int) -> Graph:
    """Chain v_n -> ... -> v0, loop at v0 with an exit into vm1, loop at vm1."""
    vs = [f"v{i}" for i in range(n, -1, -1)] + ["vm1"]
    edges = [(f"e{i}", f"v{i}", f"v{i - 1}") for i in range(n, 0, -1)]
    edges += [("c0", "v0", "v0"), ("f", "v0", "vm1"), ("c1", "vm1", "vm1")]
    return Graph.build(vs, edges)


def truncated_tail(n: int) -> Graph:
    """u1 -> ... -> un, every ui -> v, loop at v: a finite stage of an infinite tail."""
    vs = [f"u{i}" for i in range(1, n + 1)] + ["v"]
    edges = [(f"g{i}", f"u{i}", f"u{i + 1}") for i in range(1, n)]
    edges += [(f"h{i}", f"u{i}", "v") for i in range(1, n + 1)]
    return Graph.build(vs, edges + [("c", "v", "v")])


def inf_emitter_comet() -> Graph:
    return Graph.build(["u", "v"], [("e", "u", "v"), ("c", "v", "v")], inf_emitters=["u"])


def fan(k: int = 2) -> Graph:
    """v -> w1, ..., wk; no common descendant for k >= 2."""
    ws = [f"w{i}" for i in range(1, k + 1)]
    return Graph.build(["v"] + ws, [(f"f{i}", "v", w) for i, w in enumerate(ws, 1)])


def diamond() -> Graph:
    return Graph.build("abcd", [("f", "a", "b"), ("g", "a", "c"), ("h", "b", "d"), ("k", "c", "d")])


def cycle2_comet() -> Graph:
    return Graph.build(["t", "u", "v"], [("g", "t", "u"), ("a", "u", "v"), ("b", "v", "u")])
