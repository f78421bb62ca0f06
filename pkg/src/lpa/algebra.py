"""Exact arithmetic in the Leavitt path algebra L_Q(E) of a finite row-finite graph.

Elements are rational combinations of walks ``alpha beta*`` kept in normal form
relative to a fixed basis: for every regular vertex one outgoing edge is
declared *special*, and a walk is basic unless ``alpha`` and ``beta`` both end
in the same special edge.  Such a walk is rewritten with the Cuntz-Krieger
relation ``e e* = s(e) - sum_{f != e} f f*``.

A walk is keyed as ``(alpha, beta, w)`` with ``alpha``, ``beta`` tuples of edge
ids and ``w = r(alpha) = r(beta)`` (needed when both are trivial).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .graph import Graph, paths_from

Key = tuple[tuple[str, ...], tuple[str, ...], str]


class EngineError(ValueError):
    pass


class ElementParseError(EngineError):
    def __init__(self, message: str, position: int):
        self.position = position
        self.message = message
        super().__init__(f"at position {position}: {message}")


@dataclass(frozen=True)
class Monomial:
    coeff: Fraction
    alpha: tuple[str, ...]
    beta: tuple[str, ...]
    vertex: str


class LeavittAlgebra:
    """L_Q(E) together with a choice of special edges (the basis choice)."""

    def __init__(self, graph: Graph, special: Mapping[str, str] | None = None):
        if graph.inf_emitters:
            raise EngineError("CK2 is undefined at infinite emitters; the engine needs a row-finite graph")
        self.graph = graph
        chosen = {}
        for v in graph.vertices:
            outs = graph.out_edges(v)
            if not outs:
                continue
            e = (special or {}).get(v, outs[-1])
            if e not in outs:
                raise EngineError(f"special edge {e!r} does not leave {v!r}")
            chosen[v] = e
        self.special: dict[str, str] = chosen
        self._special_edges = frozenset(chosen.values())
        self._src = graph.source
        self._rng = graph.range
        self._eidx = {e: graph.edge_index(e) for e in graph.edges}
        self._vidx = {v: graph.vertex_index(v) for v in graph.vertices}
        self._nf_cache: dict[tuple[Key, Key], tuple[tuple[Key, int], ...]] = {}
        self._paths_cache: dict[tuple[str, int], list[tuple[str, ...]]] = {}

    # -- keys -----------------------------------------------------------

    def s_of(self, path: tuple[str, ...], base: str) -> str:
        return self._src[path[0]] if path else base

    def key_order(self, k: Key):
        a, b, w = k
        ei = self._eidx
        return (len(a), [ei[e] for e in a], len(b), [ei[e] for e in b], self._vidx[w])

    def is_basic(self, k: Key) -> bool:
        a, b, _ = k
        return not (a and b and a[-1] == b[-1] and a[-1] in self._special_edges)

    def walk_product(self, k1: Key, k2: Key) -> Key | None:
        """Product of two walks using (CK1) only; None when it vanishes."""
        a, b, w1 = k1
        c, d, w2 = k2
        if self.s_of(b, w1) != self.s_of(c, w2):
            return None
        lb, lc = len(b), len(c)
        if lc >= lb:
            if c[:lb] == b:
                return (a + c[lb:], d, w2)
        elif b[:lc] == c:
            return (a, d + b[lc:], w1)
        return None

    def reduce_key(self, k: Key, coeff, out: dict[Key, Fraction]):
        """Accumulate the normal form of ``coeff * walk`` into ``out``."""
        a, b, w = k
        special = self._special_edges
        while a and b and a[-1] == b[-1] and a[-1] in special:
            e = a[-1]
            w = self._src[e]
            a, b = a[:-1], b[:-1]
            for f in self.graph.out_edges(w):
                if f != e:
                    _acc(out, (a + (f,), b + (f,), self._rng[f]), -coeff)
        _acc(out, (a, b, w), coeff)

    def _key_mul(self, k1: Key, k2: Key) -> tuple[tuple[Key, int], ...]:
        hit = self._nf_cache.get((k1, k2))
        if hit is None:
            p = self.walk_product(k1, k2)
            if p is None:
                hit = ()
            else:
                acc: dict[Key, Fraction] = {}
                self.reduce_key(p, 1, acc)
                hit = tuple((k, int(v)) for k, v in acc.items())
            self._nf_cache[(k1, k2)] = hit
        return hit

    def validate_walk(self, alpha: tuple[str, ...], beta: tuple[str, ...], w: str | None = None) -> Key:
        g = self.graph
        for p in (alpha, beta):
            for e in p:
                if not g.is_edge(e):
                    raise EngineError(f"unknown edge {e!r}")
            for x, y in zip(p, p[1:]):
                if self._rng[x] != self._src[y]:
                    raise EngineError(f"edges {x!r} and {y!r} do not concatenate")
        ra = self._rng[alpha[-1]] if alpha else w
        rb = self._rng[beta[-1]] if beta else w
        if ra is None:
            ra = rb
        if rb is None:
            rb = ra
        if ra is None or not g.is_vertex(ra) or ra != rb:
            raise EngineError(f"walk {'.'.join(alpha)}~{'.'.join(beta)} has mismatched ranges")
        return (tuple(alpha), tuple(beta), ra)

    # -- constructors ---------------------------------------------------

    def element(self, terms: Mapping[Key, Fraction]) -> "Element":
        """Element from raw (possibly non-basic) walk keys."""
        out: dict[Key, Fraction] = {}
        for k, c in terms.items():
            if c:
                self.reduce_key(k, Fraction(c), out)
        return Element(self, out)

    def normal_form(self, raw: Iterable[tuple]) -> "Element":
        """Normal form of ``sum coeff * alpha beta*`` given ``(coeff, alpha, beta[, vertex])`` tuples."""
        out: dict[Key, Fraction] = {}
        for t in raw:
            coeff, alpha, beta = t[0], tuple(t[1]), tuple(t[2])
            w = t[3] if len(t) > 3 else None
            k = self.validate_walk(alpha, beta, w)
            if coeff:
                self.reduce_key(k, Fraction(coeff), out)
        return Element(self, out)

    def zero(self) -> "Element":
        return Element(self, {})

    def one(self) -> "Element":
        return Element(self, {((), (), v): Fraction(1) for v in self.graph.vertices})

    def vertex(self, v: str) -> "Element":
        return Element(self, {((), (), v): Fraction(1)})

    def walk(self, alpha: Iterable[str] = (), beta: Iterable[str] = (), vertex: str | None = None, coeff=1) -> "Element":
        return self.normal_form([(coeff, tuple(alpha), tuple(beta), vertex)])

    def path(self, edges: Iterable[str]) -> "Element":
        return self.walk(edges)

    def ghost(self, edges: Iterable[str]) -> "Element":
        return self.walk((), edges)

    def edge(self, e: str) -> "Element":
        return self.walk((e,))

    def edge_star(self, e: str) -> "Element":
        return self.walk((), (e,))

    def generators(self) -> list["Element"]:
        g = self.graph
        return [self.vertex(v) for v in g.vertices] + [self.edge(e) for e in g.edges] + [self.edge_star(e) for e in g.edges]

    # -- enumeration ----------------------------------------------------

    def paths(self, v: str, max_len: int) -> list[tuple[str, ...]]:
        hit = self._paths_cache.get((v, max_len))
        if hit is None:
            hit = paths_from(self.graph, v, max_len)
            self._paths_cache[(v, max_len)] = hit
        return hit

    def corner_keys(self, u: str, d_alpha: int, d_beta: int | None = None) -> list[Key]:
        """Basic walks ``alpha beta*`` with s(alpha)=s(beta)=u and bounded lengths."""
        if d_beta is None:
            d_beta = d_alpha
        by_range: dict[str, list[tuple[str, ...]]] = {}
        for p in self.paths(u, max(d_alpha, d_beta)):
            by_range.setdefault(self._rng[p[-1]] if p else u, []).append(p)
        keys = []
        for w, ps in by_range.items():
            for a in ps:
                if len(a) > d_alpha:
                    continue
                for b in ps:
                    if len(b) <= d_beta:
                        k = (a, b, w)
                        if self.is_basic(k):
                            keys.append(k)
        keys.sort(key=self.key_order)
        return keys

    def corner_basis(self, u: str, d: int) -> list["Element"]:
        return [Element(self, {k: Fraction(1)}) for k in self.corner_keys(u, d)]

    def all_keys(self, d: int) -> list[Key]:
        """All basic walks ``alpha beta*`` with |alpha|, |beta| <= d."""
        into: dict[str, list[tuple[str, ...]]] = {}
        for v in self.graph.vertices:
            for p in self.paths(v, d):
                into.setdefault(self._rng[p[-1]] if p else v, []).append(p)
        keys = [(a, b, w) for w, ps in into.items() for a in ps for b in ps]
        keys = [k for k in keys if self.is_basic(k)]
        keys.sort(key=self.key_order)
        return keys

    # -- text -----------------------------------------------------------

    def parse(self, text: str) -> "Element":
        return parse_element(self, text)

    def basis_header(self) -> dict[str, str]:
        return {v: self.special[v] for v in self.graph.vertices if v in self.special}


def _acc(out: dict, k, c):
    nv = out.get(k, 0) + c
    if nv:
        out[k] = nv
    else:
        out.pop(k, None)


class Element:
    """An element of L_Q(E) in normal form; treat as immutable."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: LeavittAlgebra, terms: dict[Key, Fraction]):
        self.alg = alg
        self.terms = terms

    def _check(self, other: "Element"):
        if other.alg is not self.alg:
            if other.alg.graph != self.alg.graph or other.alg.special != self.alg.special:
                raise EngineError("elements belong to different algebras")

    def __add__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            _acc(out, k, c)
        return Element(self.alg, out)

    def __neg__(self):
        return Element(self.alg, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "Element":
        c = Fraction(c)
        if not c:
            return Element(self.alg, {})
        return Element(self.alg, {k: v * c for k, v in self.terms.items()})

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Element):
            return NotImplemented
        self._check(other)
        alg = self.alg
        out: dict[Key, Fraction] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                prod = alg._key_mul(k1, k2)
                if prod:
                    c = c1 * c2
                    for k, m in prod:
                        _acc(out, k, c * m)
        return Element(alg, out)

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"Element({format_element(self)})"

    def __str__(self):
        return format_element(self)

    def coefficient(self, k: Key) -> Fraction:
        return self.terms.get(k, Fraction(0))

    def sorted_terms(self) -> list[tuple[Key, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: self.alg.key_order(kv[0]))

    def monomials(self) -> Iterator[Monomial]:
        for (a, b, w), c in self.sorted_terms():
            yield Monomial(c, a, b, w)

    def star(self) -> "Element":
        return involution(self)


# ---------------------------------------------------------------- operations

def multiply(x: Element, y: Element) -> Element:
    return x * y


def involution(x: Element) -> Element:
    return Element(x.alg, {(b, a, w): c for (a, b, w), c in x.terms.items()})


def grade(x: Element) -> dict[int, Element]:
    parts: dict[int, dict[Key, Fraction]] = {}
    for k, c in x.terms.items():
        parts.setdefault(len(k[0]) - len(k[1]), {})[k] = c
    return {n: Element(x.alg, t) for n, t in sorted(parts.items())}


def partial_B(x: Element) -> int:
    """Longest real part ``alpha`` among the basis terms; 0 for the zero element."""
    return max((len(k[0]) for k in x.terms), default=0)


def corner_project(x: Element, u: str) -> Element:
    alg = x.alg
    return Element(alg, {k: c for k, c in x.terms.items() if alg.s_of(k[0], k[2]) == u and alg.s_of(k[1], k[2]) == u})


def in_corner(x: Element, u: str) -> bool:
    return corner_project(x, u) == x


def commutator(x: Element, y: Element) -> Element:
    return x * y - y * x


# ---------------------------------------------------------------- relations

@dataclass
class RelationCheck:
    name: str
    ok: bool
    counterexample: str | None = None


def verify_relations(alg: LeavittAlgebra) -> list[RelationCheck]:
    """Check (V), (E1), (E2), (CK1), (CK2) on all generators."""
    g = alg.graph
    V, E, Es = alg.vertex, alg.edge, alg.edge_star
    checks = []

    def run(name, cases):
        for desc, lhs, rhs in cases:
            if lhs != rhs:
                checks.append(RelationCheck(name, False, f"{desc}: {lhs} != {rhs}"))
                return
        checks.append(RelationCheck(name, True))

    run("V", ((f"{v}*{w}", V(v) * V(w), V(v) if v == w else alg.zero()) for v in g.vertices for w in g.vertices))
    run("E1", (c for e in g.edges for c in (
        (f"s({e})*{e}", V(g.source[e]) * E(e), E(e)),
        (f"{e}*r({e})", E(e) * V(g.range[e]), E(e)))))
    run("E2", (c for e in g.edges for c in (
        (f"r({e})*{e}~", V(g.range[e]) * Es(e), Es(e)),
        (f"{e}~*s({e})", Es(e) * V(g.source[e]), Es(e)))))
    run("CK1", ((f"{e}~*{f}", Es(e) * E(f), V(g.range[e]) if e == f else alg.zero()) for e in g.edges for f in g.edges))
    ck2 = []
    for v in g.vertices:
        if g.is_regular(v):
            total = alg.zero()
            for f in g.out_edges(v):
                total = total + E(f) * Es(f)
            ck2.append((f"sum ff* at {v}", total, V(v)))
    run("CK2", ck2)
    return checks


# ---------------------------------------------------------------- text syntax

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<op>[-+*.~()]))")


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_key(k: Key) -> str:
    a, b, w = k
    if not a and not b:
        return w
    if not b:
        return ".".join(a)
    return ".".join(a) + "~" + ".".join(b)


def format_element(x: Element) -> str:
    if not x.terms:
        return "0"
    parts = []
    for k, c in x.sorted_terms():
        body = f"{_fmt_coeff(abs(c))}*{format_key(k)}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)


def parse_element(alg: LeavittAlgebra, text: str) -> Element:
    """Parse ``3/2*a.b~c + v - e~`` style sums.

    ``alpha~beta`` denotes ``alpha beta*``; ``~beta`` and ``beta~`` both denote
    the ghost path ``beta*``; a bare vertex id is the vertex.
    """
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ElementParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    i = 0
    out: dict[Key, Fraction] = {}
    sign = Fraction(1)
    expect_term = True
    if tokens[0][0] == "op" and tokens[0][1] in "+-":
        sign = Fraction(-1 if tokens[0][1] == "-" else 1)
        i = 1
    while True:
        kind, val, at = tokens[i]
        if kind == "end":
            if expect_term:
                raise ElementParseError("expected a term", at)
            break
        coeff = Fraction(1)
        if kind == "num":
            coeff = Fraction(val)
            i += 1
            if tokens[i][1] == "*":
                i += 1
            elif tokens[i][0] in ("end",) or tokens[i][1] in "+-":
                # a bare scalar is scalar * identity
                for v in alg.graph.vertices:
                    _acc(out, ((), (), v), sign * coeff)
                sign, i, expect_term = _next_sign(tokens, i)
                if sign is None:
                    break
                continue
        i, key = _parse_walk(alg, tokens, i)
        alg.reduce_key(key, sign * coeff, out)
        sign, i, expect_term = _next_sign(tokens, i)
        if sign is None:
            break
    return Element(alg, out)


def _next_sign(tokens, i):
    kind, val, at = tokens[i]
    if kind == "end":
        return None, i, False
    if kind == "op" and val in "+-":
        return Fraction(-1 if val == "-" else 1), i + 1, True
    raise ElementParseError(f"expected '+' or '-', got {val!r}", at)


def _parse_path(alg, tokens, i):
    ids = []
    start = tokens[i][2]
    while tokens[i][0] == "id":
        ids.append((tokens[i][1], tokens[i][2]))
        i += 1
        if tokens[i][1] == "." and tokens[i][0] == "op":
            i += 1
            if tokens[i][0] != "id":
                raise ElementParseError("expected an identifier after '.'", tokens[i][2])
        else:
            break
    g = alg.graph
    if len(ids) == 1 and g.is_vertex(ids[0][0]):
        return i, (), ids[0][0], start
    for name, at in ids:
        if not g.is_edge(name):
            raise ElementParseError(f"unknown edge {name!r}", at)
    for (x, _), (y, at) in zip(ids, ids[1:]):
        if g.range[x] != g.source[y]:
            raise ElementParseError(f"edges {x!r} and {y!r} do not concatenate", at)
    return i, tuple(n for n, _ in ids), None, start


def _parse_walk(alg, tokens, i):
    kind, val, at = tokens[i]
    alpha, beta, va, vb = (), (), None, None
    if kind == "id":
        i, alpha, va, _ = _parse_path(alg, tokens, i)
    if tokens[i][0] == "op" and tokens[i][1] == "~":
        tilde_at = tokens[i][2]
        i += 1
        if tokens[i][0] == "id":
            i, beta, vb, _ = _parse_path(alg, tokens, i)
        elif kind == "id":
            # trailing '~': ghost of the path just read
            alpha, beta, va, vb = (), alpha, None, va
        else:
            raise ElementParseError("expected a path around '~'", tilde_at)
    elif kind != "id":
        raise ElementParseError(f"expected a walk, got {val!r}", at)
    g = alg.graph
    ra = g.range[alpha[-1]] if alpha else va
    rb = g.range[beta[-1]] if beta else vb
    if ra is None:
        ra = rb
    if rb is None:
        rb = ra
    if ra != rb or ra is None:
        raise ElementParseError("walk ranges do not match", at)
    return i, (alpha, beta, ra)


def parse_expression(alg: LeavittAlgebra, text: str) -> Element:
    """Products of parenthesized or plain sums: ``(e + f) * e~``, ``e~ * e``.

    A ``*`` directly after a number is a coefficient marker, not a product.
    """
    factors: list[tuple[int, str]] = []
    depth, start, prev = 0, 0, ""
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ElementParseError("unbalanced ')'", i)
        elif ch == "*" and depth == 0 and not prev.isdigit():
            factors.append((start, text[start:i]))
            start = i + 1
        if not ch.isspace():
            prev = ch
    if depth:
        raise ElementParseError("unbalanced '('", len(text))
    factors.append((start, text[start:]))
    out = None
    for at, chunk in factors:
        body = chunk.strip()
        offset = at + len(chunk) - len(chunk.lstrip())
        if body.startswith("(") and body.endswith(")"):
            body, offset = body[1:-1], offset + 1
        try:
            x = parse_element(alg, body) if "(" not in body else parse_expression(alg, body)
        except ElementParseError as exc:
            raise ElementParseError(exc.message, offset + exc.position) from None
        out = x if out is None else out * x
    return out
