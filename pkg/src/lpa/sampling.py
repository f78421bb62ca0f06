"""Seeded random walks and elements for property checks."""

from __future__ import annotations

import random
from fractions import Fraction

from .algebra import Element, Key, LeavittAlgebra


class WalkSampler:
    """Draws raw walks ``alpha beta*`` (not necessarily in normal form) of bounded length."""

    def __init__(self, alg: LeavittAlgebra, max_len: int, seed: int = 0):
        self.alg = alg
        self.max_len = max_len
        self.rng = random.Random(seed)
        g = alg.graph
        self._from: dict[str, dict[str, list[tuple[str, ...]]]] = {}
        for v in g.vertices:
            by_range: dict[str, list[tuple[str, ...]]] = {}
            for p in alg.paths(v, max_len):
                by_range.setdefault(g.range[p[-1]] if p else v, []).append(p)
            self._from[v] = by_range
        self._into: dict[str, list[tuple[str, ...]]] = {}
        for v, by_range in self._from.items():
            for w, ps in by_range.items():
                self._into.setdefault(w, []).extend(ps)

    def walk(self) -> Key:
        g = self.alg.graph
        w = self.rng.choice(g.vertices)
        return (self.rng.choice(self._into[w]), self.rng.choice(self._into[w]), w)

    def corner_walk(self, u: str) -> Key:
        """A walk ``alpha beta*`` with s(alpha) = s(beta) = u."""
        w = self.rng.choice(sorted(self._from[u], key=self.alg.graph.vertex_index))
        ps = self._from[u][w]
        return (self.rng.choice(ps), self.rng.choice(ps), w)

    def coefficient(self) -> Fraction:
        return Fraction(self.rng.randint(-5, 5) or 1, self.rng.randint(1, 3))

    def element(self, terms: int = 3) -> Element:
        raw = [(self.coefficient(), *self.walk()) for _ in range(self.rng.randint(1, terms))]
        return self.alg.normal_form(raw)

    def corner_element(self, u: str, terms: int = 3) -> Element:
        raw = [(self.coefficient(), *self.corner_walk(u)) for _ in range(self.rng.randint(1, terms))]
        return self.alg.normal_form(raw)
