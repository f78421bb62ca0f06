"""Exact sparse Gaussian elimination over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

Row = dict[int, Fraction]


class RowReducer:
    """Incrementally maintains a reduced row echelon basis of a row space."""

    def __init__(self):
        self.pivots: dict[int, Row] = {}
        self._users: dict[int, set[int]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping[int, Fraction]) -> Row:
        row = {c: Fraction(v) for c, v in row.items() if v}
        for c in [c for c in row if c in self.pivots]:
            a = row.get(c)
            if not a:
                continue
            for k, v in self.pivots[c].items():
                nv = row.get(k, 0) - a * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        return row

    def add(self, row: Mapping[int, Fraction]) -> bool:
        """Add a row; return True if it raised the rank."""
        row = self.reduce(row)
        if not row:
            return False
        p = min(row)
        inv = 1 / row[p]
        row = {k: v * inv for k, v in row.items()}
        for r in list(self._users.get(p, ())):
            prow = self.pivots[r]
            a = prow[p]
            for k, v in row.items():
                nv = prow.get(k, 0) - a * v
                if nv:
                    prow[k] = nv
                    if k != r:
                        self._users.setdefault(k, set()).add(r)
                else:
                    del prow[k]
                    if k in self._users:
                        self._users[k].discard(r)
        self._users.pop(p, None)
        self.pivots[p] = row
        for k in row:
            if k != p:
                self._users.setdefault(k, set()).add(p)
        return True


def nullspace(rows: Iterable[Mapping[int, Fraction]], ncols: int) -> list[Row]:
    """Basis of ``{x : row . x = 0 for every row}``, one vector per free column."""
    red = RowReducer()
    for r in rows:
        red.add(r)
    basis = []
    for f in range(ncols):
        if f in red.pivots:
            continue
        vec: Row = {f: Fraction(1)}
        for p in red._users.get(f, ()):
            vec[p] = -red.pivots[p][f]
        basis.append(vec)
    return basis


def rank(rows: Iterable[Mapping[int, Fraction]]) -> int:
    red = RowReducer()
    for r in rows:
        red.add(r)
    return red.rank
