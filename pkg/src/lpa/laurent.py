"""Laurent polynomials over Q and matrices over K[x, x^-1]."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


class LaurentPoly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, Fraction] | None = None):
        self.coeffs: dict[int, Fraction] = {int(k): Fraction(v) for k, v in (coeffs or {}).items() if v}

    @classmethod
    def monomial(cls, exp: int, coeff=1) -> "LaurentPoly":
        return cls({exp: coeff})

    @classmethod
    def const(cls, c) -> "LaurentPoly":
        return cls({0: c})

    @classmethod
    def parse(cls, text: str) -> "LaurentPoly":
        """Parse ``3*x^-2 + 1 + 2*x^5`` (also ``x``, ``-x^-1``, ``1/2*x``)."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty Laurent polynomial")
        if s[0] not in "+-":
            s = "+" + s
        out: dict[int, Fraction] = {}
        pos = 0
        term = re.compile(r"([+-])(?:(\d+(?:/\d+)?)(?:\*)?)?(x(?:\^(-?\d+))?)?")
        while pos < len(s):
            m = term.match(s, pos)
            if not m or m.end() == pos or (m.group(2) is None and m.group(3) is None):
                raise ValueError(f"cannot parse Laurent polynomial {text!r} at {pos}")
            c = Fraction(m.group(2) or 1) * (-1 if m.group(1) == "-" else 1)
            e = 0 if m.group(3) is None else int(m.group(4) or 1)
            out[e] = out.get(e, 0) + c
            pos = m.end()
        return cls(out)

    def __add__(self, other):
        other = _lift(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        out: dict[int, Fraction] = {}
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                out[a + b] = out.get(a + b, 0) + x * y
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self.coeffs) != 1:
                raise ValueError("only monomials are units in K[x, x^-1]")
            (e, c), = self.coeffs.items()
            return LaurentPoly({e * n: Fraction(1) / c ** (-n)})
        out = LaurentPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LaurentPoly.const(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __bool__(self):
        return bool(self.coeffs)

    def inverse_variable(self) -> "LaurentPoly":
        """Substitute x -> x^-1."""
        return LaurentPoly({-k: v for k, v in self.coeffs.items()})

    @property
    def support(self) -> list[int]:
        return sorted(self.coeffs)

    def is_constant(self) -> bool:
        return all(k == 0 for k in self.coeffs)

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs):
            c = self.coeffs[e]
            mag = abs(c)
            cs = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            body = cs if e == 0 else f"{cs}*x" + ("" if e == 1 else f"^{e}")
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    def __repr__(self):
        return f"LaurentPoly({self})"


def _lift(x) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return LaurentPoly.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a Laurent polynomial")


ZERO = LaurentPoly()
ONE = LaurentPoly.const(1)
X = LaurentPoly.monomial(1)


class LaurentMatrix:
    """A (possibly rectangular) matrix with Laurent polynomial entries."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        self.rows: tuple[tuple[LaurentPoly, ...], ...] = tuple(tuple(_lift(x) for x in r) for r in rows)
        widths = {len(r) for r in self.rows}
        if len(widths) > 1:
            raise ValueError("ragged matrix")

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    @property
    def n(self) -> int:
        r, c = self.shape
        if r != c:
            raise ValueError("not square")
        return r

    @classmethod
    def zeros(cls, r: int, c: int | None = None) -> "LaurentMatrix":
        return cls([[ZERO] * (r if c is None else c) for _ in range(r)])

    @classmethod
    def identity(cls, n: int, p=ONE) -> "LaurentMatrix":
        p = _lift(p)
        return cls([[p if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def unit(cls, n: int, i: int, j: int, p=ONE) -> "LaurentMatrix":
        rows = [[ZERO] * n for _ in range(n)]
        rows[i][j] = _lift(p)
        return cls(rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __add__(self, other):
        return LaurentMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return LaurentMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return LaurentMatrix([[-a for a in r] for r in self.rows])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, LaurentPoly)):
            return LaurentMatrix([[a * other for a in r] for r in self.rows])
        k, k2 = self.shape[1], other.shape[0]
        if k != k2:
            raise ValueError(f"shape mismatch {self.shape} x {other.shape}")
        cols = list(zip(*other.rows))
        out = []
        for row in self.rows:
            out_row = []
            for col in cols:
                acc = ZERO
                for a, b in zip(row, col):
                    if a and b:
                        acc = acc + a * b
                out_row.append(acc)
            out.append(out_row)
        return LaurentMatrix(out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, LaurentPoly)):
            return LaurentMatrix([[other * a for a in r] for r in self.rows])
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, LaurentMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __bool__(self):
        return any(a for r in self.rows for a in r)

    def conjugate_transpose(self) -> "LaurentMatrix":
        """Transpose with x -> x^-1 applied entrywise."""
        return LaurentMatrix([[a.inverse_variable() for a in col] for col in zip(*self.rows)])

    def scalar_value(self) -> LaurentPoly | None:
        """p if the matrix is p * identity, else None."""
        n = self.n
        p = self.rows[0][0] if n else ZERO
        for i in range(n):
            for j in range(n):
                if self.rows[i][j] != (p if i == j else ZERO):
                    return None
        return p

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(str(a) for a in r) + "]" for r in self.rows) + "]"

    def __repr__(self):
        return f"LaurentMatrix({self})"

    def to_json(self) -> list[list[str]]:
        return [[str(a) for a in r] for r in self.rows]


def scalar_matrix(rows: Sequence[Sequence]) -> LaurentMatrix:
    return LaurentMatrix([[LaurentPoly.const(Fraction(x)) for x in r] for r in rows])
