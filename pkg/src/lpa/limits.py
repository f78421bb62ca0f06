"""Nice embeddings of matrix algebras over K[x, x^-1], centroid towers, and the comet matrix model."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

from .algebra import Element, LeavittAlgebra
from .centroid import CentralizerSeed, SeedError, laurent_extract, seed_space, validate_seed
from .graph import Graph, is_comet, is_hereditary
from .laurent import ONE, ZERO, LaurentMatrix, LaurentPoly
from .linalg import nullspace

RINGS = ("laurent", "field")


class EmbeddingError(ValueError):
    pass


def spanning_set(n: int, d: int, ring: str = "laurent") -> list[LaurentMatrix]:
    """Matrix units times x^k, |k| <= d (k = 0 only over the field)."""
    ks = range(-d, d + 1) if ring == "laurent" else (0,)
    return [LaurentMatrix.unit(n, i, j, LaurentPoly.monomial(k)) for i in range(n) for j in range(n) for k in ks]


@dataclass(frozen=True)
class NiceEmbedding:
    """``a -> U a V`` from n x n into m x m matrices, with ``V U = I``.

    ``V`` realizes the projection ``b -> V b U`` onto the corner ``e B e``.
    """

    U: LaurentMatrix
    V: LaurentMatrix
    ring: str = "laurent"

    @property
    def n(self) -> int:
        return self.U.shape[1]

    @property
    def m(self) -> int:
        return self.U.shape[0]

    @property
    def idempotent(self) -> LaurentMatrix:
        return self.U * self.V

    def embed(self, a: LaurentMatrix) -> LaurentMatrix:
        return self.U * a * self.V

    def project(self, b: LaurentMatrix) -> LaurentMatrix:
        return self.V * b * self.U

    def verify(self, d: int = 1) -> tuple[bool, str | None]:
        """Check ``i`` is a homomorphism onto ``e B e`` on a spanning set."""
        if self.ring not in RINGS:
            return False, f"unknown ring {self.ring!r}"
        if self.V.shape != (self.n, self.m):
            return False, "shape mismatch between U and V"
        if self.V * self.U != LaurentMatrix.identity(self.n):
            return False, "V U is not the identity"
        e = self.idempotent
        src = spanning_set(self.n, d, self.ring)
        for a in src:
            if self.project(self.embed(a)) != a:
                return False, f"projection does not invert the embedding on {a}"
        for a, b in product(src, repeat=2):
            if self.embed(a * b) != self.embed(a) * self.embed(b):
                return False, f"not multiplicative on {a}, {b}"
        for b in spanning_set(self.m, d, self.ring):
            ebe = e * b * e
            if self.embed(self.project(b)) != ebe:
                return False, f"image misses the corner element {ebe}"
        return True, None

    def compose(self, outer: "NiceEmbedding") -> "NiceEmbedding":
        """``outer o self``."""
        if outer.n != self.m:
            raise EmbeddingError(f"cannot compose {self.n}->{self.m} with {outer.n}->{outer.m}")
        return NiceEmbedding(outer.U * self.U, self.V * outer.V, self.ring)


def corner_embedding(n: int, m: int, ring: str = "laurent") -> NiceEmbedding:
    if m < n:
        raise EmbeddingError("target must be at least as large as the source")
    U = LaurentMatrix([[ONE if i == j else ZERO for j in range(n)] for i in range(m)])
    V = LaurentMatrix([[ONE if i == j else ZERO for j in range(m)] for i in range(n)])
    return NiceEmbedding(U, V, ring)


# ---------------------------------------------------------------- centers

@dataclass(frozen=True)
class MatrixCentralizer:
    """Left multiplication by a central matrix."""

    z: LaurentMatrix

    def __call__(self, a: LaurentMatrix) -> LaurentMatrix:
        return self.z * a

    @property
    def parameter(self) -> LaurentPoly | None:
        return self.z.scalar_value()

    @classmethod
    def scalar(cls, n: int, p) -> "MatrixCentralizer":
        return cls(LaurentMatrix.identity(n, p))


def is_central(z: LaurentMatrix) -> tuple[bool, tuple[int, int] | None]:
    """Commutation with every matrix unit; returns the first failing unit."""
    n = z.n
    for i in range(n):
        for j in range(n):
            u = LaurentMatrix.unit(n, i, j)
            if z * u != u * z:
                return False, (i, j)
    return True, None


@dataclass
class MatrixCenter:
    n: int
    degree: int
    ring: str
    basis: list[LaurentMatrix]

    @property
    def dimension(self) -> int:
        return len(self.basis)


def matrix_center(n: int, d: int, ring: str = "laurent") -> MatrixCenter:
    """Truncated center of M_n(R) via an exact nullspace; every solution must be scalar."""
    if n < 1:
        raise ValueError("n must be positive")
    ks = list(range(-d, d + 1)) if ring == "laurent" else [0]
    kidx = {k: t for t, k in enumerate(ks)}
    nk = len(ks)

    def var(i, j, k):
        return (i * n + j) * nk + kidx[k]

    rows = []
    # (Z E_ab)_{i,b} = Z_{i,a};  (E_ab Z)_{a,j} = Z_{b,j}
    for a, b in product(range(n), repeat=2):
        for i, j in product(range(n), repeat=2):
            for k in ks:
                row: dict[int, Fraction] = {}
                if j == b:
                    row[var(i, a, k)] = row.get(var(i, a, k), 0) + 1
                if i == a:
                    row[var(b, j, k)] = row.get(var(b, j, k), 0) - 1
                row = {c: Fraction(v) for c, v in row.items() if v}
                if row:
                    rows.append(row)
    basis = []
    for vec in nullspace(rows, n * n * nk):
        entries = [[{} for _ in range(n)] for _ in range(n)]
        for c, val in vec.items():
            ij, t = divmod(c, nk)
            i, j = divmod(ij, n)
            entries[i][j][ks[t]] = val
        z = LaurentMatrix([[LaurentPoly(e) for e in r] for r in entries])
        if z.scalar_value() is None:
            raise AssertionError(f"non-scalar central matrix {z}")
        basis.append(z)
    return MatrixCenter(n, d, ring, basis)


@lru_cache(maxsize=256)
def _verified(emb: NiceEmbedding, d: int) -> tuple[bool, str | None]:
    return emb.verify(d)


def sigma_map(emb: NiceEmbedding, tau: MatrixCentralizer, d: int = 1) -> MatrixCentralizer:
    """The centroid element ``pi o tau o i`` of the source algebra."""
    ok, why = _verified(emb, min(d, 1))
    if not ok:
        raise EmbeddingError(f"unverified embedding: {why}")
    z = emb.project(tau(emb.embed(LaurentMatrix.identity(emb.n))))
    out = MatrixCentralizer(z)
    for a in spanning_set(emb.n, d, emb.ring):
        if emb.project(tau(emb.embed(a))) != out(a):
            raise EmbeddingError(f"pi tau i is not multiplication by {z} on {a}")
    return out


# ---------------------------------------------------------------- towers

@dataclass
class MatrixTower:
    sizes: list[int]
    embeddings: list[NiceEmbedding]
    ring: str = "laurent"


def corner_tower(stages: int = 5, ring: str = "laurent") -> MatrixTower:
    sizes = list(range(1, stages + 1))
    return MatrixTower(sizes, [corner_embedding(n, n + 1, ring) for n in sizes[:-1]], ring)


@dataclass
class LimitReport:
    stages: int
    dimensions: list[int]
    maps: list[dict[str, str]]
    stabilized: bool
    limit: str | None

    def to_json(self) -> dict:
        return {
            "stages": self.stages,
            "dimensions": self.dimensions,
            "maps": self.maps,
            "stabilized": self.stabilized,
            "limit": self.limit,
        }


def _ring_name(ring: str) -> str:
    return "K[x,x^-1]" if ring == "laurent" else "K"


def inverse_limit_stabilize(tower: MatrixTower, d: int = 2) -> LimitReport:
    """Follow the connecting maps between truncated centroids along the tower."""
    centers = [matrix_center(n, d, tower.ring) for n in tower.sizes]
    dims = [c.dimension for c in centers]
    maps = []
    identity = True
    for emb, upper in zip(tower.embeddings, centers[1:]):
        seen = {}
        for z in upper.basis:
            p = z.scalar_value()
            q = sigma_map(emb, MatrixCentralizer(z), d).parameter
            seen[str(p)] = str(q)
            identity &= q == p
        maps.append(seen)
    stable = identity and len(set(dims)) == 1
    return LimitReport(len(tower.sizes), dims, maps, stable, _ring_name(tower.ring) if stable else None)


def _seed_parameter(seed: CentralizerSeed) -> str:
    """Scalar at the first vertex, or the Laurent polynomial at the comet base."""
    alg = seed.alg
    k = seed.is_scalar()
    if k is not None:
        return str(LaurentPoly.const(k))
    test = is_comet(alg.graph)
    if test:
        ex = laurent_extract(alg, test.cycle, seed.values[test.cycle.base])
        if ex:
            return str(ex.poly)
    return repr(seed.to_json()["values"])


def restrict_seed(seed: CentralizerSeed, alg: LeavittAlgebra) -> CentralizerSeed:
    """Restriction to a hereditary subgraph (edge and vertex names shared)."""
    values = {}
    for v in alg.graph.vertices:
        terms = seed.values[v].terms
        for a, b, w in terms:
            for e in a + b:
                if not alg.graph.is_edge(e):
                    raise SeedError(f"value at {v} uses edge {e} outside the subgraph")
        values[v] = alg.element(dict(terms))
    out = CentralizerSeed(alg, values)
    if not validate_seed(out):
        raise SeedError("restricted seed is not a centralizer of the subgraph")
    return out


def graph_tower_limit(graphs: Sequence[Graph], d: int = 3) -> LimitReport:
    """Centroid tower of graphs E_1 <= E_2 <= ..., each a hereditary subgraph of the next.

    The connecting maps restrict seeds to the smaller graph; the tower is
    stable when every restriction preserves the centroid parameter.
    """
    algs = [LeavittAlgebra(g) for g in graphs]
    for small, big in zip(graphs, graphs[1:]):
        if not set(small.vertices) <= set(big.vertices) or not is_hereditary(big, small.vertices):
            raise EmbeddingError("each graph must be a hereditary subgraph of the next")
    spaces = [seed_space(a, d) for a in algs]
    dims = [s.dimension for s in spaces]
    maps = []
    identity = True
    for small, big in zip(algs, spaces[1:]):
        seen = {}
        for s in big.basis:
            p = _seed_parameter(s)
            q = _seed_parameter(restrict_seed(s, small))
            seen[p] = q
            identity &= p == q
        maps.append(seen)
    if dims and all(n == 1 for n in dims):
        name = "K"
    elif dims and all(n == 2 * d + 1 for n in dims):
        name = "K[x,x^-1]"
    else:
        name = None
    stable = identity and name is not None
    return LimitReport(len(graphs), dims, maps, stable, name if stable else None)


# ---------------------------------------------------------------- comets as matrix algebras

def comet_index_set(alg: LeavittAlgebra) -> list[tuple[str, ...]]:
    """Paths ending at the cycle base in which the base occurs only as the final range."""
    g = alg.graph
    test = is_comet(g)
    if not test:
        raise SeedError(f"not a comet: {test.reason}")
    v0 = test.cycle.base
    out = [()]
    frontier = [()]
    while frontier:
        nxt = []
        for p in frontier:
            head = g.source[p[0]] if p else v0
            for e in g.in_edges(head):
                if g.source[e] != v0:
                    nxt.append((e,) + p)
        out.extend(nxt)
        frontier = nxt
    out.sort(key=lambda p: (len(p), tuple(g.edge_index(e) for e in p)))
    return out


class CometMatrixModel:
    """The isomorphism between a comet algebra and a matrix algebra over K[x, x^-1]."""

    def __init__(self, alg: LeavittAlgebra):
        g = alg.graph
        g.require_row_finite("comet matrix model")
        self.alg = alg
        self.index = comet_index_set(alg)
        self.cycle = is_comet(g).cycle
        self.base = self.cycle.base
        self.position = {p: i for i, p in enumerate(self.index)}
        self.starting: dict[str, list[tuple[str, ...]]] = {v: [] for v in g.vertices}
        for p in self.index:
            self.starting[g.source[p[0]] if p else self.base].append(p)

    @property
    def size(self) -> int:
        return len(self.index)

    def _split(self, path: tuple[str, ...]) -> tuple[tuple[str, ...], int]:
        g = self.alg.graph
        cut = next((i for i, e in enumerate(path) if g.source[e] == self.base), len(path))
        gamma, rest = path[:cut], path[cut:]
        c = self.cycle.edges
        k, r = divmod(len(rest), len(c))
        if r or rest != c * k:
            raise SeedError(f"path {'.'.join(path)} does not end in a power of the cycle")
        return gamma, k

    def __call__(self, x: Element) -> LaurentMatrix:
        n = self.size
        acc: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (a, b, w), coeff in x.terms.items():
            for lam in self.starting[w]:
                gamma, k = self._split(a + lam)
                delta, l = self._split(b + lam)
                cell = acc.setdefault((self.position[gamma], self.position[delta]), {})
                cell[k - l] = cell.get(k - l, 0) + coeff
        rows = [[ZERO] * n for _ in range(n)]
        for (i, j), poly in acc.items():
            rows[i][j] = LaurentPoly(poly)
        return LaurentMatrix(rows)


def comet_to_matrix(alg: LeavittAlgebra, x: Element) -> LaurentMatrix:
    return CometMatrixModel(alg)(x)
