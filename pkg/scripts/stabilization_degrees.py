"""Empirical stabilization degree of the truncated seed space, per corpus graph.

For each prime row-finite graph, report the smallest d such that the seed
space has the dimension predicted by the verdict (1, or 2d+1 for comets) at
d, d+1 and d+2.  Two truncations are compared: the per-vertex budgets used by
the engine, and the literal bound |alpha|, |beta| <= d at every vertex.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from lpa.algebra import LeavittAlgebra
from lpa.centroid import seed_space
from lpa.classify import classify
from lpa.graph import parse_graph

DEFAULT_CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def expected(centroid: str, d: int) -> int:
    return 2 * d + 1 if centroid == "K[x,x^-1]" else 1


def first_stable(alg, centroid, max_d, literal):
    dims = []
    for d in range(1, max_d + 1):
        budgets = {v: d for v in alg.graph.vertices} if literal else None
        dims.append(seed_space(alg, d, budgets).dimension)
    ok = [n == expected(centroid, d) for d, n in enumerate(dims, 1)]
    for i in range(len(ok) - 2):
        if all(ok[i:]):
            return i + 1, dims
    return None, dims


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dir", nargs="?", default=str(DEFAULT_CORPUS))
    ap.add_argument("--max-degree", type=int, default=5)
    args = ap.parse_args()

    print(f"{'graph':<22} {'centroid':<10} {'budgeted':<9} {'literal':<8} literal dims")
    for path in sorted(Path(args.dir).glob("*.graph")):
        g = parse_graph(path.read_text())
        cl = classify(g)
        if not g.row_finite or cl.verdict == "NotPrime":
            continue
        alg = LeavittAlgebra(g)
        b, _ = first_stable(alg, cl.centroid, args.max_degree, literal=False)
        lit, ldims = first_stable(alg, cl.centroid, args.max_degree, literal=True)
        print(f"{path.stem:<22} {cl.centroid:<10} {str(b or '-'):<9} {str(lit or '-'):<8} {ldims}")


if __name__ == "__main__":
    main()
