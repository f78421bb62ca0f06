"""Classify and certify every graph in a directory and print a table (or JSON)."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from lpa.classify import corpus_run

DEFAULT_CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("dir", nargs="?", default=str(DEFAULT_CORPUS))
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    rows = corpus_run(args.dir, d=args.degree, timings=True)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'graph':<22} {'verdict':<14} {'branch':<16} {'dims':<8} {'cert':<5} ms")
    for r in rows:
        if "error" in r:
            print(f"{r['graph']:<22} error: {r['error']}")
            continue
        dims = ",".join(str(v) for v in (r["seed_dims"] or {}).values()) or "-"
        print(
            f"{r['graph']:<22} {r['verdict']:<14} {r['branch'] or '-':<16} {dims:<8} "
            f"{'ok' if r['certified'] else 'FAIL':<5} {r['time_ms']}"
        )


if __name__ == "__main__":
    main()
