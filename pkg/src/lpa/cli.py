"""Command line front end: ``lpa {analyze,centroid,eval,comet-iso,corpus,verify}``.

JSON documents are the contract; text output is rendered from them.
Exit codes: 0 ok, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .algebra import ElementParseError, EngineError, LeavittAlgebra, grade, parse_expression, partial_B
from .classify import Classification, certify, classify, corpus_run, properties
from .graph import GraphError, hs_subsets, mt3_witness, parse_graph
from .limits import CometMatrixModel
from .verify import run_battery

DEFAULT_DEGREE = 6
HS_ENUMERATION_LIMIT = 8

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class CliError(Exception):
    def __init__(self, code: str, message: str, **extra):
        super().__init__(message)
        self.code = code
        self.extra = extra


@dataclass
class RunConfig:
    command: str
    paths: list[str]
    degree: int = DEFAULT_DEGREE
    fmt: str = "text"
    seed: int = 0
    certify: bool = False
    exprs: list[str] = field(default_factory=list)
    timings: bool = False

    def __post_init__(self):
        if self.degree < 1:
            raise CliError("usage_error", "degree bound must be at least 1")


def resolve_degree(flag: int | None) -> int:
    """``--degree`` wins, then ``LPA_DEGREE``, then the default."""
    if flag is not None:
        return flag
    env = os.environ.get("LPA_DEGREE")
    if env is None or env == "":
        return DEFAULT_DEGREE
    try:
        return int(env)
    except ValueError:
        raise CliError("usage_error", f"LPA_DEGREE must be an integer, got {env!r}") from None


def load_graph(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError("io_error", f"cannot read {path}: {exc}") from None
    try:
        return parse_graph(text)
    except GraphError as exc:
        raise CliError("parse_error", f"{path}: {exc}", line=exc.line) from None


def dump(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------- commands

def _cycle_summary(props: dict) -> str:
    cs = props["cycles"]
    if not cs:
        return "cycles: 0"
    exit_vertices = []
    for c in cs:
        for v, _ in c["exits"]:
            if v not in exit_vertices:
                exit_vertices.append(v)
    if not exit_vertices:
        return f"cycles: {len(cs)} (no exits)"
    return f"cycles: {len(cs)}; exit at {', '.join(exit_vertices)}"


def _yn(x) -> str:
    return "n/a" if x is None else ("yes" if x else "no")


def analyze_doc(cfg: RunConfig) -> dict:
    g = load_graph(cfg.paths[0])
    props = properties(g)
    doc = {"graph": Path(cfg.paths[0]).stem, "properties": props}
    if g.row_finite and len(g.vertices) <= HS_ENUMERATION_LIMIT:
        doc["hs_subsets"] = [g.sorted_vertices(H) for H in hs_subsets(g)]
    else:
        doc["hs_subsets"] = None
    doc["mt3_witness"] = list(mt3_witness(g) or []) or None
    return doc


def render_analyze(doc: dict) -> str:
    p = doc["properties"]
    mt3_text = "yes" if p["mt3"] else f"no ({','.join(doc['mt3_witness'])})"
    lines = [
        f"graph: {doc['graph']} ({p['vertices']} vertices, {p['edges']} edges)",
        f"sinks: {' '.join(p['sinks']) or '-'}; regular: {' '.join(p['regular']) or '-'}; "
        f"infinite emitters: {' '.join(p['inf_emitters']) or '-'}",
        f"comet: {_yn(p['comet'])}; {_cycle_summary(p)}; MT3: {mt3_text}",
    ]
    for c in p["cycles"]:
        exits = ", ".join(f"{v}" + (f" ({e})" if e else " (infinite emitter)") for v, e in c["exits"]) or "none"
        lines.append(f"  cycle {'.'.join(c['cycle'])} at {c['base']}: exits {exits}")
    lines.append(
        f"condition L: {_yn(p['condition_L'])}; graded simple: {_yn(p['graded_simple'])}; simple: {_yn(p['simple'])}"
    )
    if doc["hs_subsets"] is not None:
        subsets = ", ".join("{" + ",".join(H) + "}" for H in doc["hs_subsets"])
        lines.append(f"hereditary saturated subsets ({len(doc['hs_subsets'])}): {subsets}")
    return "\n".join(lines)


def centroid_doc(cfg: RunConfig) -> tuple[dict, int]:
    g = load_graph(cfg.paths[0])
    cl = classify(g)
    doc = {
        "graph": Path(cfg.paths[0]).stem,
        "properties": properties(g),
        "verdict": cl.verdict,
        "branch": cl.branch,
        "centroid": cl.centroid,
        "certificate": cl.certificate,
        "degree": cfg.degree,
        "seed_dims": None,
        "stable": None,
    }
    code = EXIT_OK
    if cfg.certify:
        rep = certify(g, cl, cfg.degree)
        doc["seed_dims"] = {str(k): v for k, v in rep.seed_dims.items()} if rep.seed_dims else None
        doc["stable"] = rep.stable
        doc["certified"] = rep.ok
        doc["failures"] = rep.failures
        code = EXIT_OK if rep.ok else EXIT_FAIL
    return doc, code


def render_centroid(doc: dict) -> str:
    lines = [f"graph: {doc['graph']}", f"verdict: {doc['verdict']}" + (f" ({doc['branch']})" if doc["branch"] else "")]
    if doc["centroid"]:
        lines.append(f"centroid: {doc['centroid']}")
    cert = doc["certificate"]
    if "mt3_witness" in cert:
        lines.append(f"MT3 fails for ({', '.join(cert['mt3_witness'])})")
    if "cycle" in cert:
        lines.append(f"cycle: {'.'.join(cert['cycle'])}")
    if "exit" in cert:
        e = cert["exit"]
        lines.append(f"exit: {e['edge'] or 'undeclared edge'} at {e['vertex']}")
    if "emitter" in cert:
        lines.append(f"infinite emitter: {cert['emitter']}")
    if "certified" in doc:
        dims = ", ".join(f"d={k}: {v}" for k, v in (doc["seed_dims"] or {}).items()) or "not computed"
        lines.append(f"seed dimensions: {dims}; stable: {_yn(doc['stable'])}")
        lines.append("certificate: " + ("ok" if doc["certified"] else "FAILED"))
        lines.extend(f"  {f}" for f in doc["failures"])
    return "\n".join(lines)


def _algebra(g) -> LeavittAlgebra:
    try:
        return LeavittAlgebra(g)
    except (GraphError, EngineError) as exc:
        raise CliError("unsupported_graph", str(exc)) from None


def _parse(alg, text: str):
    try:
        return parse_expression(alg, text)
    except ElementParseError as exc:
        raise CliError("parse_error", f"in {text!r}: {exc}", position=exc.position) from None


def eval_doc(cfg: RunConfig) -> dict:
    alg = _algebra(load_graph(cfg.paths[0]))
    x = None
    for t in cfg.exprs:
        y = _parse(alg, t)
        x = y if x is None else x * y
    return {
        "input": cfg.exprs,
        "normal_form": str(x),
        "grading": {str(k): str(v) for k, v in sorted(grade(x).items())},
        "partial_B": partial_B(x),
        "basis": alg.basis_header(),
    }


def render_eval(doc: dict) -> str:
    lines = [f"normal form: {doc['normal_form']}"]
    lines += [f"  degree {k}: {v}" for k, v in doc["grading"].items()]
    lines.append(f"partial_B: {doc['partial_B']}")
    return "\n".join(lines)


def comet_iso_doc(cfg: RunConfig) -> dict:
    alg = _algebra(load_graph(cfg.paths[0]))
    try:
        phi = CometMatrixModel(alg)
    except (GraphError, EngineError) as exc:
        raise CliError("unsupported_graph", str(exc)) from None
    x = _parse(alg, cfg.exprs[0])
    return {
        "element": str(x),
        "index": [".".join(p) or phi.base for p in phi.index],
        "matrix": phi(x).to_json(),
    }


def render_comet_iso(doc: dict) -> str:
    return "\n".join([
        f"element: {doc['element']}",
        f"index: {', '.join(doc['index'])}",
        "matrix: [" + ", ".join("[" + ", ".join(r) + "]" for r in doc["matrix"]) + "]",
    ])


def corpus_doc(cfg: RunConfig) -> tuple[list, int]:
    d = Path(cfg.paths[0])
    if not d.is_dir():
        raise CliError("io_error", f"{d} is not a directory")
    rows = corpus_run(d, cfg.degree, do_certify=True, timings=cfg.timings)
    bad = any("error" in r or not r.get("certified", True) for r in rows)
    return rows, EXIT_FAIL if bad else EXIT_OK


def render_corpus(rows: list) -> str:
    lines = []
    for r in rows:
        if "error" in r:
            lines.append(f"{r['graph']:<24} ERROR {r['error']}")
            continue
        dims = ",".join(f"{v}" for v in (r["seed_dims"] or {}).values()) or "-"
        status = "ok" if r["certified"] else "FAILED"
        lines.append(f"{r['graph']:<24} {r['verdict']:<14} {r['branch'] or '-':<16} dims={dims:<6} {status}")
    return "\n".join(lines)


def load_corpus(directory: str):
    d = Path(directory)
    if not d.is_dir():
        raise CliError("io_error", f"{d} is not a directory")
    return [(p.stem, load_graph(str(p))) for p in sorted(d.glob("*.graph"), key=lambda p: p.name)]


def load_certificates(directory: str, names) -> dict[str, Classification]:
    """Optional ``<name>.cert.json`` files, in the format of ``centroid --json``."""
    out = {}
    for name in names:
        p = Path(directory) / f"{name}.cert.json"
        if not p.exists():
            continue
        try:
            out[name] = Classification.from_dict(json.loads(p.read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CliError("parse_error", f"{p}: malformed certificate ({exc})") from None
    return out


def verify_doc(cfg: RunConfig) -> tuple[dict, int]:
    graphs = load_corpus(cfg.paths[0])
    certs = load_certificates(cfg.paths[0], [n for n, _ in graphs])
    results = run_battery(graphs, cfg.seed, certs) if graphs else []
    doc = {
        "corpus": cfg.paths[0],
        "graphs": len(graphs),
        "certificates": sorted(certs),
        "seed": cfg.seed,
        "warning": "empty corpus" if not graphs else None,
        "checks": [r.to_json() for r in results],
        "ok": all(r.ok for r in results),
    }
    return doc, EXIT_OK if doc["ok"] else EXIT_FAIL


def render_verify(doc: dict) -> str:
    lines = [f"corpus: {doc['corpus']} ({doc['graphs']} graphs, seed {doc['seed']})"]
    if doc["warning"]:
        lines.append(f"warning: {doc['warning']}")
    for c in doc["checks"]:
        lines.append(f"[{'PASS' if c['ok'] else 'FAIL'}] {c['criterion']}. {c['name']}")
        lines.extend(f"    {d}" for d in c["detail"][:5])
    lines.append("all checks passed" if doc["ok"] else "verification FAILED")
    return "\n".join(lines)


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpa", description="Leavitt path algebras over Q: centroids and certificates.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, degree=False):
        p.add_argument("--json", action="store_true", help="emit JSON")
        if degree:
            p.add_argument("--degree", type=int, default=None, help=f"seed-space degree bound (default: $LPA_DEGREE or {DEFAULT_DEGREE})")

    p = sub.add_parser("analyze", help="structural properties of a graph")
    p.add_argument("file")
    common(p)
    p = sub.add_parser("centroid", help="classify the centroid")
    p.add_argument("file")
    p.add_argument("--certify", action="store_true", help="re-check the certificate and seed dimensions")
    common(p, degree=True)
    p = sub.add_parser("eval", help="normal form of a product of expressions")
    p.add_argument("file")
    p.add_argument("exprs", nargs="+", metavar="expr")
    common(p)
    p = sub.add_parser("comet-iso", help="image of an element in the matrix model of a comet")
    p.add_argument("file")
    p.add_argument("--element", required=True)
    common(p)
    p = sub.add_parser("corpus", help="classify and certify every *.graph file in a directory")
    p.add_argument("dir")
    p.add_argument("--timings", action="store_true", help="include per-graph timings (breaks byte-identical output)")
    common(p, degree=True)
    p = sub.add_parser("verify", help="run the invariant battery over a corpus")
    p.add_argument("dir")
    p.add_argument("--seed", type=int, default=0, help="random seed for sampled checks")
    common(p)
    return ap


def config_from_args(ns) -> RunConfig:
    cmd = ns.command
    paths = [getattr(ns, "file", None) or getattr(ns, "dir")]
    exprs = list(getattr(ns, "exprs", []) or [])
    if cmd == "comet-iso":
        exprs = [ns.element]
    degree = resolve_degree(getattr(ns, "degree", None))
    return RunConfig(
        command=cmd,
        paths=paths,
        degree=degree,
        fmt="json" if ns.json else "text",
        seed=getattr(ns, "seed", 0),
        certify=getattr(ns, "certify", False),
        exprs=exprs,
        timings=getattr(ns, "timings", False),
    )


HANDLERS = {
    "analyze": (lambda c: (analyze_doc(c), EXIT_OK), render_analyze),
    "centroid": (centroid_doc, render_centroid),
    "eval": (lambda c: (eval_doc(c), EXIT_OK), render_eval),
    "comet-iso": (lambda c: (comet_iso_doc(c), EXIT_OK), render_comet_iso),
    "corpus": (corpus_doc, render_corpus),
    "verify": (verify_doc, render_verify),
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    json_mode = getattr(ns, "json", False)
    try:
        cfg = config_from_args(ns)
        make, render = HANDLERS[cfg.command]
        doc, code = make(cfg)
    except CliError as exc:
        err = {"error": exc.code, "message": str(exc), **exc.extra}
        print(dump(err) if json_mode else f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(dump(doc) if cfg.fmt == "json" else render(doc))
    if cfg.command == "verify" and cfg.fmt == "json" and doc.get("warning"):
        print(f"warning: {doc['warning']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
