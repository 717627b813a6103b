"""Command-line front end: ``gen``, ``sep``, ``partition``, ``verify``, ``bench``.

Exit codes: 0 success, 1 contract violation (failed check, infeasible
parameters, promise broken by the input), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from . import bench
from .decomposition import (DecompositionError, heuristic_tree_decomposition, normalize,
                            read_decomposition)
from .expansion import (PromiseViolation, ShallowModel, check_expansion_result, dominate_merge,
                        expansion_partition, polyexp_partition, verify_shallow_model)
from .graph import GraphError, load_graph, save_graph, write_graph
from .instances import complete, generate, instance_metadata, spec_from_args
from .partition import (Bound, PartitionError, certificate_json, choose_depth, recheck_certificate,
                        star_partition, tdd_partition, treewidth_tdd_partition)
from .separators import (ClassGuarantee, DecompositionEngine, EngineError, SeparatorError,
                         balanced_separator, bfs_layer_engine, centroid_engine, fragment,
                         fragment_bound, report, tree_separator, treewidth_separator)
from .weighted import (GridBlowup, PathBlowup, ProductEmbedding, blowup_separator,
                       separable_transform)


def _num(text: str) -> float | int:
    try:
        return int(text)
    except ValueError:
        return float(text)


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _decomposition(args, g):
    if getattr(args, "decomposition", None):
        with open(args.decomposition) as f:
            td, n = read_decomposition(f)
        if n != g.n:
            raise DecompositionError(f"decomposition is for {n} vertices, graph has {g.n}")
        return td
    return heuristic_tree_decomposition(g)


def _engine(name: str, g, td=None):
    if name == "bfs":
        return bfs_layer_engine
    if name == "centroid":
        return centroid_engine
    return DecompositionEngine(g, td)


# -- subcommands ---------------------------------------------------------------

def cmd_gen(args) -> int:
    inst = generate(spec_from_args(args.family, args.params, args.seed))
    if args.out:
        save_graph(inst.graph, args.out)
        with open(args.out + ".meta.json", "w") as f:
            f.write(instance_metadata(inst) + "\n")
    else:
        write_graph(inst.graph, sys.stdout)
    return 0


def cmd_sep(args) -> int:
    g = load_graph(args.graph)
    if args.method == "balanced":
        rep = balanced_separator(g, _decomposition(args, g))
    elif args.method == "fragment":
        if args.target is None and args.alpha is None:
            raise SystemExit("sep --method fragment needs --target or --alpha")
        target = args.target if args.target is not None else max(1, g.n ** args.alpha)
        td = _decomposition(args, g) if args.engine == "decomposition" else None
        S = fragment(g, _engine(args.engine, g, td), target)
        p = len(S)
        if args.c is not None and args.epsilon is not None and args.alpha is not None:
            p = fragment_bound(ClassGuarantee(args.c, args.epsilon), g.n, args.alpha)
        rep = report(g, S, p, target)
    elif args.method == "tree":
        S = tree_separator(g, int(args.p), args.q)
        rep = report(g, S, args.p, args.q)
    else:
        nd = normalize(g, _decomposition(args, g))
        S = treewidth_separator(g, nd, args.p, args.q)
        rep = report(g, S, args.p, args.q)
    _emit(rep.as_dict(), args.out)
    return 0 if rep.meets_contract else 1


def cmd_partition(args) -> int:
    g = load_graph(args.graph)
    m = args.method
    if m in ("star", "td"):
        guarantee = ClassGuarantee(args.c, args.epsilon)
        td = _decomposition(args, g) if args.engine == "decomposition" else None
        engine = _engine(args.engine, g, td)
        if m == "star":
            fp = star_partition(g, engine, guarantee)
        else:
            depth = args.depth
            if depth is None:
                if args.delta is None:
                    raise SystemExit("partition --method td needs --depth or --delta")
                depth = choose_depth(g.n, args.epsilon, args.delta).d
            fp = tdd_partition(g, engine, guarantee, depth)
        doc = certificate_json(fp.partition, fp.forest, fp.bound)
    elif m == "tw-td":
        if args.depth is None:
            raise SystemExit("partition --method tw-td needs --depth")
        td = _decomposition(args, g)
        fp = treewidth_tdd_partition(g, td, None, args.depth)
        doc = certificate_json(fp.partition, fp.forest, fp.bound)
    elif m in ("expansion", "polyexp"):
        if m == "expansion":
            res = expansion_partition(g, args.ell, args.h)
            extra = {}
        else:
            rep, res = polyexp_partition(g, args.a, args.c, args.gamma)
            extra = {"parameters": rep.__dict__}
        if isinstance(res, PromiseViolation):
            _emit(res.as_dict(), args.out)
            print("input contains a shallow clique model; promise broken", file=sys.stderr)
            return 1
        problems = check_expansion_result(g, res)
        if args.merge:
            merged, witness = dominate_merge(res, g)
            doc = certificate_json(merged, witness, Bound(f"max((h-1)d+1, |Y|) with h={res.h}, d={res.d}",
                                                          max(res.part_cap, len(res.Y))))
        else:
            doc = certificate_json(res.partition, res.host_tw_witness,
                                   Bound(f"(h-1)d+1 with h={res.h}, d={res.d}", res.part_cap), res.Y)
        doc.update(extra)
        if problems:
            doc["problems"] = problems
    elif m == "separable":
        if not args.coords:
            raise SystemExit("partition --method separable needs --coords")
        coords = _read_coords(args.coords, g.n)
        dims = len(coords[0]) - 1
        c = max(x[-1] for x in coords)
        structure = PathBlowup(c) if dims == 1 else GridBlowup(dims, c)
        emb = ProductEmbedding(complete(1), g, tuple((0, v) for v in range(g.n)))
        res = separable_transform(g, emb, blowup_separator(structure, coords))
        if dims == 1:
            bound = Bound(f"sqrt(c*n) with c={c}, n={g.n}", math.sqrt(c * g.n))
        else:
            bound = Bound(f"(d*n)^(d/(d+1))*c^(1/(d+1)) with d={dims}, c={c}, n={g.n}",
                          (dims * g.n) ** (dims / (dims + 1)) * c ** (1 / (dims + 1)))
        doc = certificate_json(res.partition, res.host_tw_witness, bound)
    else:
        raise SystemExit(f"unknown method {m}")
    _emit(doc, args.out)
    return 0 if doc.get("meets_bound", True) and not doc.get("problems") else 1


def _read_coords(path: str, n: int) -> list[tuple[int, ...]]:
    """Either a ``gen`` sidecar (JSON with ``coords``) or lines ``v x_1 ... x_d l``."""
    coords: list[tuple[int, ...] | None] = [None] * n
    with open(path) as f:
        text = f.read()
    if text.lstrip().startswith("{"):
        listed = json.loads(text).get("coords")
        if not listed or len(listed) != n:
            raise GraphError("sidecar has no coordinates for every vertex")
        return [tuple(c) for c in listed]
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        v, *xs = (int(t) for t in line.split())
        coords[v] = tuple(xs)
    if any(c is None for c in coords):
        raise GraphError("coordinates file misses some vertices")
    return coords  # type: ignore[return-value]


def cmd_verify(args) -> int:
    g = load_graph(args.graph)
    with open(args.certificate) as f:
        doc = json.load(f)
    if doc.get("kind") == "shallow-model":
        model = ShallowModel(tuple(tuple(b) for b in doc["branch_sets"]),
                             tuple(doc.get("centers") or [b[0] for b in doc["branch_sets"]]), doc["depth"])
        ok = verify_shallow_model(g, model)
        print("valid shallow model" if ok else "invalid shallow model")
        return 0 if ok else 1
    cert = recheck_certificate(g, doc)
    if cert.valid:
        print(f"valid: width {cert.width}"
              + (f", {cert.witness_kind} witness value {cert.witness_value}" if cert.witness_kind else ""))
        return 0
    for v in cert.violations:
        print(f"violation {v.kind}: {v.where}")
    return 1


def cmd_bench(args) -> int:
    records = bench.bench_suite(args.suite, args.scale, args.dmax, args.jobs)
    text = bench.records_csv(records)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r.passed for r in records) else 1


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prodstruct", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a graph family")
    gen.add_argument("--family", required=True)
    gen.add_argument("--params", nargs="*", default=[])
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out")
    gen.set_defaults(run=cmd_gen)

    sep = sub.add_parser("sep", help="compute a separator")
    sep.add_argument("graph")
    sep.add_argument("--method", choices=["balanced", "fragment", "tree", "tw"], required=True)
    sep.add_argument("--p", type=_num)
    sep.add_argument("--q", type=_num)
    sep.add_argument("--target", type=_num)
    sep.add_argument("--alpha", type=float)
    sep.add_argument("--c", type=float)
    sep.add_argument("--epsilon", type=float)
    sep.add_argument("--engine", choices=["decomposition", "bfs", "centroid"], default="decomposition")
    sep.add_argument("--decomposition")
    sep.add_argument("--out")
    sep.set_defaults(run=cmd_sep)

    part = sub.add_parser("partition", help="build an H-partition certificate")
    part.add_argument("graph")
    part.add_argument("--method", choices=["star", "td", "tw-td", "expansion", "polyexp", "separable"],
                      required=True)
    part.add_argument("--epsilon", type=float, default=0.5)
    part.add_argument("--c", type=float, default=2.0)
    part.add_argument("--delta", type=float)
    part.add_argument("--depth", type=int)
    part.add_argument("--ell", type=float, default=2.0)
    part.add_argument("--h", type=int, default=5)
    part.add_argument("--a", type=float, default=1.0)
    part.add_argument("--gamma", type=float, default=0.25)
    part.add_argument("--engine", choices=["decomposition", "bfs", "centroid"], default="decomposition")
    part.add_argument("--decomposition")
    part.add_argument("--coords")
    part.add_argument("--merge", action="store_true", help="put the apex set back as a dominant part")
    part.add_argument("--out")
    part.set_defaults(run=cmd_partition)

    ver = sub.add_parser("verify", help="re-check a certificate against a graph")
    ver.add_argument("graph")
    ver.add_argument("certificate")
    ver.set_defaults(run=cmd_verify)

    b = sub.add_parser("bench", help="run a benchmark suite and print CSV")
    b.add_argument("--suite", choices=bench.SUITES, required=True)
    b.add_argument("--scale", type=int)
    b.add_argument("--dmax", type=int, default=4)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(run=cmd_bench)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    needs_pq = args.command == "sep" and args.method in ("tree", "tw")
    if needs_pq and (args.p is None or args.q is None):
        parser.error(f"sep --method {args.method} needs --p and --q")
    try:
        return args.run(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 2
        raise
    except (SeparatorError, EngineError, PartitionError, DecompositionError, GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
