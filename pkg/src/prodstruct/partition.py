"""H-partitions: the data type, the checker, and the constructions that
produce them (star hosts, closures of shallow forests, treewidth-driven
forests).

A graph ``G`` has an H-partition of width ``m`` exactly when ``G`` is a
subgraph of ``H ⊠ K_m``, so every construction here doubles as a
containment certificate.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .decomposition import (InstanceTooLarge, NormalizedDecomposition, RootedForest,
                            TreeDecomposition, Violation, decomposition_from_bags,
                            exact_limit, localize_decomposition, normalize,
                            restrict_decomposition, validate_decomposition)
from .graph import (Graph, GraphError, VertexSet, build_graph, components_within, induced,
                    is_clique, vertex_set)
from .separators import (ClassGuarantee, Engine, REL_SLACK, fragment, safe_floor,
                         treewidth_separator)


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Bound:
    formula: str
    value: float

    def holds(self, achieved: float) -> bool:
        return achieved <= self.value * (1 + REL_SLACK) + REL_SLACK

    def as_dict(self) -> dict:
        return {"formula": self.formula, "value": self.value}


@dataclass(frozen=True)
class HPartition:
    """Parts indexed ``0..len(parts)-1``; ``host`` is a graph on those indices.

    ``part_of[v]`` is ``-1`` for vertices outside the partitioned domain
    (e.g. an apex set removed before partitioning).
    """

    parts: tuple[VertexSet, ...]
    host: Graph
    part_of: tuple[int, ...]

    @property
    def width(self) -> int:
        return max((len(p) for p in self.parts), default=0)

    @property
    def domain(self) -> VertexSet:
        return vertex_set(v for p in self.parts for v in p)


def make_partition(n: int, parts: Sequence[Iterable[int]],
                   host_edges: Iterable[Sequence[int]] = ()) -> HPartition:
    ps = tuple(vertex_set(p) for p in parts)
    part_of = [-1] * n
    for i, p in enumerate(ps):
        for v in p:
            if not 0 <= v < n:
                raise PartitionError(f"vertex {v} outside 0..{n - 1}")
            if part_of[v] != -1:
                raise PartitionError(f"vertex {v} lies in two parts")
            part_of[v] = i
    return HPartition(ps, build_graph(len(ps), host_edges), tuple(part_of))


@dataclass
class PartitionCertificate:
    valid: bool
    width: int
    witness_kind: str | None = None
    witness: object = None
    witness_value: int | None = None
    violations: list[Violation] = field(default_factory=list)


def verify_hpartition(g: Graph, p: HPartition, domain: Iterable[int] | None = None,
                      witness: object = None) -> PartitionCertificate:
    """Recheck ``p`` against ``g`` from scratch.

    ``domain`` (default: all vertices) is the vertex set that must be covered.
    ``witness`` may be a :class:`RootedForest` (host must lie in its closure;
    the value reported is its vertex-height), a :class:`TreeDecomposition`
    (must decompose the host; value = width), or a vertex set of the host
    (must be a clique; value = its size).
    """
    out: list[Violation] = []
    want = set(range(g.n) if domain is None else domain)
    owner: dict[int, int] = {}
    for i, part in enumerate(p.parts):
        if not part:
            out.append(Violation("empty-part", i))
        for v in part:
            if v in owner:
                out.append(Violation("overlap", v))
            elif not 0 <= v < g.n:
                out.append(Violation("bad-vertex", v))
            else:
                owner[v] = i
    for v in sorted(want - set(owner)):
        out.append(Violation("uncovered", v))
    for v in sorted(set(owner) - want):
        out.append(Violation("outside-domain", v))
    if p.host.n != len(p.parts):
        out.append(Violation("host-size", (p.host.n, len(p.parts))))
    else:
        for u, v in g.edges():
            a, b = owner.get(u), owner.get(v)
            if a is None or b is None or a == b:
                continue
            if not p.host.has_edge(a, b):
                out.append(Violation("edge", (u, v)))
    kind = value = None
    if isinstance(witness, RootedForest):
        kind, value = "forest", witness.vertex_height
        if witness.size != p.host.n:
            out.append(Violation("forest-size", (witness.size, p.host.n)))
        else:
            for a, b in p.host.edges():
                if not (witness.is_ancestor(a, b) or witness.is_ancestor(b, a)):
                    out.append(Violation("host-edge-outside-closure", (a, b)))
    elif isinstance(witness, TreeDecomposition):
        kind, value = "decomposition", witness.width
        out.extend(Violation("host-" + x.kind, x.where) for x in validate_decomposition(p.host, witness))
    elif witness is not None:
        clique = vertex_set(witness)
        kind, value = "clique", len(clique)
        if any(not 0 <= x < p.host.n for x in clique) or not is_clique(p.host, clique):
            out.append(Violation("not-a-clique", clique))
    return PartitionCertificate(not out, p.width, kind, witness, value, out)


def quotient(g: Graph, parts: Sequence[Iterable[int]]) -> Graph:
    """Minimal host: ``ij`` is an edge iff some edge of ``g`` joins parts i, j."""
    p = make_partition(g.n, parts)
    if any(x == -1 for x in p.part_of):
        raise PartitionError("parts do not cover every vertex")
    edges = {(min(a, b), max(a, b)) for u, v in g.edges()
             for a, b in [(p.part_of[u], p.part_of[v])] if a != b}
    return build_graph(len(p.parts), sorted(edges))


# -- forest-shaped results ------------------------------------------------------

@dataclass(frozen=True)
class ForestPartition:
    partition: HPartition
    forest: RootedForest
    bound: Bound | None = None


class _ForestBuilder:
    def __init__(self) -> None:
        self.parts: list[VertexSet] = []
        self.parent: list[int | None] = []

    def add(self, part: Iterable[int], parent: int | None) -> int:
        self.parts.append(vertex_set(part))
        self.parent.append(parent)
        return len(self.parts) - 1

    def finish(self, n: int, bound: Bound | None = None) -> ForestPartition:
        forest = RootedForest(tuple(self.parent))
        host = forest.closure()
        p = make_partition(n, self.parts, host.edges())
        return ForestPartition(p, forest, bound)


def star_partition(g: Graph, engine: Engine, guarantee: ClassGuarantee) -> ForestPartition:
    """Centre part = the fragmentation set for target ``n^(1/(1+eps))``;
    every remaining component is a leaf part."""
    n = g.n
    if n == 0:
        raise PartitionError("empty graph has no partition")
    eps = guarantee.epsilon
    S = fragment(g, engine, max(1, safe_floor(n ** (1 / (1 + eps)))))
    rest = components_within(g, [v for v in range(n) if v not in set(S)])
    fb = _ForestBuilder()
    if S:
        centre = fb.add(S, None)
    else:
        centre = fb.add(rest[0], None)
        rest = rest[1:]
    for comp in rest:
        fb.add(comp, centre)
    const = max(guarantee.fragment_constant, 1.0)
    value = const * n ** (1 / (1 + eps))
    return fb.finish(n, Bound(f"max(c*2^e/(2^e-1),1)*n^(1/(1+e)) with c={guarantee.c:g}, e={eps:g}, n={n}",
                              value))


def tdd_exponent(eps: float, d: int) -> float:
    return (1 - eps) / (1 - eps ** d)


def tdd_bound(guarantee: ClassGuarantee, n: int, d: int) -> Bound:
    c, e = guarantee.c, guarantee.epsilon
    value = guarantee.fragment_constant * n ** tdd_exponent(e, d)
    return Bound(f"c*2^e/(2^e-1)*n^((1-e)/(1-e^d)) with c={c:g}, e={e:g}, d={d}, n={n}", value)


def tdd_partition(g: Graph, engine: Engine, guarantee: ClassGuarantee, d: int) -> ForestPartition:
    """Forest of height at most ``d``: the root part is the fragmentation set
    for target ``n^alpha``, ``alpha = (1-eps^(d-1))/(1-eps^d)``, and each
    remaining component is handled with ``d - 1``.

    If the fragmentation set comes back empty the graph is already in small
    pieces; each component is then handled with the same ``d`` as a separate
    tree (no empty root part is created).
    """
    if d < 1:
        raise PartitionError("depth must be at least 1")
    if g.n == 0:
        raise PartitionError("empty graph has no partition")
    eps = guarantee.epsilon
    fb = _ForestBuilder()

    def grow(vertices: VertexSet, depth: int, above: int | None) -> None:
        if depth == 1:
            fb.add(vertices, above)
            return
        alpha = (1 - eps ** (depth - 1)) / (1 - eps ** depth)
        target = max(1, safe_floor(len(vertices) ** alpha))
        sub = induced(g, vertices)
        S = sub.lift(fragment(sub.graph, _local_engine(engine, sub), target))
        rest = components_within(g, [v for v in vertices if v not in set(S)])
        if S:
            root = fb.add(S, above)
            for comp in rest:
                grow(comp, depth - 1, root)
        elif len(rest) == 1:
            fb.add(rest[0], above)
        else:
            for comp in rest:
                grow(comp, depth, above)

    grow(tuple(range(g.n)), d, None)
    return fb.finish(g.n, tdd_bound(guarantee, g.n, d))


def _local_engine(engine: Engine, view) -> Engine:
    """Adapt an engine on the parent graph to the relabelled subgraph."""
    def run(_g: Graph, vertices: Sequence[int]):
        return view.lower(engine(view.parent, view.lift(vertices)))
    return run


# -- depth schedules --------------------------------------------------------

@dataclass(frozen=True)
class DepthChoice:
    d: int
    bound: Bound


def choose_depth(n: int, epsilon: float, delta: float | None = None, schedule: str = "fixed",
                 h: Callable[[int], float] | None = None, c: float = 1.0) -> DepthChoice:
    """Pick the forest height for a separator exponent ``epsilon``.

    ``fixed``: smallest d with ``eps^d (1-eps+delta) <= delta``, bound
    ``c 2^e/(2^e-1) n^(1-e+delta)``. ``slow``: ``d = ceil(h(n))`` with the gap
    ``delta(n) = (1-e)((1-e^h(n))^-1 - 1)``. ``loglog``:
    ``d = ceil(log(1 + log n)/(-log e))`` and bound ``2c/(2^e-1) n^(1-e)``.
    Logarithms are base 2.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0,1)")
    if n < 1:
        raise ValueError("n must be positive")
    t = 2 ** float(epsilon)
    gamma = c * t / (t - 1)
    e = float(epsilon)
    if schedule == "fixed":
        if delta is None or not 0 < delta < epsilon:
            raise ValueError("fixed schedule needs 0 < delta < epsilon")
        exact = isinstance(epsilon, (int, Fraction)) and isinstance(delta, (int, Fraction))
        d = 1
        while True:
            lhs = Fraction(epsilon) ** d * (1 - Fraction(epsilon) + Fraction(delta)) if exact \
                else e ** d * (1 - e + float(delta))
            if (lhs <= delta) if exact else lhs <= float(delta) * (1 + 1e-12):
                break
            d += 1
        dl = float(delta)
        return DepthChoice(d, Bound(f"{gamma:.6g}*n^(1-{e:g}+{dl:g}) with n={n}", gamma * n ** (1 - e + dl)))
    if schedule == "slow":
        if h is None:
            raise ValueError("slow schedule needs a function h")
        hn = float(h(n))
        if hn < 1:
            raise ValueError("h(n) must be at least 1")
        gap = (1 - e) * (1 / (1 - e ** hn) - 1)
        return DepthChoice(math.ceil(hn - 1e-12),
                           Bound(f"{gamma:.6g}*n^(1-{e:g}+{gap:.6g}) with n={n}", gamma * n ** (1 - e + gap)))
    if schedule == "loglog":
        d = max(1, math.ceil(math.log2(1 + math.log2(n)) / (-math.log2(e)) - 1e-12))
        value = 2 * c / (t - 1) * n ** (1 - e)
        return DepthChoice(d, Bound(f"2*{c:g}/(2^{e:g}-1)*n^(1-{e:g}) with n={n}", value))
    raise ValueError(f"unknown schedule {schedule!r}")


# -- treewidth-driven partitions ----------------------------------------------

def treewidth_tdd_bound(k: int, n: int, d: int) -> Bound:
    value = (k + 1) ** (1 - 1 / d) * n ** (1 / d)
    return Bound(f"(k+1)^(1-1/d)*n^(1/d) with k={k}, d={d}, n={n}", value)


def treewidth_tdd_partition(g: Graph, nd: TreeDecomposition, k: int | None, d: int) -> ForestPartition:
    """Forest of height at most ``d`` and width at most
    ``(k+1)^(1-1/d) n^(1/d)``.

    At each level the current piece (``n'`` vertices, local width ``k'``)
    is split by :func:`treewidth_separator` with ``p = (k'+1)^(1-1/d) n'^(1/d)``
    and ``q = (k'+1)^(1/d) n'^(1-1/d)`` (so ``pq = n'(k'+1)``); components
    recurse with ``d - 1``. A piece that already fits under ``p`` becomes
    one part.
    """
    if d < 1:
        raise PartitionError("depth must be at least 1")
    problems = validate_decomposition(g, nd)
    if problems:
        raise PartitionError(f"invalid decomposition: {problems[:3]}")
    width = nd.width if k is None else k
    if nd.width > width:
        raise PartitionError(f"decomposition has width {nd.width} > k={width}")
    fb = _ForestBuilder()

    def grow(vertices: VertexSet, td_local: TreeDecomposition, depth: int, above: int | None) -> None:
        n = len(vertices)
        kk = td_local.width
        p = (kk + 1) ** (1 - 1 / depth) * n ** (1 / depth)
        if depth == 1 or n <= safe_floor(p):
            fb.add(vertices, above)
            return
        q = (kk + 1) ** (1 / depth) * n ** (1 - 1 / depth)
        view = induced(g, vertices)
        local = normalize(view.graph, td_local)
        S = view.lift(treewidth_separator(view.graph, local, p, q, mode="real"))
        root = fb.add(S, above)
        for comp in components_within(g, [v for v in vertices if v not in set(S)]):
            sub = localize_decomposition(restrict_decomposition(td_local, view.lower(comp)),
                                         {v: i for i, v in enumerate(view.lower(comp))})
            grow(comp, sub, depth - 1, root)

    # td_local is always expressed in ids local to the current vertex list
    grow(tuple(range(g.n)), nd, d, None)
    return fb.finish(g.n, treewidth_tdd_bound(width, g.n, d))


def path_lower_bound_check(n: int, d: int, m: int) -> bool:
    """False iff ``n > (2m)^d``, i.e. no height-d host of width m holds ``P_n``."""
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    return n <= (2 * m) ** d


def tdd_partition_feasible(g: Graph, d: int, m: int, limit: int | None = None) -> bool:
    """Exhaustive: does ``g`` have an H-partition of width at most ``m`` with
    ``td(H) <= d``? A connected piece either fits in one part or some set of
    at most ``m`` vertices becomes the root part and the rest has height d-1."""
    from itertools import combinations
    cap = exact_limit(12) if limit is None else limit
    if g.n > cap:
        raise InstanceTooLarge(f"exhaustive partition search capped at {cap} vertices")

    @lru_cache(maxsize=None)
    def ok(vs: VertexSet, depth: int) -> bool:
        return all(piece_ok(c, depth) for c in components_within(g, vs))

    @lru_cache(maxsize=None)
    def piece_ok(comp: VertexSet, depth: int) -> bool:
        if len(comp) <= m:
            return True
        if depth <= 1:
            return False
        if piece_ok(comp, depth - 1):
            return True
        for size in range(1, m + 1):
            for root in combinations(comp, size):
                rs = set(root)
                if ok(tuple(v for v in comp if v not in rs), depth - 1):
                    return True
        return False

    return ok(tuple(range(g.n)), d)


# -- certificates ------------------------------------------------------------

def certificate_json(p: HPartition, witness: object = None, bound: Bound | None = None,
                     removed: Iterable[int] | None = None) -> dict:
    out: dict = {"parts": [list(x) for x in p.parts],
                 "host_edges": [list(e) for e in p.host.edges()],
                 "width": p.width}
    if isinstance(witness, RootedForest):
        out["witness"] = {"kind": "forest", "parent": list(witness.parent),
                          "height": witness.vertex_height}
    elif isinstance(witness, TreeDecomposition):
        out["witness"] = {"kind": "decomposition", "bags": [list(b) for b in witness.bags],
                          "tree_edges": [list(e) for e in witness.tree.edges()],
                          "width": witness.width}
    elif witness is not None:
        out["witness"] = {"kind": "clique", "vertices": list(witness)}
    if bound is not None:
        out["bound"] = bound.as_dict()
        out["meets_bound"] = bound.holds(p.width)
    if removed is not None:
        out["removed"] = sorted(removed)
    return out


def read_certificate(doc: dict, n: int) -> tuple[HPartition, object, list[int] | None]:
    """(partition, witness, removed set) from a certificate dict."""
    try:
        parts = doc["parts"]
        p = make_partition(n, parts, doc.get("host_edges", ()))
    except (KeyError, TypeError, GraphError) as exc:
        raise PartitionError(f"malformed certificate: {exc}") from None
    w = doc.get("witness")
    witness: object = None
    if w:
        kind = w.get("kind")
        if kind == "forest":
            witness = RootedForest(tuple(w["parent"]))
        elif kind == "decomposition":
            witness = decomposition_from_bags(w["bags"], w["tree_edges"])
        elif kind == "clique":
            witness = tuple(w["vertices"])
        else:
            raise PartitionError(f"unknown witness kind {kind!r}")
    return p, witness, doc.get("removed")


def recheck_certificate(g: Graph, doc: dict) -> PartitionCertificate:
    """Rebuild and verify a certificate, including its claimed width, witness
    value and bound verdict."""
    p, witness, removed = read_certificate(doc, g.n)
    domain = None if removed is None else [v for v in range(g.n) if v not in set(removed)]
    cert = verify_hpartition(g, p, domain, witness)
    if doc.get("width") is not None and doc["width"] != p.width:
        cert.violations.append(Violation("width-claim", (doc["width"], p.width)))
    w = doc.get("witness") or {}
    for key in ("height", "width"):
        if key in w and w[key] != cert.witness_value:
            cert.violations.append(Violation(f"witness-{key}-claim", (w[key], cert.witness_value)))
    if "bound" in doc and "meets_bound" in doc:
        honest = p.width <= doc["bound"]["value"] * (1 + REL_SLACK) + REL_SLACK
        if honest != doc["meets_bound"]:
            cert.violations.append(Violation("bound-claim", doc["meets_bound"]))
    cert.valid = not cert.violations
    return cert


def dump_certificate(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True)
