"""Weighted separators and the transform that turns a product embedding
``G ⊆ H ⊠ J`` into a bounded-width partition over copies of ``H``.

A graph ``J`` is (n, m)-separable when every non-negative weighting of total
``n`` admits a set of weight at most ``m`` whose removal leaves components
of at most ``m`` vertices. The separators here all pick the lightest class
of a covering family (residue classes of coordinates, or depth classes of
a rooted tree); ties go to the lightest class, then the smallest index.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .decomposition import TreeDecomposition, heuristic_tree_decomposition
from .graph import (Graph, GraphError, VertexSet, build_graph, components_within, is_tree,
                    vertex_set)
from .partition import HPartition, make_partition
from .separators import SeparatorReport, report


@dataclass(frozen=True)
class WeightedGraph:
    graph: Graph
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.weights) != self.graph.n:
            raise GraphError("one weight per vertex is required")
        if any(w < 0 or math.isnan(w) for w in self.weights):
            raise GraphError("weights must be non-negative")

    @property
    def total(self) -> float:
        return math.fsum(self.weights)

    def weight_of(self, vs: Iterable[int]) -> float:
        return math.fsum(self.weights[v] for v in vs)


@dataclass(frozen=True)
class PathBlowup:
    """``P ⊠ K_c``; coordinates ``(position, clique index)``, 1-based."""
    c: int


@dataclass(frozen=True)
class GridBlowup:
    """``P_1 ⊠ ... ⊠ P_d ⊠ K_c``; coordinates ``(x_1, ..., x_d, clique index)``."""
    d: int
    c: int


@dataclass(frozen=True)
class TreeStructure:
    delta: int


@dataclass(frozen=True)
class WeightedSeparation:
    report: SeparatorReport
    classes: int
    chosen: int
    weight_bound: float
    component_bound: float


def _pick(classes: Sequence[Sequence[int]], wg: WeightedGraph) -> int:
    weights = [wg.weight_of(c) for c in classes]
    return min(range(len(classes)), key=lambda i: (weights[i], i))


def _check_coords(wg: WeightedGraph, coords, width: int) -> None:
    if coords is None or len(coords) != wg.graph.n:
        raise GraphError("blow-up mode needs one coordinate tuple per vertex")
    if any(len(c) != width for c in coords):
        raise GraphError(f"coordinates must have {width} entries")


def weighted_separator(wg: WeightedGraph, structure, coords: Sequence[Sequence[int]] | None = None
                       ) -> WeightedSeparation:
    """Lightest class of the structure's covering family, certified afresh."""
    g = wg.graph
    n = wg.total
    if isinstance(structure, PathBlowup):
        _check_coords(wg, coords, 2)
        c = structure.c
        if any(not 1 <= x[1] <= c for x in coords):
            raise GraphError("clique index outside 1..c")
        m = max(1, math.ceil(math.sqrt(n / c) - 1e-12))
        classes = [[v for v in range(g.n) if coords[v][0] % m == i % m] for i in range(1, m + 1)]
        bound = math.sqrt(c * n)
        comp_bound = bound
    elif isinstance(structure, GridBlowup):
        d, c = structure.d, structure.c
        _check_coords(wg, coords, d + 1)
        m = max(1, math.ceil((d * n / c) ** (1 / (d + 1)) - 1e-12))
        classes = [[v for v in range(g.n) if any(x % m == j % m for x in coords[v][:d])]
                   for j in range(1, m + 1)]
        bound = (d * n) ** (d / (d + 1)) * c ** (1 / (d + 1))
        comp_bound = bound
    elif isinstance(structure, TreeStructure):
        return _tree_separator(wg, structure.delta)
    else:
        raise TypeError(f"unknown structure {structure!r}")
    i = _pick(classes, wg)
    S = classes[i]
    rep = report(g, S, bound, comp_bound, size=wg.weight_of(S))
    return WeightedSeparation(rep, m, i + 1, bound, comp_bound)


def tree_class_count(n: int, delta: int) -> int:
    """``ceil(log n - log log n)`` in base ``delta - 1``."""
    if delta < 3:
        raise GraphError("tree mode needs maximum degree at least 3 (log base delta-1 > 1)")
    base = delta - 1
    if n <= base:
        raise GraphError(f"n={n} too small for tree mode with delta={delta}")
    ln = math.log(n, base)
    value = ln - math.log(ln, base)
    if value < 1:
        raise GraphError(f"n={n} too small: log n - log log n = {value:.3g} < 1")
    m = math.ceil(value - 1e-12)
    if m < 2:
        raise GraphError(f"n={n} too small: class count {m} < 2")
    return m


def _tree_separator(wg: WeightedGraph, delta: int) -> WeightedSeparation:
    t = wg.graph
    if not is_tree(t):
        raise GraphError("tree mode needs a tree")
    if t.max_degree() > delta:
        raise GraphError(f"tree has degree {t.max_degree()} > delta={delta}")
    m = tree_class_count(t.n, delta)
    root = min(v for v in range(t.n) if t.degree(v) <= 1)
    depth = {root: 0}
    order = [root]
    for u in order:
        for w in t.adjacency[u]:
            if w not in depth:
                depth[w] = depth[u] + 1
                order.append(w)
    classes = [[v for v in range(t.n) if depth[v] % m == j % m] for j in range(1, m + 1)]
    i = _pick(classes, wg)
    S = classes[i]
    wbound = wg.total / m
    cbound = sum((delta - 1) ** e for e in range(m - 1))
    rep = report(t, S, wbound, cbound, size=wg.weight_of(S))
    return WeightedSeparation(rep, m, i + 1, wbound, cbound)


def star_separability_floor(p: int) -> dict:
    """Star with ``p`` leaves of weight 1 and centre weight ``p/2``
    (total ``3p/2``): the best achievable ``max(weight(S), largest piece)``.

    Either the centre is in S (weight at least p/2) or it is not, in which
    case S is j leaves and the centre's component keeps ``p - j + 1``
    vertices. Returns the optimum from this case split.
    """
    total = 1.5 * p
    centre_in = max(p / 2, 1)  # S = {centre}: weight p/2, leaves become singletons
    best_out = min(max(j, p - j + 1) for j in range(p + 1))
    return {"n": total, "centre_in": centre_in, "centre_out": best_out,
            "best": min(centre_in, best_out)}


def star_separability_bruteforce(p: int) -> float:
    """Same optimum by trying every subset (small p)."""
    from .instances import star
    g = star(p)
    w = [p / 2] + [1.0] * p
    best = math.inf
    for r in range(p + 2):
        for S in itertools.combinations(range(p + 1), r):
            rest = [v for v in range(p + 1) if v not in S]
            big = max((len(c) for c in components_within(g, rest)), default=0)
            best = min(best, max(sum(w[v] for v in S), big))
    return best


# -- the product transform ----------------------------------------------------

@dataclass(frozen=True)
class ProductEmbedding:
    """Vertex ``v`` of ``g`` sits at ``(coords[v][0], coords[v][1])`` in ``H ⊠ J``."""
    H: Graph
    J: Graph
    coords: tuple[tuple[int, int], ...]


def check_embedding(g: Graph, emb: ProductEmbedding) -> list[str]:
    out = []
    if len(emb.coords) != g.n:
        return [f"{len(emb.coords)} coordinates for {g.n} vertices"]
    seen = {}
    for v, (x, y) in enumerate(emb.coords):
        if not (0 <= x < emb.H.n and 0 <= y < emb.J.n):
            out.append(f"vertex {v} has coordinates outside H x J")
        elif (x, y) in seen:
            out.append(f"vertices {seen[(x, y)]} and {v} share coordinates")
        else:
            seen[(x, y)] = v
    if out:
        return out
    for u, v in g.edges():
        (x1, y1), (x2, y2) = emb.coords[u], emb.coords[v]
        if not ((x1 == x2 or emb.H.has_edge(x1, x2)) and (y1 == y2 or emb.J.has_edge(y1, y2))):
            out.append(f"edge ({u},{v}) is not a strong-product edge")
    return out


@dataclass(frozen=True)
class TransformResult:
    partition: HPartition
    host_tw_witness: TreeDecomposition
    separator: VertexSet
    apex_part: int | None


def separable_transform(g: Graph, emb: ProductEmbedding,
                        j_separator: Callable[[WeightedGraph], Iterable[int]],
                        h_decomposition: TreeDecomposition | None = None) -> TransformResult:
    """Partition ``g`` over one copy of ``H`` per component of ``J - S`` plus
    an apex part holding every vertex whose J-coordinate lies in ``S``.

    Empty parts are left out; the host is the copies' union (restricted to
    non-empty parts) with the apex joined to everything. The decomposition
    witness chains the copies' decompositions with the apex in every bag.
    """
    bad = check_embedding(g, emb)
    if bad:
        raise GraphError("invalid embedding: " + "; ".join(bad[:3]))
    counts = [0.0] * emb.J.n
    for _, y in emb.coords:
        counts[y] += 1
    S = vertex_set(j_separator(WeightedGraph(emb.J, tuple(counts))))
    sset = set(S)
    comps = components_within(emb.J, [y for y in range(emb.J.n) if y not in sset])
    comp_of = {y: i for i, c in enumerate(comps) for y in c}
    groups: dict[tuple, list[int]] = {}
    apex: list[int] = []
    for v, (x, y) in enumerate(emb.coords):
        if y in sset:
            apex.append(v)
        else:
            groups.setdefault((x, comp_of[y]), []).append(v)
    keys = sorted(groups)
    index = {k: i for i, k in enumerate(keys)}
    parts = [groups[k] for k in keys]
    edges = []
    for (x, i) in keys:
        for x2 in emb.H.adjacency[x]:
            if x < x2 and (x2, i) in index:
                edges.append((index[(x, i)], index[(x2, i)]))
    apex_part = None
    if apex:
        apex_part = len(parts)
        parts.append(apex)
        edges.extend((j, apex_part) for j in range(apex_part))
    partition = make_partition(g.n, parts, edges)

    htd = heuristic_tree_decomposition(emb.H) if h_decomposition is None else h_decomposition
    used = sorted({i for _, i in keys})
    bags: list[tuple[int, ...]] = []
    tree_edges: list[tuple[int, int]] = []
    extra = (apex_part,) if apex_part is not None else ()
    for copy_no, i in enumerate(used):
        off = len(bags)
        for bag in htd.bags:
            bags.append(tuple(sorted({index[(x, i)] for x in bag if (x, i) in index} | set(extra))))
        tree_edges.extend((a + off, b + off) for a, b in htd.tree.edges())
        if copy_no:
            tree_edges.append((0, off))
    if not bags:
        bags, tree_edges = [extra], []
    witness = TreeDecomposition(build_graph(len(bags), tree_edges), tuple(bags))
    return TransformResult(partition, witness, S, apex_part)


def blowup_separator(structure, coords) -> Callable[[WeightedGraph], VertexSet]:
    """Adapter: a J-separator provider from a blow-up structure."""
    def provide(wg: WeightedGraph) -> VertexSet:
        return weighted_separator(wg, structure, coords).report.S
    return provide


def read_weights(path: str, n: int) -> tuple[float, ...]:
    w = [0.0] * n
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            v, x = line.split()
            w[int(v)] = float(x)
    return tuple(w)
