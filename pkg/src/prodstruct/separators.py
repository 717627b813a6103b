"""Balanced separators, fragmentation into small components, and the
tree / treewidth separators that trade separator size against piece size.

A *separator engine* is any callable ``engine(g, vertices)`` that, given a
connected vertex set of ``g``, returns a non-empty balanced separator of
``g[vertices]`` in ``g``'s ids. Engines here: :func:`bfs_layer_engine`,
:func:`centroid_engine` (forests) and :class:`DecompositionEngine`.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Callable, Iterable, Sequence

from .decomposition import (NormalizedDecomposition, TreeDecomposition, heuristic_tree_decomposition,
                            normalization_violations, restrict_decomposition,
                            validate_decomposition)
from .graph import (Graph, GraphError, VertexSet, bfs_distances, check_vertex_set,
                    components_within, is_tree, vertex_set)

Engine = Callable[[Graph, Sequence[int]], Iterable[int]]


class SeparatorError(ValueError):
    """A separator routine's precondition does not hold."""


class EngineError(RuntimeError):
    """An engine returned something unusable (empty or off-component)."""


# -- numeric helpers --------------------------------------------------------

REL_SLACK = 1e-9


def safe_floor(x: Real) -> int:
    """Floor that forgives float noise just below an integer; exact for ints
    and Fractions."""
    if isinstance(x, (int, Fraction)):
        return math.floor(x)
    return math.floor(x + REL_SLACK * max(1.0, abs(x)))


def approx_leq(a: Real, b: Real) -> bool:
    """``a <= b``, exactly for rationals and with relative slack for floats."""
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a <= b
    return a <= b + REL_SLACK * max(1.0, abs(b))


def is_integral(x: Real) -> bool:
    return isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1)


# -- reports ----------------------------------------------------------------

@dataclass(frozen=True)
class SeparatorReport:
    S: VertexSet
    max_component: int
    target_p: float
    target_q: float
    meets_contract: bool
    weight: float | None = None

    def as_dict(self) -> dict:
        out = {"S": list(self.S), "max_component": self.max_component,
               "target_p": float(self.target_p), "target_q": float(self.target_q),
               "meets_contract": self.meets_contract}
        if self.weight is not None:
            out["weight"] = self.weight
        return out


@dataclass(frozen=True)
class ClassGuarantee:
    """Promise ``sep <= c * n**(1 - epsilon)`` on every induced subgraph."""

    c: float
    epsilon: float

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0,1), got {self.epsilon}")

    @property
    def fragment_constant(self) -> float:
        """``c 2^eps / (2^eps - 1)``."""
        t = 2 ** self.epsilon
        return self.c * t / (t - 1)


def report(g: Graph, S: Iterable[int], p: Real, q: Real,
           within: Iterable[int] | None = None, size: Real | None = None) -> SeparatorReport:
    """Recompute the largest component of ``g - S`` and judge it against (p, q).

    ``size`` replaces ``|S|`` in the contract (used for weighted separators).
    """
    s = check_vertex_set(g, S)
    base = range(g.n) if within is None else within
    rem = set(s)
    largest = max((len(c) for c in components_within(g, [v for v in base if v not in rem])), default=0)
    measured = len(s) if size is None else size
    ok = approx_leq(measured, p) and largest <= safe_floor(q)
    return SeparatorReport(s, largest, p, q, ok, None if size is None else float(size))


# -- engines ----------------------------------------------------------------

def bfs_layer_engine(g: Graph, vertices: Sequence[int]) -> VertexSet:
    """BFS from the smallest vertex; the layer where the running count first
    reaches half the component. Layers on either side hold at most n/2."""
    vs = frozenset(vertices)
    root = min(vs)
    dist = bfs_distances(g, root, vs)
    if len(dist) != len(vs):
        raise EngineError("bfs_layer_engine needs a connected vertex set")
    ecc = max(dist.values())
    counts = [0] * (ecc + 1)
    for d in dist.values():
        counts[d] += 1
    half = len(vs) / 2
    running = 0
    for i, c in enumerate(counts):
        running += c
        if running >= half:
            return vertex_set(v for v, d in dist.items() if d == i)
    raise AssertionError("unreachable")


def tree_centroid(g: Graph, vertices: Sequence[int]) -> int:
    """Smallest-id vertex whose removal leaves pieces of at most n/2 in the
    tree ``g[vertices]``."""
    vs = set(vertices)
    n = len(vs)
    root = min(vs)
    order, parent = [root], {root: -1}
    for u in order:
        for w in g.adjacency[u]:
            if w in vs and w not in parent:
                parent[w] = u
                order.append(w)
    if len(order) != n:
        raise EngineError("centroid needs a connected vertex set")
    size = dict.fromkeys(order, 1)
    for u in reversed(order[1:]):
        size[parent[u]] += size[u]
    best = []
    for u in order:
        biggest = n - size[u]
        for w in g.adjacency[u]:
            if w in vs and parent.get(w) == u:
                biggest = max(biggest, size[w])
        if 2 * biggest <= n:
            best.append(u)
    return min(best)


def centroid_engine(g: Graph, vertices: Sequence[int]) -> VertexSet:
    return (tree_centroid(g, vertices),)


class DecompositionEngine:
    """Balanced separator = a centroid bag of a tree decomposition restricted
    to the component. Each vertex counts once, at the first node holding it,
    so every side of the centroid carries at most half the vertices."""

    def __init__(self, g: Graph, td: TreeDecomposition | None = None):
        self.g = g
        self.td = heuristic_tree_decomposition(g) if td is None else td

    def __call__(self, g: Graph, vertices: Sequence[int]) -> VertexSet:
        if g is not self.g and g != self.g:
            raise EngineError("engine was built for a different graph")
        sub = restrict_decomposition(self.td, vertices)
        return sub.bags[centroid_bag(sub, len(vertices))]


def centroid_bag(td: TreeDecomposition, n: int) -> int:
    t = td.tree
    weight = [0] * t.n
    seen: set[int] = set()
    for x, bag in enumerate(td.bags):
        fresh = [v for v in bag if v not in seen]
        weight[x] = len(fresh)
        seen.update(fresh)
    order, parent = [0], [-1] * t.n
    parent[0] = 0
    for x in order:
        for y in t.adjacency[x]:
            if parent[y] == -1:
                parent[y] = x
                order.append(y)
    below = weight[:]
    for x in reversed(order[1:]):
        below[parent[x]] += below[x]
    x = 0
    while True:
        heavy = [y for y in t.adjacency[x] if parent[y] == x and 2 * below[y] > n]
        if not heavy:
            return x
        x = heavy[0]


# -- balanced separators ------------------------------------------------------

def balanced_separator(g: Graph, td: TreeDecomposition, method: str = "scan") -> SeparatorReport:
    """A single bag whose removal leaves components of at most n/2 vertices.

    ``scan`` returns the first such bag by node id; ``centroid`` takes the
    weighted centroid bag in linear time.
    """
    problems = validate_decomposition(g, td)
    if problems:
        raise SeparatorError(f"invalid decomposition: {problems[:3]}")
    half = g.n // 2
    if method == "centroid":
        bag = td.bags[centroid_bag(td, g.n)]
        rep = report(g, bag, len(bag), half)
        if not rep.meets_contract:
            raise AssertionError("centroid bag is not balanced")
        return rep
    if method != "scan":
        raise ValueError(f"unknown method {method!r}")
    for bag in td.bags:
        rep = report(g, bag, len(bag), half)
        if rep.meets_contract:
            return rep
    raise AssertionError("no balanced bag in a valid decomposition")


def fragment(g: Graph, engine: Engine, target: Real) -> VertexSet:
    """Repeatedly split the largest component with ``engine`` until every
    component of ``g - S`` has at most ``target`` vertices."""
    cap = safe_floor(target)
    if cap < 1:
        raise ValueError(f"target must be at least 1, got {target}")
    heap = [(-len(c), c[0], c) for c in components_within(g, range(g.n))]
    heapq.heapify(heap)
    S: set[int] = set()
    while heap and -heap[0][0] > cap:
        _, _, comp = heapq.heappop(heap)
        cut = set(engine(g, comp))
        if not cut or not cut <= set(comp):
            raise EngineError(f"engine returned an unusable separator for a {len(comp)}-vertex component")
        S |= cut
        for piece in components_within(g, [v for v in comp if v not in cut]):
            heapq.heappush(heap, (-len(piece), piece[0], piece))
    return vertex_set(S)


def fragment_bound(guarantee: ClassGuarantee, n: int, alpha: float) -> float:
    """Size promised for :func:`fragment` with target ``n**alpha``."""
    return guarantee.fragment_constant * n ** (1 - alpha * guarantee.epsilon)


# -- tree and treewidth separators --------------------------------------------

def tree_separator_feasible(n: int, p: int, q: Real, mode: str = "auto") -> bool:
    mode = _mode(q, mode)
    if p < 0 or q <= 0:
        return False
    if p == 0:
        return n <= safe_floor(q)
    if mode == "integer":
        return n <= p * q + p + q - 1
    return approx_leq(n, q * (p + 1))


def _mode(q: Real, mode: str) -> str:
    if mode == "auto":
        return "integer" if is_integral(q) else "real"
    if mode == "integer" and not is_integral(q):
        raise SeparatorError(f"integer mode needs an integral q, got {q}")
    if mode not in ("integer", "real"):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


def tree_separator(t: Graph, p: int, q: Real, mode: str = "auto") -> VertexSet:
    """At most ``p`` vertices whose removal leaves pieces of at most ``q``.

    Root at vertex 0. While ``p >= 2``: if every child subtree of the root is
    small take the root; otherwise find the deepest vertex ``v`` with a child
    subtree bigger than ``q``, cut that child ``w`` (its own children are
    small), drop ``T_w`` and continue with ``p - 1``. With ``p == 1`` take a
    centroid. ``mode`` picks the precondition: ``integer`` (``n <= pq+p+q-1``)
    or ``real`` (``n <= q(p+1)``); ``auto`` uses integer mode for integral q.
    """
    if not is_tree(t):
        raise GraphError("tree_separator needs a tree")
    mode = _mode(q, mode)
    n = t.n
    if not tree_separator_feasible(n, p, q, mode):
        bound = "pq+p+q-1" if mode == "integer" else "q(p+1)"
        raise SeparatorError(f"n={n} exceeds {bound} for p={p}, q={q}")
    if p == 0:
        return ()
    cap = safe_floor(q)

    parent = [-1] * n
    depth = [0] * n
    order = [0]
    parent[0] = 0
    for u in order:
        for w in t.adjacency[u]:
            if parent[w] == -1 and w != 0:
                parent[w] = u
                depth[w] = depth[u] + 1
                order.append(w)
    parent[0] = -1
    alive = [True] * n
    chosen: list[int] = []
    budget = p
    while budget >= 2:
        size = [1 if alive[v] else 0 for v in range(n)]
        for v in reversed(order[1:]):
            if alive[v]:
                size[parent[v]] += size[v]
        big_child: dict[int, int] = {}
        for v in order[1:]:
            if alive[v] and size[v] > cap:
                u = parent[v]
                if u not in big_child or v < big_child[u]:
                    big_child[u] = v
        if 0 not in big_child:
            chosen.append(0)
            return vertex_set(chosen)
        v = min(big_child, key=lambda u: (-depth[u], u))
        w = big_child[v]
        chosen.append(w)
        stack = [w]
        while stack:
            u = stack.pop()
            alive[u] = False
            stack.extend(x for x in t.adjacency[u] if x != parent[u] and alive[x])
        budget -= 1
    chosen.append(tree_centroid(t, [v for v in range(n) if alive[v]]))
    return vertex_set(chosen)


def treewidth_separator_feasible(n: int, k: int, p: Real, q: Real, mode: str = "auto") -> bool:
    if mode == "auto":
        mode = "integer" if is_integral(p) and is_integral(q) else "real"
    if not approx_leq(k + 1, p):
        return False
    if mode == "integer":
        return n <= (int(p) // (k + 1)) * (q + 1) + q + k - 1
    return approx_leq(n * (k + 1), p * q)


def treewidth_separator(g: Graph, nd: NormalizedDecomposition, p: Real, q: Real,
                        mode: str = "auto") -> VertexSet:
    """Union of at most ``floor(p/(k+1))`` bags whose removal leaves
    components of at most ``q`` vertices (``k`` = width of ``nd``).

    The chosen nodes come from :func:`tree_separator` on the decomposition
    tree; the normal form guarantees that each component of ``g - S`` has no
    more vertices than the tree piece it lives in.
    """
    k = getattr(nd, "k", nd.width)
    if mode == "auto":
        mode = "integer" if is_integral(p) and is_integral(q) else "real"
    bad = [v for v in normalization_violations(g, nd, k, samples=0, exhaustive_upto=-1)]
    if bad:
        raise SeparatorError(f"decomposition is not normalised: {bad[:3]}")
    if not treewidth_separator_feasible(g.n, k, p, q, mode):
        raise SeparatorError(f"precondition fails for n={g.n}, k={k}, p={p}, q={q} ({mode} mode)")
    pp = safe_floor(Fraction(p) / (k + 1) if isinstance(p, (int, Fraction)) else p / (k + 1))
    nodes = tree_separator(nd.tree, pp, q, mode)
    return vertex_set(v for x in nodes for v in nd.bags[x])


def path_power_block_inequality(n: int, k: int, p: int, q: Real) -> bool:
    """``k n <= p q + k (p + q)``: necessary for a p-set in ``P_n^k`` leaving
    pieces of at most q."""
    return k * n <= p * q + k * (p + q)


def path_power_tightness_check(n: int, k: int, q: Real, S: Iterable[int]) -> bool:
    """Validate ``S`` as a q-separator of ``P_n^k`` and test the block
    inequality with ``p = |S|``."""
    from .instances import path_power
    g = path_power(n, k)
    s = check_vertex_set(g, S)
    if max_piece(g, s) > safe_floor(q):
        raise SeparatorError(f"S leaves a component larger than q={q}")
    return path_power_block_inequality(n, k, len(s), q)


def max_piece(g: Graph, S: Iterable[int]) -> int:
    rem = set(S)
    return max((len(c) for c in components_within(g, [v for v in range(g.n) if v not in rem])),
               default=0)
