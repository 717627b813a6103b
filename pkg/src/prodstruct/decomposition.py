"""Tree decompositions, their normal form, and exact tree-depth.

The heuristic decomposition comes from a min-fill elimination ordering. The
exact routines (treewidth and tree-depth) are exponential and exist to serve
as oracles on small graphs; their size caps default to 20 and 15 vertices and
can be raised through the ``PRODSTRUCT_EXACT_LIMIT`` environment variable.
"""
from __future__ import annotations

import heapq
import os
import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence, TextIO

from .graph import (Graph, GraphError, VertexSet, build_graph, components_within,
                    induced, vertex_set)


class DecompositionError(ValueError):
    pass


class InstanceTooLarge(ValueError):
    """An exact oracle was asked to handle more vertices than its cap."""


class Violation(NamedTuple):
    kind: str
    where: object


def exact_limit(default: int) -> int:
    raw = os.environ.get("PRODSTRUCT_EXACT_LIMIT")
    return int(raw) if raw else default


# -- data types -------------------------------------------------------------

@dataclass(frozen=True)
class TreeDecomposition:
    tree: Graph
    bags: tuple[VertexSet, ...]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    @property
    def node_count(self) -> int:
        return self.tree.n

    @cached_property
    def nodes_of(self) -> dict[int, list[int]]:
        """Vertex -> nodes whose bag holds it."""
        index: dict[int, list[int]] = {}
        for x, bag in enumerate(self.bags):
            for v in bag:
                index.setdefault(v, []).append(x)
        return index


@dataclass(frozen=True)
class NormalizedDecomposition(TreeDecomposition):
    k: int


@dataclass(frozen=True)
class RootedForest:
    """Parent pointers (``None`` at roots) over vertices ``0..len(parent)-1``."""

    parent: tuple[int | None, ...]

    def __post_init__(self) -> None:
        n = len(self.parent)
        state = [0] * n  # 0 unseen, 1 on current walk, 2 done
        for s in range(n):
            walk = []
            v: int | None = s
            while v is not None and state[v] == 0:
                if not 0 <= v < n:
                    raise DecompositionError(f"parent id {v} out of range")
                state[v] = 1
                walk.append(v)
                v = self.parent[v]
                if v is not None and not 0 <= v < n:
                    raise DecompositionError(f"parent id {v} out of range")
            if v is not None and state[v] == 1:
                raise DecompositionError("parent structure contains a cycle")
            for w in walk:
                state[w] = 2

    @property
    def size(self) -> int:
        return len(self.parent)

    @property
    def roots(self) -> VertexSet:
        return tuple(v for v, p in enumerate(self.parent) if p is None)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        """Number of vertices on the path from the root down to each vertex."""
        depth = [0] * len(self.parent)
        for v in range(len(self.parent)):
            if depth[v]:
                continue
            chain = []
            u: int | None = v
            while u is not None and depth[u] == 0:
                chain.append(u)
                u = self.parent[u]
            base = 0 if u is None else depth[u]
            for w in reversed(chain):
                base += 1
                depth[w] = base
        return tuple(depth)

    @property
    def vertex_height(self) -> int:
        return max(self.depth, default=0)

    @cached_property
    def children(self) -> tuple[VertexSet, ...]:
        kids: list[list[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p is not None:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    def ancestors(self, v: int) -> list[int]:
        out = []
        u = self.parent[v]
        while u is not None:
            out.append(u)
            u = self.parent[u]
        return out

    def is_ancestor(self, a: int, v: int) -> bool:
        """True if ``a`` lies on the root path of ``v`` (``v`` itself excluded)."""
        da, dv = self.depth[a], self.depth[v]
        u: int | None = v
        while u is not None and dv > da:
            u = self.parent[u]
            dv -= 1
        return u == a and v != a

    def closure(self) -> Graph:
        edges = []
        for v in range(len(self.parent)):
            for a in self.ancestors(v):
                edges.append((a, v))
        return build_graph(len(self.parent), edges)


# -- validation -------------------------------------------------------------

def validate_decomposition(g: Graph, td: TreeDecomposition) -> list[Violation]:
    """Every axiom failure, as data. An empty list means ``td`` is valid."""
    out: list[Violation] = []
    t = td.tree
    if len(td.bags) != t.n:
        out.append(Violation("bag-count", (len(td.bags), t.n)))
        return out
    if t.n == 0:
        if g.n:
            out.append(Violation("empty-tree", g.n))
        return out
    if t.edge_count != t.n - 1 or len(components_within(t, range(t.n))) != 1:
        out.append(Violation("not-a-tree", t.n))
    for x, bag in enumerate(td.bags):
        for v in bag:
            if not 0 <= v < g.n:
                out.append(Violation("bad-vertex", (x, v)))
    index = td.nodes_of
    for v in range(g.n):
        if v not in index:
            out.append(Violation("vertex-missing", v))
    bagsets = [set(b) for b in td.bags]
    for u, v in g.edges():
        nodes = index.get(u, ())
        if not any(v in bagsets[x] for x in nodes):
            out.append(Violation("edge-uncovered", (u, v)))
    for v in range(g.n):
        nodes = index.get(v)
        if nodes and len(components_within(t, nodes)) != 1:
            out.append(Violation("disconnected-trace", v))
    return out


def is_valid_decomposition(g: Graph, td: TreeDecomposition) -> bool:
    return not validate_decomposition(g, td)


def decomposition_from_bags(bags: Sequence[Iterable[int]],
                            tree_edges: Iterable[Sequence[int]]) -> TreeDecomposition:
    bs = tuple(vertex_set(b) for b in bags)
    return TreeDecomposition(build_graph(len(bs), tree_edges), bs)


# -- heuristic and exact treewidth -----------------------------------------

def _fill_in(adj: dict[int, set[int]], v: int) -> int:
    nb = adj[v]
    missing = 0
    for a in nb:
        missing += len(nb) - 1 - len(adj[a] & nb)
    return missing // 2


def min_fill_ordering(g: Graph) -> list[int]:
    """Greedy min-fill elimination ordering; ties go to the smallest id."""
    adj = {v: set(g.adjacency[v]) for v in range(g.n)}
    stamp = {v: _fill_in(adj, v) for v in adj}
    heap = [(f, v) for v, f in stamp.items()]
    heapq.heapify(heap)
    order = []
    while heap:
        f, v = heapq.heappop(heap)
        if v not in adj or stamp[v] != f:
            continue
        nb = adj.pop(v)
        order.append(v)
        del stamp[v]
        nbl = list(nb)
        for a in nbl:
            adj[a].discard(v)
        for i, a in enumerate(nbl):
            for b in nbl[i + 1:]:
                if b not in adj[a]:
                    adj[a].add(b)
                    adj[b].add(a)
        touched = set(nb)
        for a in nb:
            touched |= adj[a]
        for w in touched:
            fw = _fill_in(adj, w)
            if fw != stamp[w]:
                stamp[w] = fw
                heapq.heappush(heap, (fw, w))
    return order


def decomposition_from_ordering(g: Graph, order: Sequence[int]) -> TreeDecomposition:
    """Bag of each vertex = itself plus its later neighbours in the fill graph."""
    n = g.n
    if n == 0:
        return TreeDecomposition(build_graph(1, ()), ((),))
    pos = {v: i for i, v in enumerate(order)}
    if len(pos) != n:
        raise DecompositionError("ordering is not a permutation of the vertices")
    adj = [set(g.adjacency[v]) for v in range(n)]
    bags = []
    parent: list[int | None] = []
    for i, v in enumerate(order):
        later = [w for w in adj[v] if pos[w] > i]
        for a in later:
            for b in later:
                if a != b:
                    adj[a].add(b)
        bags.append(vertex_set([v, *later]))
        parent.append(min((pos[w] for w in later), default=None))
    edges = [(i, p) for i, p in enumerate(parent) if p is not None]
    roots = [i for i, p in enumerate(parent) if p is None]
    edges += list(zip(roots, roots[1:]))
    return TreeDecomposition(build_graph(n, edges), tuple(bags))


def heuristic_tree_decomposition(g: Graph) -> TreeDecomposition:
    return decomposition_from_ordering(g, min_fill_ordering(g))


def _reach_outside(adjmask: Sequence[int], s: int, v: int) -> int:
    """Mask of vertices outside ``s | {v}`` reachable from ``v`` through ``s``."""
    seen = 1 << v
    out = 0
    stack = [v]
    while stack:
        u = stack.pop()
        fresh = adjmask[u] & ~seen
        seen |= fresh
        inside = fresh & s
        out |= fresh & ~s
        while inside:
            low = inside & -inside
            stack.append(low.bit_length() - 1)
            inside ^= low
    return out


def _ordering_of_width(g: Graph, k: int) -> list[int] | None:
    n = g.n
    adjmask = [sum(1 << w for w in g.adjacency[v]) for v in range(n)]
    full = (1 << n) - 1
    dead: set[int] = set()
    order: list[int] = []

    def search(s: int) -> bool:
        if s == full:
            return True
        for v in range(n):
            if s >> v & 1:
                continue
            if bin(_reach_outside(adjmask, s, v)).count("1") > k:
                continue
            t = s | (1 << v)
            if t in dead:
                continue
            order.append(v)
            if search(t):
                return True
            order.pop()
            dead.add(t)
        return False

    return order if search(0) else None


def _degeneracy(g: Graph) -> int:
    deg = {v: g.degree(v) for v in range(g.n)}
    alive = set(range(g.n))
    best = 0
    while alive:
        v = min(alive, key=lambda u: (deg[u], u))
        best = max(best, deg[v])
        alive.discard(v)
        for w in g.adjacency[v]:
            if w in alive:
                deg[w] -= 1
    return best


def exact_treewidth(g: Graph, limit: int | None = None) -> tuple[int, TreeDecomposition]:
    """Treewidth by search over elimination prefixes, with an optimal decomposition."""
    cap = exact_limit(20) if limit is None else limit
    if g.n > cap:
        raise InstanceTooLarge(f"exact treewidth capped at {cap} vertices, got {g.n}")
    upper = heuristic_tree_decomposition(g)
    if g.n == 0:
        return upper.width, upper
    for k in range(_degeneracy(g), upper.width):
        order = _ordering_of_width(g, k)
        if order is not None:
            return k, decomposition_from_ordering(g, order)
    return upper.width, upper


# -- restriction and normalisation ------------------------------------------

def restrict_decomposition(td: TreeDecomposition, keep: Iterable[int]) -> TreeDecomposition:
    """Decomposition of ``g[keep]`` in original ids, on the smallest subtree
    spanning the nodes that still carry a vertex."""
    ks = set(keep)
    used = {x for v in ks for x in td.nodes_of.get(v, ())}
    if not used:
        return TreeDecomposition(build_graph(1, ()), ((),))
    t = td.tree
    if len(components_within(t, used)) > 1:
        deg = {x: t.degree(x) for x in range(t.n)}
        alive = set(range(t.n))
        leaves = deque(x for x in alive if deg[x] <= 1 and x not in used)
        while leaves:
            x = leaves.popleft()
            if x not in alive:
                continue
            alive.discard(x)
            for y in t.adjacency[x]:
                if y in alive:
                    deg[y] -= 1
                    if deg[y] <= 1 and y not in used:
                        leaves.append(y)
        used = alive
    nodes = sorted(used)
    local = {x: i for i, x in enumerate(nodes)}
    edges = [(local[x], local[y]) for x in nodes for y in t.adjacency[x] if y in local and x < y]
    bags = tuple(tuple(v for v in td.bags[x] if v in ks) for x in nodes)
    return TreeDecomposition(build_graph(len(nodes), edges), bags)


def localize_decomposition(td: TreeDecomposition, to_local: dict[int, int]) -> TreeDecomposition:
    return TreeDecomposition(td.tree, tuple(vertex_set(to_local[v] for v in b) for b in td.bags))


def normalize(g: Graph, td: TreeDecomposition) -> NormalizedDecomposition:
    """Rewrite ``td`` so every bag has ``k+1`` vertices and adjacent bags differ
    by exactly one vertex each way (``k`` = width of ``td``).

    Three passes: pad undersized bags from their parent (top-down from a full
    bag), contract edges between equal bags, then replace each edge whose bags
    differ in ``s >= 2`` vertices by a chain of ``s-1`` single-swap bags.
    The swapped-out vertex is the smallest of ``B_x - B_y`` and the
    swapped-in vertex the smallest of ``B_y - B_x``.
    """
    problems = validate_decomposition(g, td)
    if problems:
        raise DecompositionError(f"invalid decomposition: {problems[:3]}")
    k = td.width
    if g.n == 0:
        return NormalizedDecomposition(td.tree, td.bags, k)
    bags: dict[int, set[int]] = {x: set(b) for x, b in enumerate(td.bags)}
    adj: dict[int, set[int]] = {x: set(td.tree.adjacency[x]) for x in range(td.tree.n)}
    root = next(x for x, b in bags.items() if len(b) == k + 1)

    # pad
    seen = {root}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in sorted(adj[x]):
            if y in seen:
                continue
            seen.add(y)
            if len(bags[y]) < k + 1:
                spare = sorted(bags[x] - bags[y])
                bags[y].update(spare[:k + 1 - len(bags[y])])
            queue.append(y)

    # contract equal neighbours (all bags now have k+1 vertices)
    stack = list(bags)
    while stack:
        x = stack.pop()
        if x not in bags:
            continue
        for y in sorted(adj[x]):
            if bags[y] == bags[x]:
                for z in adj.pop(y):
                    if z != x:
                        adj[z].discard(y)
                        adj[z].add(x)
                        adj[x].add(z)
                adj[x].discard(y)
                del bags[y]
                stack.append(x)
                break

    # split
    next_id = max(bags) + 1
    for x, y in sorted((x, y) for x in list(adj) for y in adj[x] if x < y):
        if len(bags[x] - bags[y]) < 2:
            continue
        adj[x].discard(y)
        adj[y].discard(x)
        cur, curbag = x, bags[x]
        while len(curbag - bags[y]) > 1:
            v = min(curbag - bags[y])
            u = min(bags[y] - curbag)
            z = next_id
            next_id += 1
            bags[z] = (curbag - {v}) | {u}
            adj[z] = {cur}
            adj[cur].add(z)
            cur, curbag = z, bags[z]
        adj[cur].add(y)
        adj[y].add(cur)

    # relabel breadth-first from the original root (or its surviving merge)
    if root not in bags:
        root = min(bags)
    order = []
    seen = {root}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        order.append(x)
        for y in sorted(adj[x]):
            if y not in seen:
                seen.add(y)
                queue.append(y)
    label = {x: i for i, x in enumerate(order)}
    edges = [(label[x], label[y]) for x in order for y in adj[x] if label[x] < label[y]]
    out = NormalizedDecomposition(build_graph(len(order), edges),
                                  tuple(vertex_set(bags[x]) for x in order), k)
    return out


def normalized_for(g: Graph, td: TreeDecomposition | None = None) -> NormalizedDecomposition:
    return normalize(g, heuristic_tree_decomposition(g) if td is None else td)


def condition_d_holds(nd: TreeDecomposition, node_set: Iterable[int]) -> bool:
    """Every component ``T'`` of ``T - S`` introduces at most ``|T'|`` new vertices."""
    s = set(node_set)
    if not s:
        raise ValueError("condition (d) quantifies over non-empty node sets")
    covered = set().union(*(nd.bags[x] for x in s))
    rest = [x for x in range(nd.tree.n) if x not in s]
    for comp in components_within(nd.tree, rest):
        fresh = set().union(*(nd.bags[x] for x in comp)) - covered
        if len(fresh) > len(comp):
            return False
    return True


def normalization_violations(g: Graph, nd: TreeDecomposition, k: int | None = None,
                             samples: int = 50, exhaustive_upto: int = 12,
                             rng: random.Random | None = None) -> list[Violation]:
    """Check the four normal-form conditions; (d) exhaustively on small trees,
    otherwise on ``samples`` random non-empty node sets."""
    k = nd.width if k is None else k
    out: list[Violation] = []
    for x, bag in enumerate(nd.bags):
        if len(bag) != k + 1:
            out.append(Violation("a:bag-size", (x, len(bag))))
    for x, y in nd.tree.edges():
        bx, by = set(nd.bags[x]), set(nd.bags[y])
        if len(bx - by) != 1 or len(by - bx) != 1:
            out.append(Violation("b:edge-difference", (x, y)))
    if nd.tree.n != g.n - k:
        out.append(Violation("c:node-count", (nd.tree.n, g.n - k)))
    t = nd.tree.n
    if t <= exhaustive_upto:
        sets: Iterable[Sequence[int]] = (
            [x for x in range(t) if mask >> x & 1] for mask in range(1, 1 << t))
    else:
        rng = rng or random.Random(0)
        sets = [rng.sample(range(t), rng.randint(1, t)) for _ in range(samples)]
    for s in sets:
        if not condition_d_holds(nd, s):
            out.append(Violation("d:fresh-vertices", tuple(sorted(s))))
    return out


# -- tree-depth --------------------------------------------------------------

def _mask_components(adjmask: Sequence[int], mask: int) -> list[int]:
    comps = []
    todo = mask
    while todo:
        low = todo & -todo
        comp = low
        frontier = low
        while frontier:
            b = frontier & -frontier
            frontier ^= b
            fresh = adjmask[b.bit_length() - 1] & todo & ~comp
            comp |= fresh
            frontier |= fresh
        todo &= ~comp
        comps.append(comp)
    return comps


def exact_tree_depth(g: Graph, limit: int | None = None) -> tuple[int, RootedForest]:
    """Tree-depth via memoised root choice on connected vertex sets."""
    cap = exact_limit(15) if limit is None else limit
    if g.n > cap:
        raise InstanceTooLarge(f"exact tree-depth capped at {cap} vertices, got {g.n}")
    adjmask = [sum(1 << w for w in g.adjacency[v]) for v in range(g.n)]
    memo: dict[int, tuple[int, int]] = {}

    def td(mask: int) -> int:
        hit = memo.get(mask)
        if hit is not None:
            return hit[0]
        size = bin(mask).count("1")
        if size == 1:
            memo[mask] = (1, mask.bit_length() - 1)
            return 1
        floor = 2  # any connected set with an edge
        best, choice = size + 1, -1
        rest = mask
        while rest:
            b = rest & -rest
            rest ^= b
            comps = sorted(_mask_components(adjmask, mask & ~b),
                           key=lambda c: -bin(c).count("1"))
            worst = 0
            for c in comps:
                worst = max(worst, td(c))
                if worst + 1 >= best:
                    break
            if worst + 1 < best:
                best, choice = worst + 1, b.bit_length() - 1
                if best == floor:
                    break
        memo[mask] = (best, choice)
        return best

    parent: list[int | None] = [None] * g.n

    def build(mask: int, above: int | None) -> None:
        td(mask)
        root = memo[mask][1]
        parent[root] = above
        for c in _mask_components(adjmask, mask & ~(1 << root)):
            build(c, root)

    depth = 0
    for comp in _mask_components(adjmask, (1 << g.n) - 1):
        depth = max(depth, td(comp))
        build(comp, None)
    return depth, RootedForest(tuple(parent))


def verify_closure_embedding(g: Graph, f: RootedForest) -> bool:
    """True iff every edge of ``g`` joins an ancestor-descendant pair of ``f``."""
    if f.size < g.n:
        raise GraphError(f"forest covers {f.size} vertices, graph has {g.n}")
    depth = f.depth
    for u, v in g.edges():
        a, b = (u, v) if depth[u] < depth[v] else (v, u)
        if not f.is_ancestor(a, b):
            return False
    return True


# -- text format -------------------------------------------------------------

def write_decomposition(td: TreeDecomposition, g_n: int, f: TextIO) -> None:
    f.write(f"{td.tree.n} {td.width + 1} {g_n}\n")
    for x, bag in enumerate(td.bags):
        f.write(" ".join(map(str, (x, *bag))) + "\n")
    for x, y in td.tree.edges():
        f.write(f"{x} {y}\n")


def read_decomposition(f: TextIO) -> tuple[TreeDecomposition, int]:
    rows = [ln.split() for ln in f if ln.strip() and not ln.startswith("#")]
    try:
        t, _, n = (int(v) for v in rows[0][:3])
        bags: list[VertexSet] = [()] * t
        for r in rows[1:1 + t]:
            bags[int(r[0])] = vertex_set(int(v) for v in r[1:])
        edges = [(int(r[0]), int(r[1])) for r in rows[1 + t:]]
    except (IndexError, ValueError) as exc:
        raise DecompositionError(f"malformed decomposition file: {exc}") from None
    if len(edges) != max(t - 1, 0):
        raise DecompositionError(f"expected {t - 1} tree edges, found {len(edges)}")
    return TreeDecomposition(build_graph(t, edges), tuple(bags)), n


def decomposition_of_component(g: Graph, td: TreeDecomposition, comp: Sequence[int]):
    """(view, decomposition of the view's graph in local ids) for ``g[comp]``."""
    view = induced(g, comp)
    return view, localize_decomposition(restrict_decomposition(td, comp), view.to_local)
