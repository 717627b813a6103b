"""Simple undirected graphs on dense integer ids, plus the traversal helpers
every other module leans on.

Vertices are ``0..n-1``. A :class:`Graph` is immutable once built; vertex sets
are plain sorted tuples so they can be hashed, compared and serialised without
ceremony.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

VertexSet = tuple[int, ...]


class GraphError(ValueError):
    """Raised for malformed graph input (bad ids, self-loops, bad files)."""


def vertex_set(vertices: Iterable[int]) -> VertexSet:
    """Sorted, duplicate-free tuple of vertex ids."""
    return tuple(sorted(set(vertices)))


@dataclass(frozen=True)
class Graph:
    n: int
    adjacency: tuple[VertexSet, ...]
    edge_count: int
    _adjsets: tuple[frozenset, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self._adjsets:
            object.__setattr__(self, "_adjsets", tuple(frozenset(a) for a in self.adjacency))

    def neighbors(self, v: int) -> VertexSet:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adjsets[u]

    def neighbor_set(self, v: int) -> frozenset:
        return self._adjsets[v]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v``, in lexicographic order."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def vertices(self) -> range:
        return range(self.n)

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def __len__(self) -> int:
        return self.n


def build_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Build a simple graph; duplicate and reversed pairs collapse to one edge."""
    if n < 0:
        raise GraphError(f"negative vertex count {n}")
    adj: list[set[int]] = [set() for _ in range(n)]
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u},{v}) has an id outside 0..{n - 1}")
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        adj[u].add(v)
        adj[v].add(u)
    adjacency = tuple(tuple(sorted(a)) for a in adj)
    m = sum(len(a) for a in adjacency) // 2
    return Graph(n, adjacency, m, tuple(frozenset(a) for a in adj))


def empty_graph(n: int) -> Graph:
    return build_graph(n, ())


def components_within(g: Graph, vertices: Iterable[int]) -> list[VertexSet]:
    """Connected components of ``g[vertices]``, each sorted, ordered by min id."""
    todo = set(vertices)
    out: list[VertexSet] = []
    for s in sorted(todo):
        if s not in todo:
            continue
        todo.discard(s)
        comp = [s]
        stack = [s]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if w in todo:
                    todo.discard(w)
                    comp.append(w)
                    stack.append(w)
        out.append(tuple(sorted(comp)))
    return out


def components(g: Graph) -> list[VertexSet]:
    return components_within(g, range(g.n))


def is_connected(g: Graph) -> bool:
    return g.n <= 1 or len(components(g)) == 1


def max_component_after_removal(g: Graph, removed: Iterable[int],
                                within: Iterable[int] | None = None) -> int:
    """Largest component of ``g[within] - removed`` (``within`` defaults to V)."""
    rem = set(removed)
    base = range(g.n) if within is None else within
    keep = [v for v in base if v not in rem]
    return max((len(c) for c in components_within(g, keep)), default=0)


def check_vertex_set(g: Graph, vs: Iterable[int]) -> VertexSet:
    out = vertex_set(vs)
    if out and (out[0] < 0 or out[-1] >= g.n):
        raise GraphError(f"vertex set has ids outside 0..{g.n - 1}")
    return out


@dataclass(frozen=True)
class SubgraphView:
    """Induced subgraph ``parent[kept]`` relabelled to ``0..len(kept)-1``."""

    parent: Graph
    kept: VertexSet
    graph: Graph
    to_local: dict = field(repr=False, compare=False)

    @property
    def to_parent(self) -> VertexSet:
        return self.kept

    def lift(self, local: Iterable[int]) -> VertexSet:
        return vertex_set(self.kept[v] for v in local)

    def lower(self, original: Iterable[int]) -> VertexSet:
        return vertex_set(self.to_local[v] for v in original)


def induced(g: Graph, keep: Iterable[int]) -> SubgraphView:
    kept = check_vertex_set(g, keep)
    to_local = {v: i for i, v in enumerate(kept)}
    edges = []
    for i, v in enumerate(kept):
        for w in g.adjacency[v]:
            j = to_local.get(w)
            if j is not None and i < j:
                edges.append((i, j))
    return SubgraphView(g, kept, build_graph(len(kept), edges), to_local)


def bfs_distances(g: Graph, root: int, within: set | frozenset | None = None) -> dict[int, int]:
    dist = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in g.adjacency[u]:
            if w not in dist and (within is None or w in within):
                dist[w] = du
                queue.append(w)
    return dist


def bfs_layers(g: Graph, root: int, full: bool = True) -> tuple[list[VertexSet], int]:
    """BFS layering ``L_0 = {root}, L_1, ...`` and the root's eccentricity.

    With ``full=True`` (default) a graph not fully reachable from ``root`` is an
    error; ``full=False`` layers only the root's component.
    """
    if not 0 <= root < g.n:
        raise GraphError(f"root {root} not in graph with {g.n} vertices")
    dist = bfs_distances(g, root)
    if full and len(dist) != g.n:
        raise GraphError("graph is disconnected; a full layering is undefined")
    ecc = max(dist.values())
    buckets: list[list[int]] = [[] for _ in range(ecc + 1)]
    for v, dv in dist.items():
        buckets[dv].append(v)
    return [tuple(sorted(b)) for b in buckets], ecc


def boundary(g: Graph, vs: Iterable[int], within: set | frozenset | None = None) -> set[int]:
    """``N(S)``: vertices outside ``S`` (inside ``within`` if given) adjacent to ``S``."""
    s = set(vs)
    out: set[int] = set()
    for v in s:
        for w in g.adjacency[v]:
            if w not in s and (within is None or w in within):
                out.add(w)
    return out


def is_clique(g: Graph, vs: Sequence[int]) -> bool:
    return all(g.has_edge(vs[i], vs[j]) for i in range(len(vs)) for j in range(i + 1, len(vs)))


def is_tree(g: Graph) -> bool:
    return g.n >= 1 and g.edge_count == g.n - 1 and is_connected(g)


# -- text format ------------------------------------------------------------

def read_graph(f: TextIO) -> Graph:
    """Parse ``n m`` then ``m`` lines ``u v``; lines starting with '#' are skipped."""
    rows = []
    for raw in f:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(line.split())
    if not rows:
        raise GraphError("empty graph file")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = [(int(r[0]), int(r[1])) for r in rows[1:]]
    except (IndexError, ValueError) as exc:
        raise GraphError(f"malformed graph file: {exc}") from None
    if len(edges) != m:
        raise GraphError(f"header announces {m} edges, file has {len(edges)}")
    return build_graph(n, edges)


def write_graph(g: Graph, f: TextIO) -> None:
    f.write(f"{g.n} {g.edge_count}\n")
    for u, v in g.edges():
        f.write(f"{u} {v}\n")


def load_graph(path: str) -> Graph:
    with open(path) as f:
        return read_graph(f)


def save_graph(g: Graph, path: str) -> None:
    with open(path, "w") as f:
        write_graph(g, f)
