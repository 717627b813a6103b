"""Deterministic graph families.

Every generator is a pure function of its parameters (and seed). Families
that come with extra structure return it through :class:`Instance`: rooted
forests for tree-shaped families, coordinates for products, a known-width
decomposition for k-trees.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .decomposition import RootedForest, TreeDecomposition, decomposition_from_bags
from .graph import Graph, GraphError, VertexSet, build_graph


@dataclass(frozen=True)
class Instance:
    graph: Graph
    name: str
    forest: RootedForest | None = None
    coords: tuple[tuple[int, ...], ...] | None = None
    factor_sizes: tuple[int, ...] | None = None
    decomposition: TreeDecomposition | None = None
    meta: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def label(self) -> str:
        inner = ",".join(f"{k}={v.label() if isinstance(v, FamilySpec) else v}"
                         for k, v in sorted(self.params.items()))
        return f"{self.family}({inner})"


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise GraphError(msg)


# -- basic families ---------------------------------------------------------

def path(n: int) -> Graph:
    _need(n >= 0, "path length must be non-negative")
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def path_power(n: int, k: int) -> Graph:
    _need(n >= 0 and k >= 1, "path_power needs n >= 0, k >= 1")
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, min(n, i + k + 1))])


def cycle(n: int) -> Graph:
    _need(n >= 3, "cycle needs at least 3 vertices")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    _need(n >= 0, "complete graph size must be non-negative")
    return build_graph(n, itertools.combinations(range(n), 2))


def star(p: int) -> Graph:
    """Centre 0 with leaves ``1..p``."""
    _need(p >= 0, "star needs p >= 0 leaves")
    return build_graph(p + 1, [(0, i) for i in range(1, p + 1)])


def grid(rows: int, cols: int) -> Graph:
    """4-neighbour grid; vertex ``r*cols + c``."""
    _need(rows >= 1 and cols >= 1, "grid sides must be positive")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return build_graph(rows * cols, edges)


def complete_dary_tree(d: int, height: int) -> tuple[Graph, RootedForest]:
    """Complete d-ary tree with ``height`` levels of vertices, breadth-first ids."""
    _need(d >= 1 and height >= 1, "complete_dary_tree needs d >= 1 and height >= 1")
    n = sum(d ** i for i in range(height))
    parent = [None] + [(v - 1) // d for v in range(1, n)]
    return build_graph(n, [(p, v) for v, p in enumerate(parent) if p is not None]), RootedForest(tuple(parent))


def subdivide(g: Graph, s: int) -> tuple[Graph, dict[tuple[int, int], VertexSet]]:
    """Replace each edge ``uv`` (u < v) by a path with ``s`` inner vertices.

    Original vertices keep their ids; inner vertices are appended edge by edge
    in sorted edge order, listed from the ``u`` end.
    """
    _need(s >= 0, "subdivision count must be non-negative")
    nxt = g.n
    edges = []
    inner: dict[tuple[int, int], VertexSet] = {}
    for u, v in g.edges():
        chain = tuple(range(nxt, nxt + s))
        nxt += s
        inner[(u, v)] = chain
        walk = (u, *chain, v)
        edges.extend(zip(walk, walk[1:]))
    return build_graph(nxt, edges), inner


def closure(forest: RootedForest) -> Graph:
    return forest.closure()


def tree_forest(t: Graph, root: int) -> RootedForest:
    parent: list[int | None] = [None] * t.n
    seen = {root}
    order = [root]
    for u in order:
        for w in t.adjacency[u]:
            if w not in seen:
                seen.add(w)
                parent[w] = u
                order.append(w)
    if len(order) != t.n:
        raise GraphError("tree_forest needs a connected graph")
    return RootedForest(tuple(parent))


def random_tree(n: int, seed: int = 0, degree_cap: int | None = None) -> Graph:
    """Uniform attachment: vertex i joins a random earlier vertex (with spare degree)."""
    _need(n >= 1, "random_tree needs n >= 1")
    _need(degree_cap is None or degree_cap >= 2 or n <= 2, "degree cap below 2 cannot span")
    rng = random.Random(seed)
    deg = [0] * n
    open_ = [0]
    edges = []
    for v in range(1, n):
        idx = rng.randrange(len(open_))
        u = open_[idx]
        edges.append((u, v))
        deg[u] += 1
        deg[v] += 1
        if degree_cap is not None and deg[u] >= degree_cap:
            open_[idx] = open_[-1]
            open_.pop()
        if degree_cap is None or deg[v] < degree_cap:
            open_.append(v)
    return build_graph(n, edges)


def k_tree(n: int, k: int, seed: int = 0) -> tuple[Graph, TreeDecomposition]:
    """Random k-tree with its width-k decomposition (one bag per added vertex)."""
    _need(k >= 1 and n >= k + 1, "k_tree needs k >= 1 and n >= k+1")
    rng = random.Random(seed)
    base = tuple(range(k + 1))
    edges = list(itertools.combinations(base, 2))
    bags = [base]
    tree_edges = []
    cliques: list[tuple[tuple[int, ...], int]] = [(c, 0) for c in itertools.combinations(base, k)]
    for v in range(k + 1, n):
        clique, home = cliques[rng.randrange(len(cliques))]
        edges.extend((u, v) for u in clique)
        node = len(bags)
        bags.append(tuple(sorted((*clique, v))))
        tree_edges.append((home, node))
        for u in clique:
            cliques.append((tuple(sorted(set(clique) - {u} | {v})), node))
    return build_graph(n, edges), decomposition_from_bags(bags, tree_edges)


def k_tree_subgraph(n: int, k: int, seed: int = 0, keep: float = 0.7) -> tuple[Graph, TreeDecomposition]:
    """Random spanning subgraph of a random k-tree; its decomposition stays valid."""
    g, td = k_tree(n, k, seed)
    rng = random.Random(seed + 7919)
    return build_graph(n, [e for e in g.edges() if rng.random() < keep]), td


def strong_product(a: Graph, b: Graph) -> tuple[Graph, tuple[tuple[int, int], ...]]:
    """``a ⊠ b`` with vertex ``(x, y)`` at id ``x * b.n + y``."""
    nb = b.n
    coords = tuple((x, y) for x in range(a.n) for y in range(nb))
    edges = []
    for x in range(a.n):
        xs = (x, *a.adjacency[x])
        for y in range(nb):
            ys = (y, *b.adjacency[y])
            for x2 in xs:
                for y2 in ys:
                    if (x2, y2) != (x, y):
                        edges.append((x * nb + y, x2 * nb + y2))
    return build_graph(a.n * nb, edges), coords


def grid_blowup(sizes: Sequence[int], c: int) -> Instance:
    """``P_{s1} ⊠ ... ⊠ P_{sd} ⊠ K_c``; coordinates are 1-based path
    positions followed by the 1-based clique index."""
    _need(all(s >= 1 for s in sizes) and c >= 1 and len(sizes) >= 1, "bad blow-up sizes")
    g = complete(c)
    coords: list[tuple[int, ...]] = [(l + 1,) for l in range(c)]
    for s in reversed(sizes):
        g, pairs = strong_product(path(s), g)
        coords = [(x + 1, *coords[y]) for x, y in pairs]
    return Instance(g, f"blowup({'x'.join(map(str, sizes))},K{c})", coords=tuple(coords),
                    factor_sizes=(*sizes, c))


# -- the adversarial closure ------------------------------------------------

@dataclass(frozen=True)
class BadNewsSkeleton:
    c: int
    ell: int
    d: int
    h: int
    level: tuple[int, ...]                       # tree level (1-based) of each branch vertex, 0 for inner
    down_paths: dict = field(repr=False)         # branch vertex -> list of (inner..., child branch vertex)


def bad_news_parameters(c: int, ell: int) -> tuple[int, int, int]:
    """``(d, h, n)`` with ``d = c l^2``, ``h = c^(l-1) l^(2l-4)`` and
    ``n = h d (d^(l-1) - 1)/(d-1) + 1``."""
    _need(c >= 1 and ell >= 2, "bad_news needs c >= 1 and ell >= 2")
    d = c * ell * ell
    h = c ** (ell - 1) * ell ** (2 * ell - 4)
    n = h * d * (d ** (ell - 1) - 1) // (d - 1) + 1
    return d, h, n


def bad_news(c: int, ell: int) -> Instance:
    """Closure of the (h-1)-subdivided complete d-ary tree with ``ell`` levels."""
    d, h, n_expected = bad_news_parameters(c, ell)
    tree, _ = complete_dary_tree(d, ell)
    sub, inner = subdivide(tree, h - 1)
    forest = tree_forest(sub, 0)
    g = forest.closure()
    assert g.n == n_expected
    level = [0] * g.n
    _, tforest = complete_dary_tree(d, ell)
    for v in range(tree.n):
        level[v] = tforest.depth[v]
    down: dict[int, list[VertexSet]] = {}
    for (u, v), chain in inner.items():
        down.setdefault(u, []).append((*chain, v))
    skeleton = BadNewsSkeleton(c, ell, d, h, tuple(level), down)
    return Instance(g, f"bad_news(c={c},l={ell})", forest=forest,
                    meta={"skeleton": skeleton, "d": d, "h": h,
                          "tree_depth": h * (ell - 1) + 1})


class WitnessError(ValueError):
    pass


def bad_news_witness(inst: Instance, part_of: Sequence[int]) -> VertexSet:
    """Root-to-leaf path (root first) meeting at least ``ell`` parts.

    ``part_of[v]`` names the part of vertex ``v``. Parts must have at most
    ``(hd - 1)/(ell - 1)`` vertices. Built level by level: below the current
    endpoint take the smallest vertex outside the parts already met (one
    exists by counting) and run down its subdivided edge to the next branch
    vertex.
    """
    sk: BadNewsSkeleton = inst.meta["skeleton"]
    g = inst.graph
    if len(part_of) != g.n:
        raise WitnessError("part_of must cover every vertex")
    sizes: dict[int, int] = {}
    for p in part_of:
        sizes[p] = sizes.get(p, 0) + 1
    cap = (sk.h * sk.d - 1) / (sk.ell - 1)
    worst = max(sizes.values())
    if worst > cap:
        raise WitnessError(f"part of size {worst} exceeds cap {cap:g}")
    walk = [0]
    met = {part_of[0]}
    for j in range(2, sk.ell + 1):
        paths = sk.down_paths[walk[-1]]
        if len(met) >= j:
            chosen = paths[0]
        else:
            below = sorted((v, pth) for pth in paths for v in pth)
            fresh = [(v, pth) for v, pth in below if part_of[v] not in met]
            if not fresh:
                raise AssertionError("counting argument violated")
            chosen = fresh[0][1]
        walk.extend(chosen)
        met.update(part_of[v] for v in chosen)
    return tuple(walk)


# -- generic dispatch ---------------------------------------------------------

def generate(spec: FamilySpec | Mapping[str, Any]) -> Instance:
    if not isinstance(spec, FamilySpec):
        spec = FamilySpec(spec["family"], {k: v for k, v in spec.items() if k != "family"})
    f, p = spec.family, dict(spec.params)
    name = spec.label()
    if f == "path":
        return Instance(path(p["n"]), name)
    if f == "path_power":
        return Instance(path_power(p["n"], p["k"]), name)
    if f == "grid":
        rows, cols = p["rows"], p.get("cols", p["rows"])
        g = grid(rows, cols)
        return Instance(g, name, coords=tuple(divmod(v, cols) for v in range(g.n)), factor_sizes=(rows, cols))
    if f == "cycle":
        return Instance(cycle(p["n"]), name)
    if f == "complete":
        return Instance(complete(p["n"]), name)
    if f == "star":
        g = star(p["p"])
        return Instance(g, name, forest=tree_forest(g, 0))
    if f == "complete_dary_tree":
        g, fo = complete_dary_tree(p["d"], p["height"])
        return Instance(g, name, forest=fo)
    if f == "subdivision":
        inner = generate(p["inner"])
        g, _ = subdivide(inner.graph, p["s"])
        return Instance(g, name)
    if f == "closure":
        inner = generate(p["inner"])
        if inner.forest is None:
            raise GraphError("closure needs a rooted-tree family")
        return Instance(inner.forest.closure(), name, forest=inner.forest)
    if f == "random_tree":
        g = random_tree(p["n"], p.get("seed", 0), p.get("degree_cap"))
        return Instance(g, name, forest=tree_forest(g, 0))
    if f == "k_tree":
        g, td = k_tree(p["n"], p["k"], p.get("seed", 0))
        return Instance(g, name, decomposition=td)
    if f == "strong_product":
        a, b = generate(p["a"]), generate(p["b"])
        g, coords = strong_product(a.graph, b.graph)
        return Instance(g, name, coords=coords, factor_sizes=(a.graph.n, b.graph.n))
    if f == "bad_news":
        return bad_news(p["c"], p["ell"])
    if f == "path_blowup":
        return grid_blowup((p["n"],), p.get("c", 1))
    if f == "grid_blowup":
        return grid_blowup((p["rows"], p.get("cols", p["rows"])), p.get("c", 1))
    raise GraphError(f"unknown family {f!r}")


FAMILY_PARAMS = {
    "path": ("n",), "path_power": ("n", "k"), "grid": ("rows", "cols"), "cycle": ("n",),
    "complete": ("n",), "star": ("p",), "complete_dary_tree": ("d", "height"),
    "random_tree": ("n", "seed", "degree_cap"), "k_tree": ("n", "k", "seed"),
    "bad_news": ("c", "ell"), "path_blowup": ("n", "c"), "grid_blowup": ("rows", "cols", "c"),
}


def spec_from_args(family: str, values: Sequence[str], seed: int | None = None) -> FamilySpec:
    names = FAMILY_PARAMS.get(family)
    if names is None:
        raise GraphError(f"family {family!r} is not available from the command line")
    if len(values) > len(names):
        raise GraphError(f"{family} takes at most {len(names)} parameters")
    params = {k: int(v) for k, v in zip(names, values)}
    if seed is not None and "seed" in names:
        params["seed"] = seed
    return FamilySpec(family, params)


def instance_metadata(inst: Instance) -> str:
    """JSON sidecar: coordinates, forest, known decomposition when present."""
    out: dict[str, Any] = {"name": inst.name, "n": inst.graph.n}
    if inst.coords is not None:
        out["coords"] = [list(c) for c in inst.coords]
    if inst.forest is not None:
        out["forest"] = list(inst.forest.parent)
    if inst.decomposition is not None:
        td = inst.decomposition
        out["decomposition"] = {"bags": [list(b) for b in td.bags],
                                "tree_edges": [list(e) for e in td.tree.edges()]}
    for key in ("d", "h", "tree_depth"):
        if key in inst.meta:
            out[key] = inst.meta[key]
    return json.dumps(out, sort_keys=True)
