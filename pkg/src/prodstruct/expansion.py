"""Partitions for graphs without shallow clique models.

The driver grows shallow clique models one branch set at a time. Whenever
the unexplored region splits (by connectivity or by a sparse cut) the pieces
are solved separately and glued back along the clique formed by the current
branch sets and the shared apex part ``Y``. If a model ever reaches ``h``
branch sets the graph breaks the promise, and the model is returned as a
certificate instead of a partition.
"""
from __future__ import annotations

import itertools
import math
import sys
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .decomposition import InstanceTooLarge, TreeDecomposition, exact_limit
from .graph import (Graph, GraphError, VertexSet, bfs_distances, boundary, build_graph,
                    components_within, vertex_set)
from .partition import HPartition, make_partition, verify_hpartition


def log2(x: float) -> float:
    return math.log2(x) if x > 0 else 0.0


def radius_limit(n: int, ell: float) -> int:
    """``ceil(4 l log n) + 2`` (binary log)."""
    return math.ceil(4 * ell * log2(n) - 1e-12) + 2


# -- shallow models -----------------------------------------------------------

@dataclass(frozen=True)
class ShallowModel:
    branch_sets: tuple[VertexSet, ...]
    centers: tuple[int, ...]
    depth: int

    def as_dict(self) -> dict:
        return {"kind": "shallow-model", "depth": self.depth,
                "branch_sets": [list(b) for b in self.branch_sets],
                "centers": list(self.centers)}


def verify_shallow_model(g: Graph, model: ShallowModel) -> bool:
    """Disjoint, each set within ``depth`` of its centre inside the set,
    and every two sets joined by an edge."""
    sets = [set(b) for b in model.branch_sets]
    if len(model.centers) != len(sets) or any(not s for s in sets):
        return False
    seen: set[int] = set()
    for s in sets:
        if seen & s or any(not 0 <= v < g.n for v in s):
            return False
        seen |= s
    for s, c in zip(sets, model.centers):
        if c not in s:
            return False
        dist = bfs_distances(g, c, s)
        if len(dist) != len(s) or max(dist.values()) > model.depth:
            return False
    for a, b in itertools.combinations(sets, 2):
        if not any(w in b for v in a for w in g.adjacency[v]):
            return False
    return True


def find_shallow_clique_model(g: Graph, h: int, r: int, limit: int | None = None) -> ShallowModel | None:
    """Exhaustive search for an r-shallow ``K_h``-model (small graphs only)."""
    cap = exact_limit(12) if limit is None else limit
    if g.n > cap:
        raise InstanceTooLarge(f"shallow model search capped at {cap} vertices, got {g.n}")
    if h <= 0:
        return ShallowModel((), (), r)
    adj = [sum(1 << w for w in g.adjacency[v]) for v in range(g.n)]
    cands: dict[int, int] = {}  # mask -> centre
    for mask in range(1, 1 << g.n):
        members = [v for v in range(g.n) if mask >> v & 1]
        s = set(members)
        for c in members:
            dist = bfs_distances(g, c, s)
            if len(dist) == len(s) and max(dist.values()) <= r:
                cands[mask] = c
                break
    order = sorted(cands, key=lambda m: (bin(m).count("1"), m))
    reach = {m: 0 for m in order}
    for m in order:
        acc = 0
        x = m
        while x:
            low = x & -x
            acc |= adj[low.bit_length() - 1]
            x ^= low
        reach[m] = acc

    chosen: list[int] = []

    def extend(start: int, used: int) -> bool:
        if len(chosen) == h:
            return True
        for i in range(start, len(order)):
            m = order[i]
            if m & used or any(not reach[m] & c for c in chosen):
                continue
            chosen.append(m)
            if extend(i + 1, used | m):
                return True
            chosen.pop()
        return False

    if not extend(0, 0):
        return None
    sets = tuple(tuple(v for v in range(g.n) if m >> v & 1) for m in chosen)
    return ShallowModel(sets, tuple(cands[m] for m in chosen), r)


# -- the spanning-tree / sparse-cut dichotomy ---------------------------------

@dataclass(frozen=True)
class STOutcome:
    """Either ``tree`` (parent map and radius) or ``cut`` (S, T)."""

    kind: str
    root: int | None = None
    parent: dict | None = field(default=None, repr=False)
    radius: int | None = None
    S: VertexSet | None = None
    T: VertexSet | None = None


def st_within(g: Graph, Z: Iterable[int], ell: float) -> STOutcome:
    """Dichotomy on the connected subgraph ``g[Z]`` (ids of ``g``)."""
    zs = set(Z)
    n = len(zs)
    root = min(zs)
    parent = {root: None}
    layers = [[root]]
    while True:
        nxt = []
        for u in layers[-1]:
            for w in g.adjacency[u]:
                if w in zs and w not in parent:
                    parent[w] = u
                    nxt.append(w)
        if not nxt:
            break
        layers.append(nxt)
    if len(parent) != n:
        raise GraphError("dichotomy needs a connected vertex set")
    ecc = len(layers) - 1
    if ecc <= radius_limit(n, ell):
        return STOutcome("tree", root=root, parent=parent, radius=ecc)
    below = 0
    for i in range(ecc):
        below += len(layers[i])
        if ell * len(layers[i + 1]) <= below and ell * len(layers[i]) <= n - below:
            S = vertex_set(v for layer in layers[:i + 1] for v in layer)
            T = vertex_set(zs - set(S))
            return STOutcome("cut", S=S, T=T)
    raise AssertionError("no sparse layer despite large eccentricity")


def check_st_outcome(g: Graph, Z: Iterable[int], ell: float, out: STOutcome) -> bool:
    """Independent recheck of either branch."""
    zs = set(Z)
    n = len(zs)
    if out.kind == "tree":
        par = out.parent or {}
        if set(par) != zs:
            return False
        for v, p in par.items():
            if p is not None and (p not in zs or not g.has_edge(v, p)):
                return False
        roots = [v for v, p in par.items() if p is None]
        if roots != [out.root]:
            return False
        depth = {out.root: 0}

        def depth_of(v: int) -> int:
            chain = []
            while v not in depth:
                chain.append(v)
                v = par[v]
                if len(chain) > n:
                    raise ValueError("cycle")
            d = depth[v]
            for u in reversed(chain):
                d += 1
                depth[u] = d
            return d

        try:
            radius = max(depth_of(v) for v in zs)
        except ValueError:
            return False
        return radius <= radius_limit(n, ell)
    S, T = set(out.S or ()), set(out.T or ())
    if not S or not T or S & T or S | T != zs:
        return False
    return (ell * len(boundary(g, S, zs)) <= len(S) + 1e-9
            and ell * len(boundary(g, T, zs)) <= len(T) + 1e-9)


def st_dichotomy(g: Graph, ell: float) -> STOutcome:
    if ell < 1:
        raise ValueError("ell must be at least 1")
    if g.n == 0:
        raise GraphError("empty graph")
    out = st_within(g, range(g.n), ell)
    if not check_st_outcome(g, range(g.n), ell, out):
        raise AssertionError("dichotomy outcome failed its recheck")
    return out


# -- the recursive construction -------------------------------------------------

@dataclass(frozen=True)
class ExpansionResult:
    Y: VertexSet
    partition: HPartition
    host_tw_witness: TreeDecomposition
    part_cap: int
    d: int
    ell: float
    h: int
    stats: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class PromiseViolation:
    model: ShallowModel

    def as_dict(self) -> dict:
        return self.model.as_dict()


class _Violation(Exception):
    def __init__(self, model: ShallowModel):
        self.model = model


APEX = -1  # key of the shared Y part


@dataclass
class _Piece:
    """Partial answer for one subproblem: the apex part, the host on part
    keys, and a host decomposition whose ``anchor`` bag holds every current
    branch set key and ``APEX``."""

    Y: set
    edges: set
    bags: list
    tree_edges: list
    anchor: int


class _Solver:
    def __init__(self, g: Graph, ell: float, h: int):
        self.g, self.ell, self.h = g, ell, h
        self.n = g.n
        self.d = radius_limit(max(g.n, 1), ell)
        self.cap = (h - 1) * self.d + 1
        self.branch: dict[int, VertexSet] = {}
        self.centers: dict[int, int] = {}
        self.calls = 0
        self.cases = {"base": 0, "split": 0, "drop": 0, "grow": 0, "cut": 0}

    def new_key(self, part: VertexSet, centre: int) -> int:
        key = len(self.branch)
        self.branch[key] = part
        self.centers[key] = centre
        return key

    def solve(self, Vp: set, keys: list[int], X: set, measure: tuple | None) -> _Piece:
        self.calls += 1
        U = set().union(*(self.branch[k] for k in keys)) if keys else set()
        Z = Vp - U - X
        here = (len(Vp), self.h - len(keys), len(Z))
        assert measure is None or here < measure, "termination measure did not decrease"
        # the weight precondition on the apex seed
        assert (self.ell - 1) * len(X) <= self.n - len(Vp) + len(U) + 1e-9, "(ell-1)|X| bound broken"
        piece = self._solve(Vp, keys, X, U, Z, here)
        assert len(piece.Y) <= len(X) + len(Z) / self.ell + 1e-9, "apex part too large"
        return piece

    def _clique_piece(self, keys: Sequence[int], Y: set) -> _Piece:
        members = [*keys, APEX]
        edges = {(a, b) for a, b in itertools.combinations(members, 2)}
        return _Piece(set(Y), edges, [frozenset(members)], [], 0)

    def _glue(self, keys: Sequence[int], pieces: list[_Piece]) -> _Piece:
        """Clique-sum along the shared branch sets and apex."""
        bags = [frozenset([*keys, APEX])]
        tree_edges: list[tuple[int, int]] = []
        Y: set = set()
        edges: set = set()
        for pc in pieces:
            off = len(bags)
            bags.extend(pc.bags)
            tree_edges.extend((a + off, b + off) for a, b in pc.tree_edges)
            tree_edges.append((0, pc.anchor + off))
            Y |= pc.Y
            edges |= pc.edges
        return _Piece(Y, edges, bags, tree_edges, 0)

    def _solve(self, Vp, keys, X, U, Z, here) -> _Piece:
        g = self.g
        if not Z:
            self.cases["base"] += 1
            return self._clique_piece(keys, X)

        comps = components_within(g, Z)
        if len(comps) > 1:
            self.cases["split"] += 1
            pieces = [self.solve(U | X | set(c), keys, X, here) for c in comps]
            return self._glue(keys, pieces)

        for i, k in enumerate(keys):
            if not boundary(g, self.branch[k], Z) & Z:
                self.cases["drop"] += 1
                rest = keys[:i] + keys[i + 1:]
                sub = self.solve(Vp - set(self.branch[k]), rest, X, here)
                node = len(sub.bags)
                sub.bags.append(frozenset([*keys, APEX]))
                sub.tree_edges.append((sub.anchor, node))
                sub.edges |= {(min(k, o), max(k, o)) for o in rest}
                sub.edges.add((APEX, k) if APEX < k else (k, APEX))
                sub.anchor = node
                return sub

        out = st_within(g, Z, self.ell)
        if out.kind == "tree":
            self.cases["grow"] += 1
            r = out.root
            grown = {r}
            for k in keys:
                z = min(boundary(g, self.branch[k], Z) & Z)
                while z is not None and z not in grown:
                    grown.add(z)
                    z = out.parent[z]
            part = vertex_set(grown)
            assert len(part) <= len(keys) * self.d + 1, "new branch set too large"
            if len(keys) + 1 == self.h:
                sets = tuple(self.branch[k] for k in keys) + (part,)
                centres = tuple(self.centers[k] for k in keys) + (r,)
                raise _Violation(ShallowModel(sets, centres, self.d))
            key = self.new_key(part, r)
            return self.solve(Vp, keys + [key], X, here)

        self.cases["cut"] += 1
        S, T = set(out.S), set(out.T)
        if len(S) > len(T) or (len(S) == len(T) and min(T) < min(S)):
            S, T = T, S
        NS = boundary(g, S, Z)
        X2 = X | NS
        first = self.solve(U | X2 | S, keys, X2, here)
        second = self.solve(U | X2 | (T - NS), keys, X2, here)
        return self._glue(keys, [first, second])


def _deep(fn, *args):
    """Run ``fn`` on a thread with a large stack; the recursion can be deep."""
    box: dict = {}

    def target():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 200000))
        try:
            box["value"] = fn(*args)
        except BaseException as exc:  # re-raised in the caller
            box["error"] = exc
        finally:
            sys.setrecursionlimit(old)

    prev = threading.stack_size()
    threading.stack_size(512 * 1024 * 1024)
    try:
        t = threading.Thread(target=target)
        t.start()
        t.join()
    finally:
        threading.stack_size(prev)
    if "error" in box:
        raise box["error"]
    return box["value"]


def expansion_partition(g: Graph, ell: float, h: int) -> ExpansionResult | PromiseViolation:
    """Apex set ``Y`` (at most n/l vertices) plus a partition of ``g - Y``
    into parts of at most ``(h-1)d+1`` vertices whose host has treewidth at
    most ``h-2``, with ``d = ceil(4 l log n) + 2``; or a d-shallow
    ``K_h``-model if one turns up."""
    if ell < 1:
        raise ValueError("ell must be at least 1")
    if h < 2:
        raise ValueError("h must be at least 2")
    solver = _Solver(g, ell, h)
    try:
        piece = _deep(solver.solve, set(range(g.n)), [], set(), None)
    except _Violation as v:
        return PromiseViolation(v.model)
    keys = sorted(solver.branch)
    index = {k: i for i, k in enumerate(keys)}
    host_edges = [(index[a], index[b]) for a, b in piece.edges if a != APEX and b != APEX]
    part = make_partition(g.n, [solver.branch[k] for k in keys], host_edges)
    bags = [tuple(sorted(index[k] for k in bag if k != APEX)) for bag in piece.bags]
    witness = TreeDecomposition(build_graph(len(bags), piece.tree_edges), tuple(bags))
    stats = {"calls": solver.calls, **solver.cases}
    return ExpansionResult(vertex_set(piece.Y), part, witness, solver.cap, solver.d, ell, h, stats)


def check_expansion_result(g: Graph, res: ExpansionResult) -> list[str]:
    """Every certificate field, recomputed. Empty list means all good."""
    problems = []
    Y = set(res.Y)
    if len(Y) > g.n / res.ell + 1e-9:
        problems.append(f"|Y|={len(Y)} exceeds n/l={g.n / res.ell:g}")
    cert = verify_hpartition(g, res.partition, [v for v in range(g.n) if v not in Y], res.host_tw_witness)
    if not cert.valid:
        problems.append(f"partition invalid: {cert.violations[:3]}")
    if res.partition.width > res.part_cap:
        problems.append(f"part of size {res.partition.width} exceeds cap {res.part_cap}")
    if res.host_tw_witness.width > res.h - 2:
        problems.append(f"host witness width {res.host_tw_witness.width} exceeds h-2={res.h - 2}")
    return problems


@dataclass(frozen=True)
class PolyexpReport:
    epsilon: float
    ell: float
    d: int
    h: int
    tw_bound: float
    part_bound: float
    apex_bound: float
    vacuous: bool


def polyexp_parameters(n: int, a: float, c: float, gamma: float) -> PolyexpReport:
    """Parameters for expansion ``w_r <= c (r+1)^a``; logs are binary."""
    if not (a > 0 and c > 0):
        raise ValueError("a and c must be positive")
    if not 0 < gamma < a / (2 * a + 1):
        raise ValueError(f"gamma must lie in (0, a/(2a+1)) = (0, {a / (2 * a + 1):g})")
    if n < 2:
        raise ValueError("below threshold: need n >= 2")
    ln = math.log2(n)
    if n < ln ** (a / gamma - 1):
        raise ValueError(f"below threshold: n={n} < (log n)^(a/gamma-1) = {ln ** (a / gamma - 1):g}")
    eps = gamma / a
    ell = n ** eps * ln ** (eps - 1)
    d = math.ceil(4 * ell * ln - 1e-12) + 2
    h = math.floor(c * (d + 1) ** a) + 1
    nl = n * ln
    tw_bound = c * 8 ** a * nl ** gamma
    part_bound = c * 8 ** (a + 1) * nl ** (gamma * (1 + 1 / a))
    apex_bound = nl ** (1 - eps)
    return PolyexpReport(eps, ell, d, h, tw_bound, part_bound, apex_bound,
                         vacuous=min(tw_bound, part_bound) >= n)


def polyexp_partition(g: Graph, a: float, c: float, gamma: float):
    """(report, result) where result is an ExpansionResult or PromiseViolation."""
    rep = polyexp_parameters(g.n, a, c, gamma)
    return rep, expansion_partition(g, max(1.0, rep.ell), rep.h)


def dominate_merge(res: ExpansionResult, g: Graph) -> tuple[HPartition, TreeDecomposition]:
    """Put ``Y`` back as one more part adjacent to every other part."""
    if not res.Y:
        return res.partition, res.host_tw_witness
    p = res.partition
    top = len(p.parts)
    edges = list(p.host.edges()) + [(i, top) for i in range(top)]
    merged = make_partition(g.n, [*p.parts, res.Y], edges)
    td = res.host_tw_witness
    witness = TreeDecomposition(td.tree, tuple(tuple(sorted((*b, top))) for b in td.bags))
    return merged, witness
