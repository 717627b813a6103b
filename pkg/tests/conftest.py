"""Independent brute-force oracles shared by the tests. None of these call
into the package's own algorithms beyond the Graph container."""
from __future__ import annotations

import itertools
import random
from functools import lru_cache

import pytest
from hypothesis import settings

from prodstruct.graph import Graph, build_graph

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def comps_after(g: Graph, removed) -> list[set[int]]:
    rem = set(removed)
    seen: set[int] = set()
    out = []
    for s in range(g.n):
        if s in rem or s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if w not in rem and w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        out.append(comp)
    return out


def largest_after(g: Graph, removed) -> int:
    return max((len(c) for c in comps_after(g, removed)), default=0)


def treewidth_oracle(g: Graph) -> int:
    """Subset DP: TW(S) = min over v in S of max(TW(S-v), |Q(S-v, v)|),
    where Q(S, v) are the vertices outside S+v reachable from v through S."""
    n = g.n
    if n == 0:
        return -1
    full = (1 << n) - 1

    def q_size(s: int, v: int) -> int:
        seen = 1 << v
        stack = [v]
        out = 0
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                bit = 1 << w
                if seen & bit:
                    continue
                seen |= bit
                if s & bit:
                    stack.append(w)
                else:
                    out += 1
        return out

    @lru_cache(maxsize=None)
    def tw(s: int) -> int:
        if s == 0:
            return -1
        best = n
        x = s
        while x:
            low = x & -x
            v = low.bit_length() - 1
            rest = s ^ low
            best = min(best, max(tw(rest), q_size(rest, v)))
            x ^= low
        return best

    return tw(full)


def tree_depth_oracle(g: Graph) -> int:
    @lru_cache(maxsize=None)
    def td(vs: frozenset) -> int:
        if not vs:
            return 0
        sub = [c for c in _comps_in(g, vs)]
        if len(sub) > 1:
            return max(td(frozenset(c)) for c in sub)
        return 1 + min(td(vs - {v}) for v in vs)
    return td(frozenset(range(g.n)))


def _comps_in(g: Graph, vs: frozenset):
    rem = set(range(g.n)) - set(vs)
    return comps_after(g, rem)


def best_separator(g: Graph, p: int) -> int:
    """Smallest achievable largest component using at most ``p`` vertices."""
    best = g.n
    for r in range(p + 1):
        for S in itertools.combinations(range(g.n), r):
            best = min(best, largest_after(g, S))
    return best


def random_graph(n: int, prob: float, seed: int) -> Graph:
    rng = random.Random(seed)
    return build_graph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < prob])


@pytest.fixture
def rng():
    return random.Random(12345)


# -- acceptance summary -------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
