import json

import pytest
from hypothesis import given, strategies as st

from prodstruct.decomposition import validate_decomposition, verify_closure_embedding
from prodstruct.graph import GraphError, is_connected, is_tree
from prodstruct.instances import (WitnessError, bad_news, bad_news_parameters, bad_news_witness,
                                  complete_dary_tree, generate, grid, grid_blowup, instance_metadata,
                                  k_tree, k_tree_subgraph, path_power, random_tree, spec_from_args,
                                  strong_product, subdivide, path)
from prodstruct.partition import make_partition, quotient

from conftest import tree_depth_oracle


@given(st.integers(1, 200), st.integers(0, 10_000))
def test_random_tree_is_tree_and_reproducible(n, seed):
    t = random_tree(n, seed)
    assert is_tree(t) and t == random_tree(n, seed)


@given(st.integers(1, 200), st.integers(0, 1000), st.integers(2, 4))
def test_random_tree_degree_cap(n, seed, cap):
    assert random_tree(n, seed, degree_cap=cap).max_degree() <= cap


@given(st.integers(2, 80), st.integers(0, 1000), st.integers(1, 4))
def test_k_tree_decomposition(n, seed, k):
    if n <= k:
        return
    g, td = k_tree(n, k, seed)
    assert validate_decomposition(g, td) == [] and td.width == k
    assert g.edge_count == k * (k + 1) // 2 + (n - k - 1) * k
    h, td2 = k_tree_subgraph(n, k, seed)
    assert validate_decomposition(h, td2) == []


def test_strong_product_edge_count():
    g, coords = strong_product(path(3), path(4))
    assert g.n == 12 and len(set(coords)) == 12
    # (2*2+1)(3*2+1) closed neighbourhoods minus the diagonal, halved
    assert g.edge_count == (3 + 2 * 2) * (4 + 2 * 3) // 2 - 6


def test_grid_blowup_coords():
    inst = grid_blowup((3, 2), 2)
    assert inst.graph.n == 12
    assert sorted(inst.coords) == sorted((x, y, l) for x in (1, 2, 3) for y in (1, 2) for l in (1, 2))


def test_subdivide_counts():
    t, _ = complete_dary_tree(2, 2)
    g, inner = subdivide(t, 3)
    assert g.n == t.n + 3 * t.edge_count and is_tree(g)
    assert all(len(chain) == 3 for chain in inner.values())


def test_path_power_degree():
    g = path_power(10, 3)
    assert g.max_degree() == 6


def test_closure_tree_depth():
    _, forest = complete_dary_tree(2, 3)
    g = forest.closure()
    assert tree_depth_oracle(g) == 3
    assert verify_closure_embedding(g, forest)


# -- the adversarial closure ----------------------------------------------------

@pytest.mark.parametrize("c,ell", [(1, 2), (2, 2), (1, 3)])
def test_bad_news_shape(c, ell):
    d, h, n = bad_news_parameters(c, ell)
    inst = bad_news(c, ell)
    assert inst.graph.n == n
    assert inst.forest.vertex_height == inst.meta["tree_depth"]
    assert verify_closure_embedding(inst.graph, inst.forest)


def test_bad_news_witness_on_singletons():
    inst = bad_news(2, 2)
    part_of = list(range(inst.graph.n))
    walk = bad_news_witness(inst, part_of)
    assert walk[0] == 0
    for a, b in zip(walk, walk[1:]):
        assert inst.forest.parent[b] == a
    assert len({part_of[v] for v in walk}) >= 2


def test_bad_news_witness_rejects_fat_parts():
    inst = bad_news(1, 2)
    with pytest.raises(WitnessError):
        bad_news_witness(inst, [0] * inst.graph.n)


@given(st.integers(0, 10_000))
def test_bad_news_witness_random_partitions(seed):
    import random
    inst = bad_news(2, 2)
    rng = random.Random(seed)
    n = inst.graph.n
    cap = (inst.meta["h"] * inst.meta["d"] - 1)
    labels = list(range(n))
    rng.shuffle(labels)
    size = rng.randint(1, cap)
    part_of = [labels[v] // size for v in range(n)]
    walk = bad_news_witness(inst, part_of)
    met = sorted({part_of[v] for v in walk})
    assert len(met) >= 2
    parts = [[v for v in range(n) if part_of[v] == i] for i in sorted(set(part_of))]
    q = quotient(inst.graph, parts)
    index = {p: i for i, p in enumerate(sorted(set(part_of)))}
    assert all(q.has_edge(index[a], index[b]) for a in met for b in met if a < b)
    assert make_partition(n, parts, q.edges())


# -- dispatch -------------------------------------------------------------------

def test_generate_and_metadata():
    inst = generate({"family": "grid", "rows": 3, "cols": 4})
    assert inst.graph == grid(3, 4)
    meta = json.loads(instance_metadata(inst))
    assert meta["n"] == 12 and len(meta["coords"]) == 12
    assert generate(spec_from_args("k_tree", ["20", "2"], seed=5)).decomposition is not None
    with pytest.raises(GraphError):
        spec_from_args("nope", [])
    assert is_connected(generate(spec_from_args("random_tree", ["30"], seed=1)).graph)
