import io
import random

import pytest
from hypothesis import given, strategies as st

from prodstruct.decomposition import (DecompositionError, InstanceTooLarge, RootedForest,
                                      TreeDecomposition, decomposition_from_bags, exact_tree_depth,
                                      exact_treewidth, heuristic_tree_decomposition,
                                      normalization_violations, normalize, read_decomposition,
                                      restrict_decomposition, validate_decomposition,
                                      verify_closure_embedding, write_decomposition)
from prodstruct.graph import build_graph
from prodstruct.instances import (complete, cycle, grid, k_tree, k_tree_subgraph, path, random_tree,
                                  star)

from conftest import random_graph, tree_depth_oracle, treewidth_oracle


@st.composite
def small_graphs(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 10_000))
    prob = draw(st.floats(0.1, 0.8))
    return random_graph(n, prob, seed)


# -- oracles first ------------------------------------------------------------

@pytest.mark.parametrize("g,tw", [(path(6), 1), (cycle(6), 2), (complete(5), 4), (grid(3, 3), 3),
                                  (star(6), 1), (build_graph(3, []), 0)])
def test_treewidth_oracle_known_values(g, tw):
    assert treewidth_oracle(g) == tw


@pytest.mark.parametrize("g,td", [(path(4), 3), (path(7), 3), (star(5), 2), (complete(4), 4),
                                  (cycle(4), 3)])
def test_tree_depth_oracle_known_values(g, td):
    assert tree_depth_oracle(g) == td


@given(small_graphs())
def test_exact_treewidth_matches_oracle(g):
    k, td = exact_treewidth(g)
    assert k == treewidth_oracle(g)
    assert td.width == k
    assert validate_decomposition(g, td) == []


@given(small_graphs())
def test_heuristic_is_valid_upper_bound(g):
    td = heuristic_tree_decomposition(g)
    assert validate_decomposition(g, td) == []
    assert td.width >= treewidth_oracle(g)


@given(small_graphs(max_n=8))
def test_exact_tree_depth_matches_oracle(g):
    depth, forest = exact_tree_depth(g)
    assert depth == tree_depth_oracle(g)
    assert forest.vertex_height == depth
    assert verify_closure_embedding(g, forest)


def test_exact_limits_raise():
    with pytest.raises(InstanceTooLarge):
        exact_treewidth(path(30), limit=20)
    with pytest.raises(InstanceTooLarge):
        exact_tree_depth(path(20), limit=15)


def test_exact_limit_env_override(monkeypatch):
    monkeypatch.setenv("PRODSTRUCT_EXACT_LIMIT", "5")
    with pytest.raises(InstanceTooLarge):
        exact_treewidth(path(6))


# -- validation ---------------------------------------------------------------

def test_validation_kinds():
    g = path(4)
    assert validate_decomposition(g, decomposition_from_bags([(0, 1), (1, 2), (2, 3)], [(0, 1), (1, 2)])) == []
    kinds = {v.kind for v in validate_decomposition(g, decomposition_from_bags([(0, 1), (2, 3)], [(0, 1)]))}
    assert "edge-uncovered" in kinds
    kinds = {v.kind for v in validate_decomposition(
        g, decomposition_from_bags([(0, 1), (1, 2), (2, 3), (1,)], [(0, 3), (3, 1), (1, 2)]))}
    assert "disconnected-trace" not in kinds
    bad = decomposition_from_bags([(0, 1), (2, 3), (1, 2)], [(0, 1), (1, 2)])
    assert "disconnected-trace" in {v.kind for v in validate_decomposition(g, bad)}
    missing = decomposition_from_bags([(0, 1), (1, 2)], [(0, 1)])
    assert "vertex-missing" in {v.kind for v in validate_decomposition(g, missing)}


def test_rooted_forest_rejects_cycles():
    with pytest.raises(Exception):
        RootedForest((1, 0))
    f = RootedForest((None, 0, 1, 0))
    assert f.vertex_height == 3
    assert f.is_ancestor(0, 2) and not f.is_ancestor(3, 2)


def test_restrict_keeps_validity():
    g, td = k_tree(40, 3, seed=2)
    keep = list(range(0, 40, 3))
    sub = restrict_decomposition(td, keep)
    from prodstruct.graph import induced
    view = induced(g, keep)
    local = TreeDecomposition(sub.tree, tuple(tuple(view.to_local[v] for v in b) for b in sub.bags))
    assert validate_decomposition(view.graph, local) == []


def test_decomposition_text_round_trip():
    g = grid(3, 4)
    td = heuristic_tree_decomposition(g)
    buf = io.StringIO()
    write_decomposition(td, g.n, buf)
    buf.seek(0)
    back, n = read_decomposition(buf)
    assert n == g.n and back.bags == td.bags
    assert sorted(back.tree.edges()) == sorted(td.tree.edges())
    assert buf.getvalue().splitlines()[0] == f"{td.tree.n} {td.width + 1} {g.n}"


def test_read_decomposition_rejects_short_file():
    with pytest.raises(DecompositionError):
        read_decomposition(io.StringIO("2 2 3\n0 0 1\n1 1 2\n"))


# -- normalisation --------------------------------------------------------------

def test_normalize_path_with_duplicate_bag():
    g = path(4)
    td = decomposition_from_bags([(0, 1), (1, 2), (1, 2), (2, 3)], [(0, 1), (1, 2), (2, 3)])
    nd = normalize(g, td)
    assert nd.tree.n == 3
    assert normalization_violations(g, nd) == []


@pytest.mark.parametrize("seed", range(10))
def test_normalize_random_ktree_subgraphs(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 4)
    n = rng.randint(k + 2, 40)
    g, td = k_tree_subgraph(n, k, seed)
    nd = normalize(g, td)
    assert validate_decomposition(g, nd) == []
    assert nd.width == td.width
    assert normalization_violations(g, nd, rng=random.Random(seed)) == []


def test_normalize_tree_decomposition_of_tree():
    t = random_tree(30, seed=4)
    nd = normalize(t, heuristic_tree_decomposition(t))
    assert nd.k == 1 and nd.tree.n == 29
    assert normalization_violations(t, nd) == []


def test_normalize_rejects_invalid_input():
    with pytest.raises(DecompositionError):
        normalize(path(3), decomposition_from_bags([(0, 1)], []))
