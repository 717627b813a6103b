import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from prodstruct.decomposition import (RootedForest, decomposition_from_bags,
                                      heuristic_tree_decomposition)
from prodstruct.graph import build_graph
from prodstruct.instances import complete, grid, k_tree, path, random_tree
from prodstruct.partition import (Bound, PartitionError, certificate_json, choose_depth,
                                  make_partition, path_lower_bound_check, quotient,
                                  recheck_certificate, star_partition, tdd_partition,
                                  tdd_partition_feasible, treewidth_tdd_partition,
                                  verify_hpartition)
from prodstruct.separators import ClassGuarantee, DecompositionEngine, bfs_layer_engine, centroid_engine

from conftest import tree_depth_oracle

GRID = ClassGuarantee(2, 0.5)


# -- verification -------------------------------------------------------------

def test_verify_detects_missing_host_edge():
    g = path(4)
    p = make_partition(4, [(0, 1), (2, 3)], [])
    cert = verify_hpartition(g, p)
    assert not cert.valid and cert.violations[0].kind == "edge"
    assert verify_hpartition(g, make_partition(4, [(0, 1), (2, 3)], [(0, 1)])).valid


def test_verify_detects_uncovered_and_overlap():
    with pytest.raises(PartitionError):
        make_partition(3, [(0, 1), (1, 2)])
    cert = verify_hpartition(path(3), make_partition(3, [(0, 1)]))
    assert {v.kind for v in cert.violations} == {"uncovered"}


def test_verify_witness_kinds():
    g = path(3)
    p = make_partition(3, [(0,), (1,), (2,)], [(0, 1), (1, 2)])
    assert verify_hpartition(g, p, witness=RootedForest((1, None, 1))).witness_value == 2
    bad = verify_hpartition(g, p, witness=RootedForest((None, 0, None)))
    assert not bad.valid
    td = decomposition_from_bags([(0, 1), (1, 2)], [(0, 1)])
    assert verify_hpartition(g, p, witness=td).witness_value == 1
    assert not verify_hpartition(g, p, witness=(0, 2)).valid


@given(st.integers(2, 12), st.integers(0, 1000))
def test_quotient_is_minimal_host(n, seed):
    rng = random.Random(seed)
    g = random_tree(n, seed)
    labels = [rng.randrange(3) for _ in range(n)]
    parts = [[v for v in range(n) if labels[v] == i] for i in range(3)]
    parts = [p for p in parts if p]
    q = quotient(g, parts)
    assert verify_hpartition(g, make_partition(n, parts, q.edges())).valid


# -- star partitions ------------------------------------------------------------

@pytest.mark.parametrize("side", [8, 16, 24, 32])
def test_star_partition_grids(side):
    g = grid(side, side)
    fp = star_partition(g, bfs_layer_engine, GRID)
    cert = verify_hpartition(g, fp.partition, witness=fp.forest)
    assert cert.valid and cert.witness_value <= 2
    assert fp.partition.width <= 6.829 * g.n ** (2 / 3)
    assert fp.bound.holds(fp.partition.width)


@given(st.integers(1, 120), st.integers(0, 100))
def test_star_partition_trees(n, seed):
    t = random_tree(n, seed)
    fp = star_partition(t, centroid_engine, ClassGuarantee(1, 0.99))
    cert = verify_hpartition(t, fp.partition, witness=fp.forest)
    assert cert.valid and cert.witness_value <= 2


# -- tree-depth partitions --------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_tdd_partition_grid(d):
    g = grid(32, 32)
    fp = tdd_partition(g, bfs_layer_engine, GRID, d)
    cert = verify_hpartition(g, fp.partition, witness=fp.forest)
    assert cert.valid and cert.witness_value <= d
    assert fp.bound.holds(fp.partition.width)


@given(st.integers(3, 300), st.integers(0, 100), st.integers(2, 4))
def test_tdd_partition_two_trees(n, seed, d):
    g, td = k_tree(n, 2, seed)
    fp = tdd_partition(g, DecompositionEngine(g, td), ClassGuarantee(3, 0.5), d)
    cert = verify_hpartition(g, fp.partition, witness=fp.forest)
    assert cert.valid and cert.witness_value <= d
    assert fp.bound.holds(fp.partition.width)


def test_tdd_partition_skips_empty_level():
    g = build_graph(6, [(0, 1), (2, 3), (4, 5)])
    fp = tdd_partition(g, centroid_engine, ClassGuarantee(1, 0.5), 2)
    assert all(fp.partition.parts)
    assert verify_hpartition(g, fp.partition, witness=fp.forest).valid


def test_choose_depth_fixed():
    assert choose_depth(1000, 0.5, 1 / 6).d == 2
    assert choose_depth(1000, 0.5, 0.1).d == 3
    assert choose_depth(1000, Fraction(1, 2), Fraction(1, 6)).d == 2
    with pytest.raises(ValueError):
        choose_depth(1000, 0.5, 0.6)


def test_choose_depth_other_schedules():
    assert choose_depth(2 ** 16, 0.5, schedule="loglog").d == math.ceil(math.log2(17))
    assert choose_depth(100, 0.5, schedule="slow", h=lambda n: 2.5).d == 3


# -- treewidth-driven partitions ----------------------------------------------

@given(st.integers(1, 400), st.integers(0, 100), st.integers(1, 3), st.integers(1, 4))
def test_treewidth_tdd_partition(n, seed, k, d):
    assume(n > k)
    if k == 1:
        g = random_tree(n, seed)
        td = heuristic_tree_decomposition(g)
    else:
        g, td = k_tree(n, k, seed)
    fp = treewidth_tdd_partition(g, td, k, d)
    cert = verify_hpartition(g, fp.partition, witness=fp.forest)
    assert cert.valid and cert.witness_value <= d
    assert fp.partition.width <= (k + 1) ** (1 - 1 / d) * n ** (1 / d) + 1e-9


@given(st.integers(1, 500), st.integers(1, 5))
def test_paths_satisfy_lower_bound(n, d):
    g = path(n)
    fp = treewidth_tdd_partition(g, heuristic_tree_decomposition(g), 1, d)
    assert path_lower_bound_check(n, d, fp.partition.width)


def test_p8_depth3_exhaustive():
    g = path(8)
    fp = treewidth_tdd_partition(g, heuristic_tree_decomposition(g), 1, 3)
    assert fp.partition.width <= 3
    assert tdd_partition_feasible(g, 3, 3)
    assert tdd_partition_feasible(g, 3, 2)
    assert not tdd_partition_feasible(g, 3, 1)
    assert path_lower_bound_check(8, 3, 2)


@given(st.integers(1, 9), st.integers(1, 3), st.integers(1, 3))
def test_feasibility_oracle_agrees_with_tree_depth(n, d, m):
    # width-1 partitions with height d exist iff td(P_n) <= d
    g = path(n)
    if m == 1:
        assert tdd_partition_feasible(g, d, 1) == (tree_depth_oracle(g) <= d)
    if tdd_partition_feasible(g, d, m):
        assert path_lower_bound_check(n, d, m)


# -- certificates ------------------------------------------------------------

def test_certificate_round_trip_and_tamper():
    g = grid(6, 6)
    fp = star_partition(g, bfs_layer_engine, GRID)
    doc = json.loads(json.dumps(certificate_json(fp.partition, fp.forest, fp.bound)))
    assert recheck_certificate(g, doc).valid
    doc["parts"][0].append(doc["parts"][1].pop())
    assert not recheck_certificate(g, doc).valid


def test_certificate_lying_bound_flag():
    g = path(4)
    p = make_partition(4, [(0, 1, 2, 3)])
    doc = certificate_json(p, None, Bound("one", 1))
    assert doc["meets_bound"] is False
    doc["meets_bound"] = True
    assert not recheck_certificate(g, doc).valid


def test_certificate_with_removed_vertices():
    g = complete(3)
    p = make_partition(3, [(0,), (1,)], [(0, 1)])
    doc = certificate_json(p, (0, 1), None, removed=[2])
    assert recheck_certificate(g, doc).valid
