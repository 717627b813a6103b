import math

import pytest
from hypothesis import given, strategies as st

from prodstruct.expansion import (ExpansionResult, PromiseViolation, ShallowModel, STOutcome,
                                  check_expansion_result, check_st_outcome, dominate_merge,
                                  expansion_partition, find_shallow_clique_model, polyexp_parameters,
                                  radius_limit, st_dichotomy, verify_shallow_model)
from prodstruct.graph import boundary, build_graph
from prodstruct.instances import complete, cycle, grid, path, random_tree
from prodstruct.partition import verify_hpartition

from conftest import random_graph


# -- shallow models -------------------------------------------------------------

def test_verify_shallow_model_cases():
    g = complete(4)
    good = ShallowModel(((0,), (1,), (2,), (3,)), (0, 1, 2, 3), 0)
    assert verify_shallow_model(g, good)
    assert not verify_shallow_model(path(4), good)
    overlapping = ShallowModel(((0, 1), (1, 2)), (0, 1), 1)
    assert not verify_shallow_model(g, overlapping)
    too_deep = ShallowModel(((0, 1, 2),), (0,), 1)
    assert not verify_shallow_model(path(3), too_deep)


def test_cycle_contracts_to_triangle():
    model = find_shallow_clique_model(cycle(6), 3, 1)
    assert model is not None and verify_shallow_model(cycle(6), model)
    assert find_shallow_clique_model(path(6), 3, 2) is None


@given(st.integers(1, 8), st.integers(0, 500), st.integers(2, 4))
def test_found_models_verify(n, seed, h):
    g = random_graph(n, 0.5, seed)
    model = find_shallow_clique_model(g, h, 1)
    if model is not None:
        assert verify_shallow_model(g, model) and len(model.branch_sets) == h


# -- dichotomy ----------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 10, 100, 1000, 5000])
@pytest.mark.parametrize("ell", [1, 1.5, 2, 4, 8])
def test_dichotomy_on_paths(n, ell):
    g = path(n)
    out = st_dichotomy(g, ell)
    assert check_st_outcome(g, range(n), ell, out)
    if out.kind == "tree":
        assert out.radius <= radius_limit(n, ell)
    else:
        assert ell * len(boundary(g, out.S)) <= len(out.S)
        assert ell * len(boundary(g, out.T)) <= len(out.T)


def test_dichotomy_both_branches_occur():
    kinds = {st_dichotomy(path(n), 1).kind for n in (10, 5000)}
    assert kinds == {"tree", "cut"}


@given(st.integers(1, 300), st.integers(0, 500), st.floats(1, 6))
def test_dichotomy_on_trees(n, seed, ell):
    t = random_tree(n, seed, degree_cap=3)
    out = st_dichotomy(t, ell)
    assert check_st_outcome(t, range(n), ell, out)


def test_check_st_outcome_rejects_forged_cut():
    g = path(10)
    forged = STOutcome("cut", S=(0, 1, 2, 3, 4), T=(5, 6, 7, 8, 9))
    assert not check_st_outcome(g, range(10), 8, forged)


# -- the expansion partition ----------------------------------------------------

@pytest.mark.parametrize("side", [4, 8, 16])
@pytest.mark.parametrize("ell", [2, 4])
def test_expansion_on_grids(side, ell):
    g = grid(side, side)
    res = expansion_partition(g, ell, 5)
    assert isinstance(res, ExpansionResult)
    assert check_expansion_result(g, res) == []
    assert len(res.Y) <= g.n / ell
    assert res.partition.width <= (5 - 1) * res.d + 1
    assert res.host_tw_witness.width <= 3


@pytest.mark.parametrize("g,ell", [(path(2000), 1), (path(2000), 1.5), (cycle(1500), 2),
                                   (grid(3, 600), 1), (random_tree(2000, 3, degree_cap=3), 1)])
def test_expansion_on_long_instances(g, ell):
    res = expansion_partition(g, ell, 4)
    assert isinstance(res, ExpansionResult)
    assert check_expansion_result(g, res) == []


def test_long_path_reaches_sparse_cut_case():
    res = expansion_partition(path(2000), 1, 4)
    assert res.stats["cut"] > 0 and res.stats["grow"] > 0


def test_expansion_promise_violation():
    res = expansion_partition(complete(5), 2, 5)
    assert isinstance(res, PromiseViolation)
    assert verify_shallow_model(complete(5), res.model)
    assert len(res.model.branch_sets) == 5


def test_expansion_trivial_graphs():
    res = expansion_partition(build_graph(1, []), 2, 3)
    assert res.partition.parts == ((0,),)
    res = expansion_partition(build_graph(5, []), 2, 3)
    assert check_expansion_result(build_graph(5, []), res) == []


@given(st.integers(2, 40), st.integers(0, 300), st.sampled_from([1, 2, 3]))
def test_expansion_random_sparse(n, seed, ell):
    g = random_graph(n, 2.5 / n, seed)
    res = expansion_partition(g, ell, 6)
    if isinstance(res, PromiseViolation):
        assert verify_shallow_model(g, res.model)
    else:
        assert check_expansion_result(g, res) == []


def test_dominate_merge_valid():
    g = grid(6, 6)
    res = expansion_partition(g, 2, 5)
    merged, witness = dominate_merge(res, g)
    cert = verify_hpartition(g, merged, witness=witness)
    assert cert.valid and witness.width <= res.host_tw_witness.width + (1 if res.Y else 0)


def test_polyexp_parameters():
    rep = polyexp_parameters(10 ** 6, 1, 1, 0.3)
    assert rep.epsilon == pytest.approx(0.3)
    assert rep.d == math.ceil(4 * rep.ell * math.log2(10 ** 6)) + 2
    with pytest.raises(ValueError, match="below threshold"):
        polyexp_parameters(16, 1, 2, 0.3)
    with pytest.raises(ValueError):
        polyexp_parameters(10 ** 6, 1, 1, 0.4)
