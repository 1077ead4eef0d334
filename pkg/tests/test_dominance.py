import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catorder.core import (
    AnalysisConfig,
    ConfidenceInterval,
    DataError,
    ObservationSet,
    group_by_category,
)
from catorder.dominance import (
    DominanceNetwork,
    DominanceResult,
    check_lower_bound_rule,
    dominated_set,
    infer_dominance,
    infer_network,
    network_density,
)
from catorder.resampling import RngStream


def grouped(groups):
    recs = [(lab, v) for lab, vals in groups.items() for v in vals]
    return group_by_category(ObservationSet.from_records(recs))


def chain(n):
    nodes = tuple(f"n{i}" for i in range(n))
    return nodes, DominanceNetwork(nodes, frozenset((nodes[i + 1], nodes[i]) for i in range(n - 1)))


# --- network structure ------------------------------------------------------------

@pytest.mark.parametrize(
    "edges, expected",
    [(set(), 0.0), ({("b", "a"), ("c", "a"), ("d", "a"), ("e", "a")}, 0.4)],
)
def test_density_examples(edges, expected):
    net = DominanceNetwork(tuple("abcde"), frozenset(edges))
    assert network_density(net) == pytest.approx(expected)


def test_density_complete_dag():
    nodes = tuple("abcd")
    net = DominanceNetwork(nodes, frozenset((nodes[j], nodes[i]) for i in range(4) for j in range(i + 1, 4)))
    assert net.density() == 1.0


def test_density_needs_two_nodes():
    with pytest.raises(ValueError, match="undefined density"):
        network_density(DominanceNetwork(("a",)))


def test_dominated_set_follows_paths():
    nodes, net = chain(4)
    assert dominated_set(net, "n3") == {"n0", "n1", "n2"}
    assert dominated_set(net, "n0") == set()
    with pytest.raises(KeyError, match="unknown category"):
        net.dominated_set("zz")


def test_network_validation():
    with pytest.raises(ValueError, match="self-loop"):
        DominanceNetwork(("a", "b"), frozenset({("a", "a")}))
    with pytest.raises(ValueError, match="unknown category"):
        DominanceNetwork(("a", "b"), frozenset({("a", "c")}))


def test_cycle_detected():
    net = DominanceNetwork(("a", "b"), frozenset({("a", "b"), ("b", "a")}))
    assert not net.is_acyclic()
    _, ok = chain(3)
    assert ok.is_acyclic()
    assert ok.topological_order() == ["n2", "n1", "n0"]


@pytest.mark.parametrize("lo, hi, expected", [(0.5, 2.0, True), (-0.1, 2.0, False), (0.0, 1.0, False)])
def test_lower_bound_rule(lo, hi, expected):
    ci = ConfidenceInterval(lo, hi, 0.95, "percentile", (lo + hi) / 2)
    assert check_lower_bound_rule(ci) is expected


# --- inference ----------------------------------------------------------------------------

def test_two_well_separated_groups(rng):
    data = grouped({"lo": rng.normal(0, 1, 50), "hi": rng.normal(10, 1, 50)})
    res = infer_dominance(data, AnalysisConfig(reps=500))
    assert res.network.edges == {("hi", "lo")}
    pr = res.pair("lo", "hi")
    assert pr.p_adjusted < 1e-10
    assert 9 <= pr.diff_ci.point_estimate <= 11
    assert pr.diff_ci.lower > 0 and res.density == 1.0


def test_identical_groups_give_no_edges():
    vals = np.linspace(-1, 1, 30)
    res = infer_dominance(grouped({"a": vals, "b": vals, "c": vals}), AnalysisConfig(reps=200))
    assert res.network.edges == frozenset() and res.density == 0.0


def test_needs_two_categories():
    with pytest.raises(DataError, match="nothing to order"):
        infer_dominance(grouped({"a": [1.0, 2.0]}))
    with pytest.raises(DataError, match="nothing to order"):
        infer_network(grouped({"a": [1.0, 2.0]}))


def test_result_json_round_trip(rng):
    data = grouped({k: rng.normal(m, 2, 25) for k, m in zip("abc", (0, 1, 5))})
    res = infer_dominance(data, AnalysisConfig(reps=300, ci_method="bca", seed=4))
    text = json.dumps(res.to_dict())
    back = DominanceResult.from_dict(json.loads(text))
    assert back == res
    assert json.dumps(back.to_dict()) == text


def test_deterministic_and_thread_independent(rng):
    data = grouped({k: rng.normal(m, 2, 20) for k, m in zip("abcd", (0, 1, 2, 6))})
    cfg = AnalysisConfig(reps=200, seed=9)
    a = infer_dominance(data, cfg)
    assert infer_dominance(data, cfg) == a
    assert infer_dominance(data, cfg, n_jobs=3) == a


@pytest.mark.parametrize("method", ["mann_whitney_by", "welch_t_by", "pooled_t", "bca_lower", "perc_lower"])
def test_infer_network_methods_find_clear_edge(method, rng):
    data = grouped({"lo": rng.normal(0, 1, 40), "hi": rng.normal(5, 1, 40)})
    net = infer_network(data, AnalysisConfig(reps=400), method, RngStream(1))
    assert net.edges == {("hi", "lo")}


def test_infer_network_unknown_method(rng):
    with pytest.raises(ValueError, match="unknown method"):
        infer_network(grouped({"a": [1.0, 2.0], "b": [3.0, 4.0]}), method="sign_test")


def test_mann_whitney_network_matches_pipeline(rng):
    data = grouped({k: rng.normal(m, 3, 30) for k, m in zip("abcde", (0, 0.5, 2, 4, 4.5))})
    assert infer_network(data).edges == infer_dominance(data, AnalysisConfig(reps=50)).network.edges


def test_shifted_category_dominates(rng):
    base = rng.normal(0, 1, (3, 60))
    data = grouped({"a": base[0], "b": base[1], "c": base[2] + 3.0})
    edges = infer_dominance(data, AnalysisConfig(reps=100)).network.edges
    assert {("c", "a"), ("c", "b")} <= edges
    assert not any(j == "c" for _, j in edges)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.01, 1000), st.floats(-1000, 1000), st.integers(0, 2**31))
def test_edges_invariant_under_positive_affine_map_and_relabel(scale, shift, seed):
    g = np.random.default_rng(seed)
    raw = {k: g.normal(m, 1, 15) for k, m in zip("abcd", (0, 0.3, 1.5, 3))}
    base = infer_network(grouped(raw))
    moved = infer_network(grouped({k.upper(): v * scale + shift for k, v in raw.items()}))
    assert moved.edges == {(i.upper(), j.upper()) for i, j in base.edges}
