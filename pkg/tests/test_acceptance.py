"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import filecmp
import time
from itertools import combinations

import numpy as np
import pytest

from catorder.cli import main
from catorder.core import AnalysisConfig, ObservationSet, group_by_category
from catorder.dominance import DECISION_METHODS, infer_dominance
from catorder.resampling import RngStream, mean_ci, mean_diff_ci
from catorder.significance import adjust_benjamini_yekutieli, mann_whitney_one_sided
from catorder.simulation import NOISE_GRID, ScenarioSpec, generate_scenario, run_benchmark, sample_mixture

from test_significance import enumerate_mw, reference_by

SEED = 20240601


def grouped(groups):
    return group_by_category(ObservationSet.from_records(
        [(lab, v) for lab, vals in groups.items() for v in vals]))


@pytest.fixture(scope="module")
def full_grid():
    t0 = time.perf_counter()
    rep = run_benchmark(DECISION_METHODS, NOISE_GRID, 100, ScenarioSpec(n_per_category=100),
                        AnalysisConfig(seed=SEED))
    return rep, time.perf_counter() - t0


def test_criterion_1_method_ranking(full_grid, acceptance_record):
    rep, seconds = full_grid
    f1 = {m: rep.aggregate(m)["f1"] for m in DECISION_METHODS}
    middle = ("welch_t_by", "perc_lower", "bca_lower")
    ranking = all(f1["mann_whitney_by"] > f1[m] > f1["pooled_t"] for m in middle)
    in_band = 0.65 <= f1["mann_whitney_by"] <= 0.95
    ok = ranking and in_band and seconds < 15 * 60
    detail = ", ".join(f"{m}={v:.3f}" for m, v in sorted(f1.items(), key=lambda kv: -kv[1]))
    acceptance_record(1, ok, f"aggregate F1 {detail}; ranking={'ok' if ranking else 'violated'}, "
                      f"MW in [0.65,0.95]={in_band}, {seconds:.0f}s")
    assert ok


def test_criterion_2_noise_trend(full_grid, acceptance_record):
    rep, _ = full_grid
    f = [v for _, v in rep.f1_by_level("mann_whitney_by")]
    drop = f[0] - f[-1]
    rises = [b - a for a, b in zip(f, f[1:]) if b > a]
    ok = drop >= 0.1 and len(rises) <= 1 and all(r <= 0.05 for r in rises)
    acceptance_record(2, ok, f"MW F1 by level {[round(v, 3) for v in f]}; drop={drop:.3f}, "
                      f"inversions={len(rises)}")
    assert ok


def test_criterion_3_truth_recovery(acceptance_record):
    spec = ScenarioSpec(n_per_category=500).with_noise(0.01)
    exact = 0
    for s in range(100):
        res = infer_dominance(group_by_category(generate_scenario(spec, RngStream(s))), AnalysisConfig(seed=s))
        exact += res.network.edges == spec.truth_edges and res.density == 0.4
    ok = exact >= 95
    acceptance_record(3, ok, f"exact truth network in {exact}/100 runs (need >= 95)")
    assert ok


def test_criterion_4_ci_coverage(acceptance_record):
    g = np.random.default_rng(SEED)
    samples = g.normal(0, 1, (1000, 50))
    master = RngStream(SEED)
    cover = {}
    for method in ("percentile", "normal", "bca"):
        cfg = AnalysisConfig(0.05, 1000, method, SEED)
        cover[method] = sum(mean_ci(x, cfg, master.derive(i))[1].contains(0.0) for i, x in enumerate(samples)) / 1000
    ok = 0.93 <= cover["percentile"] <= 0.97 and 0.93 <= cover["normal"] <= 0.97 and 0.92 <= cover["bca"] <= 0.97
    acceptance_record(4, ok, ", ".join(f"{m}={c:.3f}" for m, c in cover.items()))
    assert ok


def test_criterion_5_oracle_equivalence(acceptance_record):
    g = np.random.default_rng(SEED)
    mw_cases = mw_bad = 0
    for nx in range(1, 10):
        for ny in range(1, 11 - nx):
            for _ in range(10):
                v = g.permutation(nx + ny) + g.random()  # distinct values, random ranks
                x, y = v[:nx], v[nx:]
                mw_cases += 1
                mw_bad += abs(mann_whitney_one_sided(x, y).p_value - enumerate_mw(x, y)) > 1e-12
    hand = adjust_benjamini_yekutieli([0.01, 0.02, 0.03])
    hand_ok = np.allclose(hand, 0.055, rtol=0, atol=1e-15)
    by_err = 0.0
    for _ in range(1000):
        p = g.random(int(g.integers(1, 60))) ** 3
        by_err = max(by_err, float(np.max(np.abs(adjust_benjamini_yekutieli(p) - reference_by(p.tolist())))))
    ok = mw_bad == 0 and hand_ok and by_err <= 1e-12
    acceptance_record(5, ok, f"MW exact mismatches {mw_bad}/{mw_cases}; BY hand case {hand.tolist()}; "
                      f"max BY error over 1000 vectors {by_err:.1e}")
    assert ok


def test_criterion_6_partial_order(acceptance_record):
    g = np.random.default_rng(SEED)
    bad = 0
    for i in range(100):
        k = int(g.integers(2, 7))
        groups = {f"g{j}": g.standard_t(3, int(g.integers(5, 60))) * g.uniform(0.5, 3) + g.normal(0, 2)
                  for j in range(k)}
        net = infer_dominance(grouped(groups), AnalysisConfig(reps=200, seed=i)).network
        irreflexive = all(a != b for a, b in net.edges)
        antisymmetric = not any((b, a) in net.edges for a, b in net.edges)
        bad += not (net.is_acyclic() and irreflexive and antisymmetric)
    closed = 0
    for s in range(100):
        h = np.random.default_rng([SEED, s])
        groups = {"A": h.normal(0, 10, 200), "B": h.normal(0, 10, 200) + 5, "C": h.normal(0, 10, 200) + 10}
        edges = infer_dominance(grouped(groups), AnalysisConfig(seed=s)).network.edges
        closed += {("B", "A"), ("C", "A"), ("C", "B")} <= edges
    ok = bad == 0 and closed >= 95
    acceptance_record(6, ok, f"order violations {bad}/100; shifted triples closed in {closed}/100")
    assert ok


def test_criterion_7_scalability(acceptance_record):
    spec = ScenarioSpec()
    master = RngStream(SEED)
    p = sample_mixture(spec.base, 10_000, master.derive(0))
    q = sample_mixture(spec.top, 10_000, master.derive(1))
    secs = {}
    for method in ("percentile", "bca"):
        t0 = time.perf_counter()
        mean_diff_ci(p, q, AnalysisConfig(0.05, 4000, method, SEED), master.derive(2))
        secs[method] = time.perf_counter() - t0
    ratio = secs["bca"] / secs["percentile"]

    big_p = sample_mixture(spec.base, 250_000, master.derive(3))
    big_q = sample_mixture(spec.top, 250_000, master.derive(4))
    t0 = time.perf_counter()
    mean_diff_ci(big_p, big_q, AnalysisConfig(0.05, 4000, "percentile", SEED), master.derive(5))
    big = time.perf_counter() - t0

    ok = ratio >= 5 and big < 30 * 60
    acceptance_record(7, ok, f"n=10000 K=4000: percentile {secs['percentile']:.2f}s, bca {secs['bca']:.2f}s, "
                      f"ratio {ratio:.1f}x (need >= 5); 500k points percentile {big:.1f}s (need < 1800)")
    assert ok


def test_criterion_8_determinism(tmp_path, acceptance_record):
    src = tmp_path / "sim.csv"
    commands = {
        "simulate": lambda d: ["simulate", "--p1", "0.2", "--seed", "7", "--out", str(d / "sim.csv")],
        "analyze": lambda d: ["analyze", "--input", str(src), "--ci", "bca", "--reps", "300", "--seed", "7",
                              "--jobs", "2", "--out", str(d / "r.json"), "--dot", str(d / "r.dot"),
                              "--ci-table", str(d / "ci.csv")],
        "benchmark": lambda d: ["benchmark", "--p1-grid", "0.05,0.3", "--datasets", "2", "--reps", "200",
                                "--seed", "7", "--out", str(d / "b.csv"), "--json", str(d / "b.json")],
    }
    assert main(["simulate", "--seed", "3", "--out", str(src)]) == 0
    differing = []
    for name, argv in commands.items():
        runs = []
        for r in range(2):
            d = tmp_path / f"{name}{r}"
            d.mkdir()
            assert main(argv(d)) == 0
            runs.append(d)
        files = sorted(f.name for f in runs[0].iterdir())
        _, mismatch, errors = filecmp.cmpfiles(runs[0], runs[1], files, shallow=False)
        differing += [f"{name}/{f}" for f in mismatch + errors]
    ok = not differing
    acceptance_record(8, ok, "byte-identical JSON/CSV/DOT across repeated runs" if ok
                      else f"differing outputs: {differing}")
    assert ok
