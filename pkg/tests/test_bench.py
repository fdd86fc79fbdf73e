import csv

import numpy as np
import pytest

from binalloc import AnnealSchedule, SolverConfig, Thermo
from binalloc.bench import (
    CampaignConfig,
    TrialRecord,
    median_step_time,
    q_metric,
    run_campaign,
    runtime_sweep,
    solve_with_method,
    write_campaign_csv,
    write_q_csv,
    write_sweep_csv,
)
from binalloc.errors import IncompleteCampaignError
from binalloc.graphs import random_connected_graph
from binalloc.instances import random_instance

FAST_SOLVER = SolverConfig(
    thermo=Thermo(temp=1.0, time_const=0.1, floor=0.1),
    step=0.02,
    t_max=10.0,
    sample_stride=0,
    anneal=AnnealSchedule(beta=1.4, t_d=1.0, steps=10),
)


def records_from_table(table):
    """table[method] = list of per-trial costs."""
    recs = []
    for method, costs in table.items():
        for trial, cost in enumerate(costs):
            recs.append(TrialRecord(trial=trial, method=method, cost=cost,
                                    wall_time=0.0, iterations=1, converged=True))
    return recs


def test_q_single_trial_distinct():
    scores = q_metric(records_from_table({"a": [1.0], "b": [2.0], "c": [3.0]}))
    assert scores["a"] == pytest.approx(1.0)
    assert scores["c"] == pytest.approx(0.0)
    assert scores["b"] == pytest.approx(0.5)


def test_q_all_tied():
    table = {m: [5.0, 5.0, 5.0] for m in ("a", "b", "c", "d")}
    scores = q_metric(records_from_table(table))
    assert all(v == pytest.approx(0.5) for v in scores.values())


def test_q_sums_to_half_k():
    rng = np.random.default_rng(0)
    table = {m: rng.uniform(0, 10, 20).tolist() for m in "abcde"}
    scores = q_metric(records_from_table(table))
    assert sum(scores.values()) == pytest.approx(len(scores) / 2)


def test_q_monotone_transform_invariant():
    rng = np.random.default_rng(1)
    table = {m: rng.uniform(1, 10, 15).tolist() for m in "abcd"}
    base = q_metric(records_from_table(table))
    warped = {m: [np.exp(c) + 3.0 for c in costs] for m, costs in table.items()}
    assert q_metric(records_from_table(warped)) == pytest.approx(base)


def test_q_normalizer_600_for_7_methods_100_trials():
    # a method that wins every one of 100 trials against 6 rivals earns
    # 6 points per trial; Q = 600/600 = 1 exactly
    rng = np.random.default_rng(2)
    table = {"winner": [0.0] * 100}
    for m in "abcdef":
        table[m] = rng.uniform(1, 2, 100).tolist()
    scores = q_metric(records_from_table(table))
    assert scores["winner"] == pytest.approx(600.0 / 600.0)
    assert len(scores) == 7


def test_q_ties_share_mean_points():
    recs = records_from_table({"a": [1.0], "b": [1.0 + 1e-12], "c": [9.0]})
    scores = q_metric(recs)
    # a and b tie for placements worth 2 and 1 points; each gets 1.5/2
    assert scores["a"] == pytest.approx(0.75)
    assert scores["b"] == pytest.approx(0.75)
    assert scores["c"] == pytest.approx(0.0)


def test_q_rejects_missing_method():
    recs = records_from_table({"a": [1.0, 2.0], "b": [1.0, 2.0]})
    del recs[-1]
    with pytest.raises(IncompleteCampaignError):
        q_metric(recs)


def test_campaign_greedy_vs_brute():
    cfg = CampaignConfig(n=8, trials=1, seed=3, methods=("greedy", "brute"),
                         p_ref=120.0, solver=FAST_SOLVER)
    records = run_campaign(cfg)
    assert len(records) == 2
    by = {r.method: r for r in records}
    assert by["greedy"].cost >= by["brute"].cost - 1e-9


def test_campaign_deterministic():
    cfg = CampaignConfig(n=6, trials=3, seed=9,
                         methods=("greedy", "binnn-c", "hnn"),
                         p_ref=90.0, solver=FAST_SOLVER)
    a = [r.cost for r in run_campaign(cfg)]
    b = [r.cost for r in run_campaign(cfg)]
    assert a == b


def test_campaign_parallel_matches_serial():
    cfg = CampaignConfig(n=6, trials=4, seed=5, methods=("greedy", "brute"),
                         p_ref=90.0, solver=FAST_SOLVER)
    serial = [(r.trial, r.method, r.cost) for r in run_campaign(cfg)]
    parallel = [(r.trial, r.method, r.cost) for r in run_campaign(cfg, jobs=2)]
    assert serial == parallel


def test_campaign_config_validation():
    with pytest.raises(ValueError):
        CampaignConfig(trials=0)
    with pytest.raises(ValueError):
        CampaignConfig(methods=())


def test_solve_with_method_unknown():
    inst = random_instance(4, 0, p_ref=20.0)
    graph = random_connected_graph(4, 0.2, 0)
    with pytest.raises(ValueError):
        solve_with_method("sdp", inst, graph, FAST_SOLVER)


def test_median_step_time_positive():
    t = median_step_time("hnn", 20, steps=10, seed=0, repeats=2)
    assert t > 0.0


def test_runtime_sweep_shapes():
    assert runtime_sweep([], ("greedy",)) == []
    rows = runtime_sweep([6, 8], ("greedy", "brute"), per_n_trials=2, seed=1,
                         solver=FAST_SOLVER)
    assert len(rows) == 4
    for row in rows:
        assert row["median_seconds"] >= 0.0
        assert row["trials"] == 2


def test_runtime_sweep_skips_big_brute():
    rows = runtime_sweep([30], ("greedy", "brute"), per_n_trials=1, seed=2,
                         solver=FAST_SOLVER)
    assert [r["method"] for r in rows] == ["greedy"]


def test_csv_writers(tmp_path):
    recs = records_from_table({"a": [1.0, 2.0], "b": [2.0, 1.0]})
    cpath = tmp_path / "campaign.csv"
    write_campaign_csv(recs, cpath)
    with open(cpath) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["trial", "method", "cost", "wall_time", "iterations",
                       "converged"]
    assert len(rows) == 5

    qpath = tmp_path / "q.csv"
    write_q_csv(q_metric(recs), qpath)
    with open(qpath) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["method", "Q"]

    spath = tmp_path / "scaling.csv"
    write_sweep_csv([{"n": 6, "method": "greedy", "median_seconds": 0.25,
                      "trials": 3}], spath)
    with open(spath) as fh:
        rows = list(csv.reader(fh))
    assert rows[1] == ["6", "greedy", "0.25", "3"]


def test_campaign_csv_floats_have_12_significant_digits(tmp_path):
    recs = [TrialRecord(trial=0, method="a", cost=1.0 / 3.0, wall_time=0.0,
                        iterations=1, converged=True)]
    path = tmp_path / "c.csv"
    write_campaign_csv(recs, path)
    with open(path) as fh:
        cost_field = list(csv.reader(fh))[1][2]
    assert cost_field == "0.333333333333"
