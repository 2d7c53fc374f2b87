from __future__ import annotations

import os

import numpy as np
import pytest

from corrclust.bench import (
    ACCEPT_HEADER,
    RESULTS_HEADER,
    SUMMARY_HEADER,
    ExperimentConfig,
    ReferenceRecord,
    ReferenceStore,
    correlation_histogram,
    load_config,
    refresh_is_optimal,
    register_reference,
    run_suite,
    tune_lambda_scale,
    write_results,
)
from corrclust.correlations import cc_correlations, correlation_matrix, mc_correlations, mh_sample
from corrclust.errors import ConfigError, InvalidParameterError
from corrclust.exact import brute_force
from corrclust.instance import build_instance, generate_regular, write_instance


def write_suite(tmp_path, count=2, n=10, d=3, seed=0):
    paths = []
    for k in range(count):
        inst = generate_regular(n, d, seed=seed + k)
        path = tmp_path / f"g{k}.txt"
        write_instance(inst, path)
        paths.append(str(path))
    return paths


def test_csv_headers_are_pinned():
    assert RESULTS_HEADER == (
        "graph_id,method,source,param,lambda_scale,budget_m,rep,"
        "e_best,is_optimal,wall_ms,seed"
    )
    assert ACCEPT_HEADER == (
        "graph_id,source,param,rep,beta,cluster_size,delta_e,accepted"
    )


def test_reference_store_roundtrip(tmp_path):
    path = tmp_path / "refs.json"
    store = ReferenceStore(str(path))
    store.register(ReferenceRecord("g0", -10.0, False, "long_sa"))
    store.save()
    back = ReferenceStore(str(path))
    assert back.get("g0").energy == -10.0
    assert back.get("g0").certified is False


def test_reference_store_update_semantics():
    store = ReferenceStore(None)
    assert store.register(ReferenceRecord("g", -8.0, False, "long_sa"))
    # worse uncertified result does not replace
    assert not store.register(ReferenceRecord("g", -6.0, False, "long_sa"))
    # better uncertified result does
    assert store.register(ReferenceRecord("g", -9.0, False, "long_sa"))
    # certified beats uncertified even at equal energy
    assert store.register(ReferenceRecord("g", -9.0, True, "brute_force"))
    # uncertified never displaces certified
    assert not store.register(ReferenceRecord("g", -11.0, False, "long_sa"))


def test_register_reference_brute_force(tmp_path):
    inst = generate_regular(10, 3, seed=1)
    store = ReferenceStore(str(tmp_path / "refs.json"))
    rec = register_reference(store, "g0", inst, method="brute_force")
    assert rec.certified
    assert rec.energy == brute_force(inst).e_min


def test_register_reference_long_sa_protocol_constants():
    from corrclust.bench import LONG_SA_ITER_MULTIPLE, LONG_SA_REPS

    assert LONG_SA_ITER_MULTIPLE == 10_000
    assert LONG_SA_REPS == 50


def test_refresh_is_optimal(tmp_path):
    paths = write_suite(tmp_path, count=1, n=8, seed=2)
    cfg = ExperimentConfig(
        method="SA", instances=paths, budgets=[10], reps=3, seed=1,
        out_dir=str(tmp_path), references="auto",
    )
    rows, _summary, _ = run_suite(cfg)
    results = tmp_path / "results.csv"
    write_results(rows, results)
    store = ReferenceStore(str(tmp_path / "references.json"))
    # force an unreachable reference; every row flips to non-optimal
    store.records["g0"] = ReferenceRecord("g0", -1e9, True, "brute_force")
    changed = refresh_is_optimal(results, store)
    assert changed == sum(r.is_optimal for r in rows)
    lines = results.read_text().splitlines()
    assert all(line.split(",")[8] == "0" for line in lines[1:])


def test_run_suite_zero_reps_empty(tmp_path):
    paths = write_suite(tmp_path, count=1, n=8, seed=3)
    cfg = ExperimentConfig(
        method="SA", instances=paths, budgets=[10], reps=0, seed=0,
        out_dir=str(tmp_path),
    )
    rows, summary, accept = run_suite(cfg)
    assert rows == []
    assert summary == []
    assert accept == []


def test_run_suite_deterministic_rows(tmp_path):
    paths = write_suite(tmp_path, count=2, n=8, seed=4)
    cfg = ExperimentConfig(
        method="CA", source="cc", instances=paths, budgets=[10, 20],
        reps=3, seed=7, out_dir=str(tmp_path),
    )
    rows1, summary1, _ = run_suite(cfg)
    rows2, summary2, _ = run_suite(cfg)
    strip = lambda row: ",".join(
        f for k, f in enumerate(row.to_csv().split(",")) if k != 9
    )
    assert [strip(r) for r in rows1] == [strip(r) for r in rows2]
    assert summary1 == summary2


def test_run_suite_acceptance_lines(tmp_path):
    paths = write_suite(tmp_path, count=1, n=8, seed=5)
    cfg = ExperimentConfig(
        method="CA", source="cc", instances=paths, budgets=[5], reps=1,
        seed=1, out_dir=str(tmp_path), record_acceptance=True,
    )
    _rows, _summary, accept = run_suite(cfg)
    assert accept
    fields = accept[0].split(",")
    assert len(fields) == len(ACCEPT_HEADER.split(","))
    assert fields[1] == "cc"


def test_run_suite_generated_instances(tmp_path):
    cfg = ExperimentConfig(
        method="SA", gen_n=8, gen_d=3, gen_count=2, budgets=[5], reps=2,
        seed=3, out_dir=str(tmp_path),
    )
    rows, summary, _ = run_suite(cfg)
    assert len(rows) == 4
    assert {r.graph_id for r in rows} == {"d3_n8_g000", "d3_n8_g001"}
    assert len(summary) == 1
    assert summary[0].split(",")[7] == "2"  # n_graphs


def test_run_suite_mc_source(tmp_path):
    paths = write_suite(tmp_path, count=1, n=8, seed=6)
    cfg = ExperimentConfig(
        method="CA", source="mc", instances=paths, params=[0.3, 0.8],
        budgets=[5], reps=2, seed=2, out_dir=str(tmp_path),
        mh_burn_in=20, mh_thin=1, mh_samples=100,
    )
    rows, summary, _ = run_suite(cfg)
    assert {r.param for r in rows} == {"0.3", "0.8"}
    assert len(rows) == 4
    assert len(summary) == 2


def test_config_parsing_and_overrides(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(
        "# comment\n"
        "method = CA\n"
        "source = cc\n"
        "gen_n = 8\n"
        "gen_d = 3\n"
        "gen_count = 2\n"
        "lambda_scale = 0.5, 1.0\n"
        "budget = 10, 50\n"
        "reps = 4\n"
        "seed = 9\n"
    )
    cfg = load_config(path)
    assert cfg.lambda_grid == [0.5, 1.0]
    assert cfg.budgets == [10, 50]
    cfg = load_config(path, overrides={"reps": "2", "seed": "1"})
    assert cfg.reps == 2 and cfg.seed == 1


def test_config_unknown_key_fails_fast(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("methd = CA\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_validation_errors(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("method = CA\nsource = mc\ngen_n = 8\ngen_d = 3\ngen_count = 1\n")
    with pytest.raises(ConfigError):
        load_config(path)  # mc needs params
    path.write_text("method = SA\n")
    with pytest.raises(ConfigError):
        load_config(path)  # neither files nor generator
    path.write_text("method = SA\ngen_n = 8\ngen_d = 3\ngen_count = 1\nbudget = 1\n")
    with pytest.raises(ConfigError):
        load_config(path)  # budget below 2


def test_tune_lambda_scale_single_value_and_ties():
    inst = generate_regular(8, 3, seed=7)
    z = cc_correlations(inst)
    ref = brute_force(inst).e_min
    suite = [("g0", inst, z, None, ref)]
    best, table = tune_lambda_scale(suite, [0.7], budget_multiple=40, reps=5, seed=1)
    assert best == 0.7
    assert set(table) == {0.7}
    # saturated grid values perform identically here; ties resolve downward
    best, table = tune_lambda_scale(
        suite, [2.0, 1.0], budget_multiple=40, reps=5, seed=1
    )
    assert table[1.0] == table[2.0]
    assert best == 1.0


def test_tune_lambda_scale_missing_reference():
    inst = generate_regular(8, 3, seed=8)
    suite = [("g0", inst, cc_correlations(inst), None, None)]
    with pytest.raises(ConfigError):
        tune_lambda_scale(suite, [1.0], budget_multiple=10, reps=1)


def test_histogram_zero_matrix_spikes_at_zero():
    inst = generate_regular(10, 3, seed=9)
    z = correlation_matrix(np.zeros((10, 10)), source="MC", param=0.1)
    h = correlation_histogram(z, inst)
    assert h.counts.sum() == inst.m
    zero_bin = np.searchsorted(h.edges, 0.0, side="right") - 1
    assert h.counts[zero_bin] == inst.m
    assert not h.empty


def test_histogram_cc_mass_at_end_bins():
    inst = generate_regular(12, 3, seed=10)
    z = cc_correlations(inst)
    h = correlation_histogram(z, inst)
    assert h.counts[0] + h.counts[-1] == inst.m
    assert h.counts.sum() == inst.m


def test_histogram_weight_filter_partitions_edges():
    inst = generate_regular(12, 3, seed=11)
    z = cc_correlations(inst)
    plus = correlation_histogram(z, inst, weight_filter=1)
    minus = correlation_histogram(z, inst, weight_filter=-1)
    assert plus.counts.sum() + minus.counts.sum() == inst.m
    with pytest.raises(InvalidParameterError):
        correlation_histogram(z, inst, weight_filter=2)


def test_histogram_empty_filter_flagged():
    inst = generate_regular(10, 3, weight_set=(1.0,), seed=12)
    z = cc_correlations(inst)  # all couplings negative under J = -A
    h = correlation_histogram(z, inst, weight_filter=1)
    assert h.empty
    assert h.counts.sum() == 0


def test_histogram_negative_mass_grows_with_sampling_beta():
    # edges whose unfrustrated optimum is Z=+1 (couplings J=+1): frustration
    # pushes a growing share of their sampled correlations below zero as the
    # sampling temperature drops
    frac = {}
    for beta in (0.1, 1.1):
        neg = tot = 0
        for seed in range(3):
            inst = generate_regular(16, 10, seed=30 + seed)
            ss = mh_sample(inst, beta, burn_in=200, thin=1, n_samples=800, seed=seed)
            z = mc_correlations(ss)
            for k, (i, j, _a) in enumerate(inst.edges):
                if inst.couplings[k] > 0:
                    tot += 1
                    neg += z.values[i, j] < 0
        frac[beta] = neg / tot
    assert frac[1.1] > frac[0.1]


def test_percent_optimal_monotone_in_budget_isotonic(tmp_path):
    # non-decreasing trend in the budget, within 3-sigma binomial noise of an
    # isotonic fit (individual points may dip; the aggregate trend may not)
    paths = write_suite(tmp_path, count=4, n=10, d=3, seed=40)
    cfg = ExperimentConfig(
        method="SA", instances=paths, budgets=[5, 15, 40, 100], reps=25,
        seed=13, out_dir=str(tmp_path),
    )
    rows, _summary, _ = run_suite(cfg)
    budgets = sorted({r.budget_m for r in rows})
    pct = []
    for b in budgets:
        hits = [r.is_optimal for r in rows if r.budget_m == b]
        pct.append(100.0 * np.mean(hits))

    # pool-adjacent-violators fit of a non-decreasing sequence
    fit = [float(p) for p in pct]
    weight = [1.0] * len(fit)
    i = 0
    while i < len(fit) - 1:
        if fit[i] > fit[i + 1]:
            merged = (fit[i] * weight[i] + fit[i + 1] * weight[i + 1]) / (
                weight[i] + weight[i + 1]
            )
            fit[i : i + 2] = [merged]
            weight[i : i + 2] = [weight[i] + weight[i + 1]]
            i = max(i - 1, 0)
        else:
            i += 1
    iso = []
    for value, w in zip(fit, weight):
        iso.extend([value] * int(w))

    n_runs = sum(1 for r in rows if r.budget_m == budgets[0])
    for p, f in zip(pct, iso):
        frac = max(min(f / 100.0, 1.0), 0.0)
        sigma = 100.0 * np.sqrt(max(frac * (1 - frac), 1e-4) / n_runs)
        assert abs(p - f) <= 3.0 * sigma


def test_run_suite_worker_pool_matches_serial(tmp_path):
    paths = write_suite(tmp_path, count=2, n=8, seed=50)
    base = dict(
        method="CA", source="cc", instances=paths, budgets=[10], reps=4,
        seed=5, out_dir=str(tmp_path),
    )
    serial_rows, serial_summary, _ = run_suite(ExperimentConfig(**base))
    pooled_rows, pooled_summary, _ = run_suite(ExperimentConfig(**base, threads=2))
    strip = lambda row: ",".join(
        f for k, f in enumerate(row.to_csv().split(",")) if k != 9
    )
    assert [strip(r) for r in serial_rows] == [strip(r) for r in pooled_rows]
    assert serial_summary == pooled_summary
