from __future__ import annotations

import numpy as np
import pytest

from corrclust.anneal import (
    AcceptanceSummary,
    RunRecord,
    acceptance_statistics,
    delta_energy,
    run_ca,
    run_sa,
)
from corrclust.cluster import random_cluster_policy
from corrclust.correlations import cc_correlations, correlation_matrix
from corrclust.errors import DegenerateCorrelationError, InvalidParameterError
from corrclust.exact import brute_force
from corrclust.instance import SpinConfig, build_instance, energy_of_array, generate_regular


def test_delta_energy_trivial_sets():
    inst = generate_regular(10, 3, seed=0)
    x = np.ones(10, dtype=np.int8)
    assert delta_energy(inst, x, set()) == 0.0
    assert delta_energy(inst, x, set(range(10))) == 0.0  # global flip, Z2


def test_delta_energy_matches_recompute():
    rng = np.random.default_rng(1)
    inst = generate_regular(14, 4, seed=2)
    for _ in range(1000):
        x = rng.choice(np.array([-1, 1], dtype=np.int8), size=14)
        k = int(rng.integers(0, 15))
        members = set(int(v) for v in rng.choice(14, size=k, replace=False))
        flipped = x.copy()
        for v in members:
            flipped[v] = -flipped[v]
        expected = energy_of_array(inst, flipped) - energy_of_array(inst, x)
        assert delta_energy(inst, x, members) == expected


def test_delta_energy_accepts_spin_config():
    inst = build_instance(2, [(0, 1, 1.0)])
    sc = SpinConfig(x=np.array([1, 1], dtype=np.int8), energy=1.0)
    # flipping one endpoint of a single satisfied... unsatisfied edge: H 1 -> -1
    assert delta_energy(inst, sc, {0}) == -2.0


def test_delta_energy_with_field():
    inst = build_instance(2, [(0, 1, 1.0)], fields=np.array([0.5, -0.25]))
    x = np.array([1, -1], dtype=np.int8)
    for members in ({0}, {1}, {0, 1}):
        flipped = x.copy()
        for v in members:
            flipped[v] = -flipped[v]
        expected = energy_of_array(inst, flipped) - energy_of_array(inst, x)
        assert delta_energy(inst, x, members) == pytest.approx(expected)


def test_sa_two_point_schedule():
    inst = generate_regular(8, 3, seed=3)
    rec = run_sa(inst, beta_f=8.0, m=2, seed=4)
    assert rec.evaluations == 1  # single proposal at beta = 0
    assert rec.final_beta == 8.0  # second schedule point is beta_f exactly
    assert rec.event_beta[0] == 0.0


def test_sa_schedule_is_linear_in_iterations():
    inst = generate_regular(8, 3, seed=5)
    m = 41
    rec = run_sa(inst, beta_f=8.0, m=m, seed=6)
    assert rec.evaluations == m - 1
    expected = np.arange(m - 1) * (8.0 / (m - 1))
    assert np.allclose(rec.event_beta, expected)


def test_ca_schedule_tracks_consumed_cluster_sizes():
    inst = generate_regular(12, 3, seed=7)
    z = cc_correlations(inst)
    m = 10 * 12
    rec = run_ca(inst, z, beta_f=8.0, m=m, seed=8)
    consumed = np.cumsum(rec.event_size)
    # beta at each proposal equals the budget consumed so far times the step
    assert np.allclose(rec.event_beta[1:], consumed[:-1] * 8.0 / (m - 1))
    assert rec.final_beta == consumed[-1] * 8.0 / (m - 1)
    assert rec.consumed == consumed[-1]


def test_budget_contract_ca_and_sa():
    inst = generate_regular(10, 3, seed=9)
    z = cc_correlations(inst)
    for seed in range(20):
        rec = run_ca(inst, z, beta_f=8.0, m=50, lambda_scale=1.0, seed=seed)
        assert rec.evaluations <= 50 - 1
        assert rec.final_beta >= 8.0
        # every proposal starts strictly inside the schedule
        assert np.all(rec.event_beta < 8.0)
        rec = run_sa(inst, beta_f=8.0, m=50, seed=seed)
        assert rec.evaluations == 49
        assert rec.final_beta == 8.0


def test_e_best_is_min_of_visited_energies():
    inst = generate_regular(12, 3, seed=10)
    z = cc_correlations(inst)
    for seed in range(10):
        rec = run_ca(inst, z, beta_f=8.0, m=30 * 12, seed=seed)
        visited = rec.e_initial + np.cumsum(rec.event_delta_e * rec.event_accepted)
        assert rec.e_best == min(rec.e_initial, visited.min())
        assert rec.x_best.energy == rec.e_best
        assert energy_of_array(inst, rec.x_best.x) == rec.e_best


def test_even_parity_for_unit_weights():
    inst = generate_regular(10, 3, seed=11)
    z = cc_correlations(inst)
    rec = run_ca(inst, z, beta_f=8.0, m=20 * 10, seed=12)
    assert np.all(np.mod(rec.event_delta_e, 2) == 0)
    assert rec.e_best % 2 == inst.m % 2
    rec = run_sa(inst, beta_f=8.0, m=200, seed=13)
    assert np.all(np.mod(rec.event_delta_e, 2) == 0)


def test_beta_advances_on_rejected_proposals():
    inst = generate_regular(10, 3, seed=14)
    rec = run_sa(inst, beta_f=8.0, m=400, seed=15)
    assert not np.all(rec.event_accepted)  # some rejections occurred
    assert np.all(np.diff(rec.event_beta) > 0)  # beta moved after每 proposal


def test_energy_bookkeeping_debug_mode():
    inst = generate_regular(12, 4, seed=16)
    z = cc_correlations(inst)
    run_ca(inst, z, beta_f=8.0, m=20 * 12, seed=17, check=True)


def test_ca_degenerates_to_single_site_at_zero_scale():
    inst = generate_regular(12, 3, seed=18)
    z = cc_correlations(inst)
    ca_rates, sa_rates = [], []
    for seed in range(20):
        rec = run_ca(inst, z, beta_f=8.0, m=40 * 12, lambda_scale=0.0, seed=seed)
        assert np.all(rec.event_size == 1)
        mask = (rec.event_beta >= 1.0) & (rec.event_beta <= 8.0)
        ca_rates.append(rec.event_accepted[mask].mean())
        rec = run_sa(inst, beta_f=8.0, m=40 * 12, seed=seed)
        mask = (rec.event_beta >= 1.0) & (rec.event_beta <= 8.0)
        sa_rates.append(rec.event_accepted[mask].mean())
    assert abs(np.mean(ca_rates) - np.mean(sa_rates)) < 0.05


def test_ca_finds_optimum_with_cc_guidance():
    inst = generate_regular(12, 3, seed=19)
    z = cc_correlations(inst)
    ref = brute_force(inst).e_min
    hits = sum(
        run_ca(inst, z, beta_f=8.0, m=100 * 12, seed=seed).e_best == ref
        for seed in range(100)
    )
    assert hits > 0


def test_run_ca_random_cluster_policy():
    inst = generate_regular(10, 3, seed=20)
    rec = run_ca(
        inst, None, beta_f=8.0, m=100, lambda_scale=1.0,
        policy=random_cluster_policy(0.2), seed=21,
    )
    assert rec.evaluations >= 1


def test_run_ca_propagates_percolation_errors():
    inst = generate_regular(8, 3, seed=22)
    z = correlation_matrix(np.zeros((8, 8)), source="MC", param=0.1)
    with pytest.raises(DegenerateCorrelationError):
        run_ca(inst, z, beta_f=8.0, m=100, seed=23)


def test_run_parameter_validation():
    inst = generate_regular(8, 3, seed=24)
    z = cc_correlations(inst)
    with pytest.raises(InvalidParameterError):
        run_ca(inst, z, m=1, seed=0)
    with pytest.raises(InvalidParameterError):
        run_sa(inst, m=1, seed=0)
    with pytest.raises(InvalidParameterError):
        run_sa(inst, beta_f=0.0, m=10, seed=0)


def test_run_determinism():
    inst = generate_regular(10, 3, seed=25)
    z = cc_correlations(inst)
    a = run_ca(inst, z, beta_f=8.0, m=200, seed=26)
    b = run_ca(inst, z, beta_f=8.0, m=200, seed=26)
    assert a.e_best == b.e_best
    assert np.array_equal(a.event_beta, b.event_beta)
    assert np.array_equal(a.event_size, b.event_size)


def test_acceptance_statistics_all_accepted():
    rec = RunRecord(
        e_best=0.0, x_best=SpinConfig(np.ones(2, dtype=np.int8), 0.0),
        evaluations=3, wall_time=0.0, m=4, beta_f=8.0, final_beta=8.0, consumed=3,
        event_beta=np.array([2.0, 3.0, 4.0]),
        event_size=np.ones(3, dtype=np.int64),
        event_delta_e=np.zeros(3),
        event_accepted=np.array([True, True, True]),
    )
    summary = acceptance_statistics([rec], beta_window=(1.0, 8.0))
    assert summary.median == 1.0
    assert summary.n_records_used == 1


def test_acceptance_statistics_window_filtering_and_quartiles():
    def rec_with_rate(rate, n=10):
        accepted = np.zeros(n, dtype=bool)
        accepted[: int(rate * n)] = True
        return RunRecord(
            e_best=0.0, x_best=SpinConfig(np.ones(2, dtype=np.int8), 0.0),
            evaluations=n, wall_time=0.0, m=n + 1, beta_f=8.0,
            final_beta=8.0, consumed=n,
            event_beta=np.linspace(1.0, 8.0, n),
            event_size=np.ones(n, dtype=np.int64),
            event_delta_e=np.zeros(n),
            event_accepted=accepted,
        )

    records = [rec_with_rate(r) for r in (0.2, 0.4, 0.6, 0.8)]
    summary = acceptance_statistics(records)
    assert isinstance(summary, AcceptanceSummary)
    assert summary.median == pytest.approx(0.5)
    assert summary.q1 == pytest.approx(0.35)
    assert summary.q3 == pytest.approx(0.65)


def test_acceptance_statistics_skips_records_outside_window():
    inside = RunRecord(
        e_best=0.0, x_best=SpinConfig(np.ones(2, dtype=np.int8), 0.0),
        evaluations=2, wall_time=0.0, m=3, beta_f=8.0, final_beta=8.0, consumed=2,
        event_beta=np.array([2.0, 3.0]),
        event_size=np.ones(2, dtype=np.int64),
        event_delta_e=np.zeros(2),
        event_accepted=np.array([True, False]),
    )
    outside = RunRecord(
        e_best=0.0, x_best=SpinConfig(np.ones(2, dtype=np.int8), 0.0),
        evaluations=2, wall_time=0.0, m=3, beta_f=8.0, final_beta=8.0, consumed=2,
        event_beta=np.array([0.1, 0.2]),
        event_size=np.ones(2, dtype=np.int64),
        event_delta_e=np.zeros(2),
        event_accepted=np.array([True, True]),
    )
    summary = acceptance_statistics([inside, outside], beta_window=(1.0, 8.0))
    assert summary.n_records_used == 1
    assert summary.n_records_total == 2
    assert summary.median == pytest.approx(0.5)


def test_acceptance_statistics_validation():
    with pytest.raises(InvalidParameterError):
        acceptance_statistics([])
    rec = RunRecord(
        e_best=0.0, x_best=SpinConfig(np.ones(2, dtype=np.int8), 0.0),
        evaluations=0, wall_time=0.0, m=2, beta_f=8.0, final_beta=8.0, consumed=1,
    )
    with pytest.raises(InvalidParameterError):
        acceptance_statistics([rec], beta_window=(3.0, 3.0))


def test_acceptance_events_property():
    inst = generate_regular(8, 3, seed=27)
    rec = run_sa(inst, beta_f=8.0, m=20, seed=28)
    events = rec.acceptance_events
    assert len(events) == rec.evaluations
    assert events[0].beta == 0.0
    assert events[0].cluster_size == 1
