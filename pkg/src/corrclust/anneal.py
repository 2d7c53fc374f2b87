"""Optimization drivers: the correlation-guided cluster algorithm and single-spin SA.

Both drivers share the schedule contract: beta starts at 0 and advances by
beta_f/(m-1) per flipped spin (a cluster of size k counts as k single-spin
updates), looping while beta < beta_f.  The uphill acceptance exponential is
evaluated once per proposal, and the running best is only updated on downhill
moves.  Every proposal is logged as an acceptance event.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .cluster import CorrelationLinkPolicy, create_cluster, percolation_lambda
from .correlations import CorrelationMatrix
from .errors import InvalidParameterError
from .instance import Instance, SpinConfig, energy_of_array

DEFAULT_BETA_F = 8.0
ACCEPTANCE_WINDOW = (1.0, 8.0)


class AcceptanceEvent(NamedTuple):
    beta: float
    cluster_size: int
    delta_e: float
    accepted: bool


@dataclass
class RunRecord:
    """Trajectory statistics of one optimization run."""

    e_best: float
    x_best: SpinConfig
    evaluations: int
    wall_time: float
    m: int
    beta_f: float
    final_beta: float
    consumed: int
    e_initial: float = 0.0
    event_beta: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    event_size: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0, dtype=np.int64))
    event_delta_e: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    event_accepted: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0, dtype=bool))

    @property
    def acceptance_events(self) -> list[AcceptanceEvent]:
        return [
            AcceptanceEvent(float(b), int(s), float(d), bool(a))
            for b, s, d, a in zip(
                self.event_beta, self.event_size, self.event_delta_e, self.event_accepted
            )
        ]


def delta_energy(inst: Instance, x, members) -> float:
    """Energy change of flipping `members` together: only boundary bonds flip sign.

    Returns 2 sum_{i in members, j outside, {i,j} in E} J_ij x_i x_j, plus the
    field term 2 sum_{i in members} h_i x_i when a field is present.
    """
    xs = x.x if hasattr(x, "x") else x
    member_set = members if isinstance(members, set) else set(members)
    acc = 0.0
    cpl = inst.couplings
    for i in member_set:
        xi = xs[i]
        for j, eidx in inst.adjacency[i]:
            if j not in member_set:
                acc += cpl[eidx] * xi * xs[j]
    de = 2.0 * acc
    if inst.fields is not None:
        de += 2.0 * sum(inst.fields[i] * xs[i] for i in member_set)
    return float(de)


def run_ca(
    inst: Instance,
    z: CorrelationMatrix | None,
    beta_f: float = DEFAULT_BETA_F,
    m: int = 2,
    lambda_scale: float = 1.0,
    policy=None,
    seed=None,
    record_events: bool = True,
    check: bool = False,
) -> RunRecord:
    """Correlation-guided cluster run.

    Each iteration seeds a cluster at a uniformly random vertex, flips it,
    applies the Metropolis criterion to the energy change, and advances beta
    by beta_f/(m-1) times the cluster size whether or not the flip was
    accepted.  With `policy=None` the default correlation policy is built from
    the percolation estimate of (inst, z); errors from that estimate propagate.
    """
    if m < 2:
        raise InvalidParameterError(f"iteration budget m must be >= 2, got {m}")
    if beta_f <= 0:
        raise InvalidParameterError("beta_f must be positive")
    if policy is None:
        policy = CorrelationLinkPolicy(percolation_lambda(inst, z).lambda_perc)

    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    n = inst.n
    x = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    e = energy_of_array(inst, x)
    e_init = e
    e_best = e
    x_best = x.copy()

    beta = 0.0
    consumed = 0
    proposals = 0
    ev_beta: list[float] = []
    ev_size: list[int] = []
    ev_de: list[float] = []
    ev_acc: list[bool] = []
    exp_ = math.exp

    # the guard beta < beta_f is exactly consumed < m-1; comparing the
    # integers avoids a one-ulp float shortfall admitting an extra proposal
    while consumed < m - 1:
        seed_vertex = int(rng.integers(n))
        cluster = create_cluster(
            inst, x, z, seed_vertex, lambda_scale, policy, rng, check=check
        )
        de = delta_energy(inst, x, cluster.member_set)
        proposals += 1
        if de <= 0.0:
            accepted = True
        else:
            accepted = rng.random() < exp_(-beta * de)
        if record_events:
            ev_beta.append(beta)
            ev_size.append(cluster.size)
            ev_de.append(de)
            ev_acc.append(accepted)
        if accepted:
            for v in cluster.members:
                x[v] = -x[v]
            e += de
            if check:
                # exact for integer weights; tolerance absorbs float accumulation
                ref = energy_of_array(inst, x)
                if abs(e - ref) > 1e-9 * max(1.0, abs(ref)):
                    raise AssertionError(f"incremental energy {e} != recomputed {ref}")
            if de <= 0.0 and e < e_best:
                e_best = e
                x_best = x.copy()
        consumed += cluster.size
        # multiply before dividing so consumed = m-1 lands exactly on beta_f
        beta = consumed * beta_f / (m - 1)
    if beta < beta_f:
        beta = beta_f  # consumed >= m-1: the schedule is complete, snap the ulp

    return RunRecord(
        e_best=e_best,
        x_best=SpinConfig(x=x_best, energy=e_best),
        evaluations=proposals,
        wall_time=time.perf_counter() - t0,
        m=m,
        beta_f=beta_f,
        final_beta=beta,
        consumed=consumed,
        e_initial=e_init,
        event_beta=np.asarray(ev_beta),
        event_size=np.asarray(ev_size, dtype=np.int64),
        event_delta_e=np.asarray(ev_de),
        event_accepted=np.asarray(ev_acc, dtype=bool),
    )


def run_sa(
    inst: Instance,
    beta_f: float = DEFAULT_BETA_F,
    m: int = 2,
    seed=None,
    record_events: bool = True,
) -> RunRecord:
    """Single-spin simulated annealing baseline with the same statistics capture.

    One uniformly random spin flip per iteration under the Metropolis
    criterion; beta advances by beta_f/(m-1) per iteration.
    """
    if m < 2:
        raise InvalidParameterError(f"iteration budget m must be >= 2, got {m}")
    if beta_f <= 0:
        raise InvalidParameterError("beta_f must be positive")

    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    n = inst.n
    x = [int(v) for v in rng.choice(np.array([-1, 1], dtype=np.int8), size=n)]
    e = energy_of_array(inst, np.asarray(x, dtype=np.int8))
    e_init = e
    e_best = e
    x_best = list(x)

    pairs = [list(zip(inst.neighbor_lists[i], inst.coupling_lists[i])) for i in range(n)]
    hs = inst.fields if inst.fields is not None else None

    beta = 0.0
    iters = 0
    ev_beta: list[float] = []
    ev_de: list[float] = []
    ev_acc: list[bool] = []
    exp_ = math.exp

    while iters < m - 1:  # exact form of the beta < beta_f guard
        i = int(rng.integers(n))
        acc = 0.0
        for k, jj in pairs[i]:
            acc += jj * x[k]
        if hs is not None:
            acc += hs[i]
        de = 2.0 * x[i] * acc
        if de <= 0.0:
            accepted = True
        else:
            accepted = rng.random() < exp_(-beta * de)
        if record_events:
            ev_beta.append(beta)
            ev_de.append(de)
            ev_acc.append(accepted)
        if accepted:
            x[i] = -x[i]
            e += de
            if de <= 0.0 and e < e_best:
                e_best = e
                x_best = list(x)
        iters += 1
        beta = iters * beta_f / (m - 1)
    if beta < beta_f:
        beta = beta_f  # see run_ca: snap a one-ulp shortfall

    xb = np.asarray(x_best, dtype=np.int8)
    return RunRecord(
        e_best=e_best,
        x_best=SpinConfig(x=xb, energy=e_best),
        evaluations=iters,
        wall_time=time.perf_counter() - t0,
        m=m,
        beta_f=beta_f,
        final_beta=beta,
        consumed=iters,
        e_initial=e_init,
        event_beta=np.asarray(ev_beta),
        event_size=np.ones(len(ev_beta), dtype=np.int64),
        event_delta_e=np.asarray(ev_de),
        event_accepted=np.asarray(ev_acc, dtype=bool),
    )


@dataclass
class AcceptanceSummary:
    """Distribution of per-run acceptance rates inside an inverse-temperature window."""

    median: float
    q1: float
    q3: float
    rates: np.ndarray
    n_records_used: int
    n_records_total: int


def acceptance_statistics(
    records: list[RunRecord], beta_window: tuple[float, float] = ACCEPTANCE_WINDOW
) -> AcceptanceSummary:
    """Per-record acceptance rate within `beta_window`, summarized across records.

    Records with no proposals inside the window are skipped; an empty or
    inverted window is an error.
    """
    if not records:
        raise InvalidParameterError("need at least one run record")
    lo, hi = beta_window
    if not lo < hi:
        raise InvalidParameterError(f"empty acceptance window [{lo}, {hi}]")
    rates = []
    for rec in records:
        mask = (rec.event_beta >= lo) & (rec.event_beta <= hi)
        total = int(mask.sum())
        if total == 0:
            continue
        rates.append(float(rec.event_accepted[mask].sum()) / total)
    arr = np.asarray(rates, dtype=np.float64)
    if arr.size == 0:
        return AcceptanceSummary(
            median=float("nan"),
            q1=float("nan"),
            q3=float("nan"),
            rates=arr,
            n_records_used=0,
            n_records_total=len(records),
        )
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return AcceptanceSummary(
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        rates=arr,
        n_records_used=int(arr.size),
        n_records_total=len(records),
    )
