"""Correlation-guided cluster growth with supernode shrinking.

A cluster grows from a seed vertex.  All live edges between the cluster and
an outside vertex are aggregated into one boundary entry whose link score is
the sum of x_u x_k Z_uk over those edges; for a singleton cluster this
reduces to the plain pair score x_i x_j Z_ij.  A positive score means the
pair's current relative orientation agrees with the correlation target, so
joining (and flipping together, which preserves the relative orientation)
keeps the agreement, while leaving a disagreeing pair split lets the flip
repair it.  Accepting a vertex merges it into the supernode (its outside
edges join the boundary); rejecting it deletes exactly the edges aggregated
at that moment, so the same vertex can be reconsidered later if a merge
contributes a fresh edge.  Every original edge is consumed (merged or
deleted) at most once, which bounds the procedure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correlations import CorrelationMatrix
from .errors import (
    DegenerateCorrelationError,
    DegenerateTopologyError,
    InvalidParameterError,
)
from .instance import Instance

DEFAULT_RANDOM_P_LINK = 0.2


@dataclass
class PercolationEstimate:
    """Percolation threshold estimate from degree moments and |Z| magnitude."""

    lambda_perc: float
    mean_abs_z: float
    d1: float
    d2: float


def percolation_lambda(inst: Instance, z: CorrelationMatrix) -> PercolationEstimate:
    """lambda_perc = <d> / (2 E[|Z| | Z != 0, i != j] (<d^2> - <d>)).

    Degree sequences with <d^2> = <d> (isolated vertices and bare edges only)
    and all-zero correlation matrices are rejected.
    """
    d1, d2 = inst.degree_moments
    if d2 - d1 <= 0.0:
        raise DegenerateTopologyError(
            "percolation estimate undefined when <d^2> equals <d>"
        )
    off = ~np.eye(z.n, dtype=bool)
    entries = z.values[off]
    nz = entries[entries != 0.0]
    if nz.size == 0:
        raise DegenerateCorrelationError("correlation matrix has no nonzero entries")
    mean_abs = float(np.abs(nz).mean())
    return PercolationEstimate(
        lambda_perc=d1 / (2.0 * mean_abs * (d2 - d1)),
        mean_abs_z=mean_abs,
        d1=d1,
        d2=d2,
    )


def link_probability(score: float, lambda_scale: float, lambda_perc: float) -> float:
    """Clamped link probability min(1, max(0, (lambda_scale/lambda_perc) * score)).

    `score` is -x_i x_j Z_ij for a singleton cluster, or the aggregated
    boundary score of a supernode.
    """
    if lambda_perc <= 0:
        raise InvalidParameterError("lambda_perc must be positive")
    return min(1.0, max(0.0, (lambda_scale / lambda_perc) * score))


class CorrelationLinkPolicy:
    """Default growth policy: probability proportional to the aggregated score."""

    def __init__(self, lambda_perc: float):
        if lambda_perc <= 0:
            raise InvalidParameterError("lambda_perc must be positive")
        self.lambda_perc = lambda_perc

    def probability(self, score: float, lambda_scale: float) -> float:
        return min(1.0, max(0.0, (lambda_scale / self.lambda_perc) * score))


class ConstantLinkPolicy:
    """Random-cluster mode: a fixed link probability, ignoring correlations."""

    def __init__(self, p_const: float):
        if not 0.0 <= p_const <= 1.0:
            raise InvalidParameterError(
                f"link probability must lie in [0, 1], got {p_const}"
            )
        self.p_const = p_const

    def probability(self, score: float, lambda_scale: float) -> float:
        return self.p_const


def random_cluster_policy(p_const: float = DEFAULT_RANDOM_P_LINK) -> ConstantLinkPolicy:
    """Growth policy that replaces the correlation rule with a constant probability."""
    return ConstantLinkPolicy(p_const)


@dataclass
class BoundaryEntry:
    """Aggregated live edges between the supernode and one outside vertex."""

    edges: list[int] = field(default_factory=list)
    score: float = 0.0
    coupling_sum: float = 0.0


@dataclass
class Cluster:
    """Grown vertex set plus the construction's edge bookkeeping.

    `boundary` is empty for a finished cluster (every live edge was merged or
    deleted); `removed_edges` lists the edge indices deleted on rejections.
    """

    members: list[int]
    member_set: set[int]
    boundary: dict[int, BoundaryEntry]
    removed_edges: set[int]
    decisions: int

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)


def _check_boundary(
    inst: Instance,
    xs,
    zv,
    member_set: set[int],
    boundary: dict[int, BoundaryEntry],
    removed: set[int],
) -> None:
    """Debug recomputation of the boundary aggregates from first principles."""
    expect: dict[int, BoundaryEntry] = {}
    for u in member_set:
        for k, eidx in inst.adjacency[u]:
            if k in member_set or eidx in removed:
                continue
            entry = expect.setdefault(k, BoundaryEntry())
            entry.edges.append(eidx)
            entry.coupling_sum += inst.couplings[eidx]
            if zv is not None:
                entry.score += float(xs[u]) * float(xs[k]) * float(zv[u, k])
    if set(expect) != set(boundary):
        raise AssertionError("boundary vertex set out of sync")
    for k, entry in expect.items():
        got = boundary[k]
        if sorted(got.edges) != sorted(entry.edges):
            raise AssertionError(f"boundary edges out of sync for vertex {k}")
        if abs(got.score - entry.score) > 1e-9 or abs(
            got.coupling_sum - entry.coupling_sum
        ) > 1e-9:
            raise AssertionError(f"boundary aggregates out of sync for vertex {k}")


def create_cluster(
    inst: Instance,
    x,
    z: CorrelationMatrix | None,
    seed_vertex: int,
    lambda_scale: float,
    policy,
    rng: np.random.Generator,
    check: bool = False,
) -> Cluster:
    """Grow one cluster from `seed_vertex` under the given link policy.

    At each step one live boundary neighbor is chosen uniformly at random and
    accepted with the policy probability of its aggregated score.  Identical
    inputs and generator state reproduce the identical cluster.
    """
    n = inst.n
    if not 0 <= seed_vertex < n:
        raise InvalidParameterError(f"seed vertex {seed_vertex} out of range")
    xs = x.x if hasattr(x, "x") else x
    zv = z.values if z is not None else None

    members = [seed_vertex]
    member_set = {seed_vertex}
    boundary: dict[int, BoundaryEntry] = {}
    removed: set[int] = set()
    decisions = 0

    def aggregate(u: int) -> None:
        # pull u's edges to outside vertices into the boundary
        xu = xs[u]
        for k, eidx in inst.adjacency[u]:
            if k in member_set or eidx in removed:
                continue
            entry = boundary.get(k)
            if entry is None:
                entry = boundary[k] = BoundaryEntry()
            entry.edges.append(eidx)
            entry.coupling_sum += inst.couplings[eidx]
            if zv is not None:
                entry.score += float(xu) * float(xs[k]) * float(zv[u, k])

    aggregate(seed_vertex)
    while boundary:
        keys = list(boundary)
        k = keys[int(rng.integers(len(keys)))]
        entry = boundary.pop(k)
        decisions += 1
        p = policy.probability(entry.score, lambda_scale)
        # one uniform per decision, consumed unconditionally: random() < 0 is
        # never true and random() < 1 always is, so the clamps need no branches
        if rng.random() < p:
            members.append(k)
            member_set.add(k)
            aggregate(k)
        else:
            removed.update(entry.edges)
        if check:
            _check_boundary(inst, xs, zv, member_set, boundary, removed)
    return Cluster(
        members=members,
        member_set=member_set,
        boundary=boundary,
        removed_edges=removed,
        decisions=decisions,
    )
