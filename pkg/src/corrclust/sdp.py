"""Low-rank semidefinite relaxation of Max-Cut and random-hyperplane rounding.

The relaxation replaces each spin by a unit vector of rank r and maximizes
(1/2) sum A_ij (1 - v_i.v_j) by cyclic single-vector updates on the factor
itself, so the unit vectors come out directly without a Cholesky step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .correlations import CLIP_EPS, CorrelationMatrix, correlation_matrix
from .errors import InvalidParameterError
from .instance import Instance, SpinConfig, energy_of_array

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_SWEEPS = 10_000
_ZERO_NORM = 1e-14


def default_rank(n: int) -> int:
    """Factor rank ceil(sqrt(2n)) + 1, comfortably above the exactness regime."""
    return math.isqrt(2 * n - 1) + 2 if n > 0 else 2


@dataclass
class SdpSolution:
    """Unit-vector factor of the relaxation, its objective, and rounding quality.

    `rounding_ratio` (mean rounded cut / objective) is filled in by gw_round.
    """

    inst: Instance
    vectors: np.ndarray
    objective: float
    sweeps: int
    converged: bool
    rounding_ratio: float | None = None


def _objective(inst: Instance, v: np.ndarray) -> float:
    dots = np.einsum("ij,ij->i", v[inst.edge_i], v[inst.edge_j])
    return float(0.5 * np.sum(inst.weights * (1.0 - dots)))


def sdp_solve(
    inst: Instance,
    rank: int | None = None,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    tol: float = DEFAULT_TOL,
    seed=None,
) -> SdpSolution:
    """Coordinate-ascent solve of the rank-r relaxation.

    Each update v_i <- -normalize(sum_j A_ij v_j) maximizes the objective over
    v_i alone, so the objective is non-decreasing after every sweep (checked).
    A zero-norm update re-randomizes that vector, which leaves the objective
    unchanged.  Stops when the relative objective change drops below `tol`.
    """
    r = default_rank(inst.n) if rank is None else int(rank)
    if r < 2:
        raise InvalidParameterError(f"rank must be >= 2, got {r}")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((inst.n, r))
    v /= np.linalg.norm(v, axis=1, keepdims=True)

    obj = _objective(inst, v)
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for i in range(inst.n):
            u = np.zeros(r)
            for j, eidx in inst.adjacency[i]:
                u += inst.weights[eidx] * v[j]
            norm = float(np.linalg.norm(u))
            if norm < _ZERO_NORM:
                log.warning("zero-norm update for vertex %d, re-randomizing", i)
                w = rng.standard_normal(r)
                v[i] = w / np.linalg.norm(w)
            else:
                v[i] = -u / norm
        new_obj = _objective(inst, v)
        if new_obj < obj - 1e-9 * max(1.0, abs(obj)):
            raise AssertionError(
                f"objective decreased during sweep {sweeps}: {obj} -> {new_obj}"
            )
        if abs(new_obj - obj) <= tol * max(1.0, abs(obj)):
            obj = new_obj
            converged = True
            break
        obj = new_obj
    return SdpSolution(
        inst=inst, vectors=v, objective=obj, sweeps=sweeps, converged=converged
    )


def sdp_correlations(sol: SdpSolution) -> CorrelationMatrix:
    """Pairwise inner products of the solution vectors, clipped to [-1, 1]."""
    values = sol.vectors @ sol.vectors.T
    if np.any(np.abs(values) > 1.0 + 1e-6):
        raise InvalidParameterError("solution vectors are not unit length")
    np.fill_diagonal(values, 1.0)
    return correlation_matrix(values, source="SDP", clip=True)


def gw_round(
    sol: SdpSolution, n_rounds: int = 1000, seed=None
) -> tuple[SpinConfig, float, float]:
    """Random-hyperplane rounding of the vector solution.

    Each round draws a standard normal direction g and assigns
    x_i = sign(v_i . g), with exact zeros mapped to +1.  Returns the best
    configuration found, the mean cut over rounds, and mean cut / objective;
    the ratio is also stored on the solution.
    """
    if n_rounds < 1:
        raise InvalidParameterError("n_rounds must be >= 1")
    inst = sol.inst
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((sol.vectors.shape[1], n_rounds))
    proj = sol.vectors @ g  # (n, n_rounds)
    x = np.where(proj >= 0.0, 1, -1).astype(np.int8)
    prods = (x[inst.edge_i] * x[inst.edge_j]).astype(np.float64)
    cuts = 0.5 * ((inst.weights[:, None] * (1.0 - prods)).sum(axis=0))
    best = int(np.argmax(cuts))
    best_x = x[:, best].copy()
    mean_cut = float(cuts.mean())
    ratio = mean_cut / sol.objective if sol.objective > 0 else float("nan")
    sol.rounding_ratio = ratio
    return (
        SpinConfig(x=best_x, energy=energy_of_array(inst, best_x)),
        mean_cut,
        ratio,
    )
