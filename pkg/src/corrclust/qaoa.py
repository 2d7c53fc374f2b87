"""Quantum correlation provider: desk-scale statevector QAOA plus the depth-1 closed form.

State preparation alternates diagonal cost phases with single-qubit mixer
rotations on a dense amplitude vector, hard-walled at n = 24 qubits.  The
depth-1 two-point correlations also exist in closed form, which serves as an
independent oracle for the simulator (and vice versa).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from .correlations import CorrelationMatrix, SampleSet, correlation_matrix, mean_cut_ratio
from .errors import InvalidParameterError, ParseError, SizeLimitError
from .exact import BOLTZMANN_MAX_N, brute_force, _signs_for_indices
from .instance import Instance

log = logging.getLogger(__name__)

QAOA_MAX_N = 24
_CHUNK = 1 << 18
_NORM_TOL = 1e-10


@dataclass
class QaoaParams:
    """Mixer angles (betas) and cost angles (gammas), one pair per layer."""

    betas: np.ndarray
    gammas: np.ndarray

    def __post_init__(self):
        self.betas = np.atleast_1d(np.asarray(self.betas, dtype=np.float64))
        self.gammas = np.atleast_1d(np.asarray(self.gammas, dtype=np.float64))
        if self.betas.shape != self.gammas.shape or self.betas.ndim != 1:
            raise InvalidParameterError("betas and gammas must be 1-d and equal length")
        if not (np.all(np.isfinite(self.betas)) and np.all(np.isfinite(self.gammas))):
            raise InvalidParameterError("angles must be finite")

    @property
    def p(self) -> int:
        return len(self.betas)


@dataclass
class QaoaState:
    """Dense statevector after the alternating circuit, plus its cost expectation."""

    inst: Instance
    amplitudes: np.ndarray
    params: QaoaParams
    expected_energy: float

    @property
    def n(self) -> int:
        return self.inst.n


def basis_energies(inst: Instance) -> np.ndarray:
    """Classical energy of every computational basis state (bit b=0 -> spin +1)."""
    n = inst.n
    total = 1 << n
    e = np.zeros(total, dtype=np.float64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        chunk = np.zeros(len(idx), dtype=np.float64)
        for k in range(inst.m):
            bi = (idx >> int(inst.edge_i[k])) & 1
            bj = (idx >> int(inst.edge_j[k])) & 1
            chunk += inst.weights[k] * (1.0 - 2.0 * np.bitwise_xor(bi, bj))
        if inst.fields is not None:
            for v in range(n):
                chunk -= inst.fields[v] * (1.0 - 2.0 * ((idx >> v) & 1))
        e[start : start + len(idx)] = chunk
    return e


def _evolve(energies: np.ndarray, n: int, params: QaoaParams) -> np.ndarray:
    amp = np.full(1 << n, 1.0 / math.sqrt(1 << n), dtype=np.complex128)
    for beta, gamma in zip(params.betas, params.gammas):
        amp *= np.exp(-1j * gamma * energies)
        c, s = math.cos(beta), 1j * math.sin(beta)
        for q in range(n):
            view = amp.reshape(-1, 2, 1 << q)
            a0 = view[:, 0, :].copy()
            view[:, 0, :] = c * a0 + s * view[:, 1, :]
            view[:, 1, :] = s * a0 + c * view[:, 1, :]
    norm = float(np.linalg.norm(amp))
    if abs(norm - 1.0) > 1e-6:
        raise AssertionError(f"statevector norm drifted to {norm}")
    amp /= norm
    return amp


def qaoa_prepare(inst: Instance, params: QaoaParams) -> QaoaState:
    """Prepare the alternating-circuit state from the uniform superposition.

    Cost layers apply per-basis-state phases exp(-i gamma H(x)); mixer layers
    rotate each qubit by exp(i beta sigma_x).  Output is renormalized (drift
    stays below 1e-10 per layer).
    """
    if inst.n > QAOA_MAX_N:
        raise SizeLimitError(f"statevector limited to n <= {QAOA_MAX_N}, got {inst.n}")
    energies = basis_energies(inst)
    amp = _evolve(energies, inst.n, params)
    expected = float(np.sum(np.abs(amp) ** 2 * energies))
    return QaoaState(inst=inst, amplitudes=amp, params=params, expected_energy=expected)


def qaoa_correlations(state: QaoaState) -> CorrelationMatrix:
    """Pair correlations sum_x |amp_x|^2 x_i x_j over all vertex pairs."""
    n = state.n
    probs = np.abs(state.amplitudes) ** 2
    acc = np.zeros((n, n), dtype=np.float64)
    total = 1 << n
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        signs = _signs_for_indices(idx, n).astype(np.float64)
        acc += (signs * probs[start : start + len(idx), None]).T @ signs
    np.fill_diagonal(acc, 1.0)
    return correlation_matrix(
        acc, source="QAOA", param=state.params.p, clip=True
    )


def qaoa_sample(
    state: QaoaState, shots: int, seed=None, reference_energy: float | None = None
) -> SampleSet:
    """Draw bitstrings from |amp|^2 and score them against the exact optimum.

    The mean approximation ratio uses `reference_energy` when given, otherwise
    an exhaustive ground-state search when the instance is small enough for
    the vectorized enumerator; beyond that it is left as None.
    """
    if shots < 1:
        raise InvalidParameterError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    probs = np.abs(state.amplitudes) ** 2
    probs /= probs.sum()
    idx = rng.choice(len(probs), size=shots, p=probs)
    signs = _signs_for_indices(idx.astype(np.int64), state.n)
    sf = signs.astype(np.float64)
    inst = state.inst
    energies = np.zeros(shots, dtype=np.float64)
    for k in range(inst.m):
        energies += inst.weights[k] * sf[:, inst.edge_i[k]] * sf[:, inst.edge_j[k]]
    if inst.fields is not None:
        energies -= sf @ inst.fields
    if reference_energy is None and inst.n <= BOLTZMANN_MAX_N:
        reference_energy = brute_force(inst).e_min
    ratio = (
        mean_cut_ratio(inst, energies, reference_energy)
        if reference_energy is not None
        else None
    )
    return SampleSet(
        bitstrings=signs,
        beta_s=None,
        mean_approx_ratio=ratio,
        energies=energies,
        source="QAOA",
    )


def _ramp_params(p: int) -> np.ndarray:
    t = (np.arange(p) + 0.5) / p
    betas = 0.4 * (1.0 - t)
    gammas = 0.8 * t
    return np.concatenate([betas, gammas])


def qaoa_optimize(
    inst: Instance,
    p: int,
    restarts: int = 10,
    seed=None,
    maxiter: int | None = None,
) -> tuple[QaoaParams, float]:
    """Multi-start Nelder-Mead minimization of the cost expectation over 2p angles.

    The first start is a ramp schedule (gammas increasing, betas decreasing);
    the rest draw gamma uniformly from [-pi, pi] and beta from [-pi/2, pi/2].
    Returns the best parameters found; a run that only ever hit its iteration
    cap is reported via a warning, not an error.
    """
    if p < 1:
        raise InvalidParameterError("depth must be >= 1")
    if inst.n > QAOA_MAX_N:
        raise SizeLimitError(f"statevector limited to n <= {QAOA_MAX_N}, got {inst.n}")
    rng = np.random.default_rng(seed)
    energies = basis_energies(inst)
    cap = maxiter if maxiter is not None else 500 * p

    def objective(theta: np.ndarray) -> float:
        params = QaoaParams(betas=theta[:p], gammas=theta[p:])
        amp = _evolve(energies, inst.n, params)
        return float(np.sum(np.abs(amp) ** 2 * energies))

    best_theta = None
    best_val = np.inf
    any_converged = False
    for start in range(max(1, restarts)):
        if start == 0:
            theta0 = _ramp_params(p)
        else:
            theta0 = np.concatenate(
                [
                    rng.uniform(-np.pi / 2, np.pi / 2, size=p),
                    rng.uniform(-np.pi, np.pi, size=p),
                ]
            )
        res = minimize(
            objective, theta0, method="Nelder-Mead", options={"maxiter": cap}
        )
        any_converged = any_converged or bool(res.success)
        if res.fun < best_val:
            best_val = float(res.fun)
            best_theta = res.x
    if not any_converged:
        log.warning("every restart hit the iteration cap; returning best found")
    params = QaoaParams(betas=best_theta[:p], gammas=best_theta[p:])
    return params, best_val


def _p1_terms(
    inst: Instance, beta1: float, gamma1: float, i: int, j: int, jmap: dict
) -> tuple[float, float]:
    """First and second summand of the depth-1 pair correlation for (i, j).

    Couplings of absent edges count as zero, so the neighbor products run only
    over actual neighbors.
    """
    sin2b = math.sin(2.0 * beta1)
    jij = jmap.get((i, j), 0.0)
    term1 = 0.0
    if jij != 0.0:
        prod_i = 1.0
        for k in inst.neighbor_lists[i]:
            if k != j:
                prod_i *= math.cos(2.0 * gamma1 * jmap[(min(i, k), max(i, k))])
        prod_j = 1.0
        for k in inst.neighbor_lists[j]:
            if k != i:
                prod_j *= math.cos(2.0 * gamma1 * jmap[(min(j, k), max(j, k))])
        term1 = (
            sin2b
            * math.cos(2.0 * beta1)
            * math.sin(2.0 * gamma1 * jij)
            * (prod_i + prod_j)
        )
    p_sum = 1.0
    p_diff = 1.0
    for k in set(inst.neighbor_lists[i]) | set(inst.neighbor_lists[j]):
        if k == i or k == j:
            continue
        jik = jmap.get((min(i, k), max(i, k)), 0.0)
        jjk = jmap.get((min(j, k), max(j, k)), 0.0)
        p_sum *= math.cos(2.0 * gamma1 * (jik + jjk))
        p_diff *= math.cos(2.0 * gamma1 * (jjk - jik))
    term2 = -0.5 * sin2b * sin2b * (p_sum - p_diff)
    return term1, term2


def _coupling_map(inst: Instance) -> dict:
    return {
        (i, j): float(inst.couplings[k]) for k, (i, j, _a) in enumerate(inst.edges)
    }


def qaoa_p1_correlations(inst: Instance, beta1: float, gamma1: float) -> CorrelationMatrix:
    """Closed-form depth-1 pair correlations for an arbitrary weighted instance.

    Nonzero entries exist only for edges and for pairs sharing a neighbor;
    everything else vanishes identically.  Requires a field-free instance.
    """
    if inst.fields is not None:
        raise InvalidParameterError("closed form assumes a field-free instance")
    jmap = _coupling_map(inst)
    pairs: set[tuple[int, int]] = {(i, j) for i, j, _a in inst.edges}
    for k in range(inst.n):
        for a, b in combinations(sorted(inst.neighbor_lists[k]), 2):
            pairs.add((a, b))
    values = np.zeros((inst.n, inst.n), dtype=np.float64)
    for i, j in pairs:
        t1, t2 = _p1_terms(inst, beta1, gamma1, i, j, jmap)
        values[i, j] = values[j, i] = t1 + t2
    np.fill_diagonal(values, 1.0)
    return correlation_matrix(values, source="QAOA", param=1, exact=True)


@dataclass
class TermRatioResult:
    """Mean second-to-first summand magnitude ratio over edges at depth 1."""

    ratio: float
    n_edges_used: int
    excluded_edges: list[tuple[int, int]]

    @property
    def all_excluded(self) -> bool:
        return self.n_edges_used == 0


def p1_term_ratio(inst: Instance, params: QaoaParams) -> TermRatioResult:
    """Average |term2| / |term1| over edges for depth-1 parameters.

    Edges whose first summand vanishes are excluded and reported; when every
    edge is excluded the ratio is NaN and `all_excluded` is set.
    """
    if params.p != 1:
        raise InvalidParameterError("term ratio is defined for depth-1 parameters")
    beta1, gamma1 = float(params.betas[0]), float(params.gammas[0])
    jmap = _coupling_map(inst)
    ratios: list[float] = []
    excluded: list[tuple[int, int]] = []
    for i, j, _a in inst.edges:
        t1, t2 = _p1_terms(inst, beta1, gamma1, i, j, jmap)
        if abs(t1) < 1e-15:
            excluded.append((i, j))
        else:
            ratios.append(abs(t2) / abs(t1))
    if not ratios:
        return TermRatioResult(ratio=float("nan"), n_edges_used=0, excluded_edges=excluded)
    return TermRatioResult(
        ratio=float(np.mean(ratios)),
        n_edges_used=len(ratios),
        excluded_edges=excluded,
    )


def write_params(params: QaoaParams, path) -> None:
    """Text format: depth on the first line, then one 'beta gamma' pair per line."""
    with open(path, "w") as fh:
        fh.write(f"{params.p}\n")
        for b, g in zip(params.betas, params.gammas):
            fh.write(f"{float(b)!r} {float(g)!r}\n")


def read_params(path) -> QaoaParams:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty parameter file", line=1)
    try:
        p = int(lines[0])
    except ValueError:
        raise ParseError("first line must be the depth", line=1)
    if len(lines) != p + 1:
        raise ParseError(f"expected {p} angle lines, found {len(lines) - 1}", line=None)
    betas, gammas = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("angle line must be 'beta gamma'", line=lineno)
        betas.append(float(parts[0]))
        gammas.append(float(parts[1]))
    return QaoaParams(betas=np.array(betas), gammas=np.array(gammas))
