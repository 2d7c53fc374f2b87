"""Problem representation: weighted graphs, spin configurations, energies and cut values.

The sign convention throughout the package is J_ij = -A_ij, where A_ij is the
edge weight of the Max-Cut instance and J_ij the Ising coupling.  Under this
convention minimizing the Ising energy maximizes the cut, and the identity
C(x) = (W_total - H(x)) / 2 holds with W_total the sum of all edge weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInstanceError,
    GenerationFailureError,
    InvalidParameterError,
    ParseError,
)

MAX_PAIRING_RESTARTS = 10_000


@dataclass
class Instance:
    """Immutable weighted undirected graph plus derived coupling data.

    Edges are stored once with i < j.  ``adjacency[v]`` lists ``(neighbor,
    edge_index)`` pairs; every edge appears in exactly two adjacency lists.
    ``fields`` is an optional per-vertex magnetic field (None means zero);
    when present every energy routine includes the -sum(h_i x_i) term.
    """

    n: int
    edges: list[tuple[int, int, float]]
    adjacency: list[list[tuple[int, int]]]
    couplings: np.ndarray
    total_abs_weight: float
    degree_moments: tuple[float, float]
    fields: np.ndarray | None = None
    # flat arrays kept for vectorized kernels
    edge_i: np.ndarray = field(repr=False, default=None)
    edge_j: np.ndarray = field(repr=False, default=None)
    weights: np.ndarray = field(repr=False, default=None)
    # per-vertex neighbor/coupling lists kept for scalar kernels
    neighbor_lists: list[list[int]] = field(repr=False, default=None)
    coupling_lists: list[list[float]] = field(repr=False, default=None)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.bincount(
            np.concatenate([self.edge_i, self.edge_j]), minlength=self.n
        )

    def coupling_of(self, i: int, j: int, edge_index: int) -> float:
        return float(self.couplings[edge_index])


def build_instance(
    n: int,
    edges: list[tuple[int, int, float]],
    fields: np.ndarray | None = None,
) -> Instance:
    """Validate an edge list and assemble the derived structure.

    Raises InvalidParameterError on self-loops, duplicate edges or vertex ids
    outside [0, n).
    """
    if n <= 0:
        raise InvalidParameterError(f"vertex count must be positive, got {n}")
    canon: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    for i, j, a in edges:
        i, j = int(i), int(j)
        if i == j:
            raise InvalidParameterError(f"self-loop on vertex {i}")
        if i > j:
            i, j = j, i
        if not (0 <= i < j < n):
            raise InvalidParameterError(f"edge ({i},{j}) out of range for n={n}")
        if (i, j) in seen:
            raise InvalidParameterError(f"duplicate edge ({i},{j})")
        seen.add((i, j))
        canon.append((i, j, float(a)))

    m = len(canon)
    edge_i = np.fromiter((e[0] for e in canon), dtype=np.int64, count=m)
    edge_j = np.fromiter((e[1] for e in canon), dtype=np.int64, count=m)
    weights = np.fromiter((e[2] for e in canon), dtype=np.float64, count=m)
    couplings = -weights

    adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    neighbor_lists: list[list[int]] = [[] for _ in range(n)]
    coupling_lists: list[list[float]] = [[] for _ in range(n)]
    for idx, (i, j, _a) in enumerate(canon):
        adjacency[i].append((j, idx))
        adjacency[j].append((i, idx))
        cij = float(couplings[idx])
        neighbor_lists[i].append(j)
        neighbor_lists[j].append(i)
        coupling_lists[i].append(cij)
        coupling_lists[j].append(cij)

    degs = np.bincount(np.concatenate([edge_i, edge_j]), minlength=n).astype(float)
    d1 = float(degs.mean())
    d2 = float((degs**2).mean())

    if fields is not None:
        fields = np.asarray(fields, dtype=np.float64)
        if fields.shape != (n,):
            raise InvalidParameterError("field vector length must equal n")
        if not np.any(fields):
            fields = None

    return Instance(
        n=n,
        edges=canon,
        adjacency=adjacency,
        couplings=couplings,
        total_abs_weight=float(np.abs(couplings).sum()),
        degree_moments=(d1, d2),
        fields=fields,
        edge_i=edge_i,
        edge_j=edge_j,
        weights=weights,
        neighbor_lists=neighbor_lists,
        coupling_lists=coupling_lists,
    )


@dataclass
class SpinConfig:
    """A +/-1 assignment per vertex with its cached energy."""

    x: np.ndarray
    energy: float

    def __len__(self) -> int:
        return len(self.x)


def spin_config(inst: Instance, x) -> SpinConfig:
    """Wrap an array of +/-1 spins, computing and caching its energy."""
    arr = np.asarray(x, dtype=np.int8)
    if arr.shape != (inst.n,):
        raise InvalidParameterError(
            f"spin vector has length {arr.shape}, expected ({inst.n},)"
        )
    if not np.all(np.abs(arr) == 1):
        raise InvalidParameterError("spins must be +1 or -1")
    return SpinConfig(x=arr, energy=energy_of_array(inst, arr))


def random_spin_config(inst: Instance, rng: np.random.Generator) -> SpinConfig:
    x = rng.choice(np.array([-1, 1], dtype=np.int8), size=inst.n)
    return SpinConfig(x=x, energy=energy_of_array(inst, x))


def energy_of_array(inst: Instance, x: np.ndarray) -> float:
    """Ising energy H(x) = -sum_E J_ij x_i x_j - sum_i h_i x_i of a raw array."""
    xf = x.astype(np.float64, copy=False)
    if inst.m:
        e = float(np.sum(inst.weights * xf[inst.edge_i] * xf[inst.edge_j]))
    else:
        e = 0.0
    if inst.fields is not None:
        e -= float(inst.fields @ xf)
    return e


def energy(inst: Instance, x: SpinConfig) -> float:
    """Ising energy of a spin configuration (length-checked)."""
    if len(x.x) != inst.n:
        raise InvalidParameterError(
            f"configuration has {len(x.x)} spins, instance has {inst.n}"
        )
    return energy_of_array(inst, x.x)


def max_cut_value(inst: Instance, x: SpinConfig) -> float:
    """Cut value C(x) = 1/2 sum_E A_ij (1 - x_i x_j)."""
    if len(x.x) != inst.n:
        raise InvalidParameterError(
            f"configuration has {len(x.x)} spins, instance has {inst.n}"
        )
    if not inst.m:
        return 0.0
    xf = x.x.astype(np.float64, copy=False)
    return float(0.5 * np.sum(inst.weights * (1.0 - xf[inst.edge_i] * xf[inst.edge_j])))


def misfit(inst: Instance, e: float) -> float:
    """Normalized distance of energy e from the all-bonds-satisfied ideal.

    Returns (e - E_min_id) / (E_max_id - E_min_id) with E_min_id = -sum|J|
    (minus sum|h| when a field is present) and E_max_id its negation; lies in
    [0, 1] for any achievable energy.
    """
    span = inst.total_abs_weight
    if inst.fields is not None:
        span += float(np.abs(inst.fields).sum())
    if span <= 0.0:
        raise DegenerateInstanceError("misfit undefined for an edgeless instance")
    return (e + span) / (2.0 * span)


def magnetization(x: SpinConfig) -> float:
    """Mean spin M = (1/n) sum_i x_i."""
    return float(np.mean(x.x))


def _try_pairing(rng: np.random.Generator, n: int, d: int):
    """One attempt at matching stubs into a simple graph.

    Repeatedly shuffles the unmatched stubs and pairs them two by two,
    rejecting individual self-loop / multi-edge pairs rather than the whole
    matching (whole-matching rejection has success probability ~exp(-d^2/4)
    and never terminates for d beyond ~8).  Returns None when the leftover
    stubs admit no legal pair.
    """
    edges: set[tuple[int, int]] = set()
    stubs = list(np.repeat(np.arange(n), d))
    while stubs:
        rng.shuffle(stubs)
        leftover: list[int] = []
        for k in range(0, len(stubs) - 1, 2):
            u, v = int(stubs[k]), int(stubs[k + 1])
            if u == v or (min(u, v), max(u, v)) in edges:
                leftover.append(u)
                leftover.append(v)
            else:
                edges.add((min(u, v), max(u, v)))
        if len(leftover) == len(stubs):
            remaining = sorted(set(leftover))
            stuck = not any(
                (a, b) not in edges
                for ai, a in enumerate(remaining)
                for b in remaining[ai + 1 :]
            )
            if stuck:
                return None
        stubs = leftover
    return edges


def generate_regular(
    n: int,
    d: int,
    weight_set: tuple[float, ...] = (-1.0, 1.0),
    seed=None,
) -> Instance:
    """Random simple d-regular graph with i.i.d. uniform weights from weight_set.

    Stub-matching construction with pair-level rejection of self-loops and
    multi-edges; an attempt whose leftover stubs admit no legal pair is
    restarted, up to MAX_PAIRING_RESTARTS times.  Deterministic for a fixed
    seed.
    """
    if d >= n or (n * d) % 2 != 0:
        raise InvalidParameterError(
            f"no simple {d}-regular graph on {n} vertices (need n*d even and d < n)"
        )
    rng = np.random.default_rng(seed)
    m = (n * d) // 2
    for _ in range(MAX_PAIRING_RESTARTS):
        edges = _try_pairing(rng, n, d)
        if edges is None:
            continue
        ws = rng.choice(np.asarray(weight_set, dtype=np.float64), size=m)
        ordered = sorted(edges)
        return build_instance(
            n, [(i, j, float(ws[k])) for k, (i, j) in enumerate(ordered)]
        )
    raise GenerationFailureError(
        f"stub matching failed to produce a simple graph after "
        f"{MAX_PAIRING_RESTARTS} restarts (n={n}, d={d})"
    )


def write_instance(inst: Instance, path) -> None:
    """Serialize to the plain-text format: 'n m' header then 'i j w' lines.

    Weights are written with round-trip decimal precision (repr).
    """
    with open(path, "w") as fh:
        fh.write(f"{inst.n} {inst.m}\n")
        for i, j, a in inst.edges:
            fh.write(f"{i} {j} {a!r}\n")


def read_instance(path) -> Instance:
    """Parse an instance file; raises ParseError with the offending line number."""
    header: tuple[int, int] | None = None
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if header is None:
                if len(parts) != 2:
                    raise ParseError("header must be 'n m'", line=lineno)
                try:
                    header = (int(parts[0]), int(parts[1]))
                except ValueError:
                    raise ParseError("header must be two integers", line=lineno)
                if header[0] <= 0 or header[1] < 0:
                    raise ParseError("header values out of range", line=lineno)
                continue
            if len(parts) != 3:
                raise ParseError("edge line must be 'i j w'", line=lineno)
            try:
                i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ParseError("malformed edge line", line=lineno)
            n = header[0]
            if i == j:
                raise ParseError(f"self-loop on vertex {i}", line=lineno)
            lo, hi = min(i, j), max(i, j)
            if not (0 <= lo < hi < n):
                raise ParseError(f"edge ({i},{j}) out of range", line=lineno)
            if (lo, hi) in seen:
                raise ParseError(f"duplicate edge ({i},{j})", line=lineno)
            if len(edges) >= header[1]:
                raise ParseError("more edges than declared in header", line=lineno)
            seen.add((lo, hi))
            edges.append((lo, hi, w))
    if header is None:
        raise ParseError("empty instance file", line=1)
    if len(edges) != header[1]:
        raise ParseError(
            f"header declares {header[1]} edges but file contains {len(edges)}",
            line=None,
        )
    return build_instance(header[0], edges)
