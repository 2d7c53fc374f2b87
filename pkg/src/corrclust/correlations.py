"""Classical correlation providers: coupling constants, thermal sampling, file formats.

A CorrelationMatrix is the one currency every guidance source produces: a
dense symmetric matrix of pair values in [-1, 1] with provenance metadata.
The cluster grower only ever reads entries supported by graph edges, but
sampled and relaxed sources are stored dense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ParseError
from .instance import Instance, energy_of_array

CLIP_EPS = 1e-9

MH_DEFAULT_BURN_IN = 1000
MH_DEFAULT_THIN = 10
MAGNETIZATION_WARN_LEVEL = 0.01


@dataclass
class CorrelationMatrix:
    """Symmetric pair-correlation values plus provenance.

    `source` is one of CC, MC, SDP, QAOA; `param` carries the sampling inverse
    temperature (MC) or circuit depth (QAOA).  `exact` marks matrices obtained
    from closed-form or exhaustive computation rather than estimation.  The
    diagonal is unused by all consumers.
    """

    n: int
    values: np.ndarray
    source: str
    param: float | int | None = None
    mean_abs_nonzero: float = 0.0
    exact: bool = False

    def label(self) -> str:
        if self.param is None:
            return self.source
        return f"{self.source}({self.param:g})"

    def validate(self) -> None:
        v = self.values
        if v.shape != (self.n, self.n):
            raise InvalidParameterError("correlation matrix has wrong shape")
        if not np.array_equal(v, v.T):
            raise InvalidParameterError("correlation matrix must be symmetric")
        off = ~np.eye(self.n, dtype=bool)
        if np.any(np.abs(v[off]) > 1.0 + CLIP_EPS):
            raise InvalidParameterError("off-diagonal entries exceed [-1, 1]")
        if not math.isclose(
            self.mean_abs_nonzero, _mean_abs_nonzero(v), rel_tol=0, abs_tol=1e-12
        ):
            raise InvalidParameterError("stored mean_abs_nonzero is stale")


def _mean_abs_nonzero(values: np.ndarray) -> float:
    off = ~np.eye(values.shape[0], dtype=bool)
    entries = values[off]
    nz = entries[entries != 0.0]
    if nz.size == 0:
        return 0.0
    return float(np.abs(nz).mean())


def correlation_matrix(
    values: np.ndarray,
    source: str,
    param: float | int | None = None,
    clip: bool = False,
    exact: bool = False,
) -> CorrelationMatrix:
    """Assemble a CorrelationMatrix, optionally clipping stray numerics to [-1, 1]."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise InvalidParameterError("correlation values must form a square matrix")
    if clip:
        v = np.clip(v, -1.0, 1.0)
    return CorrelationMatrix(
        n=v.shape[0],
        values=v,
        source=source,
        param=param,
        mean_abs_nonzero=_mean_abs_nonzero(v),
        exact=exact,
    )


def cc_correlations(inst: Instance) -> CorrelationMatrix:
    """Coupling constants as correlations: Z_ij = J_ij on edges, zero elsewhere."""
    v = np.zeros((inst.n, inst.n), dtype=np.float64)
    for idx, (i, j, _a) in enumerate(inst.edges):
        v[i, j] = v[j, i] = inst.couplings[idx]
    return correlation_matrix(v, source="CC")


@dataclass
class SampleSet:
    """Bitstrings drawn from some solution distribution, plus quality metadata.

    `mean_approx_ratio` compares mean cut value against a reference optimum
    and is None when no reference was supplied.  The magnetization fields are
    the Metropolis equilibration diagnostic; they are None for non-thermal
    sources.
    """

    bitstrings: np.ndarray
    beta_s: float | None
    mean_approx_ratio: float | None = None
    energies: np.ndarray | None = None
    mean_magnetization: float | None = None
    magnetization_warning: bool | None = None
    source: str = "MC"

    @property
    def n_samples(self) -> int:
        return self.bitstrings.shape[0]

    @property
    def n(self) -> int:
        return self.bitstrings.shape[1]


def mean_cut_ratio(inst: Instance, energies: np.ndarray, reference_energy: float):
    """Mean C(x)/C_opt of a batch, from energies and a reference ground energy."""
    w_total = float(inst.weights.sum()) if inst.m else 0.0
    c_opt = 0.5 * (w_total - reference_energy)
    if c_opt <= 0:
        return None
    cuts = 0.5 * (w_total - np.asarray(energies, dtype=np.float64))
    return float(cuts.mean() / c_opt)


def mh_sample(
    inst: Instance,
    beta_s: float,
    burn_in: int = MH_DEFAULT_BURN_IN,
    thin: int = MH_DEFAULT_THIN,
    n_samples: int = 1,
    seed=None,
    reference_energy: float | None = None,
) -> SampleSet:
    """Single-spin Metropolis chain at fixed inverse temperature.

    One sweep proposes n flips at uniformly random sites.  After `burn_in`
    sweeps, a sample is recorded every `thin` sweeps until `n_samples` are
    collected.  Deterministic for a fixed seed.  The mean magnetization over
    recorded samples is reported, with a warning flag once |mean| exceeds 1%.
    """
    if beta_s < 0:
        raise InvalidParameterError(f"inverse temperature must be >= 0, got {beta_s}")
    if n_samples < 1:
        raise InvalidParameterError("n_samples must be >= 1")
    if thin < 1 or burn_in < 0:
        raise InvalidParameterError("thin must be >= 1 and burn_in >= 0")

    rng = np.random.default_rng(seed)
    n = inst.n
    x = [int(v) for v in rng.choice(np.array([-1, 1], dtype=np.int8), size=n)]
    e = energy_of_array(inst, np.asarray(x, dtype=np.int8))

    samples = np.empty((n_samples, n), dtype=np.int8)
    energies = np.empty(n_samples, dtype=np.float64)
    recorded = 0

    unit = inst.fields is None and bool(np.all(np.abs(inst.couplings) == 1.0))
    if unit:
        plus = [
            [k for k, jj in zip(inst.neighbor_lists[i], inst.coupling_lists[i]) if jj > 0]
            for i in range(n)
        ]
        minus = [
            [k for k, jj in zip(inst.neighbor_lists[i], inst.coupling_lists[i]) if jj < 0]
            for i in range(n)
        ]
        dmax = max((len(a) + len(b) for a, b in zip(plus, minus)), default=0)
        accept_table = {
            de: math.exp(-beta_s * de) for de in range(2, 2 * dmax + 1, 2)
        }
    else:
        pairs = [
            list(zip(inst.neighbor_lists[i], inst.coupling_lists[i]))
            for i in range(n)
        ]
        hs = inst.fields if inst.fields is not None else np.zeros(n)
        exp_ = math.exp

    sweeps_total = burn_in + thin * n_samples
    block_sweeps = max(1, min(4096, sweeps_total))
    sweeps_done = 0
    while sweeps_done < sweeps_total:
        todo = min(block_sweeps, sweeps_total - sweeps_done)
        sites = rng.integers(0, n, size=todo * n).tolist()
        us = rng.random(todo * n).tolist()
        t = 0
        for _sweep in range(todo):
            if unit:
                for _ in range(n):
                    i = sites[t]
                    s = 0
                    for k in plus[i]:
                        s += x[k]
                    for k in minus[i]:
                        s -= x[k]
                    de = 2 * x[i] * s
                    if de <= 0 or us[t] < accept_table[de]:
                        x[i] = -x[i]
                        e += de
                    t += 1
            else:
                for _ in range(n):
                    i = sites[t]
                    acc = float(hs[i])
                    for k, jj in pairs[i]:
                        acc += jj * x[k]
                    de = 2.0 * x[i] * acc
                    if de <= 0.0 or us[t] < exp_(-beta_s * de):
                        x[i] = -x[i]
                        e += de
                    t += 1
            sweeps_done += 1
            if sweeps_done > burn_in and (sweeps_done - burn_in) % thin == 0:
                samples[recorded] = x
                energies[recorded] = e
                recorded += 1

    mean_m = float(samples.mean())
    ratio = (
        mean_cut_ratio(inst, energies, reference_energy)
        if reference_energy is not None
        else None
    )
    return SampleSet(
        bitstrings=samples,
        beta_s=beta_s,
        mean_approx_ratio=ratio,
        energies=energies,
        mean_magnetization=mean_m,
        magnetization_warning=abs(mean_m) > MAGNETIZATION_WARN_LEVEL,
        source="MC",
    )


def mc_correlations(samples: SampleSet) -> CorrelationMatrix:
    """Sampled pair correlations Z_ij = <x_i x_j>, dense over all pairs."""
    if samples.n_samples == 0:
        raise InvalidParameterError("cannot compute correlations of an empty sample set")
    s = samples.bitstrings.astype(np.float64)
    values = (s.T @ s) / samples.n_samples
    np.fill_diagonal(values, 1.0)
    return correlation_matrix(values, source="MC", param=samples.beta_s)


# ---------------------------------------------------------------------------
# file formats


def write_correlations(z: CorrelationMatrix, path) -> None:
    """Text format: header 'n source tag', then nonzero upper-triangle 'i j z' lines."""
    tag = "-" if z.param is None else repr(z.param)
    with open(path, "w") as fh:
        fh.write(f"{z.n} {z.source} {tag}\n")
        for i in range(z.n):
            for j in range(i + 1, z.n):
                v = float(z.values[i, j])
                if v != 0.0:
                    fh.write(f"{i} {j} {v!r}\n")


def read_correlations(path) -> CorrelationMatrix:
    """Parse the correlation file format; omitted pairs are zero."""
    header = None
    values = None
    n = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if header is None:
                if len(parts) != 3:
                    raise ParseError("header must be 'n source tag'", line=lineno)
                try:
                    n = int(parts[0])
                except ValueError:
                    raise ParseError("vertex count must be an integer", line=lineno)
                param = None if parts[2] == "-" else float(parts[2])
                header = (parts[1], param)
                values = np.zeros((n, n), dtype=np.float64)
                continue
            if len(parts) != 3:
                raise ParseError("entry line must be 'i j z'", line=lineno)
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ParseError("malformed entry line", line=lineno)
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ParseError(f"pair ({i},{j}) out of range", line=lineno)
            values[i, j] = values[j, i] = v
    if header is None:
        raise ParseError("empty correlation file", line=1)
    return correlation_matrix(values, source=header[0], param=header[1])


def write_samples(samples: SampleSet, path) -> None:
    """One +/- string per line, preceded by a metadata header."""
    with open(path, "w") as fh:
        fh.write(
            f"# n={samples.n} n_samples={samples.n_samples}"
            f" beta_s={samples.beta_s!r} source={samples.source}\n"
        )
        for row in samples.bitstrings:
            fh.write("".join("+" if v > 0 else "-" for v in row) + "\n")


def read_samples(path) -> SampleSet:
    beta_s: float | None = None
    source = "MC"
    rows: list[list[int]] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if token.startswith("beta_s="):
                        val = token.split("=", 1)[1]
                        beta_s = None if val == "None" else float(val)
                    elif token.startswith("source="):
                        source = token.split("=", 1)[1]
                continue
            if set(line) - {"+", "-"}:
                raise ParseError("sample lines must consist of '+' and '-'", line=lineno)
            rows.append([1 if c == "+" else -1 for c in line])
    if not rows:
        raise ParseError("sample file contains no bitstrings", line=1)
    if len({len(r) for r in rows}) != 1:
        raise ParseError("inconsistent bitstring lengths", line=None)
    return SampleSet(
        bitstrings=np.asarray(rows, dtype=np.int8),
        beta_s=beta_s,
        source=source,
    )
