"""Experiment orchestration: suites, references, tuning, histograms, CSV emission.

Result rows and acceptance events are written as plain CSV with fixed headers
so the plotting side needs no shared code.  Per-cell seeds derive from the
master seed and the cell coordinates, which makes row content independent of
scheduling order; rows are additionally written in canonical cell order so
re-runs are byte-identical except for wall-clock columns.
"""

from __future__ import annotations

import concurrent.futures
import json
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .anneal import RunRecord, run_ca, run_sa
from .cluster import ConstantLinkPolicy, random_cluster_policy
from .correlations import (
    CorrelationMatrix,
    cc_correlations,
    mc_correlations,
    mh_sample,
)
from .errors import ConfigError, InvalidParameterError, SizeLimitError
from .exact import BRUTE_FORCE_MAX_N, brute_force
from .instance import Instance, generate_regular, read_instance
from .qaoa import QAOA_MAX_N, QaoaParams, qaoa_correlations, qaoa_optimize, qaoa_p1_correlations, qaoa_prepare
from .sdp import sdp_correlations, sdp_solve

RESULTS_HEADER = "graph_id,method,source,param,lambda_scale,budget_m,rep,e_best,is_optimal,wall_ms,seed"
ACCEPT_HEADER = "graph_id,source,param,rep,beta,cluster_size,delta_e,accepted"
SUMMARY_HEADER = "method,source,param,lambda_scale,budget_m,pct_optimal,pct_std,n_graphs"

LONG_SA_ITER_MULTIPLE = 10_000
LONG_SA_REPS = 50
AUTO_REFERENCE_MAX_N = 26
HISTOGRAM_BINS = 40

KNOWN_SOURCES = ("cc", "random", "mc", "sdp", "qaoa-sim", "qaoa-p1")


# ---------------------------------------------------------------------------
# references


@dataclass
class ReferenceRecord:
    graph_id: str
    energy: float
    certified: bool
    method: str


class ReferenceStore:
    """JSON-backed map graph_id -> best known (or certified) energy."""

    def __init__(self, path=None):
        self.path = path
        self.records: dict[str, ReferenceRecord] = {}
        if path is not None and os.path.exists(path):
            with open(path) as fh:
                data = json.load(fh)
            for gid, rec in data.items():
                self.records[gid] = ReferenceRecord(
                    graph_id=gid,
                    energy=float(rec["energy"]),
                    certified=bool(rec["certified"]),
                    method=str(rec["method"]),
                )

    def save(self) -> None:
        if self.path is None:
            return
        data = {
            gid: {
                "energy": rec.energy,
                "certified": rec.certified,
                "method": rec.method,
            }
            for gid, rec in sorted(self.records.items())
        }
        with open(self.path, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def get(self, graph_id: str) -> ReferenceRecord | None:
        return self.records.get(graph_id)

    def register(self, record: ReferenceRecord) -> bool:
        """Insert or improve a reference; returns True when the entry changed.

        A certified record always replaces an uncertified one; otherwise only
        a strictly better (lower) energy replaces the stored value.
        """
        old = self.records.get(record.graph_id)
        if old is None:
            self.records[record.graph_id] = record
            return True
        if record.certified and not old.certified:
            self.records[record.graph_id] = record
            return True
        if record.energy < old.energy and not (old.certified and not record.certified):
            self.records[record.graph_id] = record
            return True
        return False


def register_reference(
    store: ReferenceStore,
    graph_id: str,
    inst: Instance,
    method: str = "brute_force",
    seed=None,
) -> ReferenceRecord:
    """Compute and persist a reference energy for one instance.

    brute_force yields a certified optimum (n <= 30); long_sa runs the
    10,000n-iteration, 50-repetition protocol and is flagged uncertified.
    """
    if method == "brute_force":
        if inst.n > BRUTE_FORCE_MAX_N:
            raise SizeLimitError(
                f"brute-force reference limited to n <= {BRUTE_FORCE_MAX_N}"
            )
        energy = brute_force(inst).e_min
        record = ReferenceRecord(
            graph_id=graph_id, energy=energy, certified=True, method="brute_force"
        )
    elif method == "long_sa":
        seeds = np.random.SeedSequence(seed).spawn(LONG_SA_REPS)
        best = np.inf
        for ss in seeds:
            rec = run_sa(
                inst,
                beta_f=8.0,
                m=LONG_SA_ITER_MULTIPLE * inst.n,
                seed=ss,
                record_events=False,
            )
            best = min(best, rec.e_best)
        record = ReferenceRecord(
            graph_id=graph_id, energy=float(best), certified=False, method="long_sa"
        )
    else:
        raise InvalidParameterError(f"unknown reference method {method!r}")
    store.register(record)
    store.save()
    return record


def refresh_is_optimal(results_path, store: ReferenceStore) -> int:
    """Re-derive the is_optimal column of an existing results CSV; returns rows changed."""
    with open(results_path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != RESULTS_HEADER:
        raise ConfigError(f"{results_path} is not a results CSV")
    header = lines[0].split(",")
    gid_col = header.index("graph_id")
    e_col = header.index("e_best")
    opt_col = header.index("is_optimal")
    changed = 0
    out = [lines[0]]
    for line in lines[1:]:
        if not line:
            continue
        fields = line.split(",")
        ref = store.get(fields[gid_col])
        flag = "1" if ref is not None and float(fields[e_col]) == ref.energy else "0"
        if flag != fields[opt_col]:
            changed += 1
            fields[opt_col] = flag
        out.append(",".join(fields))
    with open(results_path, "w") as fh:
        fh.write("\n".join(out) + "\n")
    return changed


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    """One suite: a single (method, source) over instances x params x grid x budgets x reps."""

    method: str = "SA"
    source: str | None = None
    instances: list[str] = field(default_factory=list)
    gen_n: int | None = None
    gen_d: int | None = None
    gen_count: int | None = None
    gen_weights: tuple[float, ...] = (-1.0, 1.0)
    params: list[float] = field(default_factory=list)
    angles: tuple[float, float] | None = None
    lambda_grid: list[float] = field(default_factory=lambda: [1.0])
    budgets: list[int] = field(default_factory=lambda: [100])
    reps: int = 1
    seed: int = 0
    beta_f: float = 8.0
    out_dir: str = "."
    record_acceptance: bool = False
    references: str = "auto"
    mh_burn_in: int = 1000
    mh_thin: int = 10
    mh_samples: int = 2000
    qaoa_restarts: int = 10
    threads: int = 1

    def validate(self) -> None:
        if self.method not in ("SA", "CA"):
            raise ConfigError(f"method must be SA or CA, got {self.method!r}")
        if self.method == "CA":
            if self.source not in KNOWN_SOURCES:
                raise ConfigError(
                    f"CA requires source in {KNOWN_SOURCES}, got {self.source!r}"
                )
            if self.source in ("mc", "qaoa-sim") and not self.params:
                raise ConfigError(f"source {self.source} needs a param list")
            if self.source == "random" and len(self.params) == 0:
                raise ConfigError("source random needs the constant link probability")
            if self.source == "qaoa-p1" and self.angles is None:
                raise ConfigError("source qaoa-p1 needs angles 'beta1,gamma1'")
        if self.reps < 0:
            raise ConfigError("reps must be >= 0")
        if any(b < 2 for b in self.budgets):
            raise ConfigError("budgets are multiples of n and must give m >= 2")
        has_files = bool(self.instances)
        has_gen = self.gen_n is not None
        if has_files == has_gen:
            raise ConfigError("give either instance files or gen_n/gen_d/gen_count")
        if has_gen and (self.gen_d is None or self.gen_count is None):
            raise ConfigError("generated suites need gen_n, gen_d and gen_count")


_CONFIG_KEYS = {
    "method": str,
    "source": str,
    "instances": "strlist",
    "gen_n": int,
    "gen_d": int,
    "gen_count": int,
    "gen_weights": "floatlist",
    "param": "floatlist",
    "angles": "floatlist",
    "lambda_scale": "floatlist",
    "budget": "intlist",
    "reps": int,
    "seed": int,
    "beta_f": float,
    "out_dir": str,
    "record_acceptance": "bool",
    "references": str,
    "mh_burn_in": int,
    "mh_thin": int,
    "mh_samples": int,
    "qaoa_restarts": int,
    "threads": int,
}

_KEY_TO_FIELD = {
    "param": "params",
    "lambda_scale": "lambda_grid",
    "budget": "budgets",
}


def _parse_value(key: str, raw: str):
    kind = _CONFIG_KEYS[key]
    raw = raw.strip()
    if kind is str:
        return raw
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ConfigError(f"cannot parse boolean {raw!r} for key {key}")
    items = [tok.strip() for tok in raw.split(",") if tok.strip()]
    if kind == "strlist":
        return items
    if kind == "floatlist":
        return [float(tok) for tok in items]
    if kind == "intlist":
        return [int(tok) for tok in items]
    raise ConfigError(f"unhandled config key {key}")


def _apply_entry(cfg: ExperimentConfig, key: str, raw: str) -> ExperimentConfig:
    if key not in _CONFIG_KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    value = _parse_value(key, raw)
    if key == "gen_weights":
        value = tuple(value)
    if key == "angles":
        if len(value) != 2:
            raise ConfigError("angles must be 'beta1,gamma1'")
        value = (value[0], value[1])
    return replace(cfg, **{_KEY_TO_FIELD.get(key, key): value})


def load_config(path, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Parse the key = value config format; unknown keys fail fast.

    `overrides` (from command-line flags) take precedence over file values.
    """
    cfg = ExperimentConfig()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            cfg = _apply_entry(cfg, key.strip(), val)
    for key, val in (overrides or {}).items():
        cfg = _apply_entry(cfg, key.strip(), val)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# suite execution


@dataclass
class ResultRow:
    graph_id: str
    method: str
    source: str
    param: str
    lambda_scale: str
    budget_m: int
    rep: int
    e_best: float
    is_optimal: bool
    wall_ms: int
    seed: int

    def to_csv(self) -> str:
        return ",".join(
            [
                self.graph_id,
                self.method,
                self.source,
                self.param,
                self.lambda_scale,
                str(self.budget_m),
                str(self.rep),
                repr(self.e_best),
                "1" if self.is_optimal else "0",
                str(self.wall_ms),
                str(self.seed),
            ]
        )


def _cell_seed(master: int, *coords: int) -> int:
    ss = np.random.SeedSequence((int(master), *[int(c) for c in coords]))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def resolve_instances(cfg: ExperimentConfig) -> list[tuple[str, Instance]]:
    """Load instance files, or generate the suite deterministically from the seed."""
    if cfg.instances:
        out = []
        for path in cfg.instances:
            gid = os.path.splitext(os.path.basename(path))[0]
            out.append((gid, read_instance(path)))
        return out
    out = []
    for k in range(cfg.gen_count):
        gid = f"d{cfg.gen_d}_n{cfg.gen_n}_g{k:03d}"
        inst = generate_regular(
            cfg.gen_n, cfg.gen_d, weight_set=cfg.gen_weights, seed=_cell_seed(cfg.seed, 90, k)
        )
        out.append((gid, inst))
    return out


def prepare_guidance(
    cfg: ExperimentConfig,
    inst: Instance,
    inst_idx: int,
    param: float | None,
    param_idx: int = 0,
):
    """Correlation matrix and/or policy for one (instance, source, param) cell.

    Returns (z, policy, param_label); the derivation seed depends only on the
    master seed and the cell coordinates.
    """
    seed = _cell_seed(cfg.seed, 50, inst_idx, param_idx)
    if cfg.method == "SA":
        return None, None, "-"
    if cfg.source == "cc":
        return cc_correlations(inst), None, "-"
    if cfg.source == "random":
        return None, random_cluster_policy(param), repr(param)
    if cfg.source == "mc":
        samples = mh_sample(
            inst,
            param,
            burn_in=cfg.mh_burn_in,
            thin=cfg.mh_thin,
            n_samples=cfg.mh_samples,
            seed=seed,
        )
        return mc_correlations(samples), None, repr(param)
    if cfg.source == "sdp":
        sol = sdp_solve(inst, seed=seed)
        return sdp_correlations(sol), None, "-"
    if cfg.source == "qaoa-sim":
        depth = int(param)
        if inst.n > QAOA_MAX_N:
            raise SizeLimitError(f"qaoa-sim limited to n <= {QAOA_MAX_N}")
        params, _e = qaoa_optimize(inst, depth, restarts=cfg.qaoa_restarts, seed=seed)
        return qaoa_correlations(qaoa_prepare(inst, params)), None, str(depth)
    if cfg.source == "qaoa-p1":
        b1, g1 = cfg.angles
        return qaoa_p1_correlations(inst, b1, g1), None, "-"
    raise ConfigError(f"unhandled source {cfg.source!r}")


def _run_cell(args):
    (gid, inst, z, policy, method, lambda_scale, m, beta_f, seed, record_events) = args
    t0 = time.perf_counter()
    if method == "SA":
        rec = run_sa(inst, beta_f=beta_f, m=m, seed=seed, record_events=record_events)
    else:
        rec = run_ca(
            inst,
            z,
            beta_f=beta_f,
            m=m,
            lambda_scale=lambda_scale,
            policy=policy,
            seed=seed,
            record_events=record_events,
        )
    wall_ms = int(round(1000 * (time.perf_counter() - t0)))
    return rec, wall_ms


def run_suite(cfg: ExperimentConfig, progress=None):
    """Execute the full cross product and return (rows, summary, acceptance_lines).

    Rows come back in canonical cell order regardless of the worker pool;
    every cell's generator seed is a pure function of the master seed and the
    cell coordinates.
    """
    cfg.validate()
    pairs = resolve_instances(cfg)
    store = _resolve_references(cfg, pairs)

    if cfg.method == "SA" or cfg.source in ("cc", "sdp", "qaoa-p1"):
        params: list[float | None] = [None]
    else:
        params = list(cfg.params)
    lambdas: list[float | None] = (
        [None] if cfg.method == "SA" else list(cfg.lambda_grid)
    )

    guidance = {}
    for pi, param in enumerate(params):
        for ii, (gid, inst) in enumerate(pairs):
            guidance[(pi, ii)] = prepare_guidance(cfg, inst, ii, param, param_idx=pi)

    cells = []
    for pi, param in enumerate(params):
        for li, lam in enumerate(lambdas):
            for bi, budget in enumerate(cfg.budgets):
                for ii, (gid, inst) in enumerate(pairs):
                    for rep in range(cfg.reps):
                        seed = _cell_seed(cfg.seed, ii, pi, li, bi, rep)
                        z, policy, plabel = guidance[(pi, ii)]
                        m = budget * inst.n
                        cells.append(
                            (
                                (pi, li, bi, ii, rep),
                                (
                                    gid,
                                    inst,
                                    z,
                                    policy,
                                    cfg.method,
                                    1.0 if lam is None else lam,
                                    m,
                                    cfg.beta_f,
                                    seed,
                                    cfg.record_acceptance,
                                ),
                            )
                        )

    results: dict[tuple, tuple[RunRecord, int]] = {}
    if cfg.threads > 1 and len(cells) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            futures = {
                pool.submit(_run_cell, cell_args): key for key, cell_args in cells
            }
            for fut in concurrent.futures.as_completed(futures):
                results[futures[fut]] = fut.result()
    else:
        for key, cell_args in cells:
            results[key] = _run_cell(cell_args)
            if progress is not None:
                progress(len(results), len(cells))

    rows: list[ResultRow] = []
    accept_lines: list[str] = []
    hit_table: dict[tuple, dict[str, list[bool]]] = {}
    for key, cell_args in cells:
        pi, li, bi, ii, rep = key
        gid, inst = pairs[ii]
        rec, wall_ms = results[key]
        _z, _policy, plabel = guidance[(pi, ii)]
        lam = lambdas[li]
        ref = store.get(gid) if store is not None else None
        optimal = ref is not None and rec.e_best == ref.energy
        row = ResultRow(
            graph_id=gid,
            method=cfg.method,
            source="-" if cfg.method == "SA" else cfg.source,
            param=plabel,
            lambda_scale="-" if lam is None else repr(lam),
            budget_m=cfg.budgets[bi],
            rep=rep,
            e_best=rec.e_best,
            is_optimal=optimal,
            wall_ms=wall_ms,
            seed=cell_args[8],
        )
        rows.append(row)
        group = (plabel, row.lambda_scale, cfg.budgets[bi])
        hit_table.setdefault(group, {}).setdefault(gid, []).append(optimal)
        if cfg.record_acceptance:
            for b, s, d, a in zip(
                rec.event_beta, rec.event_size, rec.event_delta_e, rec.event_accepted
            ):
                accept_lines.append(
                    f"{gid},{row.source},{plabel},{rep},{float(b)!r},{int(s)},{float(d)!r},{int(a)}"
                )

    summary: list[str] = []
    for (plabel, lam_label, budget), per_graph in sorted(hit_table.items()):
        pcts = [100.0 * np.mean(hits) for hits in per_graph.values()]
        summary.append(
            ",".join(
                [
                    cfg.method,
                    "-" if cfg.method == "SA" else cfg.source,
                    plabel,
                    lam_label,
                    str(budget),
                    repr(float(np.mean(pcts))),
                    repr(float(np.std(pcts))),
                    str(len(pcts)),
                ]
            )
        )
    return rows, summary, accept_lines


def _resolve_references(cfg: ExperimentConfig, pairs) -> ReferenceStore | None:
    if cfg.references == "none":
        return None
    if cfg.references == "auto":
        store = ReferenceStore(os.path.join(cfg.out_dir, "references.json"))
        for gid, inst in pairs:
            if store.get(gid) is None:
                if inst.n > AUTO_REFERENCE_MAX_N:
                    raise ConfigError(
                        f"auto references need n <= {AUTO_REFERENCE_MAX_N};"
                        f" register references for {gid} explicitly"
                    )
                register_reference(store, gid, inst, method="brute_force")
        return store
    store = ReferenceStore(cfg.references)
    missing = [gid for gid, _ in pairs if store.get(gid) is None]
    if missing:
        raise ConfigError(f"references file lacks entries for {missing}")
    return store


def write_results(rows: list[ResultRow], path) -> None:
    with open(path, "w") as fh:
        fh.write(RESULTS_HEADER + "\n")
        for row in rows:
            fh.write(row.to_csv() + "\n")


def write_summary(summary: list[str], path) -> None:
    with open(path, "w") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for line in summary:
            fh.write(line + "\n")


def write_acceptance(lines: list[str], path) -> None:
    with open(path, "w") as fh:
        fh.write(ACCEPT_HEADER + "\n")
        for line in lines:
            fh.write(line + "\n")


# ---------------------------------------------------------------------------
# tuning and histograms


def tune_lambda_scale(
    suite: list[tuple[str, Instance, CorrelationMatrix | None, object, float]],
    grid: list[float],
    budget_multiple: int,
    reps: int,
    beta_f: float = 8.0,
    seed: int = 0,
) -> tuple[float, dict[float, float]]:
    """Percent-optimal over a lambda grid; returns (argmax, table), ties to the smallest.

    `suite` entries are (graph_id, instance, correlations, policy, reference
    energy); a missing reference is a configuration error.
    """
    if not grid:
        raise ConfigError("lambda grid must not be empty")
    for gid, _inst, _z, _policy, ref in suite:
        if ref is None:
            raise ConfigError(f"no reference energy registered for {gid}")
    table: dict[float, float] = {}
    for li, lam in enumerate(grid):
        pcts = []
        for ii, (gid, inst, z, policy, ref) in enumerate(suite):
            hits = 0
            for rep in range(reps):
                rec = run_ca(
                    inst,
                    z,
                    beta_f=beta_f,
                    m=budget_multiple * inst.n,
                    lambda_scale=lam,
                    policy=policy,
                    seed=_cell_seed(seed, li, ii, rep),
                    record_events=False,
                )
                hits += rec.e_best == ref
            pcts.append(100.0 * hits / max(1, reps))
        table[lam] = float(np.mean(pcts))
    best = max(sorted(table), key=lambda lam: table[lam])
    # max() with sorted keys returns the first (smallest) argmax on ties
    return best, table


@dataclass
class HistogramResult:
    counts: np.ndarray
    edges: np.ndarray
    empty: bool


def correlation_histogram(
    z: CorrelationMatrix, inst: Instance, weight_filter: int | None = None
) -> HistogramResult:
    """Fixed 40-bin histogram over [-1, 1] of Z on edges, filtered by coupling sign.

    `weight_filter` +1/-1 keeps edges whose coupling J has that sign; None
    keeps all edges.  An empty selection yields an all-zero histogram flagged
    `empty`.
    """
    if weight_filter not in (None, 1, -1):
        raise InvalidParameterError("weight_filter must be +1, -1 or None")
    vals = []
    for k, (i, j, _a) in enumerate(inst.edges):
        if weight_filter is not None and np.sign(inst.couplings[k]) != weight_filter:
            continue
        vals.append(z.values[i, j])
    edges = np.linspace(-1.0, 1.0, HISTOGRAM_BINS + 1)
    if not vals:
        return HistogramResult(
            counts=np.zeros(HISTOGRAM_BINS, dtype=np.int64), edges=edges, empty=True
        )
    counts, _ = np.histogram(np.clip(vals, -1.0, 1.0), bins=edges)
    return HistogramResult(counts=counts.astype(np.int64), edges=edges, empty=False)
