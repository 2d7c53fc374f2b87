"""Correlation-guided cluster Monte Carlo toolkit for Ising / Max-Cut ground states."""

from .anneal import (
    AcceptanceSummary,
    RunRecord,
    acceptance_statistics,
    delta_energy,
    run_ca,
    run_sa,
)
from .cluster import (
    Cluster,
    ConstantLinkPolicy,
    CorrelationLinkPolicy,
    PercolationEstimate,
    create_cluster,
    link_probability,
    percolation_lambda,
    random_cluster_policy,
)
from .correlations import (
    CorrelationMatrix,
    SampleSet,
    cc_correlations,
    mc_correlations,
    mh_sample,
    read_correlations,
    read_samples,
    write_correlations,
    write_samples,
)
from .exact import ExactResult, brute_force, exact_boltzmann_correlations
from .instance import (
    Instance,
    SpinConfig,
    build_instance,
    energy,
    generate_regular,
    magnetization,
    max_cut_value,
    misfit,
    read_instance,
    spin_config,
    write_instance,
)
from .qaoa import (
    QaoaParams,
    QaoaState,
    p1_term_ratio,
    qaoa_correlations,
    qaoa_optimize,
    qaoa_p1_correlations,
    qaoa_prepare,
    qaoa_sample,
    read_params,
    write_params,
)
from .sdp import SdpSolution, gw_round, sdp_correlations, sdp_solve

__all__ = [
    "AcceptanceSummary",
    "RunRecord",
    "acceptance_statistics",
    "delta_energy",
    "run_ca",
    "run_sa",
    "Cluster",
    "ConstantLinkPolicy",
    "CorrelationLinkPolicy",
    "PercolationEstimate",
    "create_cluster",
    "link_probability",
    "percolation_lambda",
    "random_cluster_policy",
    "CorrelationMatrix",
    "SampleSet",
    "cc_correlations",
    "mc_correlations",
    "mh_sample",
    "read_correlations",
    "read_samples",
    "write_correlations",
    "write_samples",
    "ExactResult",
    "brute_force",
    "exact_boltzmann_correlations",
    "Instance",
    "SpinConfig",
    "build_instance",
    "energy",
    "generate_regular",
    "magnetization",
    "max_cut_value",
    "misfit",
    "read_instance",
    "spin_config",
    "write_instance",
    "QaoaParams",
    "QaoaState",
    "p1_term_ratio",
    "qaoa_correlations",
    "qaoa_optimize",
    "qaoa_p1_correlations",
    "qaoa_prepare",
    "qaoa_sample",
    "read_params",
    "write_params",
    "SdpSolution",
    "gw_round",
    "sdp_correlations",
    "sdp_solve",
]
