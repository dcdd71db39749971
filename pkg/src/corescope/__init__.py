"""Core numbers, local core-number estimators and cluster-randomised exposure."""

__version__ = "0.1.0"

from .cores import (
    CoreDecomposition,
    ShellDistribution,
    core_decomposition,
    k_core,
    naive_core_oracle,
    shell_distribution,
)
from .errors import (
    CorescopeError,
    ExposureLimitError,
    GenerationError,
    GraphParseError,
    OracleRefusal,
)
from .estimators import (
    EstimateTable,
    RatioReport,
    induced_all,
    induced_estimate,
    propagate_all,
    propagate_estimate,
    ratio_report,
    upper_bound_step,
)
from .exposure import (
    Clustering,
    ExposureProfile,
    ExposureResult,
    brute_force_exposure_oracle,
    degree_exposure_prob,
    exposure_profile,
    monte_carlo_core_exposure,
    neighbor_degree_exposure_prob,
    pruned_degree_exposure_prob,
    three_net_clustering,
)
from .generators import (
    Khat1Pmf,
    analytic_khat1_pmf,
    gen_complete_ary_tree,
    gen_erdos_renyi,
    gen_shell_distribution,
    gen_tree_prime,
)
from .graph import (
    Graph,
    diameter,
    induced_subgraph,
    neighborhood,
    neighborhood_size_stats,
    parse_edge_list,
    read_edge_list,
    to_edge_list,
)
