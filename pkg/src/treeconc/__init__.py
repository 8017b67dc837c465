"""treeconc: concentration parameters of broadcast models on rooted trees.

Core objects: immutable rooted trees (``tree``), per-vertex descendant
profiles and their aggregate norms (``delta``), the child-sum operator and
mixing matrix (``spectral``), finite-state broadcast models with exact DP
machinery (``broadcast``), exact optimal transport and relative entropy
(``transport``), and executable inequality checkers (``verify``).  The
``treeconc`` console script binds everything.
"""

from treeconc.broadcast import (
    ExactMeasure,
    IsingModel,
    MagnetizationPGF,
    MarkovTreeModel,
    StateSpace,
    exact_measure,
    exp_moment,
    kernel_lipschitz,
    magnetization_distribution,
    n_step_matrix,
    sample,
    variance_magnetization,
)
from treeconc.delta import (
    DeltaSeries,
    DescendantProfile,
    alt_delta_bound,
    dary_delta_series,
    delta_profile,
    delta_series,
    delta_via_operator,
    pair_distance_sum,
    sandwich_bounds,
    threeone_delta_series,
)
from treeconc.spectral import (
    MixingMatrix,
    MixingNorms,
    TreeOperator,
    breadth_first_order,
    mixing_matrix,
    mixing_norms,
    partial_sum_norm,
    q_apply,
    q_power_norm_exact,
    q_power_norm_iterative,
)
from treeconc.transport import (
    TransportPlan,
    WeightedHamming,
    mcshane_extension,
    min_cost_transport,
    product_coupling_identity,
    relative_entropy,
    wasserstein,
)
from treeconc.tree import (
    GeneratorSpec,
    GrowthEstimates,
    RootedTree,
    build_from_parent_array,
    generate,
)
from treeconc.verify import (
    InequalityReport,
    check_exp_moment,
    check_mixing_corollary,
    check_optimality_chain,
    check_t1,
    check_tail,
    run_all_checks,
    verification_corpus,
)

__version__ = "0.1.0"

__all__ = [
    "ExactMeasure",
    "IsingModel",
    "MagnetizationPGF",
    "MarkovTreeModel",
    "StateSpace",
    "exact_measure",
    "exp_moment",
    "kernel_lipschitz",
    "magnetization_distribution",
    "n_step_matrix",
    "sample",
    "variance_magnetization",
    "DeltaSeries",
    "DescendantProfile",
    "alt_delta_bound",
    "dary_delta_series",
    "delta_profile",
    "delta_series",
    "delta_via_operator",
    "pair_distance_sum",
    "sandwich_bounds",
    "threeone_delta_series",
    "MixingMatrix",
    "MixingNorms",
    "TreeOperator",
    "breadth_first_order",
    "mixing_matrix",
    "mixing_norms",
    "partial_sum_norm",
    "q_apply",
    "q_power_norm_exact",
    "q_power_norm_iterative",
    "TransportPlan",
    "WeightedHamming",
    "mcshane_extension",
    "min_cost_transport",
    "product_coupling_identity",
    "relative_entropy",
    "wasserstein",
    "GeneratorSpec",
    "GrowthEstimates",
    "RootedTree",
    "build_from_parent_array",
    "generate",
    "InequalityReport",
    "check_exp_moment",
    "check_mixing_corollary",
    "check_optimality_chain",
    "check_t1",
    "check_tail",
    "run_all_checks",
    "verification_corpus",
]
