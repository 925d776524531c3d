"""Online sparse plus low-rank decomposition of compressively sensed streams."""

from .errors import ConsistencyError, ContainerError, InvalidInputError, NumericFailureError
from .linalg import SvdFactors, full_svd, inc_svd, soft_threshold, svt
from .pcp import PcpResult, pcp_decompose
from .prox import PriorSet, WeightState, eval_g, prox_weighted_multi_l1
from .solver import (
    DecompositionResult,
    SolverConfig,
    StreamState,
    decompose_baseline_corpca,
    decompose_frame,
    eval_objective,
    update_priors,
)
from .weights import ClusterPartition, kmeans_1d, refresh_weights, update_beta, update_gamma, update_W

__all__ = [
    "ClusterPartition", "ConsistencyError", "ContainerError", "DecompositionResult",
    "InvalidInputError", "NumericFailureError", "PcpResult", "PriorSet", "SolverConfig",
    "StreamState", "SvdFactors", "WeightState", "decompose_baseline_corpca", "decompose_frame",
    "eval_g", "eval_objective", "full_svd", "inc_svd", "kmeans_1d", "pcp_decompose",
    "prox_weighted_multi_l1", "refresh_weights", "soft_threshold", "svt", "update_W",
    "update_beta", "update_gamma", "update_priors",
]
