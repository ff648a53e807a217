"""Degrees-of-freedom analysis of the two-user Gaussian MIMO broadcast
channel with common and private messages.

The package factors a channel pair into an unmatched parallel broadcast
channel, evaluates the dirty-paper-coding and zero-forcing rate formulas,
and computes the inner and outer slope regions as exact rational polytopes
so their equality can be checked, not approximated.
"""

__version__ = "0.1.0"

from .channel import (
    MimoBcChannel,
    ParallelChannel,
    SubchannelPartition,
    partition_common,
    transform_channel,
)
from .dofregion import (
    DofTriple,
    Polytope,
    contains,
    fm_eliminate,
    inner_region,
    inner_region_lifted,
    inner_region_merged,
    inner_region_reduced,
    inner_region_transfer,
    outer_region,
    outer_region_lifted,
    regions_equal,
    remove_redundant,
    same_feasible_set,
    vertices,
)
from .errors import (
    DecompositionError,
    MimodofError,
    NumericalError,
    ValidationError,
)
from .matdecomp import (
    GsvdFactors,
    gsvd,
    nullspace_basis,
    numerical_rank,
    qr,
    svd,
)
from .rates import (
    AllocationProfile,
    CovarianceProfile,
    DofParams,
    RateTriple,
    build_dpc_covariances,
    clog2,
    dpc_rates,
    dpc_rates_diagonal,
    equal_power_allocation,
    estimate_dof,
    feasible_params,
    parallel_region_bounds,
    sylvester_check,
    zf_rates,
    zf_subchannel_assignment,
)
from .verify import VerificationReport, run_verification

__all__ = [
    "__version__",
    "AllocationProfile",
    "CovarianceProfile",
    "DecompositionError",
    "DofParams",
    "DofTriple",
    "GsvdFactors",
    "MimoBcChannel",
    "MimodofError",
    "NumericalError",
    "ParallelChannel",
    "Polytope",
    "RateTriple",
    "SubchannelPartition",
    "ValidationError",
    "VerificationReport",
    "build_dpc_covariances",
    "clog2",
    "contains",
    "dpc_rates",
    "dpc_rates_diagonal",
    "equal_power_allocation",
    "estimate_dof",
    "feasible_params",
    "fm_eliminate",
    "gsvd",
    "inner_region",
    "inner_region_lifted",
    "inner_region_merged",
    "inner_region_reduced",
    "inner_region_transfer",
    "nullspace_basis",
    "numerical_rank",
    "outer_region",
    "outer_region_lifted",
    "parallel_region_bounds",
    "partition_common",
    "qr",
    "regions_equal",
    "remove_redundant",
    "run_verification",
    "same_feasible_set",
    "svd",
    "sylvester_check",
    "transform_channel",
    "vertices",
    "zf_rates",
    "zf_subchannel_assignment",
]
