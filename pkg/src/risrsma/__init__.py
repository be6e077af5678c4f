"""risrsma: simulator and optimization toolkit for RIS-aided RSMA downlinks.

Builds multi-user MISO networks with optional reconfigurable intelligent
surfaces, optimizes precoders (WMMSE) jointly with RIS parameters
(quasi-Newton over unconstrained parameterizations) for rate-splitting,
SDMA, NOMA, and two-layer hierarchical rate-splitting, and sweeps two-user
achievable rate regions under perfect and imperfect CSI.
"""

from .alternating import (
    DesignOutput,
    draw_design_samples,
    RegionPoint,
    alternating_optimize,
    ergodic_rates,
    greedy_rates,
    pareto_frontier,
    rate_region,
    region_weight_vectors,
)
from .backend import load_kernels
from .channel import (
    ChannelSet,
    apply_csi_error,
    gen_channels,
    gen_direct_channels,
    gen_rician_channel,
    pathloss_amplitude,
)
from .config import (
    CsiErrorModel,
    FadingParams,
    Geometry,
    NetworkConfig,
    OptimizerSettings,
    db_to_linear,
    dbm_to_watt,
)
from .exceptions import ConfigError, UnsupportedConfigError
from .harness import load_config, run_experiment, summarize
from .kernels import BACKEND
from .rates import (
    Precoder,
    RateResult,
    compute_rates,
    per_ap_power,
    rate_hrs,
    rate_noma,
    rate_rs1,
    rate_sdma,
    totals,
)
from .ris import (
    RisArchitecture,
    RisMatrix,
    build_from_params,
    build_group_connected,
    build_single_connected,
    effective_channels,
    random_params,
    redeclare,
    single_to_group_params,
    validate,
)
from .risopt import optimize_ris, ris_objective
from .streams import StreamPlan, greedy_allocation, plan_for
from .wmmse import WmmseResult, wmmse_precoder

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelSet",
    "ConfigError",
    "CsiErrorModel",
    "DesignOutput",
    "FadingParams",
    "Geometry",
    "NetworkConfig",
    "OptimizerSettings",
    "Precoder",
    "RateResult",
    "RegionPoint",
    "RisArchitecture",
    "RisMatrix",
    "StreamPlan",
    "UnsupportedConfigError",
    "WmmseResult",
    "alternating_optimize",
    "apply_csi_error",
    "build_from_params",
    "build_group_connected",
    "build_single_connected",
    "compute_rates",
    "db_to_linear",
    "draw_design_samples",
    "dbm_to_watt",
    "effective_channels",
    "ergodic_rates",
    "gen_channels",
    "gen_direct_channels",
    "gen_rician_channel",
    "greedy_allocation",
    "greedy_rates",
    "load_config",
    "load_kernels",
    "optimize_ris",
    "pareto_frontier",
    "pathloss_amplitude",
    "per_ap_power",
    "plan_for",
    "random_params",
    "rate_hrs",
    "rate_noma",
    "rate_region",
    "rate_rs1",
    "rate_sdma",
    "redeclare",
    "region_weight_vectors",
    "ris_objective",
    "run_experiment",
    "single_to_group_params",
    "summarize",
    "totals",
    "validate",
    "wmmse_precoder",
]
