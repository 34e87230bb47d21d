"""Diversity-multiplexing tradeoff of the MIMO Z interference channel.

Exact piecewise-linear programs and closed forms for the two-user DMT with
and without transmitter side information, an independent brute-force lattice
oracle, and Monte-Carlo outage validation.
"""

from .closedform import (
    DmtPoint,
    DmtQuery,
    compose_dmt,
    fcsit_asymmetric_sum,
    fcsit_femto_sum,
    fcsit_symmetric_sum,
    full_dmt,
    iml_asymmetric_sum,
    iml_symmetric_sum,
    nocsit_threshold_antennas,
    nocsit_threshold_symmetric,
    sum_exponent,
)
from .exponents import (
    AntennaConfig,
    ExponentVariables,
    MultiplexingGainPair,
    OutsideSupportError,
    ScalingExponents,
    build_fcsit_presimplified_program,
    build_fcsit_sum_program,
    build_iml_sum_program,
    eval_E1,
    eval_E2,
    f_w3_exponent,
)
from .montecarlo import (
    ChannelRealization,
    InsufficientOutageError,
    OutageEstimate,
    SnrPoint,
    draw_realization,
    estimate_outage_slope,
    mutual_info_iml,
    mutual_info_iml_sum_unsplit,
    mutual_info_lower,
    mutual_info_upper,
)
from .optengine import (
    BudgetConstraint,
    PlProgram,
    PlSolution,
    oracle_gap_bound,
    solve_grid_oracle,
    solve_lp,
)
from .ptp import (
    DmtCurve,
    DomainError,
    PtpDmt,
    ptp_dmt,
    scaled_ptp_dmt,
    single_user_exponent,
)

__version__ = "0.1.0"

__all__ = [
    "AntennaConfig",
    "BudgetConstraint",
    "ChannelRealization",
    "DmtCurve",
    "DmtPoint",
    "DmtQuery",
    "DomainError",
    "ExponentVariables",
    "InsufficientOutageError",
    "MultiplexingGainPair",
    "OutageEstimate",
    "OutsideSupportError",
    "PlProgram",
    "PlSolution",
    "PtpDmt",
    "ScalingExponents",
    "SnrPoint",
    "build_fcsit_presimplified_program",
    "build_fcsit_sum_program",
    "build_iml_sum_program",
    "compose_dmt",
    "draw_realization",
    "estimate_outage_slope",
    "eval_E1",
    "eval_E2",
    "f_w3_exponent",
    "fcsit_asymmetric_sum",
    "fcsit_femto_sum",
    "fcsit_symmetric_sum",
    "full_dmt",
    "iml_asymmetric_sum",
    "iml_symmetric_sum",
    "mutual_info_iml",
    "mutual_info_iml_sum_unsplit",
    "mutual_info_lower",
    "mutual_info_upper",
    "nocsit_threshold_antennas",
    "nocsit_threshold_symmetric",
    "oracle_gap_bound",
    "ptp_dmt",
    "scaled_ptp_dmt",
    "single_user_exponent",
    "solve_grid_oracle",
    "solve_lp",
    "sum_exponent",
]
