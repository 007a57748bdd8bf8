"""Outage probability of OTFS links under a rate-distortion target."""

from .bound_verify import (
    BetaSequence,
    UnsupportedStructureError,
    XiDiagonal,
    beta_sequence,
    omega_of,
    verify_prop1,
    verify_prop2,
    xi_of,
)
from .dd_channel import (
    ChannelRealization,
    DDMatrix,
    GridParams,
    PathSpec,
    apply_channel,
    build_dd_matrix,
    dense_dd_matrix,
    doppler_power,
    permutation_power,
    sample_realization,
)
from .experiment import ConfigError, ExperimentConfig, run_sweep, verify_report
from .outage import (
    OutageEstimate,
    chi_square_tail_sum,
    lower_bound,
    monte_carlo_outage,
    outage_indicator,
    wilson_interval,
)
from .rate_distortion import (
    LossyTarget,
    binary_entropy,
    inv_binary_entropy,
    rate_from_distortion,
    snr_threshold,
)
from .spectral import GramDecomposition, capacity, gram_components, log_det_psd

__version__ = "0.1.0"
