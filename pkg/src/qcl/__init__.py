"""Qubit channel geometry: exact and Monte-Carlo volumes, uniform samplers,
and statistics of the trace-distance contraction coefficient."""

__version__ = "0.1.0"

from .channel import (
    ChannelBatch,
    ChannelParams,
    ClassicalChannel,
    PauliAffineMap,
    SpaceKind,
    apply_channel,
    choi_to_params,
    is_channel,
    is_psd,
    params_to_choi,
    pauli_rep,
    reorder_from_A,
    reorder_to_A,
    underlying_classical,
)
from .contraction import classical_dobrushin, construct_channel_with_eta, eta_batch, eta_bounds, eta_tr
from .errors import DomainError, IterationCapError, QclError, ShapeError, UsageError
from .montecarlo import VolumeEstimate, estimate_fiber_volume, estimate_total_volume, oracle_sample_fiber
from .rng import RngStream
from .sampler import GlobalMode, SamplerMode, sample_fiber, sample_fiber_literal, sample_global
from .stats import ecdf, eta_cdf_experiment, eta_profile, greenwood_band, infimum_estimate, mode_estimate
from .volume import choi_fiber_volume, choi_total_volume, fiber_volume, total_volume
