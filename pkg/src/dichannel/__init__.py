"""Deterministic identification over colored Gaussian channels with ISI.

The package simulates the channel ``y = H x + z`` (Toeplitz ISI, colored
Gaussian noise), builds grid sphere-packing codebooks, runs the
Mahalanobis-threshold identification decoder, estimates its error rates by
Monte Carlo and evaluates the capacity bounds in the ``2^(n log n R)`` scale.
"""

__version__ = "0.1.0"

from .bounds import CapacityBounds, ConverseParams, capacity_bounds, converse_params, sweep
from .channel import (
    ChannelParams,
    Cir,
    CovarianceModel,
    ToeplitzOperator,
    convolve,
    identity_covariance,
    make_cir,
    sample_noise,
    synthesize_covariance,
    transmit,
    white_noise_params,
)
from .codebook import (
    Codebook,
    ConvolvedCodebook,
    PackingParams,
    build_grid_codebook,
    certify_min_distance,
    convolve_codebook,
    log_m_lower,
    log_m_upper,
    packing_params,
)
from .codec import DecodingOutcome, EventDecomposition, decoding_measure, encode, event_decomposition, identify
from .estimators import IdentificationDecoder, Whitener
from .montecarlo import (
    BoundSet,
    ErrorEstimate,
    ExperimentContext,
    build_context,
    chebyshev_bounds,
    estimate_type1,
    estimate_type2,
    verify_event_bounds,
)
from .spectral import mahalanobis_sq, matrix_power, rayleigh_quotient, whiten
