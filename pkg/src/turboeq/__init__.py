"""Turbo equalization over known ISI channels.

The receiver family exchanges messages between a Gaussian chain equalizer
and a BCJR demodulator-decoder; variants differ in how discrete decoder
messages become Gaussian priors (direct moment matching vs. the EP rule)
and in how equalizer beliefs become discrete messages (scalar Gaussian
restriction vs. a partial Gaussian approximation over the strongly
interfering window).
"""

from .channel import (
    PROAKIS_C,
    ChannelSpec,
    InterferenceProfile,
    InvalidRhoError,
    apply_channel,
    autocorrelation,
    rho_for_target_m,
    selection_matrix,
    strong_interferer_set,
)
from .decoder import Trellis, bcjr_extrinsic, decide_bits, demod_bridge, mod_bridge
from .equalizer import StateChain, equalize, observation_message, window_marginal
from .exchange import (
    PgaFactor,
    direct_convert,
    ep_convert,
    ga_message,
    pga_factor,
    pga_message,
)
from .messages import (
    CanonicalGaussianVec,
    DiscreteSymbolPmf,
    Gaussian1D,
    GaussianVec,
    canonical_combine,
    canonical_to_moment,
    gaussian_divide,
    gaussian_multiply,
    pmf_moments,
    project_to_gaussian,
)
from .runner import FrameTrace, TurboConfig, Variant, run_turbo
from .sim import (
    BerRecord,
    ExperimentConfig,
    awgn_reference,
    emit_csv,
    paper_preset,
    run_experiment,
    sigma2_from_ebn0,
)
from .txchain import (
    ConvCodeSpec,
    InterleaverSpec,
    ModulationMap,
    Termination,
    bpsk_map,
    encode,
    identity_interleaver,
    map_symbols,
    pam4_gray_map,
    random_interleaver,
)

__version__ = "0.1.0"
