"""Per-frame turbo iterations.

One iteration equalizes the channel states under the current Gaussian
symbol priors, converts the equalizer beliefs into discrete messages for
the demodulator-decoder (Gaussian restriction or partial-Gaussian
enumeration depending on the variant), runs the BCJR decoder, and converts
the decoder extrinsics back into Gaussian priors (direct moment matching
or the EP rule).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSpec, InterferenceProfile, rho_for_target_m, strong_interferer_set, window_columns
from .decoder import Trellis, bcjr_extrinsic, decide_bits, demod_bridge, mod_bridge
from .equalizer import equalize, serving_belief_index
from .exchange import (
    WINDOW_COV_FLOOR,
    direct_convert_arrays,
    ep_convert_arrays,
    ga_log_weights,
    pga_factors_arrays,
    pga_log_weights_arrays,
)
from .messages import PRECISION_JITTER, VARIANCE_CAP, VARIANCE_FLOOR, gaussian_divide_arrays
from .txchain import ConvCodeSpec, InterleaverSpec, ModulationMap


class Variant(enum.Enum):
    BP_GA = "BP_GA"
    BP_EP = "BP_EP"
    BP_PGA = "BP_PGA"
    BP_EP_PGA = "BP_EP_PGA"

    @property
    def uses_ep(self) -> bool:
        """Decoder-to-equalizer conversion by the EP rule (else direct)."""
        return self in (Variant.BP_EP, Variant.BP_EP_PGA)

    @property
    def uses_pga(self) -> bool:
        """Equalizer-to-decoder messages by partial Gaussian approximation."""
        return self in (Variant.BP_PGA, Variant.BP_EP_PGA)


@dataclass(frozen=True)
class TurboConfig:
    variant: Variant
    iterations: int = 30
    rho: float | None = None
    m_target: int | None = 3
    belief_reuse: bool = False
    i_prime_offset: int | None = None
    stall_detect: bool = False  # stop once decisions are stable (off: fixed count)
    variance_floor: float = VARIANCE_FLOOR
    variance_cap: float = VARIANCE_CAP
    jitter: float = PRECISION_JITTER

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.rho is None and self.m_target is None:
            raise ValueError("one of rho or m_target is required")

    def resolve_profile(self, h: np.ndarray) -> InterferenceProfile:
        """Strong-interferer profile; the non-PGA variants force M = 1."""
        if not self.variant.uses_pga:
            return strong_interferer_set(h, rho_for_target_m(h, 1))
        rho = self.rho if self.rho is not None else rho_for_target_m(h, self.m_target)
        return strong_interferer_set(h, rho)


@dataclass
class FrameTrace:
    """Per-iteration diagnostics of one turbo run."""

    ber: list[float] = field(default_factory=list)
    bit_errors: list[int] = field(default_factory=list)
    ep_fallbacks: list[int] = field(default_factory=list)
    mean_belief_variance: list[float] = field(default_factory=list)
    beliefs_computed: list[int] = field(default_factory=list)
    messages: list[dict] = field(default_factory=list)


def _pga_edge_log_weights(
    i: int,
    belief_mean: np.ndarray,
    belief_cov: np.ndarray,
    i_prime: int,
    profile: InterferenceProfile,
    log_n: np.ndarray,
    g_mean: np.ndarray,
    g_var: np.ndarray,
    alphabet: np.ndarray,
    cap: float,
) -> np.ndarray:
    """PGA message near a frame edge: out-of-frame window entries are dropped.

    Symbols outside the frame are pinned to zero by the equalization pass
    itself, so the window shrinks to the in-frame lags (which always
    include lag 0).
    """
    N = log_n.shape[0]
    lags = profile.k_rho[(i + profile.k_rho >= 0) & (i + profile.k_rho <= N - 1)]
    cols = window_columns(lags, i, i_prime, profile.L)
    sub_m = belief_mean[cols]
    sub_V = belief_cov[np.ix_(cols, cols)]
    kappa = i + lags
    W_e, xi_e = pga_factors_arrays(
        sub_m[None], sub_V[None], g_mean[kappa][None], g_var[kappa][None], cap
    )
    self_pos = int(np.flatnonzero(lags == 0)[0])
    logn = log_n[kappa][None]
    return pga_log_weights_arrays(W_e, xi_e, logn, self_pos, alphabet)[0]


def run_turbo(
    r: np.ndarray,
    chan: ChannelSpec,
    code: ConvCodeSpec,
    modmap: ModulationMap,
    pi: InterleaverSpec,
    cfg: TurboConfig,
    truth_bits: np.ndarray | None = None,
    record_messages: bool = False,
) -> tuple[np.ndarray, FrameTrace]:
    """Run the full turbo schedule on one received frame.

    Returns the hard information-bit decisions after the final decoding
    pass together with the per-iteration trace.
    """
    r = np.asarray(r, dtype=float)
    alphabet = modmap.alphabet
    Q = alphabet.size
    L = chan.L
    N = pi.size // modmap.bits_per_symbol
    if r.shape[0] != N + L - 1:
        raise ValueError(f"expected {N + L - 1} received samples, got {r.shape[0]}")
    trellis = Trellis.from_code(code)
    k_info = pi.size // trellis.n_out - trellis.tail_bits

    profile = cfg.resolve_profile(chan.h)
    if cfg.belief_reuse and not profile.contiguous:
        raise ValueError("belief reuse requires a contiguous strong-interferer lag set")
    k_bar = profile.k_bar
    i_all = np.arange(N)
    if cfg.belief_reuse:
        ip = serving_belief_index(i_all, L, profile.M, k_bar)
    else:
        offset = k_bar if cfg.i_prime_offset is None else cfg.i_prime_offset
        lo, hi = k_bar, L - 1 - k_bar
        if not lo <= offset <= hi:
            raise ValueError(f"i_prime offset {offset} outside admissible range [{lo}, {hi}]")
        ip = i_all + offset
    belief_idx = np.unique(ip)
    cols = window_columns(profile.k_rho[None, :], i_all[:, None], ip[:, None], L)
    self_pos = int(np.flatnonzero(profile.k_rho == 0)[0])
    interior = (i_all + profile.k_rho.min() >= 0) & (i_all + profile.k_rho.max() <= N - 1)
    edges = np.flatnonzero(~interior)

    # S1: uniform discrete messages, unit Gaussian priors
    log_n = np.full((N, Q), -np.log(Q))
    g_mean = np.zeros(N)
    g_var = np.ones(N)

    trace = FrameTrace()
    bits_hat = np.zeros(k_info, dtype=np.int64)
    stable_count = 0
    for _ in range(cfg.iterations):
        # S2: Gaussian equalization under the current priors
        chain = equalize(r, chan, g_mean, g_var, belief_indices=belief_idx, floor=cfg.variance_floor)
        rows = np.searchsorted(chain.belief_index, ip)
        win_m = chain.m_bel[rows[:, None], cols]
        win_V = chain.V_bel[rows[:, None, None], cols[:, :, None], cols[:, None, :]]
        bel_m = win_m[:, self_pos]
        # Guard only against exact zero: belief variances legitimately fall
        # below the message floor when the priors themselves sit at it, and
        # the extrinsic precision is their difference.
        bel_v = np.maximum(win_V[:, self_pos, self_pos], WINDOW_COV_FLOOR)

        # S3: equalizer-to-decoder messages
        if profile.M == 1:
            ext_logp = ga_log_weights(bel_m, bel_v, g_mean, g_var, alphabet, cfg.variance_cap)
        else:
            kappa = i_all[:, None] + profile.k_rho[None, :]
            kap_in = np.clip(kappa, 0, N - 1)
            W_e, xi_e = pga_factors_arrays(
                win_m[interior],
                win_V[interior],
                g_mean[kap_in][interior],
                g_var[kap_in][interior],
                cfg.variance_cap,
            )
            logn_win = log_n[kap_in]
            ext_logp = np.empty((N, Q))
            ext_logp[interior] = pga_log_weights_arrays(
                W_e, xi_e, logn_win[interior], self_pos, alphabet
            )
            for i in edges:
                row = rows[i]
                ext_logp[i] = _pga_edge_log_weights(
                    int(i),
                    chain.m_bel[row],
                    chain.V_bel[row],
                    int(ip[i]),
                    profile,
                    log_n,
                    g_mean,
                    g_var,
                    alphabet,
                    cfg.variance_cap,
                )

        # S4: demodulation-decoding
        coded_logp = demod_bridge(ext_logp, modmap, pi)
        ext_bits, post_u = bcjr_extrinsic(coded_logp, trellis)
        prev_hat = bits_hat
        bits_hat = decide_bits(post_u, k_info)
        log_n = mod_bridge(ext_bits, modmap, pi)

        # S5: decoder-to-equalizer conversion
        fallbacks = 0
        if cfg.variant.uses_ep:
            cav_m, cav_v, fb_cav = gaussian_divide_arrays(
                bel_m, bel_v, g_mean, g_var, cfg.variance_floor, cfg.variance_cap
            )
            g_mean, g_var, fb_conv = ep_convert_arrays(
                log_n, alphabet, cav_m, cav_v, cfg.variance_floor, cfg.variance_cap
            )
            fallbacks = int(fb_cav.sum() + fb_conv.sum())
        else:
            g_mean, g_var = direct_convert_arrays(
                log_n, alphabet, cfg.variance_floor, cfg.variance_cap
            )

        if truth_bits is not None:
            errs = int(np.sum(bits_hat != truth_bits))
            trace.bit_errors.append(errs)
            trace.ber.append(errs / k_info)
        trace.ep_fallbacks.append(fallbacks)
        trace.mean_belief_variance.append(float(bel_v.mean()))
        trace.beliefs_computed.append(chain.beliefs_computed)
        if record_messages:
            trace.messages.append(
                {
                    "ext_logp": ext_logp.copy(),
                    "log_n": log_n.copy(),
                    "g_mean": g_mean.copy(),
                    "g_var": g_var.copy(),
                }
            )
        if cfg.stall_detect:
            stable_count = stable_count + 1 if np.array_equal(bits_hat, prev_hat) else 0
            if stable_count >= 2:
                break
    return bits_hat, trace
