"""Known LTI ISI channel with AWGN and its interference structure.

The impulse response vector is stored in the receive-window order
h = [h_{L-1}, ..., h_0], so that a received sample is h @ s with
s = [x_{i-L+1}, ..., x_i] the sliding window of the last L symbols.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidRhoError(ValueError):
    """rho is too small for this channel: 1 + 2*k_bar exceeds L."""


@dataclass(frozen=True)
class ChannelSpec:
    h: np.ndarray
    sigma2: float

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.ndim != 1 or h.size < 1:
            raise ValueError("h must be a nonempty 1-d vector")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "h", h)

    @property
    def L(self) -> int:
        return self.h.size

    @property
    def impulse(self) -> np.ndarray:
        """Taps in impulse order [h_0, ..., h_{L-1}]."""
        return self.h[::-1]


PROAKIS_C = np.array([0.227, 0.460, 0.668, 0.460, 0.227])


def apply_channel(x: np.ndarray, spec: ChannelSpec, noise_seed) -> np.ndarray:
    """Convolve a symbol frame with the channel and add seeded white noise.

    Returns N + L - 1 samples; symbols outside the frame are zero.
    ``noise_seed`` may be anything accepted by numpy's default_rng, or an
    existing Generator.
    """
    x = np.asarray(x, dtype=float)
    clean = np.convolve(x, spec.impulse)
    rng = noise_seed if isinstance(noise_seed, np.random.Generator) else np.random.default_rng(noise_seed)
    return clean + rng.normal(0.0, np.sqrt(spec.sigma2), clean.size)


def autocorrelation(h: np.ndarray) -> np.ndarray:
    """Tap autocorrelation q_k for k = -(L-1)..L-1 (length 2L-1, lag 0 at index L-1)."""
    h = np.asarray(h, dtype=float)
    return np.correlate(h, h, mode="full")


@dataclass(frozen=True)
class InterferenceProfile:
    """Strong-interferer structure of a channel at threshold rho.

    k_rho holds the lags whose autocorrelation magnitude exceeds rho * q_0,
    sorted ascending; M = len(k_rho); k_bar = max(k_rho).  The profile is
    usable for windowed marginals only when 1 + 2*k_bar <= L.
    """

    q: np.ndarray
    lags: np.ndarray
    rho: float
    k_rho: np.ndarray
    L: int

    @property
    def M(self) -> int:
        return self.k_rho.size

    @property
    def k_bar(self) -> int:
        return int(self.k_rho.max())

    @property
    def q0(self) -> float:
        return float(self.q[self.L - 1])

    def q_at(self, k: int) -> float:
        return float(self.q[self.L - 1 + k])

    @property
    def contiguous(self) -> bool:
        kb = self.k_bar
        return np.array_equal(self.k_rho, np.arange(-kb, kb + 1))

    def window_bounds(self, i: int) -> tuple[int, int]:
        """Admissible belief indices serving symbol i: i + k_bar <= i' <= i + L-1 - k_bar."""
        return i + self.k_bar, i + self.L - 1 - self.k_bar


def strong_interferer_set(h: np.ndarray, rho: float) -> InterferenceProfile:
    """Lag set K_rho = {k: |q_k| > rho*q_0} and its window-validity check."""
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    h = np.asarray(h, dtype=float)
    L = h.size
    q = autocorrelation(h)
    lags = np.arange(-(L - 1), L)
    k_rho = lags[np.abs(q) > rho * q[L - 1]]
    k_bar = int(k_rho.max())
    if 1 + 2 * k_bar > L:
        raise InvalidRhoError(
            f"rho={rho} gives k_bar={k_bar}; need 1 + 2*k_bar <= L = {L}"
        )
    return InterferenceProfile(q=q, lags=lags, rho=rho, k_rho=k_rho, L=L)


def rho_for_target_m(h: np.ndarray, m_target: int) -> float:
    """Threshold rho realizing a requested strong-interferer count M.

    Candidate thresholds are midpoints between consecutive distinct
    |q_k|/q_0 levels; raises if no candidate realizes the target (M values
    come in the sizes allowed by the channel's autocorrelation ties).
    """
    h = np.asarray(h, dtype=float)
    L = h.size
    q = autocorrelation(h)
    ratios = np.abs(q) / q[L - 1]
    levels = np.unique(ratios)  # ascending, last element is 1 (lag 0)
    candidates = [0.0] + [
        0.5 * (levels[i] + levels[i + 1]) for i in range(levels.size - 1)
    ]
    for rho in sorted(candidates, reverse=True):
        count = int(np.sum(ratios > rho))
        if count == m_target:
            if 1 + 2 * int(np.max(np.arange(-(L - 1), L)[ratios > rho])) <= L:
                return float(rho)
    raise ValueError(f"no rho achieves M={m_target} for this channel")


def selection_matrix(profile: InterferenceProfile, i: int, i_prime: int, L: int) -> np.ndarray:
    """M x L 0/1 matrix extracting the strong-interferer window from state i'.

    Row r selects symbol x_{i + k_r} (k_r the r-th element of sorted k_rho)
    out of s_{i'} = [x_{i'-L+1}, ..., x_{i'}].
    """
    lo, hi = profile.window_bounds(i)
    if not lo <= i_prime <= hi:
        raise ValueError(f"i'={i_prime} outside admissible window [{lo}, {hi}] for i={i}")
    P = np.zeros((profile.M, L))
    cols = window_columns(profile.k_rho, i, i_prime, L)
    P[np.arange(profile.M), cols] = 1.0
    return P


def window_columns(k_rho: np.ndarray, i: int, i_prime: int, L: int) -> np.ndarray:
    """Column indices of the symbols x_{i+k}, k in k_rho, inside s_{i'}."""
    return i + k_rho - (i_prime - L + 1)
