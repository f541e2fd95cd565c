"""Forward/backward Gaussian message passing along the channel state chain.

With Gaussian symbol priors the chain model is jointly Gaussian and the
factor graph is a tree, so the beliefs computed here are exact posteriors;
the test suite pins them against dense joint-Gaussian conditioning.

Forward messages are propagated in moment form by a scalar-innovation
Kalman filter (predictive covariances are structurally rank-deficient
early in the chain, which moment form handles exactly).  Backward messages
only exist in canonical form because the shift matrix is singular.  A
belief combines the filtered forward moments with the canonical backward
message without ever inverting a possibly-singular covariance:

    V_bel = V_f (I + W_b V_f)^-1
    m_bel = m_f + V_bel (xi_b - W_b m_f)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import backward_info, forward_kalman
from .channel import ChannelSpec
from .messages import VARIANCE_FLOOR, CanonicalGaussianVec, GaussianVec


def transition_operators(L: int) -> tuple[np.ndarray, np.ndarray]:
    """Shift matrix G and injection vector e of s_t = G s_{t-1} + e x_t."""
    return np.eye(L, k=1), np.eye(L)[:, L - 1].copy()


def observation_message(r_i: float, spec: ChannelSpec) -> CanonicalGaussianVec:
    """Rank-one canonical likelihood factor of a single received sample."""
    h = spec.h
    return CanonicalGaussianVec(np.outer(h, h) / spec.sigma2, h * (r_i / spec.sigma2))


def _padded_priors(
    prior_mean: np.ndarray,
    prior_var: np.ndarray,
    T: int,
    floor: float,
) -> tuple[np.ndarray, np.ndarray]:
    N = prior_mean.shape[0]
    mx = np.zeros(T)
    vx = np.full(T, floor)
    mx[:N] = prior_mean
    vx[:N] = prior_var
    return mx, vx


def forward_pass(
    r: np.ndarray,
    spec: ChannelSpec,
    prior_mean: np.ndarray,
    prior_var: np.ndarray,
    floor: float = VARIANCE_FLOOR,
):
    """Predictive and filtered forward moments for every chain state.

    Symbols beyond the frame are pinned near zero with floor variance.
    Returns (m_pred, V_pred, m_filt, V_filt), each indexed by chain time.
    """
    T = r.shape[0]
    mx, vx = _padded_priors(np.asarray(prior_mean, float), np.asarray(prior_var, float), T, floor)
    return forward_kalman(np.asarray(r, float), spec.h, spec.sigma2, mx, vx)


def backward_pass(
    r: np.ndarray,
    spec: ChannelSpec,
    prior_mean: np.ndarray,
    prior_var: np.ndarray,
    floor: float = VARIANCE_FLOOR,
):
    """Canonical backward messages (W_bwd, xi_bwd) for every chain state."""
    T = r.shape[0]
    mx, vx = _padded_priors(np.asarray(prior_mean, float), np.asarray(prior_var, float), T, floor)
    return backward_info(np.asarray(r, float), spec.h, spec.sigma2, mx, vx)


def combine_moment_canonical(
    m_f: np.ndarray,
    V_f: np.ndarray,
    W_c: np.ndarray,
    xi_c: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched product of moment-form and canonical Gaussians, in moment form.

    Accepts stacked arrays (..., L) / (..., L, L); valid for singular V_f.
    """
    L = m_f.shape[-1]
    A = np.eye(L) + W_c @ V_f
    V = V_f @ np.linalg.inv(A)
    V = 0.5 * (V + np.swapaxes(V, -1, -2))
    resid = xi_c - np.einsum("...ij,...j->...i", W_c, m_f)
    m = m_f + np.einsum("...ij,...j->...i", V, resid)
    return m, V


@dataclass
class StateChain:
    """All messages and beliefs of one equalization pass over a frame."""

    N: int
    L: int
    m_pred: np.ndarray
    V_pred: np.ndarray
    m_filt: np.ndarray
    V_filt: np.ndarray
    W_bwd: np.ndarray
    xi_bwd: np.ndarray
    belief_index: np.ndarray
    m_bel: np.ndarray
    V_bel: np.ndarray

    @property
    def T(self) -> int:
        return self.N + self.L - 1

    @property
    def beliefs_computed(self) -> int:
        return self.belief_index.size

    def belief_at(self, t: int) -> GaussianVec:
        pos = np.searchsorted(self.belief_index, t)
        if pos >= self.belief_index.size or self.belief_index[pos] != t:
            raise KeyError(f"no belief computed at chain index {t}")
        return GaussianVec(self.m_bel[pos], self.V_bel[pos])


def compute_beliefs(
    m_filt: np.ndarray,
    V_filt: np.ndarray,
    W_bwd: np.ndarray,
    xi_bwd: np.ndarray,
    indices: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """State beliefs at the given chain indices (default: all).

    The filtered forward moments already include the local observation, so
    the belief is their product with the backward message.
    """
    if indices is None:
        indices = np.arange(m_filt.shape[0])
    indices = np.asarray(indices, dtype=np.int64)
    m, V = combine_moment_canonical(
        m_filt[indices], V_filt[indices], W_bwd[indices], xi_bwd[indices]
    )
    return indices, m, V


def equalize(
    r: np.ndarray,
    spec: ChannelSpec,
    prior_mean: np.ndarray,
    prior_var: np.ndarray,
    belief_indices: np.ndarray | None = None,
    floor: float = VARIANCE_FLOOR,
) -> StateChain:
    """Full equalization sweep: forward, backward, and beliefs."""
    r = np.asarray(r, dtype=float)
    N = np.asarray(prior_mean).shape[0]
    if r.shape[0] != N + spec.L - 1:
        raise ValueError(f"need N+L-1 = {N + spec.L - 1} samples, got {r.shape[0]}")
    m_pred, V_pred, m_filt, V_filt = forward_pass(r, spec, prior_mean, prior_var, floor)
    W_bwd, xi_bwd = backward_pass(r, spec, prior_mean, prior_var, floor)
    idx, m_bel, V_bel = compute_beliefs(m_filt, V_filt, W_bwd, xi_bwd, belief_indices)
    return StateChain(
        N=N,
        L=spec.L,
        m_pred=m_pred,
        V_pred=V_pred,
        m_filt=m_filt,
        V_filt=V_filt,
        W_bwd=W_bwd,
        xi_bwd=xi_bwd,
        belief_index=idx,
        m_bel=m_bel,
        V_bel=V_bel,
    )


def window_marginal(belief: GaussianVec, P: np.ndarray) -> GaussianVec:
    """Marginal of a Gaussian belief onto selected coordinates: (Pm, PVP^T)."""
    return GaussianVec(P @ belief.mean, P @ belief.cov @ P.T)


def belief_grid_indices(N: int, L: int, M: int, k_bar: int) -> np.ndarray:
    """Chain indices of the belief-reuse grid serving symbols 0..N-1.

    With a contiguous strong-interferer set, one belief serves L-M+1
    consecutive symbols, so beliefs are needed only every L-M+1 states.
    """
    stride = L - M + 1
    g_max = -(-(N - 1) // stride)  # ceil
    return k_bar + stride * np.arange(g_max + 1)


def serving_belief_index(i: np.ndarray, L: int, M: int, k_bar: int) -> np.ndarray:
    """Grid chain index serving each symbol index under belief reuse."""
    stride = L - M + 1
    g = -(-i // stride)
    return k_bar + stride * g
