"""Messages crossing the equalizer / demodulator-decoder boundary.

Decoder-to-equalizer conversions turn discrete symbol pmfs into scalar
Gaussians, either by direct moment matching or by the EP rule (moment
matching of the tilted belief followed by division by the incoming
Gaussian).  Equalizer-to-decoder messages restrict a Gaussian extrinsic to
the alphabet, or, in the partial-Gaussian variants, sum an M-dimensional
Gaussian window factor against the neighbors' discrete messages.

The window factor obtained by dividing the windowed belief by the product
of the Gaussian symbol priors can have an indefinite "covariance"; it is
therefore carried in canonical form (precision, potential), which the
enumeration only ever evaluates as a quadratic form.  Moment form is
derived on demand and only exists when the precision is positive definite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .messages import (
    VARIANCE_CAP,
    VARIANCE_FLOOR,
    DiscreteSymbolPmf,
    Gaussian1D,
    GaussianVec,
    gaussian_divide_arrays,
)

# Minimum eigenvalue enforced on a window covariance before inversion.  It
# must sit well below VARIANCE_FLOOR: when the decoder is certain the window
# covariance legitimately reaches the floor, and a larger bump would corrupt
# the precision difference inv(V_window) - inv(V_prior).
WINDOW_COV_FLOOR = 1e-13


def log_normalize(logw: np.ndarray, axis: int = -1) -> np.ndarray:
    """Normalize log weights so the weights sum to one along an axis."""
    m = np.max(logw, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    z = m + np.log(np.sum(np.exp(logw - m), axis=axis, keepdims=True))
    return logw - z


def log_pmf(weights: np.ndarray) -> np.ndarray:
    """Elementwise log of pmf weights; zero weights map to -inf silently."""
    with np.errstate(divide="ignore"):
        return np.log(weights)


def _precision_of(var: np.ndarray, cap: float) -> np.ndarray:
    """1/var with the non-informative value (var >= cap) mapped to zero."""
    return np.where(var >= cap, 0.0, 1.0 / var)


def direct_convert_arrays(
    log_pmfs: np.ndarray,
    alphabet: np.ndarray,
    floor: float = VARIANCE_FLOOR,
    cap: float = VARIANCE_CAP,
) -> tuple[np.ndarray, np.ndarray]:
    """Moment-match rows of log pmfs to Gaussians with clamped variance."""
    w = np.exp(log_normalize(log_pmfs))
    mean = w @ alphabet
    var = w @ alphabet**2 - mean**2
    return mean, np.clip(var, floor, cap)


def direct_convert(
    p: DiscreteSymbolPmf,
    floor: float = VARIANCE_FLOOR,
    cap: float = VARIANCE_CAP,
) -> Gaussian1D:
    """Gaussian with the pmf's first two moments."""
    m, v = direct_convert_arrays(log_pmf(p.weights[None, :]), p.alphabet, floor, cap)
    return Gaussian1D(float(m[0]), float(v[0]))


def ep_convert_arrays(
    log_pmfs: np.ndarray,
    alphabet: np.ndarray,
    in_mean: np.ndarray,
    in_var: np.ndarray,
    floor: float = VARIANCE_FLOOR,
    cap: float = VARIANCE_CAP,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """EP conversion of discrete messages against incoming Gaussians.

    Tilts each pmf by the incoming Gaussian restricted to the alphabet,
    moment-matches the tilted belief, and divides out the incoming message.
    Returns (means, variances, fallback_mask); the mask marks symbols where
    the division fell back to the non-informative message.
    """
    prec = _precision_of(in_var, cap)
    tilt = log_pmfs + (-0.5 * np.outer(prec, alphabet**2) + np.outer(prec * in_mean, alphabet))
    bel_m, bel_v = direct_convert_arrays(tilt, alphabet, floor, cap)
    return gaussian_divide_arrays(bel_m, bel_v, in_mean, in_var, floor, cap)


def ep_convert(
    discrete: DiscreteSymbolPmf,
    incoming: Gaussian1D,
    floor: float = VARIANCE_FLOOR,
    cap: float = VARIANCE_CAP,
) -> Gaussian1D:
    """Scalar EP conversion (tilted moment matching, then Gaussian division)."""
    m, v, _ = ep_convert_arrays(
        log_pmf(discrete.weights[None, :]),
        discrete.alphabet,
        np.array([incoming.mean]),
        np.array([incoming.var]),
        floor,
        cap,
    )
    return Gaussian1D(float(m[0]), float(v[0]))


def ga_log_weights(
    bel_mean: np.ndarray,
    bel_var: np.ndarray,
    in_mean: np.ndarray,
    in_var: np.ndarray,
    alphabet: np.ndarray,
    cap: float = VARIANCE_CAP,
) -> np.ndarray:
    """Restriction of the scalar Gaussian extrinsic belief/incoming to the alphabet.

    The extrinsic is formed in canonical parameters (precision difference,
    potential difference) and evaluated as a quadratic form, so a
    non-positive-definite quotient needs no special casing.
    """
    w = _precision_of(bel_var, cap) - _precision_of(in_var, cap)
    xi = bel_mean * _precision_of(bel_var, cap) - in_mean * _precision_of(in_var, cap)
    logw = -0.5 * np.outer(w, alphabet**2) + np.outer(xi, alphabet)
    return log_normalize(logw)


def ga_message(
    belief_x: Gaussian1D,
    incoming: Gaussian1D,
    alphabet: np.ndarray,
    cap: float = VARIANCE_CAP,
) -> DiscreteSymbolPmf:
    """Discrete equalizer-to-decoder message of the Gaussian-approximation variants."""
    logw = ga_log_weights(
        np.array([belief_x.mean]),
        np.array([belief_x.var]),
        np.array([incoming.mean]),
        np.array([incoming.var]),
        np.asarray(alphabet, float),
        cap,
    )
    return DiscreteSymbolPmf.from_log_weights(alphabet, logw[0])


@dataclass(frozen=True)
class PgaFactor:
    """Window factor belief/(product of Gaussian priors) in canonical form."""

    precision: np.ndarray
    potential: np.ndarray

    @property
    def dim(self) -> int:
        return self.potential.shape[0]

    @property
    def indefinite(self) -> bool:
        return bool(np.linalg.eigvalsh(0.5 * (self.precision + self.precision.T)).min() <= 0)

    def moment_form(self) -> GaussianVec:
        """(m_e, V_e); only defined when the factor is a proper density."""
        if self.indefinite:
            raise ValueError("indefinite factor has no moment form")
        V = np.linalg.inv(self.precision)
        V = 0.5 * (V + V.T)
        return GaussianVec(V @ self.potential, V)


def pga_factors_arrays(
    win_mean: np.ndarray,
    win_cov: np.ndarray,
    prior_mean: np.ndarray,
    prior_var: np.ndarray,
    cap: float = VARIANCE_CAP,
    jitter: float = WINDOW_COV_FLOOR,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched canonical window factors.

    win_mean (n, M), win_cov (n, M, M) are windowed belief marginals;
    prior_mean/prior_var (n, M) hold the Gaussian symbol priors of the
    window entries.  Returns stacked (precision, potential).
    """
    n, M = win_mean.shape
    eigmin = np.linalg.eigvalsh(win_cov)[..., 0]
    bump = np.maximum(jitter - eigmin, 0.0)
    cov = win_cov + bump[:, None, None] * np.eye(M)
    Wb = np.linalg.inv(cov)
    Wb = 0.5 * (Wb + np.swapaxes(Wb, -1, -2))
    prior_prec = _precision_of(prior_var, cap)
    W_e = Wb.copy()
    idx = np.arange(M)
    W_e[:, idx, idx] -= prior_prec
    xi_e = np.einsum("nij,nj->ni", Wb, win_mean) - prior_prec * prior_mean
    return W_e, xi_e


def pga_factor(
    window: GaussianVec,
    prior_means,
    prior_vars,
    cap: float = VARIANCE_CAP,
    jitter: float = WINDOW_COV_FLOOR,
) -> PgaFactor:
    """Canonical window factor from one windowed belief and its priors."""
    W, xi = pga_factors_arrays(
        window.mean[None, :],
        window.cov[None, :, :],
        np.asarray(prior_means, float)[None, :],
        np.asarray(prior_vars, float)[None, :],
        cap,
        jitter,
    )
    return PgaFactor(W[0], xi[0])


def _symbol_grid(alphabet: np.ndarray, M: int) -> tuple[np.ndarray, np.ndarray]:
    """All |X|^M window configurations (values and alphabet indices)."""
    idx = np.array(list(itertools.product(range(alphabet.size), repeat=M)), dtype=np.int64)
    return alphabet[idx], idx


def pga_log_weights_arrays(
    W_e: np.ndarray,
    xi_e: np.ndarray,
    neighbor_log_pmfs: np.ndarray,
    self_pos: int,
    alphabet: np.ndarray,
) -> np.ndarray:
    """Batched PGA message enumeration in the log domain.

    W_e (n, M, M), xi_e (n, M): canonical window factors.
    neighbor_log_pmfs (n, M, Q): discrete messages of the window entries;
    the row at self_pos is ignored.  Sums the factor against every
    configuration of the other M-1 entries and returns normalized log pmfs
    (n, Q) for the target symbol.
    """
    n, M = xi_e.shape
    Q = alphabet.size
    Z, Zi = _symbol_grid(np.asarray(alphabet, float), M)
    quad = -0.5 * np.einsum("gi,nij,gj->ng", Z, W_e, Z) + xi_e @ Z.T
    for p in range(M):
        if p == self_pos:
            continue
        quad += neighbor_log_pmfs[:, p, :][:, Zi[:, p]]
    out = np.full((n, Q), -np.inf)
    for a in range(Q):
        sel = quad[:, Zi[:, self_pos] == a]
        m = sel.max(axis=1)
        finite = m > -np.inf
        m0 = np.where(finite, m, 0.0)
        s = np.exp(sel - m0[:, None]).sum(axis=1)
        out[:, a] = np.where(finite, m0 + np.log(np.where(finite, s, 1.0)), -np.inf)
    return log_normalize(out)


def pga_message(
    factor: PgaFactor,
    neighbor_pmfs,
    self_pos: int,
    alphabet,
) -> DiscreteSymbolPmf:
    """PGA message for one symbol.

    neighbor_pmfs lists the discrete messages of the other window entries
    in window order (length M - 1, the self position skipped).
    """
    alphabet = np.asarray(alphabet, float)
    M = factor.dim
    neighbors = list(neighbor_pmfs)
    if len(neighbors) != M - 1:
        raise ValueError(f"expected {M - 1} neighbor pmfs, got {len(neighbors)}")
    logn = np.zeros((1, M, alphabet.size))
    j = 0
    for p in range(M):
        if p == self_pos:
            continue
        logn[0, p] = log_pmf(neighbors[j].weights)
        j += 1
    logw = pga_log_weights_arrays(
        factor.precision[None], factor.potential[None], logn, self_pos, alphabet
    )
    return DiscreteSymbolPmf.from_log_weights(alphabet, logw[0])
