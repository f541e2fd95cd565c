"""Trellis construction, exact log-BCJR decoding, and the demodulator bridges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import bcjr_log
from .exchange import log_normalize
from .txchain import ConvCodeSpec, InterleaverSpec, ModulationMap, Termination, deinterleave, interleave


@dataclass(frozen=True)
class Trellis:
    """Transition tables of a feedforward convolutional code.

    States pack the last constraint_length - 1 input bits, newest bit in the
    most significant position, so every state has exactly two incoming and
    two outgoing transitions.
    """

    n_states: int
    n_out: int
    next_state: np.ndarray  # (2, S)
    out_bits: np.ndarray  # (2, S, n_out)
    tail_terminated: bool
    tail_bits: int

    @classmethod
    def from_code(cls, code: ConvCodeSpec) -> "Trellis":
        K = code.constraint_length
        nu = K - 1
        S = 1 << nu
        taps = code.taps()
        n_out = taps.shape[0]
        next_state = np.zeros((2, S), dtype=np.int64)
        out_bits = np.zeros((2, S, n_out), dtype=np.int64)
        for s in range(S):
            reg = [(s >> (nu - 1 - j)) & 1 for j in range(nu)]  # [u_{t-1},...,u_{t-nu}]
            for u in range(2):
                window = [u] + reg
                for g in range(n_out):
                    out_bits[u, s, g] = int(np.bitwise_xor.reduce(taps[g] & np.array(window)))
                next_state[u, s] = (u << (nu - 1)) | (s >> 1) if nu else 0
        return cls(
            n_states=S,
            n_out=n_out,
            next_state=next_state,
            out_bits=out_bits,
            tail_terminated=code.termination is Termination.TAIL_TERMINATED,
            tail_bits=code.tail_bits,
        )


def bcjr_extrinsic(
    coded_log_pmfs: np.ndarray,
    trellis: Trellis,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the exact sum-product forward/backward sweep over the code trellis.

    coded_log_pmfs: (n_coded, 2) log pmfs in coded-bit (deinterleaved) order.
    Returns (extrinsic, info_posterior): extrinsic log pmfs per coded
    position (n_coded, 2), each computed with that position's own input
    removed, and normalized info-bit posterior log pmfs (n_steps, 2).
    """
    lw = np.asarray(coded_log_pmfs, dtype=float)
    if lw.ndim != 2 or lw.shape[1] != 2:
        raise ValueError("coded_log_pmfs must have shape (n_coded, 2)")
    if lw.shape[0] % trellis.n_out:
        raise ValueError(
            f"coded length {lw.shape[0]} not divisible by {trellis.n_out} outputs per step"
        )
    steps = lw.reshape(-1, trellis.n_out, 2)
    ext, post_u = bcjr_log(
        np.ascontiguousarray(steps),
        trellis.next_state,
        trellis.out_bits,
        trellis.tail_terminated,
    )
    return ext.reshape(-1, 2), post_u


def decide_bits(info_posterior: np.ndarray, k_info: int) -> np.ndarray:
    """Hard decisions from info-bit posterior log pmfs; ties resolve to 0."""
    post = info_posterior[:k_info]
    return (post[:, 1] > post[:, 0]).astype(np.int64)


def symbol_to_bit_log_pmfs(symbol_log_pmfs: np.ndarray, modmap: ModulationMap) -> np.ndarray:
    """Bitwise marginals of symbol pmfs under the labeling (sum-product at the mapper).

    Input (N, Q) symbol log pmfs; output (N * B, 2) bit log pmfs in
    interleaved (transmit) order.
    """
    logp = np.asarray(symbol_log_pmfs, dtype=float)
    N = logp.shape[0]
    B = modmap.bits_per_symbol
    labels = modmap.label_bits()  # (Q, B)
    out = np.empty((N, B, 2))
    for j in range(B):
        for b in (0, 1):
            cols = np.flatnonzero(labels[:, j] == b)
            sel = logp[:, cols]
            m = sel.max(axis=1)
            finite = m > -np.inf
            m0 = np.where(finite, m, 0.0)
            s = np.exp(sel - m0[:, None]).sum(axis=1)
            out[:, j, b] = np.where(finite, m0 + np.log(np.where(finite, s, 1.0)), -np.inf)
    return log_normalize(out.reshape(N * B, 2))


def bit_to_symbol_log_pmfs(bit_log_pmfs: np.ndarray, modmap: ModulationMap) -> np.ndarray:
    """Symbol pmfs as products of incoming bit messages (mapper sum-product).

    Input (N * B, 2) bit log pmfs in interleaved order; output (N, Q)
    normalized symbol log pmfs.
    """
    lb = np.asarray(bit_log_pmfs, dtype=float)
    B = modmap.bits_per_symbol
    N = lb.shape[0] // B
    per_symbol = lb.reshape(N, B, 2)
    labels = modmap.label_bits()  # (Q, B)
    logp = np.zeros((N, labels.shape[0]))
    for j in range(B):
        logp += per_symbol[:, j, labels[:, j]]
    return log_normalize(logp)


def demod_bridge(
    symbol_log_pmfs: np.ndarray,
    modmap: ModulationMap,
    pi: InterleaverSpec,
) -> np.ndarray:
    """Equalizer-to-decoder bridge: symbol pmfs to coded-order bit pmfs."""
    bits_txorder = symbol_to_bit_log_pmfs(symbol_log_pmfs, modmap)
    return deinterleave(bits_txorder, pi)


def mod_bridge(
    coded_bit_log_pmfs: np.ndarray,
    modmap: ModulationMap,
    pi: InterleaverSpec,
) -> np.ndarray:
    """Decoder-to-equalizer bridge: coded-order bit pmfs to symbol pmfs."""
    bits_txorder = interleave(np.asarray(coded_bit_log_pmfs, dtype=float), pi)
    return bit_to_symbol_log_pmfs(bits_txorder, modmap)


def bpsk_llrs(symbol_log_pmfs: np.ndarray) -> np.ndarray:
    """Diagnostic LLRs log w(+1) - log w(-1) of BPSK symbol pmfs."""
    return symbol_log_pmfs[:, 1] - symbol_log_pmfs[:, 0]


def channel_symbol_log_pmfs(r: np.ndarray, alphabet: np.ndarray, sigma2: float) -> np.ndarray:
    """Memoryless per-symbol likelihood pmfs N(r; x, sigma2) restricted to the alphabet."""
    r = np.asarray(r, dtype=float)
    logw = -0.5 * (r[:, None] - alphabet[None, :]) ** 2 / sigma2
    return log_normalize(logw)
