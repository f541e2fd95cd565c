"""Numba-compiled sequential kernels.

Only the chain recursions live here (Kalman forward/backward over the
channel states and the BCJR trellis sweeps); their per-step work is too
small for vectorized numpy to amortize the Python overhead.  Everything
else in the package is batched numpy.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

NEG_INF = -np.inf


@njit(cache=True, inline="always")
def _lae(a, b):
    """log(exp(a) + exp(b)) without overflow; tolerates -inf operands."""
    if a < b:
        a, b = b, a
    if b == NEG_INF:
        return a
    return a + math.log1p(math.exp(b - a))


@njit(cache=True)
def forward_kalman(r, h, sigma2, mx, vx):
    """Forward filter over the state chain s_t = shift(s_{t-1}) + e*x_t.

    The boundary state before the chain is exactly zero.  Returns the
    predictive messages (before the scalar observation update) and the
    filtered moments (after it), all in moment form; the predictive
    covariances are rank-deficient early in the chain, which moment form
    represents exactly.
    """
    T = r.shape[0]
    L = h.shape[0]
    m_pred = np.zeros((T, L))
    V_pred = np.zeros((T, L, L))
    m_filt = np.zeros((T, L))
    V_filt = np.zeros((T, L, L))
    m = np.zeros(L)
    V = np.zeros((L, L))
    for t in range(T):
        mp = m_pred[t]
        Vp = V_pred[t]
        for a in range(L - 1):
            mp[a] = m[a + 1]
            for b in range(L - 1):
                Vp[a, b] = V[a + 1, b + 1]
        mp[L - 1] = mx[t]
        Vp[L - 1, L - 1] = vx[t]
        # scalar innovation update with observation r_t = h @ s_t + noise
        Vh = Vp @ h
        S = h @ Vh + sigma2
        innov = r[t] - h @ mp
        m = m_filt[t]
        V = V_filt[t]
        for a in range(L):
            k_a = Vh[a] / S
            m[a] = mp[a] + k_a * innov
            for b in range(L):
                V[a, b] = Vp[a, b] - k_a * Vh[b]
        for a in range(L):
            for b in range(a + 1, L):
                s_ab = 0.5 * (V[a, b] + V[b, a])
                V[a, b] = s_ab
                V[b, a] = s_ab
    return m_pred, V_pred, m_filt, V_filt


@njit(cache=True)
def backward_info(r, h, sigma2, mx, vx):
    """Backward recursion in canonical form.

    W_bwd[t], xi_bwd[t] parameterize the message sent to state t from the
    following transition factor; the boundary message at the last state is
    zero precision.  Each step combines the next state's backward and
    observation messages, marginalizes the symbol entering there against
    its Gaussian prior, and pulls the result back through the shift (which
    drops the last row/column since the shifted-out coordinate is gone).
    """
    T = r.shape[0]
    L = h.shape[0]
    W_bwd = np.zeros((T, L, L))
    xi_bwd = np.zeros((T, L))
    W = np.zeros((L, L))
    xi = np.zeros(L)
    Wobs = np.outer(h, h) / sigma2
    for t in range(T - 1, 0, -1):
        Wg = W + Wobs
        xig = xi + h * (r[t] / sigma2)
        a = Wg[L - 1, L - 1] + 1.0 / vx[t]
        c = xig[L - 1] + mx[t] / vx[t]
        we = Wg[:, L - 1].copy()
        Wn = W_bwd[t - 1]
        xin = xi_bwd[t - 1]
        for p in range(1, L):
            xin[p] = xig[p - 1] - (c / a) * we[p - 1]
            for q_ in range(1, L):
                Wn[p, q_] = Wg[p - 1, q_ - 1] - we[p - 1] * we[q_ - 1] / a
        for p in range(1, L):
            for q_ in range(p + 1, L):
                s_pq = 0.5 * (Wn[p, q_] + Wn[q_, p])
                Wn[p, q_] = s_pq
                Wn[q_, p] = s_pq
        W = Wn
        xi = xin
    return W_bwd, xi_bwd


@njit(cache=True)
def bcjr_log(logw, next_state, out_bits, tail_terminated):
    """Exact log-domain BCJR over a binary-input trellis.

    logw: (T, n_out, 2) log weights of the coded bits per trellis step.
    next_state: (2, S) successor table indexed [input, state].
    out_bits: (2, S, n_out) coded output bits per transition.
    Returns (ext, post_u): extrinsic log pmfs per coded position (T, n_out, 2),
    normalized, with the own position's input excluded branch-by-branch,
    and normalized info-bit posterior log pmfs (T, 2).
    """
    T = logw.shape[0]
    n_out = logw.shape[1]
    S = next_state.shape[1]

    alpha = np.full((T + 1, S), NEG_INF)
    alpha[0, 0] = 0.0
    for t in range(T):
        for s in range(S):
            a = alpha[t, s]
            if a == NEG_INF:
                continue
            for u in range(2):
                g = 0.0
                for j in range(n_out):
                    g += logw[t, j, out_bits[u, s, j]]
                ns = next_state[u, s]
                alpha[t + 1, ns] = _lae(alpha[t + 1, ns], a + g)
        mx = NEG_INF
        for s in range(S):
            if alpha[t + 1, s] > mx:
                mx = alpha[t + 1, s]
        if mx != NEG_INF:
            for s in range(S):
                alpha[t + 1, s] -= mx

    beta = np.full((T + 1, S), NEG_INF)
    if tail_terminated:
        beta[T, 0] = 0.0
    else:
        for s in range(S):
            beta[T, s] = 0.0
    for t in range(T - 1, -1, -1):
        for s in range(S):
            acc = NEG_INF
            for u in range(2):
                b = beta[t + 1, next_state[u, s]]
                if b == NEG_INF:
                    continue
                g = 0.0
                for j in range(n_out):
                    g += logw[t, j, out_bits[u, s, j]]
                acc = _lae(acc, g + b)
            beta[t, s] = acc
        mx = NEG_INF
        for s in range(S):
            if beta[t, s] > mx:
                mx = beta[t, s]
        if mx != NEG_INF:
            for s in range(S):
                beta[t, s] -= mx

    ext = np.full((T, n_out, 2), NEG_INF)
    post_u = np.full((T, 2), NEG_INF)
    gterm = np.zeros(n_out)
    for t in range(T):
        for s in range(S):
            a = alpha[t, s]
            if a == NEG_INF:
                continue
            for u in range(2):
                b = beta[t + 1, next_state[u, s]]
                if b == NEG_INF:
                    continue
                base = a + b
                g = 0.0
                for j in range(n_out):
                    gterm[j] = logw[t, j, out_bits[u, s, j]]
                    g += gterm[j]
                post_u[t, u] = _lae(post_u[t, u], base + g)
                for j in range(n_out):
                    # exclude position j's own input from its extrinsic
                    gex = 0.0
                    for jj in range(n_out):
                        if jj != j:
                            gex += gterm[jj]
                    bit = out_bits[u, s, j]
                    ext[t, j, bit] = _lae(ext[t, j, bit], base + gex)
        z = _lae(post_u[t, 0], post_u[t, 1])
        if z != NEG_INF:
            post_u[t, 0] -= z
            post_u[t, 1] -= z
        for j in range(n_out):
            z = _lae(ext[t, j, 0], ext[t, j, 1])
            if z != NEG_INF:
                ext[t, j, 0] -= z
                ext[t, j, 1] -= z
    return ext, post_u
