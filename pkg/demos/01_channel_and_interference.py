"""Walk through the ISI channel model and its interference structure.

The five-tap 0.227/0.460/0.668/0.460/0.227 channel smears every symbol
over five samples.  Its tap autocorrelation tells us which neighboring
symbols interfere strongly: those are the ones the partial-Gaussian
receiver keeps as discrete variables.
"""

import numpy as np

from turboeq import (
    PROAKIS_C,
    ChannelSpec,
    apply_channel,
    autocorrelation,
    rho_for_target_m,
    selection_matrix,
    strong_interferer_set,
)

spec = ChannelSpec(PROAKIS_C, sigma2=0.25)
print(f"channel taps (window order h_{{L-1}}..h_0): {spec.h}")
print(f"memory L-1 = {spec.L - 1}, noise variance {spec.sigma2}")

x = np.random.default_rng(0).choice([-1.0, 1.0], 12)
r = apply_channel(x, spec, noise_seed=42)
print(f"\n12 BPSK symbols -> {r.size} received samples (N + L - 1)")
print("clean vs received around the frame start:")
clean = apply_channel(x, ChannelSpec(PROAKIS_C, 1e-20), noise_seed=0)
for i in range(4):
    print(f"  r[{i}] = {r[i]:+.3f}   (noise-free {clean[i]:+.3f})")

q = autocorrelation(PROAKIS_C)
print("\ntap autocorrelation q_k (k = 0..4):", np.round(q[4:], 6))
print("normalized magnitudes:", np.round(np.abs(q[4:]) / q[4], 4))

for rho in (0.9, 0.7, 0.4):
    prof = strong_interferer_set(PROAKIS_C, rho)
    print(f"rho = {rho}: strong lags {prof.k_rho.tolist()}  (M = {prof.M}, k_bar = {prof.k_bar})")

rho3 = rho_for_target_m(PROAKIS_C, 3)
prof = strong_interferer_set(PROAKIS_C, rho3)
print(f"\ntargeting M = 3 picks rho = {rho3:.4f}")

i = 10
P = selection_matrix(prof, i, i + prof.k_bar, spec.L)
print(f"selection matrix extracting x_{{{i - 1}..{i + 1}}} from state s_{i + prof.k_bar}:")
print(P.astype(int))
s = np.arange(i + prof.k_bar - 4, i + prof.k_bar + 1, dtype=float)  # stand-in state
print("P @ s picks window entries:", P @ s)
