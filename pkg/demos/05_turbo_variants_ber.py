"""Small-scale BER comparison of the four turbo-equalizer variants.

Variants differ only in the two boundary conversions:

                 decoder -> equalizer   equalizer -> decoder
    BP-GA        direct conversion      Gaussian restriction
    BP-EP        EP rule                Gaussian restriction
    BP-PGA       direct conversion      partial Gaussian window
    BP-EP-PGA    EP rule                partial Gaussian window

Desk-scale run: short frames and few frames, just to see the ordering and
the per-iteration convergence.  The `simulate` CLI drives the full-size
experiment.
"""

import numpy as np

from turboeq import ChannelSpec, PROAKIS_C, apply_channel, encode, map_symbols
from turboeq.runner import TurboConfig, Variant, run_turbo
from turboeq.sim import ExperimentConfig, sigma2_from_ebn0
from turboeq.txchain import ConvCodeSpec, bpsk_map, random_interleaver

K = 512
FRAMES = 8
SNR_DB = 5.5
code = ConvCodeSpec((0o23, 0o35), 5)
cfg_for_mapping = ExperimentConfig(k_info=K)
sigma2 = sigma2_from_ebn0(cfg_for_mapping, SNR_DB)
print(f"Eb/N0 = {SNR_DB} dB -> sigma^2 = {sigma2:.4f} on the 5-tap channel\n")

traces = {}
for variant in Variant:
    per_iter = np.zeros(12)
    for f in range(FRAMES):
        rng = np.random.default_rng(100 + f)
        bits = rng.integers(0, 2, K)
        coded = encode(bits, code)
        pi = random_interleaver(coded.size, seed=200 + f)
        x = map_symbols(coded, bpsk_map(), pi)
        chan = ChannelSpec(PROAKIS_C, sigma2)
        r = apply_channel(x, chan, rng)
        tcfg = TurboConfig(variant, iterations=12, m_target=3)
        _, tr = run_turbo(r, chan, code, bpsk_map(), pi, tcfg, truth_bits=bits)
        per_iter += np.array(tr.bit_errors)
    traces[variant.value] = per_iter / (FRAMES * K)

print("BER by turbo iteration (paired noise across variants):")
print("iter  " + "  ".join(f"{v:>9s}" for v in traces))
for it in range(12):
    row = "  ".join(f"{traces[v][it]:9.2e}" for v in traces)
    print(f"{it + 1:3d}   {row}")

print("\nfinal ordering (best to worst):")
for v, tr in sorted(traces.items(), key=lambda kv: kv[1][-1]):
    print(f"  {v:10s} {tr[-1]:.2e}")
