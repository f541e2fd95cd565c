"""The four message conversions at the equalizer/decoder boundary.

Decoder to equalizer: a discrete symbol pmf becomes a Gaussian prior either
by direct moment matching or by the EP rule (moment-match the tilted
belief, then divide the incoming Gaussian back out).  Equalizer to
decoder: a Gaussian extrinsic is restricted to the alphabet, or, with a
partial Gaussian approximation, an M-dimensional window factor is summed
against the neighbors' discrete messages.
"""

import numpy as np

from turboeq import (
    DiscreteSymbolPmf,
    Gaussian1D,
    GaussianVec,
    direct_convert,
    ep_convert,
    ga_message,
    pga_factor,
    pga_message,
)

BPSK = np.array([-1.0, 1.0])

pmf = DiscreteSymbolPmf(BPSK, np.array([0.2, 0.8]))
print(f"decoder pmf on {{-1,+1}}: {pmf.weights}")

g_direct = direct_convert(pmf)
print(f"direct conversion:        N({g_direct.mean:+.4f}, {g_direct.var:.4f})")

incoming = Gaussian1D(0.0, 1.0)
g_ep = ep_convert(pmf, incoming)
print(f"EP rule vs N(0,1) cavity: N({g_ep.mean:+.4f}, {g_ep.var:.4f})")
print("  (the EP message is sharper: it reports only what the pmf adds)")

flat = ep_convert(pmf, Gaussian1D.noninformative())
print(f"EP with a flat cavity reduces to direct conversion: N({flat.mean:+.4f}, {flat.var:.4f})")

print("\nequalizer to decoder, scalar route:")
belief = Gaussian1D(0.6, 0.64)
msg = ga_message(belief, incoming, BPSK)
print(f"belief N(0.6, 0.64) / prior N(0,1) restricted to the alphabet -> {np.round(msg.weights, 4)}")

print("\nequalizer to decoder, windowed route (M = 2):")
window = GaussianVec(np.array([0.5, -0.3]), np.array([[0.5, 0.3], [0.3, 0.6]]))
factor = pga_factor(window, prior_means=np.zeros(2), prior_vars=np.ones(2))
print(f"window factor precision:\n{np.round(factor.precision, 4)}")
neighbor = DiscreteSymbolPmf(BPSK, np.array([0.9, 0.1]))  # decoder is sure x_k = -1
out = pga_message(factor, [neighbor], self_pos=1, alphabet=BPSK)
print(f"neighbor pmf {neighbor.weights} -> message for the target symbol {np.round(out.weights, 4)}")

neutral = pga_message(factor, [DiscreteSymbolPmf.uniform(BPSK)], self_pos=1, alphabet=BPSK)
print(f"with a uniform neighbor instead:               {np.round(neutral.weights, 4)}")
print("  (a confident neighbor reshapes the target's message through the window coupling)")
