"""
Zero-energy decoupling of two s-waves
=====================================

For two cosech channels the mixing angle vanishes at threshold when
cos(alpha) = 1 / ((a2 - a1) kappa).  The second parameter set printed for
the s-s example (q = 1.2, kappa = 13.6667) does not satisfy this; q = 0.8
does.
"""

import numpy as np

from susy_channels import scattering
from susy_channels.scenario import load_scenario

a1, a2 = 1 / 1.5, 1.0
for q in (0.4, 0.8, 1.2):
    print(f"q = {q}: kappa for eps(0) = 0 is {scattering.kappa_for_zero_mixing(a1, a2, q):+.5f}")

k = np.array([1e-3, 0.5, 1.0, 2.0, 5.0])
for name in ("fig2-ss", "fig3-ss-dashed-q08", "fig3-ss-dashed"):
    model = load_scenario(name).model()
    _, d1, d2, eps, _ = scattering.sweep_model(model, k)
    closed = 0.5 * np.arctan(scattering.mixing_ss(k, 1.5, 1.0, model.params.alpha))
    print(f"\n{name}: kappa = {model.kappa:.5f}, q = {model.params.q}")
    print("   k      eps(k)     closed form")
    for row in zip(k, eps, closed):
        print("  {:6.3f}  {:+.6f}  {:+.6f}".format(*row))

# the eigenphase slopes return the channel scattering lengths, interchanged
model = load_scenario("fig2-ss").model()
kl = np.geomspace(1e-3, 1e-2, 25)
_, d1, d2, _, _ = scattering.sweep_model(model, kl)
print("\nfitted lengths:", scattering.scattering_lengths(np.stack([d1, d2], axis=1), kl))
print("channel lengths:", [scattering.channel_scattering_length(c) for c in model.diagonal.channels])
