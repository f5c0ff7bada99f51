"""
Coupled potential, uncoupled scattering
=======================================

Two s-wave channels built from the same three seeds but with different
beta are coupled with q = 0.5.  The potential matrix cannot be turned
diagonal by a constant rotation, yet the S-matrix can: its mixing angle is
the constant -alpha/2.
"""

import numpy as np

from susy_channels import scattering
from susy_channels.scenario import load_scenario

scen = load_scenario("fig1-trivial")
model = scen.model()

# the ratio V12 / (V22 - V11) fixes the rotation angle that would diagonalize V
r = np.linspace(0.5, 3.0, 6)
V = model.potential(r)
sigma = V[:, 0, 1] / (V[:, 1, 1] - V[:, 0, 0])
print("r      sigma(r)")
for ri, s in zip(r, sigma):
    print(f"{ri:4.1f}  {s:+.5f}")

k = scen.k_grid
_, d1, d2, eps, _ = scattering.sweep_model(model, k)
print(f"\nmixing angle: mean {eps.mean():+.15f}, spread {np.ptp(eps):.1e}")
print(f"-alpha/2     = {-model.params.alpha / 2:+.15f}")

# three bound states: two at i kappa1 inherited from the channels, one at i kappa
cat = scattering.spectrum(model)
print("\nbound states (kappa, degeneracy):", cat.bound)
drops = scattering.phase_drops(model)
print(f"sum of eigenphase drops: {drops.sum() / np.pi:.6f} pi")

# same S-matrices, different Jost functions
ntc = load_scenario("ntc1").model()
print(f"\nntc1 Jost commutator: {scattering.jost_commutator(ntc, k[::40]):.3f}")
_, _, _, eps_n, _ = scattering.sweep_model(ntc, k)
print(f"ntc1 mixing angle spread: {np.ptp(eps_n):.1e}")
