"""
Storing one Gaussian pulse
==========================

A resonant signal of FWHM 0.5/gamma enters an ensemble of optical depth 10
while a 2*pi control pulse writes it into the spin wave.
"""
import math

import numpy as np

from lambdamem import ControlParams, MemoryParams, energy_balance, solve

m = MemoryParams(d=10, tau_sig=0.5)
g = ControlParams(theta=2 * math.pi, delay=0.0, tau_ctrl=0.5)
r = solve(m, g)
print(f"storage efficiency  {r.eta:.5f}")
print(f"after retrieval     {r.eta_total:.5f}")

# where the photons went
led = r.energy_ledger
for name, v in zip(("input", "transmitted", "left in medium", "decayed"), led.as_tuple()):
    print(f"{name:>15s}  {v:.6f}")
print(f"ledger residual     {energy_balance(r):.1e}")

# the stored excitation along the cell
b = np.abs(r.spin_wave) ** 2
z = r.zgrid.nodes
print("spin wave peaks at z =", round(float(z[np.argmax(b)]), 3))

# pulse area scan
for theta_pi in (0.5, 1, 2, 3, 4):
    eta = solve(m, ControlParams(theta_pi * math.pi, 0.0, 0.5)).eta
    print(f"theta = {theta_pi:3g} pi   eta = {eta:.4f}")
