"""
Gaussian controls versus optimally shaped signals
=================================================

For a given control the storage map is linear in the input; its top
singular value is the best any signal shape can do.
"""
import math

from lambdamem import ControlParams, MemoryParams, build_storage_map, compare_methods, optimal_signal_efficiency

m = MemoryParams(20, 0.5)
smap = build_storage_map(m, ControlParams(2 * math.pi, 0.0, 0.5))
eta, mode, _ = optimal_signal_efficiency(smap)
print(f"best signal for a 2 pi control at d=20: eta = {eta:.4f}")

print()
print(" tau    gaussian  shaped   eta_opt")
for row in compare_methods(50, [0.02, 0.1, 0.5, 1.5]):
    print(f"{row.tau_sig:5g}  {row.gaussian_eta:.4f}    {row.shape_eta:.4f}   {row.eta_opt:.4f}")
