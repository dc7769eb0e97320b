"""
Which protocol is the optimizer using?
======================================

A small sweep over optical depth and pulse length, labelled by regime.
"""
from lambdamem import SweepSpec, run_sweep

spec = SweepSpec(d_values=(2, 10, 50), tau_values=(0.1, 0.5, 1.5), mode="full_opt")
records = run_sweep(spec, progress=lambda r: print(f"  done d={r.d:g} tau={r.tau_sig:g}"))

print()
print("    d   tau  d*tau   eta/eta_opt  c_tilde  label")
for r in records:
    print(f"{r.d:5g} {r.tau_sig:5g} {r.adiabaticity:6.2f}   {r.eta_ratio:8.4f}   {r.c_tilde:6.3f}  {r.label}")
