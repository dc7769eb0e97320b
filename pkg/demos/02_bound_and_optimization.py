"""
How close does a Gaussian control get to the optimum?
=====================================================

The optimal storage efficiency depends only on the optical depth. Here it is
compared with the best Gaussian control found by Nelder-Mead.
"""
from lambdamem import MemoryParams, bound_report, optimize_control

for d in (1, 5, 20, 50):
    rep = bound_report(d)
    print(f"d = {d:3g}   eta_opt = {rep.eta_opt:.4f}   eta_opt^2 = {rep.eta_opt_total:.4f}")

print()
print("   d   tau   eta     eta/eta_opt  theta/pi  delay/tau  tau_ctrl/tau  seed")
for d, tau in ((5, 1.0), (20, 0.5), (50, 1.5), (10, 0.1)):
    m = MemoryParams(d, tau)
    opt = optimize_control(m)
    g = opt.best_g
    print(f"{d:4g} {tau:5g}  {opt.eta:.4f}  {opt.eta_ratio:.4f}      {g.theta / 3.14159265:6.2f}"
          f"    {g.delay / tau:6.2f}     {g.tau_ctrl / tau:6.2f}      {opt.seed_label}")

# short pulses (d * tau < 1) stay well below the bound
