"""Following the (q, k0) = (2, 1) standing-wave branch.

Newton continuation in the amplitude b from the bifurcation point, then a
look at the quadratic scaling of the frequency shift and of the part of the
solution that sits off the kernel.
"""

import numpy as np

from filament_waves import (
    ContinuationSettings,
    bifurcation_frequency,
    continue_branch,
    full_space_residual,
    verify_asymptotics,
)

bif = bifurcation_frequency(2, 1)
print(f"omega0 = {bif.omega0:.6f}, j0 = {bif.j0}")

# a small truncation keeps this quick; the acceptance suite uses J = K = 32
branch = continue_branch(bif, ContinuationSettings(db=1e-3, b_max=2e-2, J=16, K=16))
print(f"{len(branch.points)} points")

print("\n      b        omega - omega0    Newton its   full residual")
for p in branch.points[::4]:
    print(f"  {p.b:8.4f}   {p.omega - bif.omega0: .3e}    {p.newton_iters:5d}        {full_space_residual(p, bif):.1e}")

rep = verify_asymptotics(branch)
print(f"\nomega - omega0 ~ b^{rep.omega_slope:.3f}, curvature sign {rep.curvature_sign:+d}")
print(f"|v - b phi| ~ b^{rep.field_slope:.3f}")
print(f"off-kernel part <= {rep.offkernel_constant:.4f} b^2  (slope {rep.offkernel_slope:.3f})")

# the quadratic coefficient itself
b, dw = branch.b[1:], branch.omega[1:] - bif.omega0
print(f"(omega - omega0) / b^2 at the smallest and largest b: {dw[0] / b[0]**2:.4f}, {dw[-1] / b[-1]**2:.4f}")
print("mean:", np.mean(dw / b**2).round(4))
