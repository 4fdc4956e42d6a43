"""
Gaussian density and the monotonicity formula
=============================================

The backward heat kernel centred at (x0, T) weighs the network. For lines,
halflines and 120 degree stars through x0 the weighted length is 1, 1/2
and 3/2. Along the flow its rate of change is minus a dissipation
integral plus endpoint terms; near fixed ends the latter can win.
"""

import numpy as np

from triodflow import DensityProbe, FlowConfig, FlowState, evolve
from triodflow import functionals as fn
from triodflow.analysis import halfline_star
from triodflow.scenarios import bowed_curve

T, t, x0 = 1.0, 0.0, (0.0, 0.0)
probe = DensityProbe(x0, T)
extent = 10 * np.sqrt(2 * (T - t))
for name, count in (("halfline", 1), ("line", 2), ("three halflines", 3)):
    geom = halfline_star(x0, extent, count=count, n=257)
    print(f"{name:16s} Theta = {fn.gaussian_density(FlowState(geom, t=t), probe):.8f}")

# a bowed curve flattening toward its chord
c = bowed_curve(n=128)
probe = DensityProbe(tuple(c.points[64]), 0.3)
traj = evolve(FlowState(c), FlowConfig(t_end=0.05, resample_every=0, embeddedness=False), probes=[probe])
S = traj.states
print("Theta(t):", np.round(traj.series("thetas")[::100, 0], 6))

# each three-sample window: dTheta/dt + dissipation - boundary terms ~ 0
for i in range(1, len(S) - 1, 200):
    r = fn.monotonicity_residual(S[i - 1 : i + 2], probe)
    print(f"t={S[i].t:.4f}  dTheta/dt={r.dtheta_dt:+.4e}  dissipation={r.dissipation:.4e}  residual={r.residual:+.1e}")

print("time integrals of the endpoint terms:", fn.boundary_term_integrals(S, probe))
