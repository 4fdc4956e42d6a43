"""
The grim reaper translates
==========================

x = t - log(cos y) moves rigidly to the right with unit speed. A truncated
piece whose endpoints slide along the exact solution should keep that shape.
"""

import numpy as np

from triodflow import single_curve_mode
from triodflow.analysis import grim_reaper, grim_reaper_x, translator_residual

# static check: k = <w, nu> on the discretized curve
for n in (65, 129, 257):
    c = grim_reaper((1.0, 0.0), n, y_max=1.3)
    print(f"n={n:4d}  translator residual {translator_residual(c, (1.0, 0.0)):.2e}")

# flow with prescribed endpoint paths and compare to the exact profile
for n in (17, 33, 65):
    c = grim_reaper((1.0, 0.0), n, 1.3)
    p0, p1 = c.points[0].copy(), c.points[-1].copy()
    flow = single_curve_mode(c, endpoint_path=lambda t: (p0 + [t, 0.0], p1 + [t, 0.0]))
    s = flow.run(0.5)
    p = s.geometry.points
    err = np.max(np.abs(p[:, 0] - grim_reaper_x(p[:, 1], s.t)))
    print(f"n={n:3d}  max |x - x_exact| at t=0.5: {err:.2e}")

# faster reapers are thinner: speed |w| scales the profile by 1/|w|
c = grim_reaper((0.0, 2.0), 129, 1.3)
print("w=(0,2): width", np.ptp(c.points[:, 0]), " residual", translator_residual(c, (0.0, 2.0)))
