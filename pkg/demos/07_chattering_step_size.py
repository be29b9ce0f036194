# # Chattering versus step size
#
# A discretised sign function cannot sit exactly on the sliding manifold.
# The leftover oscillation scales like dt in the integral channel and
# like dt^2 in the estimate itself, the usual second-order sliding accuracy.

import numpy as np

from dfd.sim import integrate, scenario_vi_b

for dt in (4e-4, 2e-4, 1e-4, 5e-5):
    traj = integrate(scenario_vi_b().with_overrides(dt=dt, t_end=6.0))
    late = traj.times > 4.0
    print(f"dt={dt:.0e}  late max|e|={np.abs(traj.e[late]).max():.2e}  late max|z|={np.abs(traj.z[late]).max():.2e}")
