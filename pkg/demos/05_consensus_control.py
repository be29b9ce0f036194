# # Continuous consensus tracking
#
# The same estimator structure, closed around first-order followers
# s_i' = a_i(t) + u_i. The control is continuous in time even though the
# integral channel switches.

import numpy as np

from dfd.sim import convergence_time, integrate, scenario_vi_c

cfg = scenario_vi_c().with_overrides(t_end=10.0)
traj = integrate(cfg)
print(f"t* for |s_i - s0| and |z| below 1e-2: {convergence_time(traj, 'both', 1e-2, 1.0):.4f}")


def max_jump(tr, band=1e-2):
    away = (np.abs(tr.y[:-1]) >= band) & (np.abs(tr.y[1:]) >= band)
    return np.abs(np.diff(tr.u, axis=0))[away].max()


# Halving dt roughly halves the largest step-to-step change in u: no jumps.
fine = integrate(cfg.with_overrides(dt=cfg.dt / 2))
print("max |du| per step, dt and dt/2:", max_jump(traj), max_jump(fine))
