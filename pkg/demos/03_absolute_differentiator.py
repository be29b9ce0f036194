# # Estimating f and f' from a single pinned agent
#
# Only follower 1 sees f(t) = 0.6 sin t + 0.25 cos 2t. Every follower runs the
# same second-order sliding-mode update on its local innovation, and all four
# lock onto f and f' in finite time.

import numpy as np

from dfd.sim import convergence_time, integrate, scenario_vi_b

traj = integrate(scenario_vi_b())
t_star = convergence_time(traj, "both", tol=1e-2, window=1.0)
print(f"estimates within 1e-2 from t* = {t_star:.4f} s")

for t in (0.0, 0.25, 0.5, 1.0, 5.0):
    i = int(round(t / traj.dt))
    print(f"t={t:4.2f}  max|phat-f|={np.abs(traj.e[i]).max():.2e}  max|qhat-f'|={np.abs(traj.z[i]).max():.2e}")

# After t*, the residual error is chattering of order dt.
late = traj.times > 5
print("late |e| max:", np.abs(traj.e[late]).max(), " late |z| max:", np.abs(traj.z[late]).max())
