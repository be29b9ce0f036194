# # Picking gains
#
# The certified region is k2 >= l2 / rho and k1 >= sqrt((2 (gamma0 + gamma1) + 1) k2 / lambda1).
# rho trades the two conditions against each other.

from dfd import graph_certificate, minimal_gains, derived_constants, check_gains
from dfd.sim import surrogate_topology

cert = graph_certificate(surrogate_topology())
print("surrogate cycle: w =", cert.w, " lambda1 =", round(cert.lambda1, 6))

for rho in (0.25, 0.5, 0.75, 0.9):
    c = derived_constants(rho, cert.w, l=1.0)
    gs = minimal_gains(c, cert.lambda1)
    print(f"rho={rho:<5} k1_min={gs.k1:8.3f} k2_min={gs.k2:6.3f} gamma2={gs.gamma2:7.3f}")

# The hand-tuned gains k1 = 5, k2 = 4 used in the scenarios work in practice on
# this cycle, but sit far outside the sufficient condition.
report = check_gains(5.0, 4.0, derived_constants(0.75, cert.w, l=1.0), cert.lambda1)
print(report.to_dict())
