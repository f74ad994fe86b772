"""Taylor jets of a circular orbit, and the two integrators on one period."""
import math

import numpy as np

from renorm_nbody.dynamics import PhaseState, SystemSpec
from renorm_nbody.integrators import IntegratorConfig, integrate
from renorm_nbody.renorm import S0, S1, S4
from renorm_nbody.series import radius_estimate, taylor_coeffs

# equal masses 1/2 at separation 1; with G=1 the angular rate is 1
spec = SystemSpec([0.5, 0.5])
q0 = [[-0.5, 0, 0], [0.5, 0, 0]]
v0 = [[0, -0.5, 0], [0, 0.5, 0]]
state = PhaseState(q0, v0)

bundle = taylor_coeffs(spec, state, 12)
print("x-coefficients of body 2:", np.round(bundle.q[:, 1, 0], 8))
print("0.5 cos(t) coefficients: ", np.round([0.5 * math.cos(k * math.pi / 2) / math.factorial(k)
                                              for k in range(13)], 8))

# The circular solution is entire, so the estimate only says "large"
print("radius estimate:", radius_estimate(taylor_coeffs(spec, state, 30)))

# On this orbit every renormalization is constant along the solution
for choice in (S1, S4):
    print(choice, "s coefficients:", np.round(taylor_coeffs(spec, state, 6, choice).s, 12))

period = 2 * math.pi
for mode, kwargs in (("taylor", {"dtau": period / 50}), ("rk", {"dtau": period / 24}),
                     ("rk_adaptive", {"rtol": 1e-12, "atol": 1e-12})):
    traj = integrate(spec, S0, state, IntegratorConfig(mode, tau_end=period, **kwargs))
    err = np.abs(traj.final.q - np.array(q0)).max()
    print(f"{mode:12s} steps={traj.accepted:4d} error after one period {err:.2e}")

# A renormalized run stops exactly at the requested physical time
traj = integrate(spec, S1, state, IntegratorConfig("taylor", dtau=0.1, t_end=period))
print("s1 run: final t =", traj.final.t, "final tau =", traj.final.tau)
