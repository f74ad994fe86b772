"""Strip constants, the radius lower bound, and the strip-to-disk map."""
import math

import numpy as np

from renorm_nbody import bounds
from renorm_nbody.dynamics import PhaseState, SystemSpec
from renorm_nbody.series import radius_estimate, taylor_coeffs

# The constants come from three one-dimensional problems: a root of
# lambda * eta(lambda) = 1, a root of lambda * mu(lambda) = 1, and the maximizer
# of (1 - lambda * delta(lambda)) * lambda.
report = bounds.compute_constants()
for name in ("lambda0", "lambda_star", "lambda_max", "beta"):
    print(f"{name:12s} {getattr(report, name):.10f}")

# eta grows quickly towards sqrt(2) - 1, where 1 - 2x - x^2 vanishes
for lam in np.linspace(0.0, 0.4, 9):
    print(f"eta({lam:.2f}) = {bounds.eta(lam):10.4f}")

# The auxiliary functions can use the printed exponent 2 in xi instead of 1.
# That variant shrinks every constant by a few percent.
squared = bounds.compute_constants(xi_power=2)
print("xi_power=2:", {k: round(v, 7) for k, v in squared.to_dict().items() if isinstance(v, float)})

# Two unit masses released from rest at distance 1 collide at t = pi/4.
# The radius of convergence of the solution at t=0 is that collision time;
# 1/L must stay below it.
spec = SystemSpec([1.0, 1.0])
state = PhaseState([[0, 0, 0], [1, 0, 0]], np.zeros((2, 3)))
rho = radius_estimate(taylor_coeffs(spec, state, 30))
inv_L = bounds.L_bound(spec, state.q, state.v, bounds.LAMBDA0).radius_lower
print(f"free fall: rho_hat = {rho:.5f}, exact = {math.pi / 4:.5f}, 1/L = {inv_L:.5f}")

# s1 keeps s * L below 1/lambda everywhere; for this state the product is sqrt(2) * lambda0
print("s1^-1 L^-1 =", bounds.sL_product(spec, state.q, state.v, bounds.LAMBDA0))

# The strip |Im tau| < beta maps onto the unit disk
beta = report.beta
tau = np.array([0.0, 1j * 0.5 * beta, 2 * beta + 0.9j * beta, -3 * beta])
sigma = bounds.conformal_map(tau, beta)
print("sigma:", np.round(sigma, 6))
print("round trip error:", np.abs(bounds.conformal_map_inverse(sigma, beta) - tau).max())
