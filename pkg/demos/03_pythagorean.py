"""Radius scan and strip widths on the Pythagorean three-body problem.

Takes about a minute with numba.  CSV output goes to demos/out/.
"""
from pathlib import Path

import numpy as np

from renorm_nbody.experiments import radius_scan, radius_scan_rows, strip_width, write_csv
from renorm_nbody.problems import gen_pythagorean
from renorm_nbody.renorm import S1, S2, S3, S4

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
problem = gen_pythagorean()

# rho_hat * L along an s1 run: the estimate sits a factor 3 to 9 above the bound
samples = radius_scan(problem)
products = np.array([s.product for s in samples])
print(f"{len(samples)} samples, rho_hat*L in [{products.min():.4f}, {products.max():.4f}]")
i = int(np.argmin([s.rho for s in samples]))
print(f"smallest physical radius {samples[i].rho:.3e} at t = {samples[i].t:.4f}")
write_csv(out / "pythagorean_radius.csv", *radius_scan_rows(samples))

# Strip widths: in physical time the width is twice the smallest radius above,
# which collapses at the close approaches; s1..s4 stay wide
print(f"s0   width {2 * samples[i].rho:10.4g}")
for choice in (S1, S2, S3, S4):
    r = strip_width(problem, choice)
    print(f"{r.choice:4s} width {r.width:10.4g}  scaled {r.scaled_width:10.4g}  T_j {r.T_j:8.2f}  "
          f"steps {r.steps:6d}  {r.seconds:5.1f} s")
