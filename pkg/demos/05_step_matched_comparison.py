"""Adaptive physical-time RK against constant-step renormalized RK.

Every renormalized run gets the step count of the adaptive run.  Errors are
measured against an extended-precision Taylor reference.  Takes about a
minute; results go to demos/out/compare/.
"""
from pathlib import Path

import numpy as np

from renorm_nbody.experiments import compare, write_comparison
from renorm_nbody.problems import gen_pythagorean
from renorm_nbody.renorm import S1, S2, S3, S4

problem = gen_pythagorean()
comp = compare(problem, [S1, S2, S3, S4], rtol=1e-13, atol=1e-13)
write_comparison(comp, problem.to_system()[0], Path(__file__).with_name("out") / "compare")

print("kind  steps  energy error  final position error")
for row in comp.rows:
    print(f"{row.kind:4s} {row.steps:6d}  {row.energy_error:12.3e}  {row.position_error:12.3e}")

# The problem is chaotic: rounding errors of order 1e-16 are amplified by
# many decades after t = 40, so the running maximum tells more than the end point.
print("\nrunning maximum of the position error at t = 10, 20, 40, 63")
for key, err in comp.errors.items():
    tr = comp.runs[key]
    running = np.maximum.accumulate(err.max(axis=1))
    marks = [running[min(np.searchsorted(tr.t, t), len(tr.t) - 1)] for t in (10, 20, 40, 63)]
    print(f"{key:4s}", " ".join(f"{m:.1e}" for m in marks))
