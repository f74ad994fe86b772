"""The velocity-free renormalization s4 against a fast visitor.

s4 only sees distances, so a body crossing the binary at high speed gets
no extra resolution and the strip shrinks like 1/speed.
"""
import numpy as np

from renorm_nbody.experiments import strip_width
from renorm_nbody.problems import gen_binary_visitor
from renorm_nbody.renorm import S1, S4

speeds = [50.0, 100.0, 200.0]
rows = []
for speed in speeds:
    problem = gen_binary_visitor(speed)
    s1 = strip_width(problem, S1).scaled_width
    s4 = strip_width(problem, S4).scaled_width
    rows.append((speed, s1, s4))
    print(f"speed {speed:5.0f}: scaled width s1 {s1:.4f}  s4 {s4:.4f}  ratio {s4 / s1:.3f}")

slope = np.polyfit(np.log(speeds), np.log([r[2] for r in rows]), 1)[0]
print(f"log-log slope of the s4 width against speed: {slope:.3f}")
print("s4 width times speed:", [round(r[2] * r[0], 3) for r in rows])
