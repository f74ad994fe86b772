"""Write the illustrative 9-body sample problem shipped with the package.

The state is NOT an ephemeris: each planet is placed on a circular, coplanar
orbit at its mean distance with a distinct phase.  For real initial data see
tools/FETCH_EPHEMERIS.md.
"""
import json
import math
from pathlib import Path

K2 = 0.01720209895 ** 2  # Gaussian gravitational constant squared, au^3 / (Msun day^2)
PLANETS = [  # label, mass / Msun, mean distance / au
    ("mercury", 1.6601e-7, 0.387), ("venus", 2.4478e-6, 0.723), ("earth-moon", 3.0404e-6, 1.0),
    ("mars", 3.2272e-7, 1.524), ("jupiter", 9.5479e-4, 5.203), ("saturn", 2.8589e-4, 9.537),
    ("uranus", 4.3662e-5, 19.19), ("neptune", 5.1514e-5, 30.07),
]

bodies = [{"label": "sun", "mass": 1.0, "q": [0.0, 0.0, 0.0], "v": [0.0, 0.0, 0.0]}]
for k, (label, m, a) in enumerate(PLANETS):
    phase = 2.399963 * k  # golden angle, spreads the planets around
    speed = math.sqrt(K2 * (1.0 + m) / a)
    bodies.append({"label": label, "mass": m,
                   "q": [a * math.cos(phase), a * math.sin(phase), 0.0],
                   "v": [-speed * math.sin(phase), speed * math.cos(phase), 0.0]})
total = sum(b["mass"] for b in bodies)
for axis in range(3):
    cq = sum(b["mass"] * b["q"][axis] for b in bodies) / total
    cv = sum(b["mass"] * b["v"][axis] for b in bodies) / total
    for b in bodies:
        b["q"][axis] -= cq
        b["v"][axis] -= cv

problem = {"name": "solar-system-illustrative", "G": K2, "bodies": bodies, "t_span": [0.0, 2000.0],
           "units": "au, day, solar mass; illustrative circular orbits, not ephemeris data"}
out = Path(__file__).resolve().parents[1] / "src" / "renorm_nbody" / "data" / "solar_system_sample.json"
out.write_text(json.dumps(problem, indent=2) + "\n")
print("wrote", out)
