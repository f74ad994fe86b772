"""Problem files (JSON) and the built-in test problems."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .dynamics import PhaseState, SystemSpec, min_separation
from .errors import InvariantError, ParseError


@dataclass
class ProblemFile:
    """In-memory form of a problem file.

    ``bodies`` is a list of dicts with ``label``, exactly one of ``mass`` and
    ``gm``, and 3-vectors ``q`` and ``v``.  ``t_span`` is ``[t0, T]``;
    ``units`` is free text kept for documentation.
    """

    name: str
    G: float
    bodies: list
    t_span: list
    units: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def T(self) -> float:
        return float(self.t_span[1])

    def to_dict(self) -> dict:
        out = {"name": self.name, "G": self.G, "bodies": self.bodies,
               "t_span": list(self.t_span), "units": self.units}
        out.update(self.extra)
        return out

    def to_system(self) -> tuple[SystemSpec, PhaseState, float]:
        """Build ``(spec, state, T)``; checks every invariant of the file."""
        if len(self.bodies) < 2:
            raise InvariantError("a problem needs at least two bodies")
        has_mass = ["mass" in b for b in self.bodies]
        has_gm = ["gm" in b for b in self.bodies]
        for k, (hm, hg) in enumerate(zip(has_mass, has_gm)):
            if hm == hg:
                raise InvariantError(f"bodies[{k}]: give exactly one of 'mass' and 'gm'")
        if any(has_mass) and any(has_gm):
            raise InvariantError("mixing 'mass' and 'gm' within one file is not allowed")
        labels = [b["label"] for b in self.bodies]
        if any(has_gm):
            spec = SystemSpec.from_gm([b["gm"] for b in self.bodies], G=self.G, labels=labels)
        else:
            spec = SystemSpec([b["mass"] for b in self.bodies], G=self.G, labels=labels)
        q = np.array([b["q"] for b in self.bodies], dtype=float)
        v = np.array([b["v"] for b in self.bodies], dtype=float)
        dmin, pair = min_separation(q)
        if not dmin > 0:
            raise InvariantError(f"bodies {labels[pair[0]]!r} and {labels[pair[1]]!r} coincide")
        t0, t1 = (float(x) for x in self.t_span)
        if not t1 > t0:
            raise InvariantError("t_span must be increasing")
        return spec, PhaseState(q, v, t0, 0.0), t1


def _field(obj, key, where, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    val = obj[key]
    if kind == "real":
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            raise ParseError(f"{where}.{key}: expected a finite number, got {val!r}")
        return float(val)
    if kind == "vec3":
        if (not isinstance(val, list) or len(val) != 3
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in val)):
            raise ParseError(f"{where}.{key}: expected a list of 3 numbers, got {val!r}")
        return [float(x) for x in val]
    if kind == "str" and not isinstance(val, str):
        raise ParseError(f"{where}.{key}: expected a string, got {val!r}")
    return val


def problem_from_dict(data: dict, source: str = "<problem>") -> ProblemFile:
    """Validate the schema of a decoded problem file."""
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be an object")
    name = _field(data, "name", source, "str")
    G = _field(data, "G", source, "real")
    raw = _field(data, "bodies", source)
    if not isinstance(raw, list):
        raise ParseError(f"{source}.bodies: expected a list")
    bodies = []
    for k, b in enumerate(raw):
        where = f"{source}.bodies[{k}]"
        body = {"label": _field(b, "label", where, "str")}
        for key in ("mass", "gm"):
            if isinstance(b, dict) and key in b:
                body[key] = _field(b, key, where, "real")
        body["q"] = _field(b, "q", where, "vec3")
        body["v"] = _field(b, "v", where, "vec3")
        bodies.append(body)
    span = _field(data, "t_span", source)
    if (not isinstance(span, list) or len(span) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in span)):
        raise ParseError(f"{source}.t_span: expected [t0, T]")
    units = data.get("units", "")
    extra = {k: v for k, v in data.items() if k not in ("name", "G", "bodies", "t_span", "units")}
    return ProblemFile(name, G, bodies, [float(span[0]), float(span[1])], str(units), extra)


def parse_problem(text: str, source: str = "<problem>") -> ProblemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return problem_from_dict(data, source)


def read_problem(path) -> ProblemFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    return parse_problem(text, str(path))


def load_problem(path) -> tuple[SystemSpec, PhaseState, float]:
    """Read a problem file and return ``(spec, state, T)``.

    Raises :class:`ParseError` for malformed files (with the offending line
    or field) and :class:`InvariantError` for physically invalid ones.
    """
    return read_problem(path).to_system()


def save_problem(problem: ProblemFile, path) -> None:
    Path(path).write_text(json.dumps(problem.to_dict(), indent=2) + "\n", encoding="utf-8")


def problem_from_state(name: str, spec: SystemSpec, state: PhaseState, T: float, units: str = "") -> ProblemFile:
    bodies = [{"label": lab, "mass": float(m), "q": q.tolist(), "v": v.tolist()}
              for lab, m, q, v in zip(spec.labels, spec.masses, state.q, state.v)]
    return ProblemFile(name, spec.G, bodies, [state.t, float(T)], units)


# --- built-in problems --------------------------------------------------------

def gen_pythagorean() -> ProblemFile:
    """Three bodies of masses 3, 4, 5 at rest on a 3:4:5 right triangle, T = 63."""
    bodies = [
        {"label": "m5", "mass": 5.0, "q": [1.0, -1.0, 0.0], "v": [0.0, 0.0, 0.0]},
        {"label": "m4", "mass": 4.0, "q": [-2.0, -1.0, 0.0], "v": [0.0, 0.0, 0.0]},
        {"label": "m3", "mass": 3.0, "q": [1.0, 3.0, 0.0], "v": [0.0, 0.0, 0.0]},
    ]
    return ProblemFile("pythagorean", 1.0, bodies, [0.0, 63.0], "G = 1")


def gen_binary_visitor(speed: float = 100.0, eccentricity: float = 0.9, semi_major: float = 10.0,
                       T: float = 1.0) -> ProblemFile:
    """Eccentric binary at pericenter crossed by a light, fast visitor.

    Masses are 2 and 1 (binary) and 0.02 (visitor), ``G = 1``.  The binary
    lies on the x-axis around the origin with separation ``a (1 - e)`` and the
    vis-viva pericenter speed; the visitor starts at the origin moving along
    +z with ``speed``.  The common drift is removed so the total momentum is 0.
    """
    if not speed > 0:
        raise InvariantError("speed must be positive")
    m1, m2, m3 = 2.0, 1.0, 0.02
    mu = m1 + m2
    rp = semi_major * (1.0 - eccentricity)
    vp = math.sqrt(mu * (1.0 + eccentricity) / rp)
    q = np.array([[-m2 / mu * rp, 0.0, 0.0], [m1 / mu * rp, 0.0, 0.0], [0.0, 0.0, 0.0]])
    v = np.array([[0.0, -m2 / mu * vp, 0.0], [0.0, m1 / mu * vp, 0.0], [0.0, 0.0, speed]])
    masses = np.array([m1, m2, m3])
    v -= masses @ v / masses.sum()
    bodies = [{"label": lab, "mass": float(m), "q": qi.tolist(), "v": vi.tolist()}
              for lab, m, qi, vi in zip(("primary", "secondary", "visitor"), masses, q, v)]
    return ProblemFile(f"binary-visitor-{speed:g}", 1.0, bodies, [0.0, float(T)], "G = 1")


def sample_path(name: str = "solar_system_sample.json"):
    """Path of a bundled data file (sample problem or schema)."""
    return resources.files("renorm_nbody.data").joinpath(name)


GENERATORS = {"pythagorean": gen_pythagorean, "binary-visitor": gen_binary_visitor}
