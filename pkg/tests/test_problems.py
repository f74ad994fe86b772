import json
import math

import jsonschema
import numpy as np
import pytest

from renorm_nbody.dynamics import energies, total_momentum
from renorm_nbody.errors import InvariantError, ParseError
from renorm_nbody.problems import (gen_binary_visitor, gen_pythagorean, load_problem, parse_problem,
                                   problem_from_state, read_problem, sample_path, save_problem)

SCHEMA = json.loads(sample_path("problem.schema.json").read_text(encoding="utf-8"))


def minimal(**over):
    data = {"name": "two", "G": 1.0, "t_span": [0, 1],
            "bodies": [{"label": "a", "mass": 1.0, "q": [0, 0, 0], "v": [0, 0, 0]},
                       {"label": "b", "mass": 1.0, "q": [1, 0, 0], "v": [0, 0, 0]}]}
    data.update(over)
    return data


def test_pythagorean_triangle():
    spec, state, T = gen_pythagorean().to_system()
    d = [np.linalg.norm(state.q[a] - state.q[b]) for a, b in ((0, 1), (0, 2), (1, 2))]
    # the side opposite each mass has length equal to that mass
    assert d == pytest.approx([3.0, 4.0, 5.0], rel=1e-15)
    np.testing.assert_array_equal(spec.masses, [5.0, 4.0, 3.0])
    assert T == 63.0 and state.t == 0.0
    np.testing.assert_allclose(spec.masses @ state.q, 0.0, atol=1e-15)


def test_binary_visitor_geometry():
    spec, state, T = gen_binary_visitor(100.0).to_system()
    np.testing.assert_array_equal(spec.masses, [2.0, 1.0, 0.02])
    assert state.q[0, 0] == pytest.approx(-1 / 3) and state.q[1, 0] == pytest.approx(2 / 3)
    rel_v = state.v[1] - state.v[0]
    assert np.linalg.norm(rel_v) == pytest.approx(math.sqrt(5.7), rel=1e-15)
    assert rel_v @ (state.q[1] - state.q[0]) == 0.0  # pericenter: velocity normal to separation
    np.testing.assert_allclose(total_momentum(spec, state.v), 0.0, atol=1e-14)
    vis = state.v[2] - (spec.masses @ state.v) / spec.masses.sum()
    assert vis[2] == pytest.approx(100.0 * (1 - 0.02 / 3.02), rel=1e-14)
    assert T == 1.0


def test_binary_visitor_orbit_elements():
    """Vis-viva: a = 10 and e = 0.9 recovered from the relative state of the binary."""
    spec, state, _ = gen_binary_visitor(50.0).to_system()
    r = state.q[1] - state.q[0]
    w = state.v[1] - state.v[0]
    mu = 3.0
    a = 1 / (2 / np.linalg.norm(r) - w @ w / mu)
    h = np.cross(r, w)
    e = math.sqrt(1 - h @ h / (mu * a))
    assert a == pytest.approx(10.0, rel=1e-12) and e == pytest.approx(0.9, rel=1e-12)


def test_visitor_speed_validation():
    with pytest.raises(InvariantError):
        gen_binary_visitor(0.0)


@pytest.mark.parametrize("problem", [gen_pythagorean(), gen_binary_visitor(200.0)], ids=lambda p: p.name)
def test_round_trip_and_schema(tmp_path, problem):
    path = tmp_path / "p.json"
    save_problem(problem, path)
    jsonschema.validate(json.loads(path.read_text()), SCHEMA)
    spec, state, T = load_problem(path)
    spec0, state0, T0 = problem.to_system()
    np.testing.assert_array_equal(state.q, state0.q)
    np.testing.assert_array_equal(state.v, state0.v)
    assert (T, spec.G) == (T0, spec0.G)
    assert energies(spec, state.q, state.v) == energies(spec0, state0.q, state0.v)


def test_problem_from_state_round_trip():
    spec, state, T = gen_pythagorean().to_system()
    again = problem_from_state("copy", spec, state, T).to_system()
    np.testing.assert_array_equal(again[1].q, state.q)
    assert again[0].labels == spec.labels


def test_gm_only_file():
    data = minimal(G=2.0)
    for b in data["bodies"]:
        b["gm"] = b.pop("mass")
    spec, _, _ = parse_problem(json.dumps(data)).to_system()
    np.testing.assert_allclose(spec.masses, [0.5, 0.5])
    np.testing.assert_allclose(spec.gm, [1.0, 1.0])


@pytest.mark.parametrize("mutate,message", [
    (lambda d: d["bodies"][0].update(gm=1.0), "exactly one"),
    (lambda d: d["bodies"][0].pop("mass"), "exactly one"),
    (lambda d: d["bodies"][1].update(q=[0, 0, 0]), "coincide"),
    (lambda d: d.update(t_span=[1, 1]), "increasing"),
    (lambda d: d["bodies"].pop(), "at least two"),
    (lambda d: d["bodies"][1].update(mass=-1.0), "positive"),
    (lambda d: d.update(G=0.0), "positive"),
])
def test_invariant_errors(mutate, message):
    data = minimal()
    mutate(data)
    with pytest.raises(InvariantError, match=message):
        parse_problem(json.dumps(data)).to_system()


def test_mixed_mass_and_gm():
    data = minimal()
    data["bodies"][1]["gm"] = data["bodies"][1].pop("mass")
    with pytest.raises(InvariantError, match="mixing"):
        parse_problem(json.dumps(data)).to_system()


@pytest.mark.parametrize("text,where", [
    ('{"name": "x",\n "G": 1,,}', "<problem>:2:9"),
    ('[]', "top level"),
    (json.dumps(minimal(G="one")), "<problem>.G"),
    (json.dumps(minimal(t_span=[0])), "t_span"),
])
def test_parse_errors_carry_context(text, where):
    with pytest.raises(ParseError, match=where.replace("[", r"\[").replace(".", r"\.")):
        parse_problem(text)


def test_bad_vector_names_body():
    data = minimal()
    data["bodies"][1]["v"] = [0, 0]
    with pytest.raises(ParseError, match=r"bodies\[1\]\.v"):
        parse_problem(json.dumps(data))


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        read_problem(tmp_path / "absent.json")


def test_bundled_sample():
    problem = read_problem(sample_path())
    jsonschema.validate(problem.to_dict(), SCHEMA)
    spec, state, T = problem.to_system()
    assert spec.n_bodies == 9 and T == 2000.0
    assert spec.G == pytest.approx(0.01720209895 ** 2)
