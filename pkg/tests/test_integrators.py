import math
import warnings

import numpy as np
import pytest

from renorm_nbody.dynamics import PhaseState, SystemSpec
from renorm_nbody.errors import ConvergenceError, DomainError, MaxStepsError, StepWarning
from renorm_nbody.integrators import (IntegratorConfig, integrate, reference_solution, rk_step_state,
                                      taylor_step)
from renorm_nbody.renorm import S0, S1, S2, S3, S4

from conftest import circular_state

TWO_PI = 2 * math.pi


def eccentric_pair(e=0.5):
    """Equal masses 1/2 at pericenter 1 with eccentricity ``e``; returns (spec, state, period)."""
    v = math.sqrt(1 + e)
    state = PhaseState([[-0.5, 0, 0], [0.5, 0, 0]], [[0, -v / 2, 0], [0, v / 2, 0]])
    return SystemSpec([0.5, 0.5]), state, TWO_PI * (1 / (1 - e)) ** 1.5


def test_config_validation():
    with pytest.raises(DomainError):
        IntegratorConfig("euler", dtau=0.1, t_end=1.0)
    with pytest.raises(DomainError):
        IntegratorConfig("taylor", t_end=1.0)
    with pytest.raises(DomainError):
        IntegratorConfig("rk", dtau=0.1, t_end=1.0, tau_end=1.0)
    with pytest.raises(DomainError):
        IntegratorConfig("rk_adaptive")
    with pytest.raises(DomainError):
        IntegratorConfig("rk_adaptive", rtol=0.0, t_end=1.0)


def test_taylor_circular_period(circular):
    spec, state = circular
    traj = integrate(spec, S0, state, IntegratorConfig("taylor", dtau=TWO_PI / 50, tau_end=TWO_PI))
    exact = circular_state(TWO_PI)
    assert np.abs(traj.final.q - exact.q).max() < 1e-12 * 0.5
    assert np.abs(traj.final.v - exact.v).max() < 1e-12 * 0.5
    assert traj.final.t == pytest.approx(TWO_PI, rel=1e-15)


def test_taylor_many_low_order_steps(circular):
    spec, state = circular
    traj = integrate(spec, S0, state, IntegratorConfig("taylor", dtau=0.01, order=20, tau_end=1.0))
    assert len(traj) == 101
    exact = circular_state(1.0)
    np.testing.assert_allclose(traj.final.q, exact.q, atol=1e-14)


@pytest.mark.parametrize("choice", [S1, S2, S3, S4], ids=str)
def test_renormalized_taylor_lands_on_t_end(choice):
    spec, state, period = eccentric_pair()
    traj = integrate(spec, choice, state, IntegratorConfig("taylor", dtau=0.05, t_end=period))
    assert traj.final.t == period
    np.testing.assert_allclose(traj.final.q, state.q, atol=1e-11)
    assert np.all(np.diff(traj.tau) > 0) and np.all(np.diff(traj.t) > 0)
    assert traj.max_energy_error() < 1e-12


def test_rk_order_on_eccentric_orbit():
    """Global error at one period scales like h^9 (slope fit over three step counts)."""
    spec, state, period = eccentric_pair()
    ns = np.array([64, 96, 128])
    errs = []
    for n in ns:
        traj = integrate(spec, S0, state, IntegratorConfig("rk", dtau=period / n, tau_end=period))
        errs.append(np.abs(traj.final.q - state.q).max())
    slope = np.polyfit(np.log(period / ns), np.log(errs), 1)[0]
    assert 8.5 <= slope <= 9.5, slope


def test_rk_order_on_circular_orbit(circular):
    """Halving h at one period shrinks the error by 2^9, within [2^8.5, 2^9.5]."""
    spec, state = circular
    errs = []
    for n in (12, 24):
        traj = integrate(spec, S0, state, IntegratorConfig("rk", dtau=TWO_PI / n, tau_end=TWO_PI))
        errs.append(np.abs(traj.final.q - circular_state(TWO_PI).q).max())
    assert 8.5 <= math.log2(errs[0] / errs[1]) <= 9.5, math.log2(errs[0] / errs[1])


def test_error_estimate_scales_like_embedded_order(circular):
    """Halving h shrinks the embedded error estimate by 2^9, up to a factor of 3."""
    spec, state = circular
    est = [np.abs(rk_step_state(spec, S0, state, h)[1]).max() for h in (0.4, 0.2)]
    assert 2 ** 9 / 3 <= est[0] / est[1] <= 2 ** 9 * 3
    assert est[0] < 1e-8


def test_adaptive_energy_and_endpoint():
    spec, state, period = eccentric_pair(0.8)
    traj = integrate(spec, S0, state, IntegratorConfig("rk_adaptive", rtol=1e-12, atol=1e-12, t_end=period))
    assert traj.final.t == period
    assert traj.max_energy_error() < 1e-10
    np.testing.assert_allclose(traj.final.q, state.q, atol=1e-8)
    assert np.all(np.diff(traj.t) > 0)
    assert traj.accepted > 10


@pytest.mark.parametrize("choice", [S1, S4], ids=str)
def test_adaptive_renormalized_t_end(choice):
    spec, state, period = eccentric_pair(0.8)
    traj = integrate(spec, choice, state, IntegratorConfig("rk_adaptive", rtol=1e-12, atol=1e-12,
                                                          t_end=period))
    assert traj.final.t == period
    np.testing.assert_allclose(traj.final.q, state.q, atol=1e-8)
    assert np.all(np.diff(traj.tau) > 0)


def test_momentum_conservation(pythagorean):
    spec, state, _ = pythagorean
    traj = integrate(spec, S1, state, IntegratorConfig("rk", dtau=0.01, tau_end=2.0))
    p = traj.momentum()
    assert np.abs(p).max() < 1e-13


def test_taylor_and_rk_agree(circular):
    spec, state = circular
    quarter = math.pi / 2
    a = integrate(spec, S1, state, IntegratorConfig("taylor", dtau=0.05, t_end=quarter))
    b = integrate(spec, S1, state, IntegratorConfig("rk", dtau=0.05, t_end=quarter))
    np.testing.assert_allclose(a.final.q, b.final.q, atol=1e-13)
    np.testing.assert_allclose(a.final.q, circular_state(quarter).q, atol=1e-13)


def test_two_half_steps_match_one_step(pythagorean):
    spec, state, _ = pythagorean
    one = taylor_step(spec, S1, state, 0.02)
    two = taylor_step(spec, S1, taylor_step(spec, S1, state, 0.01), 0.01)
    np.testing.assert_allclose(one.q, two.q, atol=1e-14)
    np.testing.assert_allclose(one.v, two.v, atol=1e-14)
    assert one.t == pytest.approx(two.t, rel=1e-14)


def test_oversized_step_warns(circular):
    spec, state = circular
    with pytest.warns(StepWarning):
        taylor_step(spec, None, state, 3.0, 10)


def test_stride_and_step_cap(circular):
    spec, state = circular
    traj = integrate(spec, S0, state, IntegratorConfig("taylor", dtau=0.1, tau_end=1.05, stride=4))
    assert traj.tau[-1] == 1.05 and len(traj) == 1 + 2 + 1
    with pytest.raises(MaxStepsError):
        integrate(spec, S0, state, IntegratorConfig("rk", dtau=0.01, tau_end=1.0, max_steps=10))
    with pytest.raises(DomainError):
        integrate(spec, S0, state, IntegratorConfig("rk", dtau=0.01, t_end=-1.0))


def test_reference_solution_circular(circular):
    spec, state = circular
    times = [0.0, 1.0, math.pi, TWO_PI]
    out = reference_solution(spec, state, times)
    assert [s.t for s in out] == times
    np.testing.assert_array_equal(out[0].q, state.q)
    for s in out:
        np.testing.assert_allclose(s.q, circular_state(s.t).q, atol=1e-13)


def test_reference_solution_step_halving(pythagorean):
    spec, state, _ = pythagorean
    a = reference_solution(spec, state, [1.0, 2.0], step_fraction=0.1)[-1]
    b = reference_solution(spec, state, [1.0, 2.0], step_fraction=0.05)[-1]
    np.testing.assert_allclose(a.q, b.q, atol=1e-13)
    with pytest.raises(DomainError):
        reference_solution(spec, state, [2.0, 1.0])
    with pytest.raises(DomainError):
        reference_solution(spec, state, [1.0], precision="quad")


def test_reference_extended_matches_f64_early(pythagorean):
    spec, state, _ = pythagorean
    a = reference_solution(spec, state, [1.5])[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        b = reference_solution(spec, state, [1.5], precision="extended")[0]
    np.testing.assert_allclose(a.q, b.q, atol=1e-13)


def test_step_across_collision_is_refused():
    spec = SystemSpec([1.0, 1.0])
    state = PhaseState([[0, 0, 0], [1, 0, 0]], np.zeros((2, 3)))
    with pytest.raises(ConvergenceError):
        integrate(spec, S0, state, IntegratorConfig("taylor", dtau=0.05, t_end=2.0))
    with pytest.raises(ConvergenceError):
        integrate(spec, S0, state, IntegratorConfig("rk_adaptive", rtol=1e-10, atol=1e-10, t_end=2.0))
