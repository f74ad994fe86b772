import math

import numpy as np
import pytest
from hypothesis import given, settings

from renorm_nbody import _jets
from renorm_nbody.dynamics import PhaseState, SystemSpec
from renorm_nbody.errors import CollisionError, DomainError, EstimateError
from renorm_nbody.renorm import KINDS, S0, S1, S4, RenormChoice, renormalized_rhs
from renorm_nbody.series import (PowerSeries, estimate_from_norms, horner, jet_expansion, radius_estimate,
                                 series_arith, taylor_coeffs)

from conftest import systems, unit_pair

ALL_CHOICES = [RenormChoice(k, 0.7 if k == "s3" else 1.0) for k in KINDS]


# --- scalar series ---------------------------------------------------------------

def test_product_of_conjugates():
    out = series_arith([1, 1, 0, 0], [1, -1, 0, 0], "mul")
    np.testing.assert_array_equal(out.coefficients, [1, 0, -1, 0])


def test_reciprocal_is_geometric():
    out = PowerSeries([1, 1, 0, 0, 0, 0]) ** -1
    np.testing.assert_allclose(out.coefficients, [1, -1, 1, -1, 1, -1], atol=1e-15)
    np.testing.assert_allclose(series_arith([1.0] * 6, [1, -1, 0, 0, 0, 0], "div").coefficients,
                               [1, 2, 3, 4, 5, 6], atol=1e-14)


def test_sqrt_of_square():
    sq = PowerSeries([1, 2, 1, 0, 0, 0])
    np.testing.assert_allclose((sq ** 0.5).coefficients, [1, 1, 0, 0, 0, 0], atol=1e-15)


def test_binomial_coefficients():
    p = -1.5
    out = (PowerSeries([1, 1] + [0] * 8) ** p).coefficients
    expected = [math.prod(p - j for j in range(k)) / math.factorial(k) for k in range(10)]
    np.testing.assert_allclose(out, expected, rtol=1e-14)


def test_series_errors():
    with pytest.raises(DomainError):
        PowerSeries([0.0, 1.0]) ** 0.5
    with pytest.raises(DomainError):
        series_arith([1, 2], [0, 1], "div")
    with pytest.raises(DomainError):
        series_arith([1, 2], [0, 1], "exp")
    with pytest.raises(DomainError):
        PowerSeries([1.0, np.inf])


def test_truncation_and_horner():
    a = PowerSeries([1, 2, 3]) + PowerSeries([1, 1])
    np.testing.assert_array_equal(a.coefficients, [2, 3])
    assert PowerSeries([1, 2, 3])(2.0) == 17.0
    np.testing.assert_array_equal(PowerSeries([1, 2, 3]).derivative().coefficients, [2, 6])
    np.testing.assert_allclose(horner(np.arange(4.0)[:, None] * [1, 2], 0.5), [1.375, 2.75])


# --- N-body jets ----------------------------------------------------------------

def test_unit_pair_physical_series():
    spec, state = unit_pair()
    b = taylor_coeffs(spec, state, 6)
    np.testing.assert_array_equal(b.q[:2, 0], 0.0)
    assert b.q[2, 0, 0] == pytest.approx(0.5, rel=1e-15)
    np.testing.assert_allclose(b.v[1, 0], [1, 0, 0], rtol=1e-15)
    np.testing.assert_array_equal(b.t, [0, 1, 0, 0, 0, 0, 0])
    assert b.physical and b.s is None


def test_identity_bundle_matches_physical(pythagorean):
    spec, state, _ = pythagorean
    phys = taylor_coeffs(spec, state, 20)
    ident = taylor_coeffs(spec, state, 20, S0)
    np.testing.assert_array_equal(ident.q, phys.q)
    np.testing.assert_array_equal(ident.v, phys.v)
    assert ident.t[0] == state.t and ident.t[1] == 1.0 and not np.any(ident.t[2:])


def test_circular_orbit_coefficients(circular):
    spec, state = circular
    b = taylor_coeffs(spec, state, 12)
    for k in range(11):
        cos_k = math.cos(k * math.pi / 2) / math.factorial(k)
        sin_k = math.sin(k * math.pi / 2) / math.factorial(k)
        np.testing.assert_allclose(b.q[k, 1, :2], [0.5 * cos_k, 0.5 * sin_k], atol=1e-12)
        np.testing.assert_allclose(b.q[k, 0, :2], [-0.5 * cos_k, -0.5 * sin_k], atol=1e-12)


@pytest.mark.parametrize("choice", ALL_CHOICES, ids=str)
def test_compiled_kernel_matches_arrays(pythagorean, choice):
    spec, state, _ = pythagorean
    state = state.replace(v=np.array([[0.3, 0.1, 0], [-0.2, 0.4, 0.1], [0.0, -0.5, 0.2]]))
    ref = jet_expansion(spec, state.q, state.v, 0.0, 0.0, 25, choice, use_compiled=False)
    got = jet_expansion(spec, state.q, state.v, 0.0, 0.0, 25, choice)
    for name in ("q", "v", "t"):
        a, b = getattr(got, name), getattr(ref, name)
        np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-13 * np.abs(b).max())


def test_compiled_flag_reports_numba():
    try:
        import numba  # noqa: F401
    except ImportError:
        assert not _jets.COMPILED
    else:
        assert _jets.COMPILED


def test_extended_precision_jets(pythagorean):
    spec, state, _ = pythagorean
    b = jet_expansion(spec, state.q, state.v, 0.0, 0.0, 20, S1, dtype=np.longdouble)
    assert b.q.dtype == np.longdouble
    ref = taylor_coeffs(spec, state, 20, S1)
    np.testing.assert_allclose(b.q.astype(float), ref.q, rtol=1e-12, atol=1e-14 * np.abs(ref.q).max())


@settings(max_examples=50, deadline=None)
@given(systems(max_bodies=4))
def test_termwise_integration(system):
    spec, q, v = system
    for choice in ALL_CHOICES[1:]:
        b = taylor_coeffs(spec, PhaseState(q, v), 12, choice)
        k = np.arange(1, 13)
        np.testing.assert_allclose(b.t[1:] * k, b.s, rtol=1e-13)
        for n in range(12):
            expected = np.einsum("l,lnd->nd", b.s[: n + 1], b.v[n::-1])
            np.testing.assert_allclose(b.q[n + 1] * (n + 1), expected, rtol=1e-10,
                                       atol=1e-12 * np.abs(expected).max())


@pytest.mark.parametrize("choice", ALL_CHOICES[1:], ids=str)
def test_series_derivative_is_vector_field(pythagorean, choice):
    """The derivative of the truncated series equals the vector field along it."""
    spec, state, _ = pythagorean
    b = taylor_coeffs(spec, state, 30, choice)
    h = 0.3 * radius_estimate(b)
    q, v, t = b.evaluate(h)
    dq, dv, dt = b.evaluate_derivative(h)
    fq, fv, ft = renormalized_rhs(choice, spec, PhaseState(q, v, t, h))
    np.testing.assert_allclose(dq, fq, rtol=1e-10, atol=1e-12 * np.abs(fq).max())
    np.testing.assert_allclose(dv, fv, rtol=1e-10, atol=1e-12 * np.abs(fv).max())
    assert dt == pytest.approx(ft, rel=1e-10)


def test_order_limits(circular):
    spec, state = circular
    for K in (3, 61):
        with pytest.raises(DomainError):
            taylor_coeffs(spec, state, K)


def test_collision_rejected():
    spec = SystemSpec([1.0, 1.0])
    with pytest.raises(CollisionError):
        taylor_coeffs(spec, PhaseState(np.zeros((2, 3)), np.zeros((2, 3))), 10)


# --- radius estimation ---------------------------------------------------------

def test_geometric_coefficients():
    d = 2.0 ** np.arange(31)
    est = estimate_from_norms(d)
    assert est.radius == pytest.approx(0.5, rel=1e-6)
    assert est.ratio_estimate == pytest.approx(0.5)


def test_algebraic_prefactor():
    k = np.arange(31.0)
    d = (k + 1) ** 3 * 2.0 ** k
    assert estimate_from_norms(d).radius == pytest.approx(0.5, rel=0.05)


def test_pole_series_oracle():
    """1/(1 - x/r)^2 has radius r; coefficients (k+1)/r^k."""
    k = np.arange(31.0)
    est = estimate_from_norms((k + 1) / 1.7 ** k)
    assert est.radius == pytest.approx(1.7, rel=0.02)


def test_estimate_errors():
    with pytest.raises(EstimateError):
        estimate_from_norms(np.ones(8))
    d = np.zeros(31)
    d[:10] = 1.0
    with pytest.raises(EstimateError):
        estimate_from_norms(d)


def test_free_fall_radius():
    """Rest start at separation r: the collision time (pi/2) sqrt(r^3 / 2 mu) sets the radius."""
    spec, state = unit_pair()
    expected = 0.5 * math.pi * math.sqrt(1.0 / (2 * 2.0))
    assert radius_estimate(taylor_coeffs(spec, state, 30)) == pytest.approx(expected, rel=0.02)


@settings(max_examples=30, deadline=None)
@given(systems(max_bodies=4))
def test_radius_scale_covariance(system):
    spec, q, v = system
    a = 3.7
    r1 = radius_estimate(taylor_coeffs(spec, PhaseState(q, v), 30))
    r2 = radius_estimate(taylor_coeffs(spec, PhaseState(a * q, v / math.sqrt(a)), 30))
    assert r2 == pytest.approx(a ** 1.5 * r1, rel=1e-8)


def test_renormalized_radius_of_velocity_free_choice(circular):
    """On the circular orbit s4 is constant, so tau is a fixed multiple of t."""
    spec, state = circular
    b = taylor_coeffs(spec, state, 30, S4)
    s = b.s[0]
    assert s == pytest.approx(1.0, rel=1e-15)
    np.testing.assert_allclose(b.s[1:], 0.0, atol=1e-14)


def test_finite_difference_derivative(pythagorean):
    spec, state, _ = pythagorean
    b = taylor_coeffs(spec, state, 30, S1)
    x, h = 0.2 * radius_estimate(b), 1e-4
    q_plus, v_plus, _ = b.evaluate(x + h)
    q_minus, v_minus, _ = b.evaluate(x - h)
    dq, dv, _ = b.evaluate_derivative(x)
    # central differences: truncation error O(h^2), roundoff O(eps / h)
    np.testing.assert_allclose((q_plus - q_minus) / (2 * h), dq, atol=1e-7 * np.abs(dq).max())
    np.testing.assert_allclose((v_plus - v_minus) / (2 * h), dv, atol=1e-7 * np.abs(dv).max())
