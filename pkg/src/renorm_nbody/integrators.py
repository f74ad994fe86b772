"""Constant-step Taylor integration and explicit embedded Runge-Kutta integration.

Every integrator advances the extended state ``y = (q, v, t)`` in the
independent variable ``tau``; with the identity renormalization ``s0`` this
is ordinary integration in physical time.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .dynamics import PhaseState, SystemSpec, energies, total_momentum
from .errors import CollisionError, ConvergenceError, DomainError, MaxStepsError, StepWarning
from .renorm import S0, RenormChoice, rhs_vector
from .series import DEFAULT_ORDER, SeriesBundle, horner, jet_expansion, radius_estimate, taylor_coeffs
from .tableau import ButcherTableau, verner98

MAX_STEPS = 10_000_000
MODES = ("taylor", "rk", "rk_adaptive")


@dataclass
class IntegratorConfig:
    """How to integrate and where to stop.

    ``mode`` is ``"taylor"`` (constant ``dtau``, order ``order``), ``"rk"``
    (constant ``dtau``) or ``"rk_adaptive"`` (``rtol``/``atol``).  Exactly one
    of ``tau_end`` (fictitious time) and ``t_end`` (physical time) must be set;
    the last step is shortened to land on it exactly.
    """

    mode: str = "taylor"
    dtau: float | None = None
    order: int = DEFAULT_ORDER
    rtol: float = 1e-13
    atol: float = 1e-13
    tableau: ButcherTableau | None = None
    t_end: float | None = None
    tau_end: float | None = None
    stride: int = 1
    max_steps: int = MAX_STEPS

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if self.mode in ("taylor", "rk") and not (self.dtau is not None and self.dtau > 0):
            raise DomainError("constant-step modes need dtau > 0")
        if self.mode == "rk_adaptive" and not (self.rtol > 0 and self.atol > 0):
            raise DomainError("rtol and atol must be positive")
        if (self.t_end is None) == (self.tau_end is None):
            raise DomainError("set exactly one of t_end and tau_end")
        if self.stride < 1:
            raise DomainError("stride must be >= 1")


@dataclass
class Trajectory:
    """Sampled solution: ``tau`` and ``t`` (M,), ``q`` and ``v`` (M, N, 3)."""

    spec: SystemSpec
    choice: RenormChoice
    tau: np.ndarray
    t: np.ndarray
    q: np.ndarray
    v: np.ndarray
    accepted: int = 0
    rejected: int = 0
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.tau)

    def state(self, k: int) -> PhaseState:
        return PhaseState(self.q[k], self.v[k], self.t[k], self.tau[k])

    @property
    def final(self) -> PhaseState:
        return self.state(-1)

    def energy(self) -> np.ndarray:
        if "energy" not in self.diagnostics:
            self.diagnostics["energy"] = np.array(
                [energies(self.spec, q, v)[2] for q, v in zip(self.q, self.v)])
        return self.diagnostics["energy"]

    def max_energy_error(self) -> float:
        h = self.energy()
        return float(np.max(np.abs(h - h[0])) / abs(h[0]))

    def momentum(self) -> np.ndarray:
        return np.array([total_momentum(self.spec, v) for v in self.v])


class _Recorder:
    def __init__(self, state: PhaseState, stride: int):
        self.stride = stride
        self.tau, self.t, self.q, self.v = [state.tau], [state.t], [state.q], [state.v]
        self.count = 0

    def push(self, state: PhaseState, final: bool = False):
        self.count += 1
        if final or self.count % self.stride == 0:
            self.tau.append(state.tau)
            self.t.append(state.t)
            self.q.append(state.q)
            self.v.append(state.v)

    def build(self, spec, choice, accepted, rejected) -> Trajectory:
        return Trajectory(spec, choice, np.array(self.tau), np.array(self.t),
                          np.array(self.q), np.array(self.v), accepted, rejected)


# --- Taylor -----------------------------------------------------------------

def _advance(bundle: SeriesBundle, state: PhaseState, h: float) -> PhaseState:
    q, v, t = bundle.evaluate(h)
    return PhaseState(q, v, t, state.tau + h)


def _tail_check(bundle: SeriesBundle, state: PhaseState, h: float):
    d = bundle.coefficient_norms()
    size = max(np.max(np.abs(state.q)), np.max(np.abs(state.v)), 1e-300)
    tail = d[-1] * abs(h) ** bundle.order
    if tail > size:
        raise ConvergenceError(f"Taylor series diverges over the step (tail {tail:.3g}, state size "
                               f"{size:.3g}); the step crosses a singularity or is far too long")
    if tail > 1e-3 * size:
        warnings.warn(f"Taylor tail {tail:.3g} is large compared with the state size {size:.3g}; "
                      f"reduce the step", StepWarning, stacklevel=3)


def taylor_step(spec: SystemSpec, choice: RenormChoice | None, state: PhaseState, dtau: float,
                K: int = DEFAULT_ORDER) -> PhaseState:
    """One order-``K`` Taylor step of length ``dtau``.

    ``choice=None`` steps the physical-time equations (``tau`` then advances
    together with ``t``).
    """
    bundle = taylor_coeffs(spec, state, K, choice if choice is not None else S0)
    _tail_check(bundle, state, dtau)
    return _advance(bundle, state, dtau)


def _solve_t_series(bundle: SeriesBundle, target: float, h_max: float) -> float:
    """Smallest ``h`` in ``(0, h_max]`` with ``t(h) = target`` (``t`` is increasing)."""
    tc = bundle.t
    dt_c = tc[1:] * np.arange(1, len(tc))
    f = lambda h: float(horner(tc, h)) - target  # noqa: E731
    h = h_max * (target - tc[0]) / (f(h_max) + target - tc[0])
    for _ in range(50):
        step = f(h) / float(horner(dt_c, h))
        h -= step
        if abs(step) <= 4e-16 * max(abs(h), 1e-300):
            break
    if not 0 <= h <= h_max * (1 + 1e-12):
        h = brentq(f, 0.0, h_max, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return min(h, h_max)


def _integrate_taylor(spec, choice, state, cfg, observer):
    rec = _Recorder(state, cfg.stride)
    steps = 0
    while True:
        if steps >= cfg.max_steps:
            raise MaxStepsError(f"more than {cfg.max_steps} steps")
        bundle = taylor_coeffs(spec, state, cfg.order, choice)
        if observer is not None:
            observer(state, bundle)
        h = cfg.dtau
        final = False
        if cfg.tau_end is not None:
            remaining = cfg.tau_end - state.tau
            if remaining <= h * (1 + 1e-12):
                h, final = remaining, True
        else:
            t_next = float(horner(bundle.t, h))
            if t_next >= cfg.t_end:
                h, final = _solve_t_series(bundle, cfg.t_end, h), True
        _tail_check(bundle, state, h)
        state = _advance(bundle, state, h)
        if final and cfg.t_end is not None:
            state = state.replace(t=cfg.t_end)
        if final and cfg.tau_end is not None:
            state = state.replace(tau=cfg.tau_end)
        steps += 1
        rec.push(state, final)
        if final:
            break
    return rec.build(spec, choice, steps, 0)


# --- Runge-Kutta ---------------------------------------------------------------

def rk_step(f: Callable, y: np.ndarray, h: float, tableau: ButcherTableau, f0: np.ndarray | None = None):
    """One explicit RK step on the flat state; returns ``(y_new, error_estimate)``.

    ``error_estimate = h * sum_i (b_i - bhat_i) k_i``.  A
    :class:`CollisionError` raised by a stage aborts the step.
    """
    a, c = tableau.a, tableau.c
    s = tableau.stages
    k = np.empty((s, len(y)))
    k[0] = f(y) if f0 is None else f0
    for i in range(1, s):
        row = a[i, :i]
        nz = np.nonzero(row)[0]
        k[i] = f(y + h * (row[nz] @ k[nz]))
    return y + h * (tableau.b @ k), h * (tableau.error_weights @ k)


def rk_step_state(spec: SystemSpec, choice: RenormChoice, state: PhaseState, h: float,
                  tableau: ButcherTableau | None = None):
    """:func:`rk_step` on a :class:`PhaseState`; returns ``(state, error_estimate)``."""
    tableau = tableau or verner98()
    y, err = rk_step(rhs_vector(choice, spec), state.to_vector(), h, tableau)
    return PhaseState.from_vector(y, state.tau + h), err


def _error_norm(err, y0, y1, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / sc) ** 2)))


def _initial_step(f, y0, f0, order, rtol, atol):
    sc = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(y0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    h1 = max(1e-6, h0 * 1e-3) if max(d1, d2) <= 1e-15 else (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1)


def _hit_t_end(f, y, h_max, t_end, tableau):
    """Step length in ``(0, h_max]`` landing on physical time ``t_end``."""
    g = lambda h: rk_step(f, y, h, tableau)[0][-1] - t_end  # noqa: E731
    if g(h_max) < 0:
        return h_max
    return brentq(g, 0.0, h_max, xtol=1e-15 * max(h_max, 1.0), rtol=4 * np.finfo(float).eps)


def _integrate_rk_constant(spec, choice, state, cfg, tableau):
    f = rhs_vector(choice, spec)
    rec = _Recorder(state, cfg.stride)
    y, tau = state.to_vector(), state.tau
    steps = 0
    while True:
        if steps >= cfg.max_steps:
            raise MaxStepsError(f"more than {cfg.max_steps} steps")
        h, final = cfg.dtau, False
        if cfg.tau_end is not None:
            remaining = cfg.tau_end - tau
            if remaining <= h * (1 + 1e-9):
                h, final = remaining, True
        y_new, _ = rk_step(f, y, h, tableau)
        if cfg.t_end is not None and y_new[-1] >= cfg.t_end:
            h = _hit_t_end(f, y, h, cfg.t_end, tableau)
            y_new, _ = rk_step(f, y, h, tableau)
            y_new[-1] = cfg.t_end
            final = True
        tau = cfg.tau_end if final and cfg.tau_end is not None else tau + h
        y = y_new
        steps += 1
        rec.push(PhaseState.from_vector(y, tau), final)
        if final:
            break
    return rec.build(spec, choice, steps, 0)


def _integrate_rk_adaptive(spec, choice, state, cfg, tableau):
    f = rhs_vector(choice, spec)
    rec = _Recorder(state, cfg.stride)
    y, tau = state.to_vector(), state.tau
    end_is_t = cfg.t_end is not None and not choice.is_identity
    if cfg.t_end is not None and choice.is_identity:
        end = tau + (cfg.t_end - state.t)
    else:
        end = cfg.t_end if end_is_t else cfg.tau_end
    exponent = 1.0 / (tableau.order_hat + 1)
    f0 = f(y)
    h = _initial_step(f, y, f0, tableau.order, cfg.rtol, cfg.atol)
    accepted = rejected = 0
    while True:
        if accepted + rejected >= cfg.max_steps:
            raise MaxStepsError(f"more than {cfg.max_steps} steps")
        if h <= 16 * np.finfo(float).eps * max(abs(tau), 1.0):
            raise ConvergenceError(f"step size underflow at tau = {tau!r} (t = {y[-1]!r})")
        final = False
        if not end_is_t and tau + h >= end - 1e-15 * abs(end):
            h, final = end - tau, True
        try:
            y_new, err = rk_step(f, y, h, tableau, f0)
        except CollisionError:
            rejected += 1
            h *= 0.5
            continue
        en = _error_norm(err, y, y_new, cfg.rtol, cfg.atol)
        if not np.isfinite(en) or en > 1.0:
            rejected += 1
            h *= max(0.2, 0.9 * en ** -exponent) if np.isfinite(en) else 0.2
            continue
        if end_is_t and y_new[-1] >= end:
            h = _hit_t_end(f, y, h, end, tableau)
            y_new, _ = rk_step(f, y, h, tableau, f0)
            y_new[-1] = end
            final = True
        if final and choice.is_identity and cfg.t_end is not None:
            y_new[-1] = cfg.t_end
        y = y_new
        tau = end if final and not end_is_t else tau + h
        accepted += 1
        rec.push(PhaseState.from_vector(y, tau), final)
        if final:
            break
        f0 = f(y)
        h *= min(5.0, max(0.2, 0.9 * (en if en > 0 else 1e-10) ** -exponent))
    return rec.build(spec, choice, accepted, rejected)


def integrate(spec: SystemSpec, choice: RenormChoice, state0: PhaseState, config: IntegratorConfig,
              observer: Callable[[PhaseState, SeriesBundle], None] | None = None) -> Trajectory:
    """Integrate from ``state0`` according to ``config``.

    ``observer`` (Taylor mode only) is called with every state and its local
    series bundle before the step is taken.
    """
    if config.tau_end is not None and config.tau_end <= state0.tau:
        raise DomainError("tau_end must lie after the initial tau")
    if config.t_end is not None and config.t_end <= state0.t:
        raise DomainError("t_end must lie after the initial t")
    if config.mode == "taylor":
        return _integrate_taylor(spec, choice, state0, config, observer)
    tableau = config.tableau or verner98()
    if config.mode == "rk":
        return _integrate_rk_constant(spec, choice, state0, config, tableau)
    return _integrate_rk_adaptive(spec, choice, state0, config, tableau)


# --- reference solution ------------------------------------------------------

PRECISIONS = {"f64": np.float64, "extended": np.longdouble}


def _tail_limited_step(bundle: SeriesBundle, eps: float) -> float:
    """Step at which the last retained term drops to ``eps`` times the state size.

    Entire solutions (a circular orbit, for one) have coefficients that fall
    faster than geometrically; their radius estimate is large and a fixed
    fraction of it would leave a visible truncation error.
    """
    d = bundle.coefficient_norms()
    if d[-1] <= 0:
        return math.inf
    return float((eps * max(d[0], d[1]) / d[-1]) ** (1.0 / bundle.order))


def reference_solution(spec: SystemSpec, state0: PhaseState, times, K: int = DEFAULT_ORDER,
                       step_fraction: float = 0.1, precision: str = "f64",
                       max_steps: int = MAX_STEPS) -> list[PhaseState]:
    """States at the requested physical times from order-``K`` Taylor steps.

    Steps are ``step_fraction`` times the local radius estimate, shortened if
    the last series term would otherwise exceed rounding level.  Requested
    times inside a step are read off that step's series; the last step is
    shortened to end exactly on the last requested time, so the step sequence
    does not depend on the intermediate times.  ``times`` must be
    non-decreasing and not precede ``state0.t``.

    ``precision="extended"`` carries the state and the jets in
    ``np.longdouble`` (64-bit significand on x86-64) and rounds the returned
    states to binary64.  Chaotic problems need this: binary64 runs of the
    three-body test problems decorrelate at the ``1e-2`` level.
    """
    if precision not in PRECISIONS:
        raise DomainError(f"precision must be one of {sorted(PRECISIONS)}")
    dtype = PRECISIONS[precision]
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (len(times) and times[0] < state0.t):
        raise DomainError("times must be non-decreasing and start at or after state0.t")
    q = np.asarray(state0.q, dtype=dtype)
    v = np.asarray(state0.v, dtype=dtype)
    t = dtype(state0.t)
    eps = float(np.finfo(dtype).eps)
    out = []
    k = 0
    steps = 0

    def emit(qk, vk, target):
        out.append(PhaseState(qk.astype(float), vk.astype(float), float(target), float(target)))

    while k < len(times) and times[k] == state0.t:
        emit(q, v, times[k])
        k += 1
    while k < len(times):
        if steps >= max_steps:
            raise MaxStepsError(f"more than {max_steps} steps")
        bundle = jet_expansion(spec, q, v, t, t, K, None, dtype)
        h = dtype(min(step_fraction * radius_estimate(bundle), _tail_limited_step(bundle, eps)))
        if not np.isfinite(h) or h <= 0:
            raise ConvergenceError("radius estimate failed in the reference integration")
        last = dtype(times[-1])
        if t + h >= last:
            h = last - t
        t_next = last if t + h >= last else t + h
        while k < len(times) and dtype(times[k]) <= t_next:
            dt = dtype(times[k]) - t
            emit(horner(bundle.q, dt), horner(bundle.v, dt), times[k])
            k += 1
        q, v, t = horner(bundle.q, h), horner(bundle.v, h), t_next
        steps += 1
    return out
