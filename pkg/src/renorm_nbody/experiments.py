"""Experiment pipelines: radius scans, strip widths and step-matched comparisons."""
from __future__ import annotations

import csv
import math
import time
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bounds import LAMBDA0, L_bound, compute_constants
from .dynamics import PhaseState, SystemSpec, energies
from .errors import CollisionError, ConvergenceError, DomainError, EstimateError, StepWarning
from .integrators import IntegratorConfig, Trajectory, integrate, reference_solution
from .problems import ProblemFile
from .renorm import S0, S1, RenormChoice
from .series import DEFAULT_ORDER, radius_estimate, taylor_coeffs


def _system(problem):
    """Accept a :class:`ProblemFile` or a ``(spec, state, T)`` tuple."""
    if isinstance(problem, ProblemFile):
        return problem.to_system()
    return problem


def default_dtau() -> float:
    """``beta / 2``, half the guaranteed strip half-width of ``s1``."""
    return compute_constants().beta / 2.0


# --- radius scan ----------------------------------------------------------------

@dataclass(frozen=True)
class RadiusSample:
    t: float
    tau: float
    rho: float
    inv_L: float

    @property
    def product(self) -> float:
        """``rho_hat * L``: how far the estimate exceeds the guaranteed lower bound."""
        return self.rho / self.inv_L


def radius_scan(problem, lam: float = LAMBDA0, stride: int = 1, dtau: float | None = None,
                K: int = DEFAULT_ORDER) -> list[RadiusSample]:
    """Radius estimate and lower bound ``1/L`` along an ``s1`` Taylor trajectory.

    Every ``stride``-th step (and the final state) the physical-time series at
    the current state gives ``rho_hat``; ``1/L(q, v, lam)`` is evaluated there
    too.
    """
    spec, state0, T = _system(problem)
    dtau = default_dtau() if dtau is None else dtau
    samples = []
    count = [0]

    def sample(state):
        rho = radius_estimate(taylor_coeffs(spec, state, K, None))
        samples.append(RadiusSample(state.t, state.tau, rho, L_bound(spec, state.q, state.v, lam).radius_lower))

    def observer(state, _bundle):
        if count[0] % stride == 0:
            sample(state)
        count[0] += 1

    traj = integrate(spec, S1, state0, IntegratorConfig("taylor", dtau=dtau, order=K, t_end=T), observer)
    sample(traj.final)
    return samples


# --- strip width ----------------------------------------------------------------

@dataclass(frozen=True)
class StripWidth:
    choice: str
    width: float
    scaled_width: float
    T_j: float
    steps: int
    dtau: float
    energy_error: float
    seconds: float


# a constant step is accepted when it is at most this fraction of the smallest radius met
STEP_TO_RADIUS = 0.25


def strip_width(problem, choice: RenormChoice, dtau: float | None = None,
                K: int = DEFAULT_ORDER, max_refinements: int = 8) -> StripWidth:
    """Twice the smallest radius of the ``tau``-series of ``(q, v)`` along the run.

    Integrates the renormalized system with constant-step Taylor up to the
    physical end time ``T``; ``T_j`` is the ``tau``-length of the run and the
    scaled width is ``width * T / T_j``.

    With ``dtau=None`` the run starts at ``beta / 2``.  Renormalizations
    without a guaranteed strip can have radii far below that, so whenever the
    smallest radius met is under ``dtau / STEP_TO_RADIUS`` the run is repeated
    with ``dtau`` reduced accordingly.  An explicit ``dtau`` is used as given.
    """
    spec, state0, T = _system(problem)
    auto = dtau is None
    dtau = default_dtau() if auto else dtau
    start = time.perf_counter()
    for _ in range(max_refinements + 1):
        radii = []
        try:
            with warnings.catch_warnings():
                if auto:
                    warnings.simplefilter("ignore", StepWarning)
                traj = integrate(spec, choice, state0, IntegratorConfig("taylor", dtau=dtau, order=K, t_end=T),
                                 lambda _s, bundle: radii.append(radius_estimate(bundle)))
        except (CollisionError, ConvergenceError, DomainError, EstimateError):
            if not auto:
                raise
            dtau /= 4.0
            continue
        rho_min = min(radii)
        if not auto or dtau <= STEP_TO_RADIUS * rho_min:
            break
        dtau = 0.5 * STEP_TO_RADIUS * rho_min
    else:
        raise ConvergenceError(f"{choice}: no step size resolved the strip after {max_refinements} refinements")
    T_span = T - state0.t
    T_j = T_span if choice.is_identity else float(traj.tau[-1] - state0.tau)
    width = 2.0 * rho_min
    return StripWidth(str(choice), width, width * T_span / T_j, T_j, traj.accepted, dtau,
                      traj.max_energy_error(), time.perf_counter() - start)


# --- step-matched comparison -------------------------------------------------

@dataclass(frozen=True)
class ReportRow:
    """One line of a comparison table.

    ``width`` is twice the smallest ``tau``-radius estimate over the run's
    samples; ``position_error`` is the largest per-body position error at
    the final time.
    """

    kind: str
    width: float
    scaled_width: float
    energy_error: float
    steps: int
    seconds: float
    T_j: float
    dtau: float
    position_error: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Comparison:
    rows: list
    runs: dict
    errors: dict
    reference_times: np.ndarray


def _run_width(spec, choice, traj: Trajectory, stride: int, K: int) -> float:
    radii = [radius_estimate(taylor_coeffs(spec, traj.state(k), K, choice))
             for k in range(0, len(traj), stride)]
    return 2.0 * min(radii)


def compare(problem, choices: Sequence[RenormChoice], rtol: float = 1e-13, atol: float = 1e-13,
            width_stride: int = 1, reference_precision: str = "extended",
            K: int = DEFAULT_ORDER) -> Comparison:
    """Adaptive physical-time RK against constant-step renormalized RK with the same step count.

    The adaptive run on ``s0`` sets the budget ``n``.  For each choice a probe
    (adaptive RK on the renormalized system) measures ``T_j``, then a
    constant-step run with ``dtau = T_j / n`` covers the same physical span.
    Position errors are measured against :func:`reference_solution` at every
    sample of every run.
    """
    spec, state0, T = _system(problem)
    runs, timings, dtaus, tjs = {}, {}, {}, {}

    start = time.perf_counter()
    base = integrate(spec, S0, state0, IntegratorConfig("rk_adaptive", rtol=rtol, atol=atol, t_end=T))
    timings["s0"] = time.perf_counter() - start
    runs["s0"], dtaus["s0"], tjs["s0"] = base, math.nan, T - state0.t
    n = base.accepted

    for choice in choices:
        key = str(choice)
        probe = integrate(spec, choice, state0, IntegratorConfig("rk_adaptive", rtol=rtol, atol=atol, t_end=T))
        T_j = probe.tau[-1] - state0.tau
        start = time.perf_counter()
        runs[key] = integrate(spec, choice, state0, IntegratorConfig("rk", dtau=T_j / n, t_end=T))
        timings[key] = time.perf_counter() - start
        # the constant-step run reaches T at a slightly different tau than the probe
        dtaus[key], tjs[key] = T_j / n, float(runs[key].tau[-1] - state0.tau)

    all_t = np.unique(np.concatenate([tr.t for tr in runs.values()]))
    ref_states = reference_solution(spec, state0, all_t, K=K, precision=reference_precision)
    ref_q = np.array([s.q for s in ref_states])

    errors, rows = {}, []
    for key, tr in runs.items():
        idx = np.searchsorted(all_t, tr.t)
        err = np.linalg.norm(tr.q - ref_q[idx], axis=2)
        errors[key] = err
        choice = S0 if key == "s0" else next(c for c in choices if str(c) == key)
        width = _run_width(spec, choice, tr, width_stride, K)
        T_j = tjs[key]
        rows.append(ReportRow(key, width, width * (T - state0.t) / T_j, tr.max_energy_error(),
                              tr.accepted, timings[key], T_j, dtaus[key], float(err[-1].max())))
    return Comparison(rows, runs, errors, all_t)


# --- CSV / JSON output --------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    """CSV with a header row; floats are written as shortest round-trip decimals."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def radius_scan_rows(samples: Sequence[RadiusSample]):
    header = ("t", "tau", "rho_hat", "inv_L", "product")
    return header, [(s.t, s.tau, s.rho, s.inv_L, s.product) for s in samples]


def trajectory_rows(spec: SystemSpec, traj: Trajectory):
    n = spec.n_bodies
    header = ["tau", "t"] + [f"{c}{i}_{ax}" for i in range(n) for c in "qv" for ax in "xyz"] + ["energy"]
    rows = []
    h = traj.energy()
    for k in range(len(traj)):
        per_body = []
        for i in range(n):
            per_body += list(traj.q[k, i]) + list(traj.v[k, i])
        rows.append([traj.tau[k], traj.t[k]] + per_body + [h[k]])
    return header, rows


def comparison_error_rows(spec: SystemSpec, comp: Comparison):
    n = spec.n_bodies
    header = ["run", "step", "t", "tau"] + [f"err{i}" for i in range(n)] + ["energy_error"]
    rows = []
    for key, tr in comp.runs.items():
        h = tr.energy()
        rel = np.abs(h - h[0]) / abs(h[0])
        for k in range(len(tr)):
            rows.append([key, k, tr.t[k], tr.tau[k]] + list(comp.errors[key][k]) + [rel[k]])
    return header, rows


def write_comparison(comp: Comparison, spec: SystemSpec, outdir) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fields = list(ReportRow.__dataclass_fields__)
    write_csv(outdir / "report.csv", fields, [[getattr(r, f) for f in fields] for r in comp.rows])
    write_csv(outdir / "position_errors.csv", *comparison_error_rows(spec, comp))


def energy_error(spec: SystemSpec, state0: PhaseState, state: PhaseState) -> float:
    h0 = energies(spec, state0.q, state0.v)[2]
    return abs(energies(spec, state.q, state.v)[2] - h0) / abs(h0)
