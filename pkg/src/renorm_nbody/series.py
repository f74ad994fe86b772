"""Truncated power series and Taylor coefficients of N-body solutions.

Coefficients are generated order by order: with the jets of ``q`` and ``v``
known up to order ``k``, the right-hand side is evaluated in jet arithmetic to
order ``k`` and integrated termwise to order ``k + 1``.  All pair quantities
are vectorized over the ``P = N (N - 1) / 2`` pairs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _jets
from .dynamics import PhaseState, SystemSpec, pair_geometry
from .errors import DomainError, EstimateError
from .renorm import RenormChoice

DEFAULT_ORDER = 30
MIN_ORDER, MAX_ORDER = 4, 60


# --- scalar series arithmetic ----------------------------------------------

class PowerSeries:
    """Coefficients ``c_0 .. c_K`` of a truncated power series.

    Supports ``+``, ``-``, ``*``, ``/`` and ``**`` with a real exponent; every
    result is truncated at the smaller order of the operands.
    """

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        c = np.array(coefficients, dtype=float)
        if c.ndim != 1 or len(c) == 0:
            raise DomainError("a power series needs a 1-D, non-empty coefficient list")
        if not np.all(np.isfinite(c)):
            raise DomainError("power series coefficients must be finite")
        self.coefficients = c

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __len__(self):
        return len(self.coefficients)

    def __getitem__(self, k):
        return self.coefficients[k]

    def __repr__(self):
        return f"PowerSeries({self.coefficients.tolist()})"

    def _pair(self, other):
        if not isinstance(other, PowerSeries):
            other = PowerSeries([float(other)] + [0.0] * self.order)
        k = min(self.order, other.order)
        return self.coefficients[: k + 1], other.coefficients[: k + 1]

    def __add__(self, other):
        a, b = self._pair(other)
        return PowerSeries(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._pair(other)
        return PowerSeries(a - b)

    def __neg__(self):
        return PowerSeries(-self.coefficients)

    def __mul__(self, other):
        return series_arith(self, other, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return series_arith(self, other, "div")

    def __pow__(self, p):
        return series_arith(self, None, "pow", p)

    def __call__(self, x):
        return horner(self.coefficients, x)

    def derivative(self) -> "PowerSeries":
        c = self.coefficients
        return PowerSeries(c[1:] * np.arange(1, len(c)) if len(c) > 1 else [0.0])


def _conv(a, b, k):
    """k-th coefficient of the product of two coefficient arrays (leading axis = order)."""
    return np.einsum("l...,l...->...", a[: k + 1], b[k::-1])


def _div_coeff(num, den, out, k):
    acc = num[k] - (np.einsum("l...,l...->...", den[1: k + 1], out[k - 1:: -1]) if k else 0.0)
    return acc / den[0]


def _pow_coeff(u, w, k, p):
    """k-th coefficient of ``u^p`` from ``u w' = p w u'``."""
    if k == 0:
        return u[0] ** p
    j = np.arange(1, k + 1, dtype=float)
    weights = (p * j - (k - j)).reshape((k,) + (1,) * (u.ndim - 1))
    return np.einsum("l...,l...->...", weights * u[1: k + 1], w[k - 1:: -1]) / (k * u[0])


def series_arith(a, b, op: str, p: float | None = None) -> PowerSeries:
    """Arithmetic on truncated series: ``op`` is ``add``, ``mul``, ``div`` or ``pow``.

    For ``pow`` the second operand is ignored and ``p`` is the exponent.
    """
    a = a if isinstance(a, PowerSeries) else PowerSeries(a)
    if op == "pow":
        u = a.coefficients
        if u[0] <= 0:
            raise DomainError("pow needs a positive leading coefficient")
        w = np.zeros_like(u)
        for k in range(len(u)):
            w[k] = _pow_coeff(u, w, k, p)
        return PowerSeries(w)
    if not isinstance(b, PowerSeries):
        b = PowerSeries(b) if np.ndim(b) else PowerSeries([float(b)] + [0.0] * a.order)
    x, y = a._pair(b)
    if op == "add":
        return PowerSeries(x + y)
    if op == "mul":
        return PowerSeries([_conv(x, y, k) for k in range(len(x))])
    if op == "div":
        if y[0] == 0:
            raise DomainError("division by a series with zero leading coefficient")
        out = np.zeros_like(x)
        for k in range(len(x)):
            out[k] = _div_coeff(x, y, out, k)
        return PowerSeries(out)
    raise DomainError(f"unknown series operation {op!r}")


def horner(coefficients: np.ndarray, x: float) -> np.ndarray:
    """Evaluate ``sum_k c_k x^k`` along the leading axis."""
    out = np.array(coefficients[-1])
    for c in coefficients[-2::-1]:
        out = out * x + c
    return out


# --- N-body jets --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SeriesBundle:
    """Taylor coefficients of ``q``, ``v`` and (renormalized mode) ``t`` about one point.

    ``q`` and ``v`` have shape (K + 1, N, 3); ``t`` has shape (K + 1,).  In
    physical mode the expansion variable is ``t`` and ``t`` holds ``(t0, 1, 0, ...)``.
    ``s`` holds the coefficients of ``s(q(tau), v(tau))`` in renormalized mode.
    """

    q: np.ndarray
    v: np.ndarray
    t: np.ndarray
    s: np.ndarray | None
    center: float
    choice: RenormChoice | None

    @property
    def order(self) -> int:
        return self.q.shape[0] - 1

    @property
    def physical(self) -> bool:
        return self.choice is None

    def evaluate(self, h: float) -> tuple[np.ndarray, np.ndarray, float]:
        return horner(self.q, h), horner(self.v, h), float(horner(self.t, h))

    def evaluate_derivative(self, h: float) -> tuple[np.ndarray, np.ndarray, float]:
        k = np.arange(1, self.order + 1)
        dq = horner(self.q[1:] * k[:, None, None], h)
        dv = horner(self.v[1:] * k[:, None, None], h)
        dt = float(horner(self.t[1:] * k, h))
        return dq, dv, dt

    def coefficient_norms(self) -> np.ndarray:
        """``d_k``: max-norm over all state components at order ``k``.

        Velocity coefficients enter as ``v_{k-1} / k``, the order-``k``
        coefficient of their antiderivative, so that positions and
        velocities are on the same footing (in physical time this is exactly
        ``q_k``) and parity-alternating zeros do not make ``d_k`` zigzag.
        """
        n = self.q.shape[0]
        dq = np.max(np.abs(self.q.reshape(n, -1)), axis=1)
        dv = np.max(np.abs(self.v.reshape(n, -1)), axis=1)
        dv_int = np.zeros(n)
        dv_int[1:] = dv[:-1] / np.arange(1, n)
        return np.maximum(dq, dv_int)


def taylor_coeffs(spec: SystemSpec, state: PhaseState, K: int = DEFAULT_ORDER,
                  choice: RenormChoice | None = None) -> SeriesBundle:
    """Order-``K`` Taylor expansion of the solution through ``state``.

    ``choice=None`` expands the physical-time equations in ``t``; otherwise
    the renormalized equations (including ``dt/dtau = s``) are expanded in
    ``tau``.  ``choice = s0`` gives the physical series with ``t(tau)``
    attached.
    """
    return jet_expansion(spec, state.q, state.v, state.t, state.tau, K, choice)


def _compiled_expansion(spec, q0, v0, t0, tau0, K, choice):
    kind = None if choice is None else choice.kind
    i, j = spec.pairs
    q, v, t, s, ok = _jets.jets_f64(np.ascontiguousarray(q0), np.ascontiguousarray(v0), float(t0), K,
                                    _jets.KIND_CODES[kind], float(choice.kappa) if choice else 1.0,
                                    np.asarray(spec.gm, dtype=float), i, j)
    if not ok:
        raise DomainError(f"{choice}: s^-2 is not positive")
    if kind in (None, "s0"):
        return SeriesBundle(q, v, t, None, t0 if choice is None else tau0, choice)
    return SeriesBundle(q, v, t, s[:K], tau0, choice)


def jet_expansion(spec: SystemSpec, q0, v0, t0, tau0, K: int = DEFAULT_ORDER,
                  choice: RenormChoice | None = None, dtype=np.float64,
                  use_compiled: bool = True) -> SeriesBundle:
    """:func:`taylor_coeffs` on raw arrays, computed in the floating type ``dtype``.

    Binary64 expansions go through the compiled kernel when numba is
    available (``use_compiled=False`` forces the array implementation).
    ``np.longdouble`` gives extended-precision jets for reference runs.
    """
    if not MIN_ORDER <= K <= MAX_ORDER:
        raise DomainError(f"order K = {K} outside [{MIN_ORDER}, {MAX_ORDER}]")
    q0 = np.asarray(q0, dtype=dtype).reshape(-1, 3)
    v0 = np.asarray(v0, dtype=dtype).reshape(-1, 3)
    pair_geometry(spec, q0.astype(float))
    if use_compiled and _jets.COMPILED and np.dtype(dtype) == np.float64:
        return _compiled_expansion(spec, q0, v0, t0, tau0, K, choice)

    n = spec.n_bodies
    i, j = spec.pairs
    npairs = len(i)
    amat, kmat, pgm = spec.accel_matrix, spec.k_matrix, spec.pair_gm
    kind = None if choice is None or choice.kind == "s0" else choice.kind
    needs_velocity = kind in ("s1", "s2", "s3")

    def zeros(*shape):
        return np.zeros(shape, dtype=dtype)

    if dtype is not np.float64:
        amat, kmat, pgm = amat.astype(dtype), kmat.astype(dtype), pgm.astype(dtype)
    q = zeros(K + 1, n, 3)
    v = zeros(K + 1, n, 3)
    t = zeros(K + 1)
    q[0], v[0], t[0] = q0, v0, t0

    r = zeros(K + 1, npairs, 3)
    rr = zeros(K + 1, npairs)
    d3 = zeros(K + 1, npairs)  # rr^(-3/2)
    f = zeros(K + 1, npairs, 3)  # r * rr^(-3/2)
    g = zeros(K + 1, n, 3)
    if kind is not None:
        s = zeros(K + 1)
        z = zeros(K + 1)
    if needs_velocity:
        w = zeros(K + 1, npairs, 3)
        ww = zeros(K + 1, npairs)
        x = zeros(K + 1, npairs)  # ww / rr
    if kind in ("s1", "s2"):
        inv = zeros(K + 1, npairs)  # 1 / rr
        r1 = zeros(K + 1, npairs)  # rr^(-1/2)
    if kind == "s1":
        kk = zeros(K + 1, npairs)  # K_i + K_j
    if kind == "s2":
        a_sum = zeros(K + 1)
        b_sum = zeros(K + 1)

    for k in range(K):
        r[k] = q[k, i] - q[k, j]
        rr[k] = np.einsum("lpd,lpd->p", r[: k + 1], r[k::-1])
        if k == 0 and np.any(rr[0] <= 0):
            raise DomainError("non-positive squared distance")
        d3[k] = _pow_coeff(rr, d3, k, -1.5)
        f[k] = np.einsum("lp,lpd->pd", d3[: k + 1], r[k::-1])
        g[k] = amat @ f[k]

        if kind is None:
            q[k + 1] = v[k] / (k + 1)
            v[k + 1] = g[k] / (k + 1)
            t[k + 1] = 1.0 if k == 0 else 0.0
            continue

        if needs_velocity:
            w[k] = v[k, i] - v[k, j]
            ww[k] = np.einsum("lpd,lpd->p", w[: k + 1], w[k::-1])
            x[k] = _div_coeff(ww, rr, x, k)
        if kind in ("s1", "s2"):
            if k == 0:
                inv[0] = 1.0 / rr[0]
            else:
                inv[k] = -np.einsum("lp,lp->p", rr[1: k + 1], inv[k - 1:: -1]) / rr[0]
            r1[k] = _pow_coeff(rr, r1, k, -0.5)
        if kind == "s1":
            kb = kmat @ inv[k]
            kk[k] = kb[i] + kb[j]
            z[k] = x[k].sum() + np.einsum("lp,lp->", kk[: k + 1], r1[k::-1])
        elif kind == "s2":
            a_sum[k] = r1[k].sum()
            b_sum[k] = pgm @ inv[k]
            z[k] = x[k].sum() + _conv(a_sum, b_sum, k)
        elif kind == "s3":
            z[k] = choice.kappa * x[k].sum() + pgm @ d3[k]
        else:
            z[k] = pgm @ d3[k]
        if k == 0 and not z[0] > 0:
            raise DomainError(f"{choice}: s^-2 = {z[0]!r} is not positive")
        s[k] = _pow_coeff(z, s, k, -0.5)

        q[k + 1] = np.einsum("l,lnd->nd", s[: k + 1], v[k::-1]) / (k + 1)
        v[k + 1] = np.einsum("l,lnd->nd", s[: k + 1], g[k::-1]) / (k + 1)
        t[k + 1] = s[k] / (k + 1)

    if kind is None:
        return SeriesBundle(q, v, t, None, t0 if choice is None else tau0, choice)
    return SeriesBundle(q, v, t, s[:K], tau0, choice)


# --- radius of convergence -----------------------------------------------------

@dataclass(frozen=True)
class RadiusEstimate:
    """Result of :func:`estimate_from_norms`.

    ``exponent`` is the fitted power ``b`` of the ``k^b`` factor, or 0 when
    the plain exponential fit was kept.
    """

    radius: float
    ratio_estimate: float
    orders_used: int
    exponent: float = 0.0


# the k^b term is kept only if it removes this much of the plain fit's residual
LOG_TERM_GAIN = 0.05


def estimate_from_norms(d: np.ndarray) -> RadiusEstimate:
    """Radius estimate from coefficient magnitudes ``d_0 .. d_K``.

    Fits ``log d_k = a - k log(rho)`` by least squares over the tail
    ``k = ceil(K/2) .. K``, skipping orders with ``d_k <= 1e-300 d_0``.  A
    second fit adds a ``b log(k)`` term, which captures the algebraic factor
    ``k^b`` of an isolated branch point.  It is used only when it cuts the
    residual sum of squares below ``LOG_TERM_GAIN`` times that of the plain
    fit: on oscillating coefficient sequences (several singularities at
    similar distances) the three-parameter fit is ill-conditioned and the
    plain fit is the more reliable one.
    """
    d = np.asarray(d, dtype=float)
    big_k = len(d) - 1
    if big_k < 10:
        raise EstimateError(f"order {big_k} too low for a radius estimate (need >= 10)")
    scale = d[0] if d[0] > 0 else np.max(d)
    ks = np.arange(math.ceil(big_k / 2), big_k + 1)
    ks = ks[d[ks] > 1e-300 * scale]
    if len(ks) < 5:
        raise EstimateError(f"only {len(ks)} usable orders")
    y = np.log(d[ks])
    plain = np.column_stack([np.ones(len(ks)), ks])
    c2, rss2, *_ = np.linalg.lstsq(plain, y, rcond=None)
    c3, rss3, *_ = np.linalg.lstsq(np.column_stack([plain, np.log(ks)]), y, rcond=None)
    rss2 = float(rss2[0]) if len(rss2) else 0.0
    rss3 = float(rss3[0]) if len(rss3) else 0.0
    if rss3 <= LOG_TERM_GAIN * rss2:
        slope, exponent = c3[1], float(c3[2])
    else:
        slope, exponent = c2[1], 0.0
    ratio = float(d[big_k - 1] / d[big_k]) if d[big_k] > 0 else math.inf
    return RadiusEstimate(float(np.exp(-slope)), ratio, len(ks), exponent)


def radius_estimate(bundle: SeriesBundle) -> float:
    """Estimated radius of convergence of the ``(q, v)`` expansion in ``bundle``."""
    return estimate_from_norms(bundle.coefficient_norms()).radius
