"""Lower bound ``1/L(q, v, lambda)`` on the radius of convergence, the constants
of the uniform strip, and the conformal map from the strip to the unit disk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .dynamics import SystemSpec, pair_geometry
from .errors import ConvergenceError, DomainError
from .renorm import S1, s_value

LAMBDA_SUP = math.sqrt(2.0) - 1.0
# positive root of lambda * eta(lambda) = 1; checked against compute_constants() in the tests
LAMBDA0 = 0.24420407939463323


def _check_lambda(lam, allow_zero=False):
    lo_ok = lam >= 0 if allow_zero else lam > 0
    if not (lo_ok and lam < LAMBDA_SUP):
        raise DomainError(f"lambda = {lam!r} outside (0, sqrt(2) - 1)")


def _contraction(lam):
    return 1.0 - 2.0 * lam - lam * lam


def eta(lam: float) -> float:
    """``(1 + lambda) / (1 - 2 lambda - lambda^2)^(3/2)``, increasing on ``[0, sqrt(2) - 1)``."""
    _check_lambda(lam, allow_zero=True)
    return (1.0 + lam) / _contraction(lam) ** 1.5


@dataclass(frozen=True)
class AuxFunctions:
    alpha: float
    beta_lemma: float
    gamma: float
    nu: float
    xi: float
    mu: float
    delta: float


def aux_lambda_functions(lam: float, xi_power: int = 1) -> AuxFunctions:
    """Auxiliary functions of the strip-width argument at ``lam``.

    ``xi_power`` is the exponent of ``(1 - 2 lambda - lambda^2)`` in the
    denominator of ``xi``.  The default 1 follows from bounding
    ``|r^T r|`` below by ``(1 - 2 lambda - lambda^2) |r0|^2``; 2 gives the
    slightly smaller constants of the squared variant.

    ``delta`` is NaN when ``lambda * mu >= 1``; use :func:`delta` for a
    raising version.
    """
    _check_lambda(lam, allow_zero=True)
    d = _contraction(lam)
    sd = math.sqrt(d)
    alpha = (2.0 + lam) / d
    beta_lemma = (2.0 + lam) / (1.0 + sd)
    gamma = beta_lemma / sd
    nu = alpha / sd + gamma
    xi = 3.0 * eta(lam) / d ** xi_power
    mu = max(gamma, nu + xi)
    rest = 1.0 - lam * mu
    dl = mu / (1.0 + math.sqrt(rest)) if rest >= 0 else math.nan
    return AuxFunctions(alpha, beta_lemma, gamma, nu, xi, mu, dl)


def delta(lam: float, xi_power: int = 1) -> float:
    aux = aux_lambda_functions(lam, xi_power)
    if math.isnan(aux.delta):
        raise DomainError(f"delta undefined at lambda = {lam!r} (lambda * mu >= 1)")
    return aux.delta


def strip_objective(lam: float, xi_power: int = 1) -> float:
    """Half-width ``(1 - lambda delta(lambda)) lambda`` guaranteed for a given ``lambda``."""
    return (1.0 - lam * delta(lam, xi_power)) * lam


@dataclass(frozen=True)
class BoundsReport:
    L: float
    L_ij: np.ndarray
    M_ij: np.ndarray
    pair: tuple

    @property
    def radius_lower(self) -> float:
        return 1.0 / self.L


def L_bound(spec: SystemSpec, q, v, lam: float) -> BoundsReport:
    """Radius bound ``L(q, v, lambda) = max_{i<j} L_ij``.

    ``L_ij`` and ``M_ij`` are returned as (N, N) arrays filled above the
    diagonal.
    """
    _check_lambda(lam)
    _, r2 = pair_geometry(spec, q)
    v = np.asarray(v, dtype=float).reshape(-1, 3)
    i, j = spec.pairs
    r = np.sqrt(r2)
    k = spec.k_matrix @ (1.0 / r2)
    m = eta(lam) * (k[i] + k[j])
    w = np.linalg.norm(v[i] - v[j], axis=1)
    x = w / (2.0 * lam * r)
    lij = x + np.sqrt(x * x + m / (2.0 * lam * r))
    n = spec.n_bodies
    lmat = np.zeros((n, n))
    mmat = np.zeros((n, n))
    lmat[i, j] = lij
    mmat[i, j] = m
    p = int(np.argmax(lij))
    return BoundsReport(float(lij[p]), lmat, mmat, (int(i[p]), int(j[p])))


def sL_product(spec: SystemSpec, q, v, lam: float) -> float:
    """``s1(q, v)^-1 L(q, v, lambda)^-1``; at least ``lambda`` whenever ``lambda <= lambda0``."""
    if lam > LAMBDA0 + 1e-6:
        raise DomainError(f"lambda = {lam!r} exceeds lambda0")
    prod = 1.0 / (s_value(S1, spec, q, v) * L_bound(spec, q, v, lam).L)
    if prod < lam * (1.0 - 1e-10):
        raise ArithmeticError(f"s^-1 L^-1 = {prod!r} < lambda = {lam!r}")
    return prod


# --- constants --------------------------------------------------------------

@dataclass(frozen=True)
class ConstantsReport:
    lambda0: float
    lambda_star: float
    lambda_max: float
    beta: float
    residual_lambda0: float
    residual_lambda_star: float
    bracket_lambda_max: float
    xi_power: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _root(fn, lo, hi, tol):
    try:
        return brentq(fn, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (ValueError, RuntimeError) as exc:
        raise ConvergenceError(f"root search on [{lo}, {hi}] failed: {exc}") from exc


def _argmax(fn, lo, hi, tol):
    res = minimize_scalar(lambda x: -fn(x), bounds=(lo, hi), method="bounded",
                          options={"xatol": tol, "maxiter": 500})
    if not res.success:
        raise ConvergenceError(f"maximization on [{lo}, {hi}] failed: {res.message}")
    return float(res.x)


def compute_constants(tolerance: float = 1e-12, xi_power: int = 1) -> ConstantsReport:
    """Solve for ``lambda0``, ``lambda*``, the maximizing ``lambda`` and ``beta``.

    ``lambda0`` solves ``lambda eta(lambda) = 1``; ``lambda*`` solves
    ``lambda mu(lambda) = 1``; ``beta`` maximizes :func:`strip_objective`
    on ``(0, lambda*)``.
    """
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    hi = LAMBDA_SUP * (1 - 1e-12)
    lam0 = _root(lambda x: x * eta(x) - 1.0, 1e-12, hi, tolerance)
    lam_star = _root(lambda x: x * aux_lambda_functions(x, xi_power).mu - 1.0, 1e-12, lam0, tolerance)
    width = max(tolerance, 1e-10)
    lam_max = _argmax(lambda x: strip_objective(x, xi_power), 1e-12, lam_star * (1 - 1e-12), width)
    return ConstantsReport(
        lambda0=lam0,
        lambda_star=lam_star,
        lambda_max=lam_max,
        beta=strip_objective(lam_max, xi_power),
        residual_lambda0=abs(lam0 * eta(lam0) - 1.0),
        residual_lambda_star=abs(lam_star * aux_lambda_functions(lam_star, xi_power).mu - 1.0),
        bracket_lambda_max=width,
        xi_power=xi_power,
    )


# --- conformal map ----------------------------------------------------------

def conformal_map(tau, beta: float):
    """Map the strip ``|Im tau| < beta`` onto the unit disk.

    ``sigma = (exp(pi tau / (2 beta)) - 1) / (exp(pi tau / (2 beta)) + 1)``,
    i.e. ``tanh(pi tau / (4 beta))``.
    """
    tau = np.asarray(tau, dtype=complex)
    if beta <= 0:
        raise DomainError("beta must be positive")
    if np.any(np.abs(tau.imag) >= 2 * beta):
        raise DomainError("|Im tau| must stay below 2 beta (pole of the map)")
    out = np.tanh(np.pi * tau / (4.0 * beta))
    return out if out.ndim else complex(out)


def conformal_map_inverse(sigma, beta: float):
    sigma = np.asarray(sigma, dtype=complex)
    if beta <= 0:
        raise DomainError("beta must be positive")
    if np.any(np.isclose(np.abs(sigma.real), 1.0) & (sigma.imag == 0)):
        raise DomainError("sigma = +-1 corresponds to tau at infinity")
    out = 4.0 * beta / np.pi * np.arctanh(sigma)
    return out if out.ndim else complex(out)
