"""Time-renormalization functions ``s_0 .. s_4`` and the vector field in fictitious time.

With ``dt/dtau = s(q, v)`` the equations of motion become::

    dq_i/dtau = s v_i,   dv_i/dtau = s g_i(q),   dt/dtau = s

``s0`` is the identity (physical time).  ``s1`` and ``s2`` come with a
guaranteed analyticity strip; ``s3`` weights the inertial term by ``kappa``;
``s4`` depends on positions only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import PhaseState, SystemSpec, pair_geometry
from .errors import DomainError

KINDS = ("s0", "s1", "s2", "s3", "s4")


@dataclass(frozen=True)
class RenormChoice:
    kind: str = "s1"
    kappa: float = 1.0

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in KINDS:
            raise DomainError(f"unknown renormalization {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise DomainError("kappa must be positive")

    @property
    def velocity_free(self) -> bool:
        return self.kind in ("s0", "s4")

    @property
    def is_identity(self) -> bool:
        return self.kind == "s0"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "kappa": self.kappa}

    @classmethod
    def from_dict(cls, d: dict) -> "RenormChoice":
        return cls(d["kind"], float(d.get("kappa", 1.0)))

    def __str__(self):
        return self.kind if self.kind != "s3" or self.kappa == 1.0 else f"s3(kappa={self.kappa:g})"


S0, S1, S2, S3, S4 = (RenormChoice(k) for k in KINDS)


def _inverse_square(choice: RenormChoice, spec: SystemSpec, q, v) -> float:
    """``s(q, v)^(-2)`` from a single pass over the pairs."""
    r, r2 = pair_geometry(spec, q)
    if choice.kind == "s4":
        return float(np.sum(spec.pair_gm / (r2 * np.sqrt(r2))))
    v = np.asarray(v, dtype=float).reshape(-1, 3)
    i, j = spec.pairs
    w = v[i] - v[j]
    inertial = float(np.sum(np.einsum("pd,pd->p", w, w) / r2))
    if choice.kind == "s1":
        k = spec.k_matrix @ (1.0 / r2)
        return inertial + float(np.sum((k[i] + k[j]) / np.sqrt(r2)))
    if choice.kind == "s2":
        return inertial + float(np.sum(1.0 / np.sqrt(r2))) * float(np.sum(spec.pair_gm / r2))
    return choice.kappa * inertial + float(np.sum(spec.pair_gm / (r2 * np.sqrt(r2))))


def s_value(choice: RenormChoice, spec: SystemSpec, q, v) -> float:
    """Value of the renormalization function at ``(q, v)``."""
    if choice.kind == "s0":
        pair_geometry(spec, q)
        return 1.0
    z = _inverse_square(choice, spec, q, v)
    s = 1.0 / np.sqrt(z) if z > 0 else np.inf
    if not np.isfinite(s) or s <= 0:
        raise DomainError(f"{choice} is not finite and positive at this state (s^-2 = {z!r})")
    return float(s)


def renormalized_rhs(choice: RenormChoice, spec: SystemSpec, state: PhaseState):
    """Derivatives ``(dq/dtau, dv/dtau, dt/dtau)`` of the renormalized system."""
    r, r2 = pair_geometry(spec, state.q)
    g = spec.accel_matrix @ (r / (r2 * np.sqrt(r2))[:, None])
    s = s_value(choice, spec, state.q, state.v)
    return s * state.v, s * g, s


def rhs_vector(choice: RenormChoice, spec: SystemSpec):
    """Flat right-hand side ``f(y)`` on ``y = (q, v, t)`` for the Runge-Kutta engine."""
    n = spec.n_bodies
    i, j = spec.pairs
    amat, kmat, pgm = spec.accel_matrix, spec.k_matrix, spec.pair_gm
    kind, kappa = choice.kind, choice.kappa

    def f(y):
        q = y[: 3 * n].reshape(n, 3)
        v = y[3 * n: 6 * n].reshape(n, 3)
        r, r2 = pair_geometry(spec, q)
        rinv = 1.0 / np.sqrt(r2)
        r3inv = rinv / r2
        g = amat @ (r * r3inv[:, None])
        if kind == "s0":
            s = 1.0
        else:
            if kind == "s4":
                z = np.sum(pgm * r3inv)
            else:
                w = v[i] - v[j]
                inertial = np.sum(np.einsum("pd,pd->p", w, w) / r2)
                if kind == "s1":
                    k = kmat @ (1.0 / r2)
                    z = inertial + np.sum((k[i] + k[j]) * rinv)
                elif kind == "s2":
                    z = inertial + np.sum(rinv) * np.sum(pgm / r2)
                else:
                    z = kappa * inertial + np.sum(pgm * r3inv)
            s = 1.0 / np.sqrt(z)
            if not np.isfinite(s):
                raise DomainError(f"{choice} is not finite at this state")
        out = np.empty_like(y)
        out[: 3 * n] = s * v.ravel()
        out[3 * n: 6 * n] = s * g.ravel()
        out[-1] = s
        return out

    return f
