"""Gravitational N-body system: accelerations, pairwise sums and energies."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import CollisionError, InvariantError


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays ``(I, J)`` of all pairs ``i < j`` in lexicographic order."""
    i, j = np.triu_indices(n, k=1)
    return i, j


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Masses and gravitational constant of one N-body system.

    Parameters
    ----------
    masses : sequence of float
        Positive masses, one per body.
    G : float
        Gravitational constant (default 1).
    labels : sequence of str, optional
        Body names, used only for reporting.
    """

    masses: np.ndarray
    G: float = 1.0
    labels: tuple = field(default=())

    def __post_init__(self):
        m = np.array(self.masses, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        if m.ndim != 1 or len(m) < 2:
            raise InvariantError("need at least two bodies")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise InvariantError("masses must be finite and positive")
        if not (np.isfinite(self.G) and self.G > 0):
            raise InvariantError("G must be positive")
        labels = tuple(self.labels) if self.labels else tuple(f"body{i + 1}" for i in range(len(m)))
        if len(labels) != len(m):
            raise InvariantError("one label per body required")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_gm(cls, gm: Sequence[float], G: float = 1.0, labels=()) -> "SystemSpec":
        return cls(np.asarray(gm, dtype=float) / G, G=G, labels=labels)

    @property
    def n_bodies(self) -> int:
        return len(self.masses)

    @cached_property
    def gm(self) -> np.ndarray:
        out = self.G * self.masses
        out.setflags(write=False)
        return out

    @cached_property
    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return pair_indices(self.n_bodies)

    @cached_property
    def pair_gm(self) -> np.ndarray:
        """``G (m_i + m_j)`` for each pair."""
        i, j = self.pairs
        return self.gm[i] + self.gm[j]

    @cached_property
    def accel_matrix(self) -> np.ndarray:
        """(N, P) matrix mapping pair terms ``(q_i - q_j)/r^3`` to accelerations."""
        i, j = self.pairs
        mat = np.zeros((self.n_bodies, len(i)))
        cols = np.arange(len(i))
        mat[i, cols] = -self.gm[j]
        mat[j, cols] = self.gm[i]
        return mat

    @cached_property
    def k_matrix(self) -> np.ndarray:
        """(N, P) matrix mapping pair terms ``1/r^2`` to ``K_i``."""
        i, j = self.pairs
        mat = np.zeros((self.n_bodies, len(i)))
        cols = np.arange(len(i))
        mat[i, cols] = self.gm[j]
        mat[j, cols] = self.gm[i]
        return mat


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Positions ``q`` (N, 3), velocities ``v`` (N, 3), physical time ``t`` and fictitious time ``tau``."""

    q: np.ndarray
    v: np.ndarray
    t: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1, 3)
        v = np.array(self.v, dtype=float).reshape(-1, 3)
        if q.shape != v.shape:
            raise InvariantError("q and v must have the same shape")
        q.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def n_bodies(self) -> int:
        return len(self.q)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.q.ravel(), self.v.ravel(), [self.t]])

    @classmethod
    def from_vector(cls, y: np.ndarray, tau: float = 0.0) -> "PhaseState":
        n = (len(y) - 1) // 6
        return cls(y[: 3 * n].reshape(n, 3), y[3 * n: 6 * n].reshape(n, 3), y[-1], tau)

    def replace(self, **kw) -> "PhaseState":
        return replace(self, **kw)

    def scaled(self, nu: float) -> "PhaseState":
        """The state ``(nu^(-2/3) q, nu^(1/3) v)`` of the rescaled solution."""
        return PhaseState(nu ** (-2 / 3) * self.q, nu ** (1 / 3) * self.v, nu * self.t, self.tau)


def pair_geometry(spec: SystemSpec, q, floor: float = 0.0):
    """Separations ``q_i - q_j`` and squared distances for every pair.

    Raises :class:`CollisionError` if some distance is ``<= floor``.
    """
    q = np.asarray(q, dtype=float).reshape(-1, 3)
    i, j = spec.pairs
    r = q[i] - q[j]
    r2 = np.einsum("pd,pd->p", r, r)
    bad = r2 <= floor * floor
    if np.any(bad):
        p = int(np.argmax(bad))
        raise CollisionError(
            f"bodies {i[p]} and {j[p]} collide (distance {np.sqrt(r2[p]):.3g})",
            pair=(int(i[p]), int(j[p])), distance=float(np.sqrt(r2[p])),
        )
    return r, r2


def accelerations(spec: SystemSpec, q, floor: float = 0.0) -> np.ndarray:
    """Gravitational accelerations ``g_i(q)``, shape (N, 3)."""
    r, r2 = pair_geometry(spec, q, floor)
    return spec.accel_matrix @ (r / (r2 * np.sqrt(r2))[:, None])


def pairwise_K(spec: SystemSpec, q, floor: float = 0.0) -> np.ndarray:
    """``K_i(q) = sum_{j != i} G m_j / |q_i - q_j|^2`` for each body."""
    _, r2 = pair_geometry(spec, q, floor)
    return spec.k_matrix @ (1.0 / r2)


def energies(spec: SystemSpec, q, v) -> tuple[float, float, float]:
    """Kinetic energy, potential ``U`` (positive) and total ``H = T - U``."""
    _, r2 = pair_geometry(spec, q)
    v = np.asarray(v, dtype=float).reshape(-1, 3)
    i, j = spec.pairs
    kinetic = 0.5 * float(np.sum(spec.masses * np.einsum("nd,nd->n", v, v)))
    potential = float(np.sum(spec.G * spec.masses[i] * spec.masses[j] / np.sqrt(r2)))
    return kinetic, potential, kinetic - potential


def total_momentum(spec: SystemSpec, v) -> np.ndarray:
    return spec.masses @ np.asarray(v, dtype=float).reshape(-1, 3)


def min_separation(q) -> tuple[float, tuple[int, int]]:
    """Smallest pairwise distance and its (0-based) pair; ties go to the first pair in lexicographic order."""
    q = np.asarray(q, dtype=float).reshape(-1, 3)
    i, j = pair_indices(len(q))
    d = np.linalg.norm(q[i] - q[j], axis=1)
    p = int(np.argmin(d))
    return float(d[p]), (int(i[p]), int(j[p]))


def physical_rhs(spec: SystemSpec, state: PhaseState):
    """Time derivatives ``(dq/dt, dv/dt)``."""
    return state.v, accelerations(spec, state.q)
