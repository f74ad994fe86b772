"""Butcher tableaux for explicit embedded Runge-Kutta pairs.

Coefficients are kept twice: as the decimal strings read from the data file
(for high-precision validation with :mod:`decimal`) and as float64 arrays
(for stepping).

File format::

    # comment lines are ignored
    <stages> <p> <phat>
    c_1 ... c_s                      (one line, s entries)
    a_21                             (row i holds i-1 entries)
    a_31 a_32
    ...
    b_1 ... b_s                      (order p weights)
    bhat_1 ... bhat_s                (order phat weights)

Entries are separated by whitespace and parsed with ``decimal.Decimal``, so
the result never depends on the process locale.
"""
from __future__ import annotations

import decimal
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvariantError, ParseError

_VALIDATION_PREC = 80
DEFAULT_TOL = decimal.Decimal("1e-30")


@dataclass(frozen=True)
class ButcherTableau:
    """Explicit embedded pair ``(c, a, b, bhat)`` with orders ``(p, phat)``."""

    c: np.ndarray
    a: np.ndarray
    b: np.ndarray
    bhat: np.ndarray
    order: int
    order_hat: int
    name: str = ""
    exact: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def stages(self) -> int:
        return len(self.c)

    @property
    def error_weights(self) -> np.ndarray:
        return self.b - self.bhat


def _to_decimals(tokens, lineno, path):
    out = []
    for tok in tokens:
        try:
            out.append(decimal.Decimal(tok))
        except decimal.InvalidOperation:
            raise ParseError(f"{path}:{lineno}: not a decimal number: {tok!r}") from None
    return out


def parse_tableau(text: str, name: str = "<string>", validate: bool = True,
                  tol: decimal.Decimal = DEFAULT_TOL) -> ButcherTableau:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((lineno, stripped.split()))
    if not lines:
        raise ParseError(f"{name}: empty tableau file")

    lineno, header = lines[0]
    if len(header) != 3:
        raise ParseError(f"{name}:{lineno}: header must be 'stages p phat'")
    try:
        s, p, phat = (int(x) for x in header)
    except ValueError:
        raise ParseError(f"{name}:{lineno}: header entries must be integers") from None
    if s < 1:
        raise ParseError(f"{name}:{lineno}: stage count must be positive")

    expected = 1 + 1 + (s - 1) + 2
    if len(lines) != expected:
        raise ParseError(f"{name}: expected {expected} data lines for {s} stages, got {len(lines)}")

    lineno, toks = lines[1]
    if len(toks) != s:
        raise ParseError(f"{name}:{lineno}: expected {s} nodes, got {len(toks)}")
    c = _to_decimals(toks, lineno, name)

    zero = decimal.Decimal(0)
    a = [[zero] * s for _ in range(s)]
    for i in range(1, s):
        lineno, toks = lines[1 + i]
        if len(toks) != i:
            raise ParseError(f"{name}:{lineno}: row {i + 1} of a needs {i} entries, got {len(toks)}")
        a[i][:i] = _to_decimals(toks, lineno, name)

    weights = []
    for k in (0, 1):
        lineno, toks = lines[s + 1 + k]
        if len(toks) != s:
            raise ParseError(f"{name}:{lineno}: expected {s} weights, got {len(toks)}")
        weights.append(_to_decimals(toks, lineno, name))
    b, bhat = weights

    tab = ButcherTableau(
        c=np.array([float(x) for x in c]),
        a=np.array([[float(x) for x in row] for row in a]),
        b=np.array([float(x) for x in b]),
        bhat=np.array([float(x) for x in bhat]),
        order=p,
        order_hat=phat,
        name=name,
        exact={"c": c, "a": a, "b": b, "bhat": bhat},
    )
    if validate:
        validate_tableau(tab, tol)
    return tab


def validate_tableau(tab: ButcherTableau, tol: decimal.Decimal = DEFAULT_TOL) -> None:
    """Check row sums and weight sums in high-precision decimal arithmetic.

    Raises :class:`InvariantError` on the first violated identity.
    """
    c, a, b, bhat = (tab.exact[k] for k in ("c", "a", "b", "bhat"))
    with decimal.localcontext() as ctx:
        ctx.prec = _VALIDATION_PREC
        for i, ci in enumerate(c):
            row = sum(a[i][:i], decimal.Decimal(0))
            if abs(row - ci) > tol:
                raise InvariantError(f"row {i + 1}: sum(a) = {row} differs from c = {ci}")
        for label, w in (("b", b), ("bhat", bhat)):
            total = sum(w, decimal.Decimal(0))
            if abs(total - 1) > tol:
                raise InvariantError(f"sum({label}) = {total} differs from 1")


def load_tableau(path: str | Path) -> ButcherTableau:
    path = Path(path)
    return parse_tableau(path.read_text(encoding="ascii"), name=str(path))


@lru_cache(maxsize=None)
def verner98() -> ButcherTableau:
    """Verner's 16-stage efficient 9(8) pair, read from the bundled data file."""
    text = resources.files("renorm_nbody.data").joinpath("verner98e.txt").read_text(encoding="ascii")
    return parse_tableau(text, name="verner98e")


def format_tableau(c, a, b, bhat, order, order_hat, header_comment="") -> str:
    """Inverse of :func:`parse_tableau` for decimal-string coefficients."""
    s = len(c)
    out = []
    for line in header_comment.splitlines():
        out.append(f"# {line}".rstrip())
    out.append(f"{s} {order} {order_hat}")
    out.append(" ".join(str(x) for x in c))
    for i in range(1, s):
        out.append(" ".join(str(x) for x in a[i][:i]))
    out.append(" ".join(str(x) for x in b))
    out.append(" ".join(str(x) for x in bhat))
    return "\n".join(out) + "\n"


# --- order conditions -------------------------------------------------------

@lru_cache(maxsize=None)
def rooted_trees(order: int) -> tuple:
    """All rooted trees with exactly ``order`` nodes.

    A tree is the sorted tuple of its subtrees, so ``()`` is the single node.
    """
    if order == 1:
        return ((),)
    smaller = [t for n in range(1, order) for t in rooted_trees(n)]
    sizes = [tree_order(t) for t in smaller]
    found = []

    def build(remaining, start, chosen):
        if remaining == 0:
            found.append(tuple(chosen))
            return
        for idx in range(start, len(smaller)):
            if sizes[idx] <= remaining:
                build(remaining - sizes[idx], idx, chosen + [smaller[idx]])

    build(order - 1, 0, [])
    return tuple(found)


@lru_cache(maxsize=None)
def tree_order(tree: tuple) -> int:
    return 1 + sum(tree_order(t) for t in tree)


@lru_cache(maxsize=None)
def tree_density(tree: tuple) -> int:
    out = tree_order(tree)
    for t in tree:
        out *= tree_density(t)
    return out


def order_residuals(a, weights, max_order: int, one=1.0):
    """Residuals ``b . Phi(t) - 1/gamma(t)`` for every tree up to ``max_order``.

    Works for any scalar type supporting ``+`` and ``*`` (floats, complex,
    ``mpmath.mpf``, ``Decimal``); ``a`` is an ``s x s`` nested sequence and
    ``one`` the unit of the scalar type.
    """
    s = len(weights)
    cache = {}

    def stage_vector(tree):
        if tree in cache:
            return cache[tree]
        vec = [one] * s
        for child in tree:
            g = stage_vector(child)
            ag = [sum((a[i][j] * g[j] for j in range(i)), one * 0) for i in range(s)]
            vec = [vec[i] * ag[i] for i in range(s)]
        cache[tree] = vec
        return vec

    out = []
    for n in range(1, max_order + 1):
        for tree in rooted_trees(n):
            g = stage_vector(tree)
            phi = sum((weights[i] * g[i] for i in range(s)), one * 0)
            out.append(phi - one / tree_density(tree))
    return out
