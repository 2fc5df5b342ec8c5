"""Asymptotically periodic points of fractional difference maps.

A period-``l`` asymptotic cycle ``x_1 .. x_l`` satisfies, for ``0 < m < l``,

    x_{m+1} - x_m = sum_{j=0}^{l-1} S_{j+1,l} G0(x_{m-j})   (indices mod l)

together with the closure ``sum_j G0(x_j) = 0``.  Because the coefficients
sum to zero, the omitted relation for ``m = l`` follows from the others and
the whole system is invariant under cyclic relabelling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coeffs import CoeffTable, cached_table, check_order
from .maps import DIVERGENCE_BOUND, MapSpec, dg0, g0
from .newton import damped_newton
from .specfun import DomainError

__all__ = [
    "CycleSolution",
    "Branch",
    "cycle_relations",
    "residual_period_l",
    "jacobian_period_l",
    "solve_period_l",
    "classify_cycle",
    "canonical_rotation",
    "continue_in_K",
    "classic_orbit_guess",
    "residual_multi",
    "jacobian_multi",
    "k_grid",
]

DEGENERACY_TOL = 1e-9


@dataclass
class CycleSolution:
    alpha: float
    l: int
    K: float
    points: np.ndarray
    residual_norm: float
    classification: str
    iterations: int = 0

    @property
    def converged(self) -> bool:
        return self.classification != "unconverged"

    @property
    def genuine(self) -> bool:
        return self.classification == f"genuine_{self.l}"


@dataclass
class Branch:
    solutions: list[CycleSolution] = field(default_factory=list)
    reason: str = "completed"


def _circulant_index(l: int) -> np.ndarray:
    i = np.arange(l)
    return (i[:, None] - i[None, :]) % l


def _check_table(table: CoeffTable, l: int) -> None:
    if table.l != l:
        raise DomainError(f"coefficient table has period {table.l}, state has {l} points")


def cycle_relations(spec: MapSpec, alpha: float, table: CoeffTable, xs) -> np.ndarray:
    """All ``l`` cyclic difference relations, the ``m = l`` one included."""
    xs = np.asarray(xs, dtype=float)
    l = xs.size
    _check_table(table, l)
    y = g0(spec, alpha, xs)
    conv = (table.s[None, :] * y[_circulant_index(l)]).sum(axis=1)
    return np.roll(xs, -1) - xs - conv


def residual_period_l(spec: MapSpec, alpha: float, table: CoeffTable, xs) -> np.ndarray:
    """Residual of the period-``l`` system: ``l - 1`` difference rows, then the closure row."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size < 1:
        raise DomainError("xs must be a non-empty vector")
    rel = cycle_relations(spec, alpha, table, xs)
    return np.append(rel[:-1], math.fsum(g0(spec, alpha, xs)))


def jacobian_period_l(spec: MapSpec, alpha: float, table: CoeffTable, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    l = xs.size
    _check_table(table, l)
    dy = dg0(spec, alpha, xs)
    jac = np.empty((l, l))
    jac[:-1] = -table.s[_circulant_index(l)[:-1]] * dy[None, :]
    rows = np.arange(l - 1)
    jac[rows, rows] -= 1.0
    jac[rows, rows + 1] += 1.0
    jac[-1] = dy
    return jac


def canonical_rotation(points) -> np.ndarray:
    """Rotate so that the smallest point comes first."""
    points = np.asarray(points, dtype=float)
    return np.roll(points, -int(np.argmin(points)))


def classify_cycle(points, tol: float = DEGENERACY_TOL) -> str:
    """``genuine_l`` or ``degenerate_divisor_d`` for the smallest repeating ``d``."""
    points = np.asarray(getattr(points, "points", points), dtype=float)
    l = points.size
    for d in range(1, l):
        if l % d == 0 and np.all(np.abs(points - np.roll(points, -d)) <= tol):
            return f"degenerate_divisor_{d}"
    return f"genuine_{l}"


def solve_period_l(
    spec: MapSpec,
    alpha: float,
    l: int,
    guess: Sequence[float],
    tol: float = 1e-13,
    max_iter: int = 200,
) -> CycleSolution:
    """Damped Newton on the period-``l`` system with the analytic Jacobian."""
    alpha = check_order(alpha)
    guess = np.asarray(guess, dtype=float)
    if guess.shape != (l,):
        raise DomainError(f"guess must have {l} entries, got shape {guess.shape}")
    if not np.all(np.isfinite(guess)):
        raise DomainError("guess must be finite")
    table = cached_table(alpha, l)
    res = damped_newton(
        lambda x: residual_period_l(spec, alpha, table, x),
        lambda x: jacobian_period_l(spec, alpha, table, x),
        guess,
        tol=tol,
        max_iter=max_iter,
    )
    if not res.converged:
        return CycleSolution(alpha, l, spec.K, res.x, res.norm, "unconverged", res.iterations)
    points = canonical_rotation(res.x)
    norm = float(np.max(np.abs(residual_period_l(spec, alpha, table, points))))
    return CycleSolution(alpha, l, spec.K, points, norm, classify_cycle(points), res.iterations)


def classic_orbit_guess(spec: MapSpec, l: int, x0: float = 0.3, transient: int = 5000) -> np.ndarray:
    """``l`` consecutive iterates of the integer-order map ``x -> x - G_K(x)``."""
    x = x0
    for _ in range(transient):
        x = x - spec.G(x)
        if not abs(x) <= DIVERGENCE_BOUND:
            return np.full(l, x0)
    out = np.empty(l)
    for i in range(l):
        out[i] = x
        x = x - spec.G(x)
    return out


def k_grid(K_start: float, K_end: float, step: float) -> np.ndarray:
    """``K_start, K_start + step, ...`` up to and including ``K_end``."""
    if step == 0 or not math.isfinite(step):
        raise DomainError("step must be finite and non-zero")
    span = K_end - K_start
    if span * step < 0:
        raise DomainError("step points away from K_end")
    count = int(math.floor(span / step + 1e-9))
    return K_start + step * np.arange(count + 1)


def _left_domain(sol: CycleSolution) -> bool:
    return not np.all(np.isfinite(sol.points)) or np.max(np.abs(sol.points)) > DIVERGENCE_BOUND


def continue_in_K(
    spec: MapSpec,
    alpha: float,
    l: int,
    K_start: float,
    K_end: float,
    step: float,
    guess: Sequence[float],
    tol: float = 1e-13,
    max_iter: int = 200,
) -> Branch:
    """Natural-parameter continuation of a period-``l`` branch.

    Each solve is warm-started from the previous solution.  A failed step is
    retried once through its midpoint before the branch is closed with
    reason ``newton_failed``; a solution escaping to infinity closes it with
    ``left_domain``.
    """
    branch = Branch()
    current = np.asarray(guess, dtype=float)
    previous_K = None
    for K in k_grid(K_start, K_end, step):
        sol = solve_period_l(spec.with_K(K), alpha, l, current, tol, max_iter)
        if not sol.converged and previous_K is not None:
            mid = solve_period_l(spec.with_K(0.5 * (previous_K + K)), alpha, l, current, tol, max_iter)
            if mid.converged:
                sol = solve_period_l(spec.with_K(K), alpha, l, mid.points, tol, max_iter)
        if not sol.converged:
            branch.reason = "newton_failed"
            break
        if _left_domain(sol):
            branch.reason = "left_domain"
            break
        branch.solutions.append(sol)
        current, previous_K = sol.points, K
    return branch


# -- p-dimensional maps --------------------------------------------------------

def residual_multi(components, tables: Sequence[CoeffTable], xs) -> np.ndarray:
    """Residual matrix (p x l) of the p-dimensional period-``l`` system.

    ``xs[i, m]`` is coordinate ``i`` of cycle point ``m``.  Row ``i`` holds the
    ``l - 1`` difference relations of coordinate ``i`` followed by its
    closure ``sum_m G0_i(x_m) = 0``.
    """
    xs = np.asarray(xs, dtype=float)
    p = len(components)
    if xs.ndim != 2 or xs.shape[0] != p or len(tables) != p:
        raise DomainError(f"expected {p} components, {p} tables and a {p} x l state")
    l = xs.shape[1]
    idx = _circulant_index(l)
    out = np.empty((p, l))
    for i, (comp, table) in enumerate(zip(components, tables)):
        _check_table(table, l)
        scale = comp.h**comp.alpha / math.gamma(comp.alpha)
        y = scale * np.array([comp.g(xs[:, m]) for m in range(l)])
        conv = (table.s[None, :] * y[idx]).sum(axis=1)
        out[i, :-1] = (np.roll(xs[i], -1) - xs[i] - conv)[:-1]
        out[i, -1] = math.fsum(y)
    return out


def jacobian_multi(components, tables: Sequence[CoeffTable], xs) -> np.ndarray:
    """Jacobian of the flattened :func:`residual_multi` w.r.t. the flattened state.

    Every component needs a ``grad`` callable.
    """
    xs = np.asarray(xs, dtype=float)
    p, l = xs.shape
    idx = _circulant_index(l)
    jac = np.zeros((p, l, p, l))
    for i, (comp, table) in enumerate(zip(components, tables)):
        if comp.grad is None:
            raise DomainError(f"component {i} has no gradient")
        scale = comp.h**comp.alpha / math.gamma(comp.alpha)
        # dy[m, q] = d G0_i(x_m) / d x_{q, m}
        dy = scale * np.array([comp.grad(xs[:, m]) for m in range(l)])
        for m in range(l - 1):
            jac[i, m, i, m] -= 1.0
            jac[i, m, i, m + 1] += 1.0
            for k in range(l):
                jac[i, m, :, k] -= table.s[idx[m, k]] * dy[k]
        jac[i, l - 1, :, :] = dy.T
    return jac.reshape(p * l, p * l)
