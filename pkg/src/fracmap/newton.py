"""Damped Newton iteration with a halving line search."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Residual level accepted when the line search can no longer make progress;
# rounding in the residual assembly sits a little above 1e-13 for long cycles.
STAGNATION_FLOOR = 1e-12


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: np.ndarray
    norm: float
    iterations: int
    converged: bool
    message: str


def damped_newton(
    F: Callable[[np.ndarray], np.ndarray],
    J: Callable[[np.ndarray], np.ndarray],
    x0,
    tol: float = 1e-13,
    max_iter: int = 200,
    max_halvings: int = 40,
) -> NewtonResult:
    """Solve ``F(x) = 0`` from ``x0``.

    Each step is halved until the infinity norm of the residual decreases.
    Convergence means ``||F||_inf <= tol``; if the line search stalls below
    ``STAGNATION_FLOOR`` the iterate is also accepted.
    """
    x = np.array(x0, dtype=float)
    r = np.asarray(F(x), dtype=float)
    norm = float(np.max(np.abs(r))) if r.size else 0.0
    if not np.isfinite(norm):
        return NewtonResult(x, r, norm, 0, False, "non-finite residual at start")
    for it in range(max_iter):
        if norm <= tol:
            return NewtonResult(x, r, norm, it, True, "converged")
        jac = np.asarray(J(x), dtype=float)
        try:
            dx = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(jac, r, rcond=None)[0]
        if not np.all(np.isfinite(dx)):
            return NewtonResult(x, r, norm, it, False, "non-finite Newton step")
        lam = 1.0
        for _ in range(max_halvings):
            trial = x - lam * dx
            rt = np.asarray(F(trial), dtype=float)
            nt = float(np.max(np.abs(rt)))
            if np.isfinite(nt) and nt < norm:
                break
            lam *= 0.5
        else:
            ok = norm <= STAGNATION_FLOOR
            return NewtonResult(x, r, norm, it, ok, "converged" if ok else "line search stalled")
        x, r, norm = trial, rt, nt
    ok = norm <= tol
    return NewtonResult(x, r, norm, max_iter, ok, "converged" if ok else "max iterations reached")
