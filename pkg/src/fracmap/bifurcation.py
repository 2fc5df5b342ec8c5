"""Period-doubling bifurcation points.

The ``T -> 2T`` bifurcation (``T = 2^(n-1)``) is a period-``T`` cycle
``x_1 .. x_T`` together with a parameter value ``K`` at which the matrix

    A_ij = G0'(x_j) sum_{m=i}^{i+T-1} S_{m-j+1,2T} + delta_ij

is singular.  ``A`` is the linearisation of the period-``2T`` system for
perturbations that change sign after ``T`` steps, so its null vector is the
direction in which the doubled cycle grows out of the period-``T`` one.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .coeffs import cached_table, check_order
from .maps import MapSpec, dg0
from .newton import damped_newton
from .periodic import (
    canonical_rotation,
    classic_orbit_guess,
    classify_cycle,
    jacobian_period_l,
    residual_period_l,
    solve_period_l,
)
from .specfun import DomainError, gamma

__all__ = [
    "BifurcationPoint",
    "matrix_A",
    "doubling_matrix",
    "residual_bif",
    "solve_bifurcation",
    "doubling_guess",
    "cascade",
    "feigenbaum_ratios",
]

log = logging.getLogger(__name__)

DET_STEP = 1e-7
K_STEP = 1e-7


@dataclass
class BifurcationPoint:
    alpha: float
    n: int
    K_bif: float
    points: np.ndarray
    residual_norm: float
    det_A: float
    converged: bool = True
    iterations: int = 0
    message: str = "converged"

    @property
    def period(self) -> int:
        return 2 ** (self.n - 1)


def _period(n: int) -> int:
    if n < 1:
        raise DomainError(f"doubling level must be >= 1, got {n}")
    return 2 ** (n - 1)


def doubling_matrix(spec: MapSpec, alpha: float, xs) -> np.ndarray:
    """``A`` for a cycle of any length ``T``, using the period-``2T`` coefficients."""
    xs = np.asarray(xs, dtype=float)
    T = xs.size
    table = cached_table(alpha, 2 * T)
    # window[d] = S_{d+1} + ... + S_{d+T}, periodic in d
    window = np.array([sum(table[d + q + 1] for q in range(T)) for d in range(2 * T)])
    i = np.arange(T)
    W = window[(i[:, None] - i[None, :]) % (2 * T)]
    return W * dg0(spec, alpha, xs)[None, :] + np.eye(T)


def matrix_A(spec: MapSpec, alpha: float, n: int, xs) -> np.ndarray:
    """The ``2^(n-1)``-dimensional matrix whose determinant vanishes at the bifurcation."""
    xs = np.asarray(xs, dtype=float)
    if xs.shape != (_period(n),):
        raise DomainError(f"level {n} needs {_period(n)} points, got shape {xs.shape}")
    return doubling_matrix(spec, alpha, xs)


def residual_bif(spec: MapSpec, alpha: float, n: int, xs, K: float) -> np.ndarray:
    """Period-``2^(n-1)`` residual at ``K`` followed by ``det A``."""
    T = _period(n)
    xs = np.asarray(xs, dtype=float)
    if xs.shape != (T,):
        raise DomainError(f"level {n} needs {T} points, got shape {xs.shape}")
    at_K = spec.with_K(K)
    rows = residual_period_l(at_K, alpha, cached_table(alpha, T), xs)
    return np.append(rows, np.linalg.det(matrix_A(at_K, alpha, n, xs)))


def _jacobian_bif(spec: MapSpec, alpha: float, n: int, z: np.ndarray) -> np.ndarray:
    """Analytic rows for the cycle equations, central differences for ``det A``."""
    T = _period(n)
    xs, K = z[:T], z[T]
    at_K = spec.with_K(K)
    table = cached_table(alpha, T)
    jac = np.empty((T + 1, T + 1))
    jac[:T, :T] = jacobian_period_l(at_K, alpha, table, xs)
    if spec.dg_dk is not None:
        dyk = at_K.h**alpha / gamma(alpha) * spec.dg_dk(K, xs)
        idx = (np.arange(T)[:, None] - np.arange(T)[None, :]) % T
        col = -(table.s[idx] * dyk[None, :]).sum(axis=1)
        jac[: T - 1, T] = col[:-1]
        jac[T - 1, T] = dyk.sum()
    else:
        hi = residual_period_l(spec.with_K(K + K_STEP), alpha, table, xs)
        lo = residual_period_l(spec.with_K(K - K_STEP), alpha, table, xs)
        jac[:T, T] = (hi - lo) / (2 * K_STEP)

    def det_at(w):
        return np.linalg.det(matrix_A(spec.with_K(w[T]), alpha, n, w[:T]))

    for k in range(T + 1):
        e = np.zeros(T + 1)
        e[k] = DET_STEP
        jac[T, k] = (det_at(z + e) - det_at(z - e)) / (2 * DET_STEP)
    return jac


def solve_bifurcation(
    spec: MapSpec,
    alpha: float,
    n: int,
    guess_xs,
    guess_K: float,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> BifurcationPoint:
    """Newton on the joint unknowns ``(x_1 .. x_T, K)`` of the bifurcation system."""
    alpha = check_order(alpha)
    T = _period(n)
    guess_xs = np.asarray(guess_xs, dtype=float)
    if guess_xs.shape != (T,):
        raise DomainError(f"level {n} needs {T} guess points, got shape {guess_xs.shape}")
    z0 = np.append(guess_xs, float(guess_K))
    if not np.all(np.isfinite(z0)):
        raise DomainError("guess must be finite")
    res = damped_newton(
        lambda z: residual_bif(spec, alpha, n, z[:T], z[T]),
        lambda z: _jacobian_bif(spec, alpha, n, z),
        z0,
        tol=tol,
        max_iter=max_iter,
    )
    K = float(res.x[T])
    points = canonical_rotation(res.x[:T]) if res.converged else res.x[:T]
    rows = residual_bif(spec, alpha, n, points, K)
    return BifurcationPoint(
        alpha, n, K, points, float(np.max(np.abs(rows))), float(rows[-1]),
        res.converged, res.iterations, res.message,
    )


def doubling_guess(spec: MapSpec, alpha: float, points, eps: float) -> np.ndarray:
    """Seed for the doubled cycle: ``points +/- eps v`` with ``v`` the near-null vector of ``A``.

    The first half carries ``+eps v`` and the second half ``-eps v``, so each
    point is split into a pair straddling it.
    """
    points = np.asarray(points, dtype=float)
    _, _, vt = np.linalg.svd(doubling_matrix(spec, alpha, points))
    v = vt[-1] / np.max(np.abs(vt[-1]))
    return np.concatenate((points + eps * v, points - eps * v))


SPLIT_OFFSETS = (0.1, 0.05, 0.2, 0.02, 0.3)


def _doubled_cycle(spec, alpha, points, K, tol, max_iter):
    """A genuine period-``2T`` cycle at ``K`` grown from the period-``T`` cycle ``points``."""
    T = len(points)
    at_K = spec.with_K(K)
    base = solve_period_l(at_K, alpha, T, points, tol=1e-13, max_iter=max_iter)
    if not base.converged:
        return None
    for eps in SPLIT_OFFSETS:
        cyc = solve_period_l(at_K, alpha, 2 * T, doubling_guess(at_K, alpha, base.points, eps))
        if cyc.genuine:
            return cyc
    return None


def _accept(bp: BifurcationPoint, prev: BifurcationPoint) -> bool:
    return (
        bp.converged
        and bp.K_bif > prev.K_bif
        and classify_cycle(bp.points) == f"genuine_{bp.period}"
    )


def _next_level(spec, alpha, prev: BifurcationPoint, interval: float, tol, max_iter):
    n = prev.n + 1
    K_guess = prev.K_bif + interval / 4.0
    cyc = _doubled_cycle(spec, alpha, prev.points, K_guess, tol, max_iter)
    if cyc is not None:
        bp = solve_bifurcation(spec, alpha, n, cyc.points, K_guess, tol, max_iter)
        if _accept(bp, prev):
            return bp
    # Fallback: walk the doubled branch upward from just past the previous
    # bifurcation and start Newton where det A changes sign.
    steps = 40
    ks = prev.K_bif + interval * np.arange(1, 2 * steps + 1) / steps
    cyc = _doubled_cycle(spec, alpha, prev.points, ks[0], tol, max_iter)
    if cyc is None:
        return None
    last = np.linalg.det(matrix_A(spec.with_K(ks[0]), alpha, n, cyc.points))
    for K in ks[1:]:
        nxt = solve_period_l(spec.with_K(K), alpha, cyc.l, cyc.points)
        if not nxt.genuine:
            return None
        det = np.linalg.det(matrix_A(spec.with_K(K), alpha, n, nxt.points))
        if np.sign(det) != np.sign(last):
            bp = solve_bifurcation(spec, alpha, n, nxt.points, K, tol, max_iter)
            return bp if _accept(bp, prev) else None
        cyc, last = nxt, det
    return None


def cascade(
    spec: MapSpec,
    alpha: float,
    n_max: int,
    guess_xs=None,
    guess_K: float | None = None,
    first_interval: float = 0.5,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> list[BifurcationPoint]:
    """Bifurcation points for levels ``1 .. n_max``, each seeded from the previous one.

    Level 1 starts from ``guess_K`` (default ``spec.K``) and the integer-order
    fixed point there.  For level ``n + 1`` the period-``2^n`` cycle is grown
    at ``K_n + (K_n - K_{n-1}) / 4`` by splitting every level-``n`` point into
    a straddling pair; ``first_interval`` stands in for ``K_1 - K_0``.  The
    cascade stops at the first level that fails and returns what it has.
    """
    alpha = check_order(alpha)
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    K0 = spec.K if guess_K is None else float(guess_K)
    if guess_xs is None:
        guess_xs = classic_orbit_guess(spec.with_K(K0), 1)
    first = solve_bifurcation(spec, alpha, 1, guess_xs, K0, tol, max_iter)
    if not first.converged:
        log.warning("level 1 did not converge: %s", first.message)
        return []
    out = [first]
    for n in range(2, n_max + 1):
        interval = out[-1].K_bif - out[-2].K_bif if len(out) >= 2 else first_interval
        bp = _next_level(spec, alpha, out[-1], interval, tol, max_iter)
        if bp is None:
            log.warning("level %d did not converge; cascade stops at level %d", n, n - 1)
            break
        out.append(bp)
    return out


def feigenbaum_ratios(points) -> list[float]:
    """``(K_n - K_{n-1}) / (K_{n+1} - K_n)`` for consecutive bifurcation values."""
    Ks = [p.K_bif if isinstance(p, BifurcationPoint) else float(p) for p in points]
    if len(Ks) < 3:
        raise DomainError("need at least three bifurcation values")
    ratios = []
    for a, b, c in zip(Ks, Ks[1:], Ks[2:]):
        if c == b:
            raise ZeroDivisionError(f"consecutive bifurcation values coincide at K={b!r}")
        ratios.append((b - a) / (c - b))
    return ratios
