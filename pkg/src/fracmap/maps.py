"""Map families and forward iteration of maps with falling-factorial memory.

The universal map of order ``alpha`` is

    x_n = x_0 - sum_{k<n} G0(x_k) U(n - k),   G0(x) = h^alpha G_K(x) / Gamma(alpha),

with ``U`` the fractional difference kernel.  At ``alpha = 1`` the kernel is
identically one and the sum telescopes to ``x_{n+1} = x_n - G_K(x_n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .specfun import DomainError, gamma, kernel_values

__all__ = [
    "MapSpec",
    "Trajectory",
    "CoupledComponent",
    "logistic_map",
    "get_map",
    "MAPS",
    "g0",
    "dg0",
    "iterate",
    "iterate_multi",
    "DIVERGENCE_BOUND",
]

DIVERGENCE_BOUND = 1e10


def check_iterate_order(alpha: float) -> float:
    if not 0.0 < alpha <= 1.0:
        raise DomainError("alpha out of range (0,1]")
    return float(alpha)


@dataclass(frozen=True)
class MapSpec:
    """A one-parameter family ``G_K(x) = x - F_K(x)`` at a fixed ``K``.

    ``dg`` is the x-derivative of ``g``.  ``dg_dk``, when given, is the
    K-derivative; solvers fall back to finite differences without it.
    """

    name: str
    K: float
    g: Callable[[float, float], float]
    dg: Callable[[float, float], float]
    h: float = 1.0
    dg_dk: Callable[[float, float], float] | None = None

    def with_K(self, K: float) -> "MapSpec":
        return replace(self, K=float(K))

    def G(self, x):
        return self.g(self.K, x)

    def dG(self, x):
        return self.dg(self.K, x)


@dataclass
class Trajectory:
    alpha: float
    x0: float
    values: np.ndarray
    diverged: bool = False

    def __len__(self) -> int:
        return len(self.values)


def _logistic_g(K, x):
    return x - K * x * (1.0 - x)


def _logistic_dg(K, x):
    return 1.0 - K + 2.0 * K * x


def _logistic_dg_dk(K, x):
    return -x * (1.0 - x)


def logistic_map(K: float, h: float = 1.0) -> MapSpec:
    """``F_K(x) = K x (1 - x)``, so ``G_K(x) = x - K x (1 - x)``."""
    return MapSpec("logistic", float(K), _logistic_g, _logistic_dg, h, _logistic_dg_dk)


MAPS: dict[str, Callable[..., MapSpec]] = {"logistic": logistic_map}


def get_map(name: str, K: float, h: float = 1.0) -> MapSpec:
    try:
        factory = MAPS[name]
    except KeyError:
        raise DomainError(f"unknown map {name!r}; choose from {sorted(MAPS)}") from None
    return factory(K, h)


def _g0_scale(alpha: float, h: float) -> float:
    return h**alpha / gamma(alpha)


def g0(spec: MapSpec, alpha: float, x):
    """``G0(x) = h^alpha G_K(x) / Gamma(alpha)``; accepts scalars or arrays."""
    return _g0_scale(alpha, spec.h) * spec.G(x)


def dg0(spec: MapSpec, alpha: float, x):
    return _g0_scale(alpha, spec.h) * spec.dG(x)


def iterate(spec: MapSpec, alpha: float, x0: float, N: int) -> Trajectory:
    """Run the full-memory map for ``N`` steps, returning ``x_0 .. x_N``.

    Cost is quadratic in ``N``.  If some ``|x_n|`` exceeds 1e10 the
    trajectory is cut there and flagged as diverged.
    """
    alpha = check_iterate_order(alpha)
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    # reversed kernel so that G[:n] . rev[N-n:] = sum_k G_k U(n - k)
    rev = kernel_values(alpha, N)[::-1].copy()
    scale = _g0_scale(alpha, spec.h)
    x = np.empty(N + 1)
    G = np.empty(N)
    x[0] = x0
    for n in range(1, N + 1):
        G[n - 1] = scale * spec.G(x[n - 1])
        x[n] = x0 - G[:n] @ rev[N - n :]
        if not abs(x[n]) <= DIVERGENCE_BOUND:
            return Trajectory(alpha, x0, x[: n + 1].copy(), diverged=True)
    return Trajectory(alpha, x0, x)


@dataclass(frozen=True)
class CoupledComponent:
    """One coordinate of a p-dimensional map.

    ``g(x)`` gives ``G_i`` at the full state vector ``x``; ``grad(x)``, when
    provided, gives its gradient (length p).
    """

    g: Callable[[np.ndarray], float]
    alpha: float
    h: float = 1.0
    grad: Callable[[np.ndarray], np.ndarray] | None = field(default=None)


def iterate_multi(
    components: Sequence[CoupledComponent], x0: Sequence[float], N: int
) -> list[Trajectory]:
    """Iterate a p-dimensional map in which coordinate ``i`` has order ``alpha_i``."""
    p = len(components)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (p,):
        raise DomainError(f"x0 must have length {p}")
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    alphas = [check_iterate_order(c.alpha) for c in components]
    rev = np.array([kernel_values(a, N)[::-1] for a in alphas])
    scales = np.array([_g0_scale(a, c.h) for a, c in zip(alphas, components)])
    x = np.empty((N + 1, p))
    G = np.empty((N, p))
    x[0] = x0
    end, diverged = N, False
    for n in range(1, N + 1):
        G[n - 1] = scales * np.array([c.g(x[n - 1]) for c in components])
        x[n] = x0 - np.einsum("ki,ik->i", G[:n], rev[:, N - n :])
        if not np.all(np.abs(x[n]) <= DIVERGENCE_BOUND):
            end, diverged = n, True
            break
    return [Trajectory(a, float(x0[i]), x[: end + 1, i].copy(), diverged) for i, a in enumerate(alphas)]


def truncated_memory_value(spec: MapSpec, alpha: float, traj: Trajectory, n: int, memory: int) -> float:
    """Recompute ``x_n`` from a stored trajectory keeping only the last ``memory`` terms."""
    U = kernel_values(alpha, n)
    lo = max(0, n - memory)
    k = np.arange(lo, n)
    terms = g0(spec, alpha, traj.values[k]) * U[n - k - 1]
    return traj.x0 - math.fsum(terms)
