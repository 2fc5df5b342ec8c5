"""Bifurcation-diagram data: asymptotic (solved cycles) and finite-time (iterated)."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import partial
from typing import Iterable

from .bifurcation import SPLIT_OFFSETS, doubling_guess
from .coeffs import check_order
from .maps import MapSpec, iterate
from .periodic import CycleSolution, classic_orbit_guess, k_grid, solve_period_l
from .specfun import DomainError

__all__ = [
    "DiagramRecord",
    "asymptotic_diagram",
    "finite_time_diagram",
    "CSV_COLUMNS",
    "ALLOWED_PERIODS",
]

ALLOWED_PERIODS = (1, 2, 4, 8, 16)
DEFAULT_X0 = 0.3
DEFAULT_N_ITER = 10**4
DEFAULT_N_KEEP = 32


@dataclass(frozen=True)
class DiagramRecord:
    K: float
    period: int
    point_index: int
    x: float
    source: str
    flag: str

    def sort_key(self):
        return (self.K, self.period, self.point_index, self.source)


def _track(spec: MapSpec, alpha, l, previous, lower, tol, max_iter) -> CycleSolution:
    """Solve for a period-``l`` cycle, preferring a genuine one.

    Tries the previous solution on the branch, then the integer-order orbit,
    then splits of the period-``l/2`` cycle along its doubling direction.
    """
    guesses = []
    if previous is not None and previous.converged:
        guesses.append(previous.points)
    guesses.append(classic_orbit_guess(spec, l))
    fallback = None
    for guess in guesses:
        sol = solve_period_l(spec, alpha, l, guess, tol, max_iter)
        if sol.genuine:
            return sol
        if fallback is None or (sol.converged and not fallback.converged):
            fallback = sol
    if lower is not None and lower.genuine:
        for eps in SPLIT_OFFSETS:
            sol = solve_period_l(spec, alpha, l, doubling_guess(spec, alpha, lower.points, eps), tol, max_iter)
            if sol.genuine:
                return sol
    return fallback


def asymptotic_diagram(
    spec: MapSpec,
    alpha: float,
    K_start: float,
    K_end: float,
    step: float,
    l_list: Iterable[int],
    tol: float = 1e-13,
    max_iter: int = 200,
) -> list[DiagramRecord]:
    """Asymptotic cycles of each requested period across a K grid.

    Branches are continued in K.  Every converged cycle contributes ``l``
    records.  Flags: ``converged`` for a genuine period-``l`` cycle,
    ``degenerate`` for a cycle that repeats with a shorter period or that has
    already doubled (a genuine ``2l`` cycle exists at the same K),
    ``unconverged`` when Newton failed.
    """
    alpha = check_order(alpha)
    periods = sorted(set(l_list))
    if not periods:
        return []
    bad = [l for l in periods if l not in ALLOWED_PERIODS]
    if bad:
        raise DomainError(f"periods must be among {ALLOWED_PERIODS}, got {bad}")
    if step <= 0:
        raise DomainError("step must be positive")
    chain = [l for l in ALLOWED_PERIODS if l <= periods[-1]]
    previous: dict[int, CycleSolution | None] = {l: None for l in chain}
    records = []
    for K in k_grid(K_start, K_end, step):
        at_K = spec.with_K(K)
        current: dict[int, CycleSolution] = {}
        for l in chain:
            current[l] = _track(at_K, alpha, l, previous[l], current.get(l // 2) if l > 1 else None, tol, max_iter)
        previous = current
        for l in periods:
            sol = current[l]
            doubled = current.get(2 * l)
            if not sol.converged:
                flag = "unconverged"
            elif not sol.genuine or (doubled is not None and doubled.genuine):
                flag = "degenerate"
            else:
                flag = "converged"
            records.extend(
                DiagramRecord(float(K), l, i + 1, float(x), "asymptotic", flag) for i, x in enumerate(sol.points)
            )
    return sorted(records, key=DiagramRecord.sort_key)


def _finite_time_at(spec: MapSpec, alpha, N_iter, N_keep, x0, K) -> list[DiagramRecord]:
    traj = iterate(spec.with_K(K), alpha, x0, N_iter)
    flag = "unconverged" if traj.diverged else "converged"
    kept = traj.values[-N_keep:] if N_keep else []
    return [DiagramRecord(float(K), 0, i + 1, float(x), "finite_time", flag) for i, x in enumerate(kept)]


def finite_time_diagram(
    spec: MapSpec,
    alpha: float,
    K_start: float,
    K_end: float,
    step: float,
    N_iter: int = DEFAULT_N_ITER,
    N_keep: int = DEFAULT_N_KEEP,
    x0: float = DEFAULT_X0,
    jobs: int = 1,
) -> list[DiagramRecord]:
    """The last ``N_keep`` of ``N_iter`` iterates from ``x0`` at each K.

    Values are raw (not clustered).  Finite-time records carry period 0.
    With ``jobs > 1`` the K points run in worker processes; the output order
    is the same either way.
    """
    if not 0 <= N_keep < N_iter:
        raise DomainError("need 0 <= N_keep < N_iter")
    if step <= 0:
        raise DomainError("step must be positive")
    ks = [float(K) for K in k_grid(K_start, K_end, step)]
    work = partial(_finite_time_at, spec, alpha, N_iter, N_keep, x0)
    if jobs > 1 and len(ks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(work, ks))
    else:
        chunks = [work(K) for K in ks]
    records = [r for chunk in chunks for r in chunk]
    return sorted(records, key=DiagramRecord.sort_key)


CSV_COLUMNS = tuple(f.name for f in fields(DiagramRecord))
