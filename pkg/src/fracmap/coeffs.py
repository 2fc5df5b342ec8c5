"""Coefficient sums ``S_{p,l}`` of fractional difference maps.

``S_{p,l} = sum_k [U(lk + p - 1) - U(lk + p)]`` is computed three ways:

* ``analytic``: finite trigonometric sums, one form for even and one for odd
  periods (:func:`s_even`, :func:`s_odd`);
* ``tail_oracle``: product-recursion partial sum plus a zeta-function tail
  (:func:`s_series_tail_oracle`);
* ``naive``: plain truncation of the telescoped series
  (:func:`s_naive_truncation`), slow and only accurate to ``N^(alpha-1)``.
"""
from __future__ import annotations

import csv
import math
import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .specfun import DomainError, binomial_real, falling_factorial, gamma, kernel_values, zeta

__all__ = [
    "CoeffTable",
    "check_order",
    "s_even",
    "s_odd",
    "s_table",
    "s_series_tail_oracle",
    "s_naive_truncation",
    "validate_identity",
    "cached_table",
    "clear_cache",
    "METHODS",
]

METHODS = ("analytic", "tail_oracle", "naive")
DEFAULT_TAIL_TERMS = 20000
DEFAULT_NAIVE_TERMS = 10**6
CACHE_ENV = "FRACMAP_CACHE_DIR"


def check_order(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha out of range (0,1)")
    return float(alpha)


def _check_p(p: int, l: int) -> None:
    if not 1 <= p <= l:
        raise DomainError(f"p={p} outside 1..{l}")


@dataclass(frozen=True)
class CoeffTable:
    """The ``l`` coefficients ``S_{1,l} .. S_{l,l}`` for one order ``alpha``.

    ``s[p - 1]`` holds ``S_{p,l}``.  Indexing the table itself (``table[p]``)
    uses the periodic extension ``S_{p,l} = S_{p+l,l}`` for any integer ``p``.
    """

    alpha: float
    l: int
    s: np.ndarray
    method: str = "analytic"

    def __post_init__(self):
        s = np.array(self.s, dtype=float)
        if s.shape != (self.l,):
            raise ValueError(f"expected {self.l} coefficients, got shape {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    def __getitem__(self, p: int) -> float:
        return float(self.s[(p - 1) % self.l])

    def __len__(self) -> int:
        return self.l

    def total(self) -> float:
        return math.fsum(self.s)


def _even_values(alpha: float, n: int, p: np.ndarray) -> np.ndarray:
    j = np.arange(1, n, dtype=float)[:, None]
    terms = np.cos(np.pi * j / (2 * n)) ** (1.0 - alpha) * np.cos(
        np.pi * j * (2 * p + alpha - 3) / (2 * n)
    )
    sign = np.where(p % 2 == 0, 1.0, -1.0)
    return gamma(alpha) * 2.0**-alpha / n * sign * (1.0 + 2.0 * terms.sum(axis=0))


def _odd_values(alpha: float, n: int, p: np.ndarray) -> np.ndarray:
    l = 2 * n + 1
    j = np.arange(n, dtype=float)[:, None]
    odd = 2 * j + 1
    terms = (
        np.cos(np.pi * odd / (2 * l)) ** (1.0 - alpha)
        * np.where(j % 2 == 0, 1.0, -1.0)
        * np.sin(np.pi * odd * (2 * p + 2 * n - 2 + alpha) / (2 * l))
    )
    sign = np.where(p % 2 == 0, 1.0, -1.0)
    return 2.0 ** (2.0 - alpha) * gamma(alpha) / l * sign * terms.sum(axis=0)


def s_even(alpha: float, n: int, p: int) -> float:
    """``S_{p,2n}`` from the even-period closed form."""
    check_order(alpha)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    _check_p(p, 2 * n)
    return float(_even_values(alpha, n, np.array([p], dtype=float))[0])


def s_odd(alpha: float, n: int, p: int) -> float:
    """``S_{p,2n+1}`` from the odd-period closed form (``n = 0`` gives ``S_{1,1} = 0``)."""
    check_order(alpha)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    _check_p(p, 2 * n + 1)
    return float(_odd_values(alpha, n, np.array([p], dtype=float))[0])


def s_table(alpha: float, l: int) -> CoeffTable:
    """All ``l`` coefficients from the closed forms."""
    check_order(alpha)
    if l < 1:
        raise DomainError(f"period must be >= 1, got {l}")
    p = np.arange(1, l + 1, dtype=float)
    if l % 2 == 0:
        values = _even_values(alpha, l // 2, p)
    else:
        values = _odd_values(alpha, (l - 1) // 2, p)
    return CoeffTable(alpha, l, values, "analytic")


def _ratio_sum(a: float, b: float, step: int, n_terms: int) -> float:
    """``sum_{k>=0} Gamma(step*k + a) / Gamma(step*k + b)`` for ``b - a > 1``.

    Terms ``k = 0..n_terms`` are accumulated by the product recursion
    ``T_k = T_{k-1} prod_m (step(k-1) + a + m) / (step(k-1) + b + m)``; the
    remainder uses the large-argument expansion of the Gamma ratio to second
    order, summed with Hurwitz tails ``zeta(s) - sum_{k<=n_terms} k^-s``.
    """
    c = a - b
    k = np.arange(n_terms, dtype=float)[:, None]
    m = np.arange(step, dtype=float)[None, :]
    factors = np.prod((step * k + a + m) / (step * k + b + m), axis=1)
    seed = falling_factorial(a - 1.0, c)
    direct = seed * np.concatenate(([1.0], np.cumprod(factors)))
    ks = np.arange(1, n_terms + 1, dtype=float)

    def tail(s: float) -> float:
        return zeta(s) - math.fsum(ks**-s)

    u = a + b - 1.0
    correction = tail(-c) + 0.5 * c / step * (
        u * tail(1.0 - c) + (c - 1.0) * (3.0 * u * u - c - 1.0) * tail(2.0 - c) / (12.0 * step)
    )
    return math.fsum(direct) + step**c * correction


def s_series_tail_oracle(alpha: float, l: int, p: int, n_terms: int = DEFAULT_TAIL_TERMS) -> float:
    """``S_{p,l}`` as ``(1 - alpha) sum_k Gamma(lk + p + alpha - 2) / Gamma(lk + p)``.

    The first ``n_terms + 1`` terms are summed directly and the rest are
    replaced by a zeta-function tail.  With the default 20000 terms the
    result agrees with the closed forms to about 1e-14.
    """
    check_order(alpha)
    _check_p(p, l)
    if n_terms < 1000:
        raise DomainError(f"n_terms must be >= 1000, got {n_terms}")
    return (1.0 - alpha) * _ratio_sum(p + alpha - 2.0, float(p), l, n_terms)


def s_naive_truncation(alpha: float, l: int, p: int, n_terms: int = DEFAULT_NAIVE_TERMS) -> float:
    """Partial sum ``sum_{k<n_terms} [U(lk + p - 1) - U(lk + p)]``.

    Truncation error is of order ``l^(alpha-2) n_terms^(alpha-1)``.
    """
    check_order(alpha)
    _check_p(p, l)
    if n_terms < 1:
        raise DomainError(f"n_terms must be >= 1, got {n_terms}")
    u = np.concatenate(([0.0], kernel_values(alpha, l * n_terms)))
    idx = l * np.arange(n_terms) + p
    return math.fsum(u[idx - 1] - u[idx])


def _integer_gamma(g: float) -> bool:
    return g >= 0.0 and g == math.floor(g)


def validate_identity(g: float, s: int, t: int, n_terms: int = 10**5) -> tuple[float, float]:
    """Both sides of ``sum_k C(g, t + ks) = (1/s) sum_j w^(-jt) (1 + w^j)^g``.

    ``w = exp(2 pi i / s)``.  The left side is a direct sum of binomial
    coefficients; for non-integer ``g`` the series is only algebraically
    convergent, so after ``n_terms`` terms the remainder is taken from the
    Gamma-ratio tail expansion.  The right side pairs conjugate roots into
    real cosines.  The root with ``1 + w^j = 0`` contributes ``0^g``, read as
    1 when ``g = 0``.
    """
    if s < 1 or not 0 <= t < s:
        raise DomainError(f"need s >= 1 and 0 <= t < s, got s={s}, t={t}")
    g = float(g)

    if _integer_gamma(g):
        lhs = math.fsum(binomial_real(g, m) for m in range(t, int(g) + 1, s))
    else:
        # C(g, m) = (-1)^m Gamma(m - g) / (Gamma(-g) Gamma(m + 1))
        scale = 1.0 / gamma(-g)
        if s % 2 == 0:
            lhs = (-1) ** t * scale * _ratio_sum(t - g, t + 1.0, s, n_terms)
        else:
            even = _ratio_sum(t - g, t + 1.0, 2 * s, n_terms)
            odd = _ratio_sum(t + s - g, t + s + 1.0, 2 * s, n_terms)
            lhs = (-1) ** t * scale * (even - odd)

    terms = [2.0**g]
    for j in range(1, (s + 1) // 2):
        theta = math.pi * j / s
        terms.append(2.0 * (2.0 * math.cos(theta)) ** g * math.cos(theta * (g - 2 * t)))
    if s % 2 == 0 and g == 0.0:
        terms.append((-1.0) ** t)
    rhs = math.fsum(terms) / s
    return lhs, rhs


_cache: dict[tuple[str, int], CoeffTable] = {}
_cache_lock = threading.Lock()


def _cache_file(alpha: float, l: int) -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    return Path(root) / f"S_{alpha.hex()}_{l}.csv"


def _read_table(path: Path, alpha: float, l: int) -> CoeffTable | None:
    try:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError:
        return None
    if len(rows) != l:
        return None
    return CoeffTable(alpha, l, [float(r["S_p"]) for r in rows], "analytic")


def _write_table(path: Path, table: CoeffTable) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".{os.getpid()}.tmp")
        with tmp.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p", "S_p", "method", "alpha", "l"])
            for p, v in enumerate(table.s, start=1):
                writer.writerow([p, repr(float(v)), table.method, repr(table.alpha), table.l])
        tmp.replace(path)
    except OSError:
        pass


def cached_table(alpha: float, l: int) -> CoeffTable:
    """:func:`s_table` memoised on the exact bits of ``alpha``.

    When ``FRACMAP_CACHE_DIR`` is set, tables are also persisted there as CSV.
    """
    alpha = check_order(alpha)
    key = (alpha.hex(), l)
    with _cache_lock:
        table = _cache.get(key)
    if table is not None:
        return table
    path = _cache_file(alpha, l)
    if path is not None and path.exists():
        table = _read_table(path, alpha, l)
    if table is None:
        table = s_table(alpha, l)
        if path is not None:
            _write_table(path, table)
    with _cache_lock:
        return _cache.setdefault(key, table)


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()
