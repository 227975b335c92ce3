"""Bessel functions of the first kind for small real arguments, and the truncation rule.

Two independent evaluations are provided: the ascending power series and
Miller's backward recurrence normalised by ``J_0 + 2 sum_{m even} J_m = 1``.
They check each other.
"""

from __future__ import annotations

import math

import numpy as np

MAX_ORDER = 60


def _check_arg(z: float) -> float:
    z = float(z)
    if not math.isfinite(z) or abs(z) > 1.0:
        raise ValueError(f"argument z={z} outside [-1, 1]")
    return z


def bessel_series(m: int, z: float) -> float:
    """J_m(z) from the ascending series ``sum_s (-1)^s (z/2)^(2s+m) / (s! (s+m)!)``."""
    z = _check_arg(z)
    m = int(m)
    if abs(m) > MAX_ORDER:
        raise ValueError(f"order |m|={abs(m)} exceeds {MAX_ORDER}")
    if m < 0:
        return (-1) ** m * bessel_series(-m, z)
    half = 0.5 * z
    term = 1.0
    for i in range(1, m + 1):
        term *= half / i
    total = term
    q = -half * half
    s = 0
    while term != 0.0:
        s += 1
        term *= q / (s * (s + m))
        total += term
        if abs(term) < 1e-18 and abs(term) <= 1e-17 * abs(total):
            break
    return total


def bessel_backward(z: float, k: int) -> np.ndarray:
    """``[J_0(z), ..., J_k(z)]`` by backward recurrence from order ``k + max(16, k)``.

    The recurrence is run on the ratios ``J_m / J_{m-1} = z / (2m - z J_{m+1}/J_m)``
    rather than on unnormalised values, so nothing overflows however small
    ``z`` is; the ratios are then chained upward and normalised.
    """
    z = _check_arg(z)
    k = int(k)
    if k < 1:
        raise ValueError("k must be at least 1")
    out = np.zeros(k + 1)
    if z == 0.0:
        out[0] = 1.0
        return out
    start = k + max(16, k)
    ratios = np.zeros(start + 2)
    for m in range(start, 0, -1):
        ratios[m] = z / (2.0 * m - z * ratios[m + 1])
    # J_m / J_0, underflowing quietly to zero at high order
    rel = np.cumprod(np.concatenate([[1.0], ratios[1 : start + 1]]))
    j0 = 1.0 / (1.0 + 2.0 * rel[2::2].sum())
    out[:] = j0 * rel[: k + 1]
    return out


def bessel_symmetric(z: float, k: int) -> np.ndarray:
    """``J_m(z)`` for ``m = -k..k`` (index ``m + k``), via the backward recurrence."""
    pos = bessel_backward(z, k)
    m = np.arange(1, k + 1)
    neg = ((-1.0) ** m * pos[1:])[::-1]
    return np.concatenate([neg, pos])


def truncation_bound(k: int, z: float, norm_ratio: float) -> float:
    """``8 |nu| (|z|/2)^(k+1) (k+2) / (k+1)!`` bounding the truncated eigenvalue error."""
    return 8.0 * abs(norm_ratio) * (abs(z) / 2.0) ** (k + 1) * (k + 2) / math.factorial(k + 1)


def choose_truncation(z: float, norm_ratio: float, eps: float) -> int:
    """Smallest ``k >= max(1, ceil|z|)`` whose truncation bound is at most ``eps``."""
    if not 0.0 < norm_ratio <= 1.0:
        raise ValueError("norm_ratio must lie in (0, 1]")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    k = max(1, math.ceil(abs(z)))
    while truncation_bound(k, z, norm_ratio) > eps:
        k += 1
    return k
