r"""Integer-order Bessel and Laguerre functions.

All functions take a scalar integer order and a scalar or array argument and
return a float or an array of the same shape.  Three regimes are used for
the Bessel functions:

* power series for :math:`|x| \le 2`,
* Miller backward recurrence normalised by the Neumann sums
  :math:`1 = J_0 + 2\sum_k J_{2k}` and :math:`e^x = I_0 + 2\sum_k I_k`,
* the Hankel large-argument expansion once :math:`x \ge \max(x_0, n^2)`,
  where the expansion terms shrink at least geometrically.

Only the exponentially scaled modified Bessel function
:math:`e^{-x} I_n(x)` is exposed; :math:`I_n(225)` alone is of order
:math:`10^{95}`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "MAX_ORDER",
    "SpecFunResult",
    "bessel_j",
    "bessel_i_scaled",
    "log_bessel_i",
    "modified_bessel_i",
    "laguerre",
    "log_factorial",
]

MAX_ORDER = 200

_SERIES_LIMIT = 2.0
_J_ASYMPTOTIC_MIN = 30.0
_I_ASYMPTOTIC_MIN = 50.0
_BIG = 1e250
_TINY = 1e-250


@dataclass(frozen=True)
class SpecFunResult:
    """A value together with a natural-log prefactor.

    The represented number is ``value * exp(log_scale)``.
    """

    value: float
    log_scale: float = 0.0

    def log(self) -> float:
        if self.value <= 0.0:
            return -math.inf if self.value == 0.0 else math.nan
        return math.log(self.value) + self.log_scale


def _check_order(order) -> int:
    if isinstance(order, (bool, np.bool_)) or not isinstance(order, (int, np.integer)):
        raise InvalidArgumentError(f"order must be an integer, got {order!r}")
    order = int(order)
    if not 0 <= order <= MAX_ORDER:
        raise InvalidArgumentError(f"order must lie in [0, {MAX_ORDER}], got {order}")
    return order


def _check_argument(x) -> tuple[np.ndarray, bool]:
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("argument must be finite")
    return np.atleast_1d(arr), scalar


def _finish(out: np.ndarray, scalar: bool):
    return float(out[0]) if scalar else out


def _series_prefactor(order: int, x: np.ndarray) -> np.ndarray:
    # (x/2)^n / n!, evaluated in logs so that large n underflows cleanly
    if order == 0:
        return np.ones_like(x)
    with np.errstate(divide="ignore"):
        logs = order * np.log(x / 2.0) - math.lgamma(order + 1)
    return np.exp(logs)


def _power_series(order: int, x: np.ndarray, sign: float) -> np.ndarray:
    """Sum of (sign x^2/4)^k / (k! (n+1)_k) for small x."""
    z = sign * x * x / 4.0
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 60):
        term = term * z / (k * (k + order))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _hankel_coefficients(order: int, x: np.ndarray, max_terms: int = 200):
    """Yield successive a_k(n) / x^k of the Hankel expansion."""
    mu = 4.0 * order * order
    term = np.ones_like(x)
    yield term
    for k in range(1, max_terms):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        yield term


def _asymptotic_i_scaled(order: int, x: np.ndarray) -> np.ndarray:
    total = np.zeros_like(x)
    prev = np.full_like(x, np.inf)
    for k, term in enumerate(_hankel_coefficients(order, x)):
        mag = np.abs(term)
        # stop at convergence or at the smallest term of the divergent tail
        if np.all((mag <= 1e-17 * np.abs(total)) | (mag > prev)):
            break
        total = total + np.where(mag <= prev, (-1.0) ** k * term, 0.0)
        prev = np.minimum(prev, mag)
    return total / np.sqrt(2.0 * np.pi * x)


def _asymptotic_j(order: int, x: np.ndarray) -> np.ndarray:
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    prev = np.full_like(x, np.inf)
    for k, term in enumerate(_hankel_coefficients(order, x)):
        mag = np.abs(term)
        if np.all((mag <= 1e-17 * (np.abs(p) + np.abs(q))) | (mag > prev)):
            break
        keep = np.where(mag <= prev, term, 0.0)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p = p + sign * keep
        else:
            q = q + sign * keep
        prev = np.minimum(prev, mag)
    # chi = x - (n/2 + 1/4) pi; the phase shift is reduced exactly mod 2 pi
    shift = ((2 * order + 1) % 8) * np.pi / 4.0
    cos_chi = np.cos(x) * math.cos(shift) + np.sin(x) * math.sin(shift)
    sin_chi = np.sin(x) * math.cos(shift) - np.cos(x) * math.sin(shift)
    return np.sqrt(2.0 / (np.pi * x)) * (p * cos_chi - q * sin_chi)


def _bucketed(start: np.ndarray, run, x: np.ndarray, width: int = 32) -> np.ndarray:
    """Run a backward recurrence in groups sharing a starting order."""
    out = np.empty_like(x)
    buckets = (start + width - 1) // width
    for b in np.unique(buckets):
        sel = buckets == b
        out[sel] = run(int(b) * width, x[sel])
    return out


def _miller_j(order: int, x: np.ndarray) -> np.ndarray:
    def run(n_start: int, xs: np.ndarray) -> np.ndarray:
        n_start += n_start % 2
        upper = np.zeros_like(xs)
        cur = np.full_like(xs, 1e-30)
        even_sum = np.zeros_like(xs)
        result = np.zeros_like(xs)
        for n in range(n_start, 0, -1):
            lower = (2.0 * n / xs) * cur - upper
            upper, cur = cur, lower
            m = n - 1
            if m == order:
                result = cur.copy()
            if m > 0 and m % 2 == 0:
                even_sum += cur
            big = np.abs(cur) > _BIG
            if big.any():
                scale = np.where(big, _TINY, 1.0)
                cur *= scale
                upper *= scale
                even_sum *= scale
                result *= scale
        return result / (cur + 2.0 * even_sum)

    start = (np.maximum(order, np.ceil(x)) + 40 + np.ceil(4.5 * np.sqrt(x))).astype(int)
    return _bucketed(start, run, x)


def _miller_i_scaled(order: int, x: np.ndarray) -> np.ndarray:
    def run(n_start: int, xs: np.ndarray) -> np.ndarray:
        upper = np.zeros_like(xs)
        cur = np.full_like(xs, 1e-30)
        total = np.zeros_like(xs)
        result = np.zeros_like(xs)
        for n in range(n_start, 0, -1):
            total += 2.0 * cur
            lower = (2.0 * n / xs) * cur + upper
            upper, cur = cur, lower
            if n - 1 == order:
                result = cur.copy()
            big = cur > _BIG
            if big.any():
                scale = np.where(big, _TINY, 1.0)
                cur *= scale
                upper *= scale
                total *= scale
                result *= scale
        return result / (total + cur)

    start = (order + 40 + np.ceil(np.sqrt(100.0 * x))).astype(int)
    return _bucketed(start, run, x)


def bessel_j(order: int, x):
    """Bessel function of the first kind ``J_order(x)``.

    Parameters
    ----------
    order : int
        Integer order in ``[0, MAX_ORDER]``.
    x : float or array_like
        Finite real argument.  Accuracy is about 1e-13 absolute for
        ``|x| <= 500``.

    Raises
    ------
    InvalidArgumentError
        For an out-of-range order or a non-finite argument.
    """
    order = _check_order(order)
    arr, scalar = _check_argument(x)
    ax = np.abs(arr)
    out = np.empty_like(ax)

    small = ax <= _SERIES_LIMIT
    large = ax >= max(_J_ASYMPTOTIC_MIN, float(order * order))
    mid = ~(small | large)
    if small.any():
        xs = ax[small]
        out[small] = _series_prefactor(order, xs) * _power_series(order, xs, -1.0)
    if large.any():
        out[large] = _asymptotic_j(order, ax[large])
    if mid.any():
        out[mid] = _miller_j(order, ax[mid])
    if order % 2:
        out = np.where(arr < 0, -out, out)
    return _finish(out, scalar)


def bessel_i_scaled(order: int, x):
    """Exponentially scaled modified Bessel function ``exp(-x) I_order(x)``.

    Only non-negative arguments are supported.
    """
    order = _check_order(order)
    arr, scalar = _check_argument(x)
    if np.any(arr < 0):
        raise InvalidArgumentError("modified Bessel argument must be non-negative")
    out = np.empty_like(arr)

    small = arr <= _SERIES_LIMIT
    large = arr >= max(_I_ASYMPTOTIC_MIN, float(order * order))
    mid = ~(small | large)
    if small.any():
        xs = arr[small]
        out[small] = (
            np.exp(-xs) * _series_prefactor(order, xs) * _power_series(order, xs, 1.0)
        )
    if large.any():
        out[large] = _asymptotic_i_scaled(order, arr[large])
    if mid.any():
        out[mid] = _miller_i_scaled(order, arr[mid])
    return _finish(out, scalar)


def log_bessel_i(order: int, x):
    """Natural log of ``I_order(x)``; ``-inf`` where the function vanishes.

    Small arguments are handled in log space, so ``I_50(1e-6)`` does not
    underflow.
    """
    order = _check_order(order)
    arr, scalar = _check_argument(x)
    if np.any(arr < 0):
        raise InvalidArgumentError("modified Bessel argument must be non-negative")
    out = np.empty_like(arr)
    small = arr <= _SERIES_LIMIT
    with np.errstate(divide="ignore"):
        if small.any():
            xs = arr[small]
            out[small] = np.log(_power_series(order, xs, 1.0))
            if order:
                out[small] += order * np.log(xs / 2.0) - math.lgamma(order + 1)
        if (~small).any():
            out[~small] = np.log(bessel_i_scaled(order, arr[~small])) + arr[~small]
    return _finish(out, scalar)


def modified_bessel_i(order: int, x: float) -> SpecFunResult:
    """``I_order(x)`` as a scaled value and its log prefactor."""
    return SpecFunResult(value=bessel_i_scaled(order, float(x)), log_scale=float(x))


def laguerre(order: int, x):
    """Laguerre polynomial ``L_order(x)`` by the three-term recurrence."""
    order = _check_order(order)
    arr, scalar = _check_argument(x)
    prev = np.ones_like(arr)
    if order == 0:
        return _finish(prev, scalar)
    cur = 1.0 - arr
    for k in range(1, order):
        prev, cur = cur, ((2 * k + 1 - arr) * cur - k * prev) / (k + 1)
    return _finish(cur, scalar)


def log_factorial(n: int) -> float:
    """``ln(n!)`` for ``0 <= n <= 10**6``."""
    if isinstance(n, (bool, np.bool_)) or not isinstance(n, (int, np.integer)):
        raise InvalidArgumentError(f"n must be an integer, got {n!r}")
    n = int(n)
    if n < 0 or n > 10**6:
        raise InvalidArgumentError(f"n must lie in [0, 10**6], got {n}")
    if n <= 1000:
        # exact integer, correctly rounded log
        return math.log(math.factorial(n)) if n > 1 else 0.0
    return math.lgamma(n + 1.0)
