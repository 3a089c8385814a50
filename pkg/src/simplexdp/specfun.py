"""Log-gamma, digamma, trigamma and log-space Beta functions.

All functions accept scalars or array-likes and return a float for scalar input
and an ``ndarray`` otherwise. Arguments must be finite and strictly positive.

Beta-function arithmetic anywhere in the package goes through :func:`log_beta`
or :func:`log_multivariate_beta`; Gamma values are never exponentiated, which
keeps ratios such as B(a, b) / B(a', b') finite for concentrations in the
thousands.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

__all__ = [
    "log_gamma",
    "digamma",
    "trigamma",
    "log_beta",
    "log_multivariate_beta",
]

EULER_GAMMA = 0.5772156649015329
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# zeta(k) - 1 for k = 2..30, for the Taylor series of log Gamma(1 + h).
_ZETA_MINUS_ONE = (
    0.6449340668482264,
    0.2020569031595943,
    0.08232323371113819,
    0.03692775514336993,
    0.01734306198444914,
    0.008349277381922827,
    0.00407735619794434,
    0.0020083928260822143,
    0.0009945751278180853,
    0.0004941886041194645,
    0.0002460865533080483,
    0.00012271334757848915,
    6.124813505870483e-05,
    3.058823630702049e-05,
    1.528225940865187e-05,
    7.637197637899763e-06,
    3.81729326499984e-06,
    1.908212716553939e-06,
    9.539620338727962e-07,
    4.769329867878064e-07,
    2.38450502727733e-07,
    1.1921992596531106e-07,
    5.960818905125948e-08,
    2.980350351465228e-08,
    1.4901554828365043e-08,
    7.45071178983543e-09,
    3.725334024788457e-09,
    1.862659723513049e-09,
    9.313274324196682e-10,
)

# Radius around x = 1 and x = 2 where the Taylor series replaces Lanczos.
_SERIES_RADIUS = 0.25
# Digamma / trigamma are shifted upward until x >= this before the asymptotic series.
_ASYMPTOTIC_FROM = 10.0


def _positive(x, name="x"):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if np.any(arr <= 0.0):
        raise DomainError(f"{name} must be strictly positive, got min {arr.min()!r}")
    return arr


def _out(template, values):
    if np.ndim(template) == 0:
        return float(values)
    return values


def _lngamma_1p_series(h, lib=np):
    """log Gamma(1 + h) for |h| <= 0.25."""
    acc = 0.0 * h
    power = h * h
    sign = 1.0
    for k, zm1 in enumerate(_ZETA_MINUS_ONE, start=2):
        acc += sign * zm1 / k * power
        power = power * h
        sign = -sign
    return acc - lib.log1p(h) + h * (1.0 - EULER_GAMMA)


def _lngamma_lanczos(x, lib=np):
    z = x - 1.0
    a = _LANCZOS_COEF[0] + 0.0 * z
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        a += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * lib.log(t) - t + lib.log(a)


def _lngamma_scalar(x: float) -> float:
    if x < 0.5:
        return _lngamma_scalar(x + 1.0) - math.log(x)
    if abs(x - 1.0) <= _SERIES_RADIUS:
        return _lngamma_1p_series(x - 1.0, math)
    if abs(x - 2.0) <= _SERIES_RADIUS:
        h = x - 2.0
        return math.log1p(h) + _lngamma_1p_series(h, math)
    return _lngamma_lanczos(x, math)


def _lngamma(x):
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    tiny = x < 0.5
    # log Gamma(x) = log Gamma(x + 1) - log x keeps Lanczos on its accurate range.
    shifted = np.where(tiny, x + 1.0, x)
    near1 = np.abs(shifted - 1.0) <= _SERIES_RADIUS
    near2 = np.abs(shifted - 2.0) <= _SERIES_RADIUS
    rest = ~(near1 | near2)
    out[near1] = _lngamma_1p_series(shifted[near1] - 1.0)
    h2 = shifted[near2] - 2.0
    out[near2] = np.log1p(h2) + _lngamma_1p_series(h2)
    out[rest] = _lngamma_lanczos(shifted[rest])
    out[tiny] -= np.log(x[tiny])
    return out


def _scalar(x) -> bool:
    return isinstance(x, (float, int)) and not isinstance(x, bool)


def _check_scalar(x, name="x") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite")
    if x <= 0.0:
        raise DomainError(f"{name} must be strictly positive, got min {x!r}")
    return x


def log_gamma(x):
    """Natural logarithm of the Gamma function for x > 0.

    Uses a Lanczos approximation (g = 7, nine terms), switching to the Taylor
    series of log Gamma(1 + h) within 0.25 of the zeros at 1 and 2 so that the
    relative error stays small there as well.
    """
    if _scalar(x):
        return _lngamma_scalar(_check_scalar(x))
    arr = _positive(x)
    return _out(x, _lngamma(arr).reshape(arr.shape))


def digamma(x):
    """Digamma function psi(x) = Gamma'(x) / Gamma(x) for x > 0."""
    arr = _positive(x)
    y = np.atleast_1d(arr).copy()
    acc = np.zeros_like(y)
    mask = y < _ASYMPTOTIC_FROM
    while np.any(mask):
        acc[mask] -= 1.0 / y[mask]
        y[mask] += 1.0
        mask = y < _ASYMPTOTIC_FROM
    inv2 = 1.0 / (y * y)
    tail = inv2 * (
        1.0 / 12
        - inv2 * (1.0 / 120
        - inv2 * (1.0 / 252
        - inv2 * (1.0 / 240
        - inv2 * (1.0 / 132
        - inv2 * (691.0 / 32760)))))
    )
    res = acc + np.log(y) - 0.5 / y - tail
    return _out(x, res.reshape(arr.shape))


def trigamma(x):
    """Trigamma function psi'(x) = sum_{m >= 0} 1 / (x + m)^2 for x > 0."""
    arr = _positive(x)
    y = np.atleast_1d(arr).copy()
    acc = np.zeros_like(y)
    mask = y < _ASYMPTOTIC_FROM
    while np.any(mask):
        acc[mask] += 1.0 / (y[mask] * y[mask])
        y[mask] += 1.0
        mask = y < _ASYMPTOTIC_FROM
    inv = 1.0 / y
    inv2 = inv * inv
    series = inv2 * inv * (
        1.0 / 6
        - inv2 * (1.0 / 30
        - inv2 * (1.0 / 42
        - inv2 * (1.0 / 30
        - inv2 * (5.0 / 66
        - inv2 * (691.0 / 2730
        - inv2 * (7.0 / 6)))))))
    res = acc + inv + 0.5 * inv2 + series
    return _out(x, res.reshape(arr.shape))


def _stirling_correction(x):
    """log Gamma(x) - [(x - 1/2) log x - x + log(2 pi)/2], valid for x >= 10."""
    inv = 1.0 / x
    inv2 = inv * inv
    return inv * (
        1.0 / 12
        - inv2 * (1.0 / 360
        - inv2 * (1.0 / 1260
        - inv2 * (1.0 / 1680
        - inv2 * (1.0 / 1188
        - inv2 * (691.0 / 360360
        - inv2 * (1.0 / 156)))))))


def _log_beta_large(s, g, lngamma, lib):
    return (
        lngamma(s)
        - (g - 0.5) * lib.log1p(s / g)
        - s * lib.log(s + g)
        + s
        + _stirling_correction(g)
        - _stirling_correction(s + g)
    )


def log_beta(a, b):
    """log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b).

    When the larger argument is at least 10 the difference
    log Gamma(b) - log Gamma(a + b) is formed from Stirling corrections instead
    of subtracting two large log-gamma values.
    """
    if _scalar(a) and _scalar(b):
        a, b = _check_scalar(a, "a"), _check_scalar(b, "b")
        s, g = min(a, b), max(a, b)
        if g >= _ASYMPTOTIC_FROM:
            return _log_beta_large(s, g, _lngamma_scalar, math)
        return _lngamma_scalar(s) + _lngamma_scalar(g) - _lngamma_scalar(s + g)

    a_arr = _positive(a, "a")
    b_arr = _positive(b, "b")
    a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
    small = np.atleast_1d(np.minimum(a_arr, b_arr)).astype(np.float64)
    big = np.atleast_1d(np.maximum(a_arr, b_arr)).astype(np.float64)
    out = np.empty_like(small)

    large = big >= _ASYMPTOTIC_FROM
    out[large] = _log_beta_large(small[large], big[large], _lngamma, np)
    s, g = small[~large], big[~large]
    out[~large] = _lngamma(s) + _lngamma(g) - _lngamma(s + g)

    if a_arr.ndim == 0:
        return float(out[0])
    return out.reshape(a_arr.shape)


def log_multivariate_beta(y):
    """log B(y) = sum_i log Gamma(y_i) - log Gamma(sum_i y_i) for a vector y.

    The last axis of ``y`` indexes the components; leading axes are batched.
    """
    arr = _positive(y, "y")
    if arr.ndim == 0 or arr.shape[-1] < 2:
        raise DomainError("multivariate Beta needs at least two components")
    total = arr.sum(axis=-1)
    flat = _lngamma(arr.reshape(-1)).reshape(arr.shape)
    res = flat.sum(axis=-1) - _lngamma(np.atleast_1d(total).reshape(-1)).reshape(np.shape(total))
    if arr.ndim == 1:
        return float(res)
    return res
