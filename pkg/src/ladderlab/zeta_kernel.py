"""Riemann zeta on the critical line: theta, Hardy's Z and |zeta(1/2+it)|^2.

Two evaluation routes are provided:

* ``fast``: Riemann-Siegel main sum with the remainder terms C0..C4,
  vectorised over ``t`` with numpy.  Valid for ``t >= T_MIN``.
* ``oracle``: Euler-Maclaurin summation of zeta(1/2+it) with an explicit
  remainder bound.  Phases are reduced in extended precision and theta is
  taken from mpmath, so the result is good to ~1e-11 up to t ~ 1e6.  Slow;
  meant for tests and calibration.
"""

from __future__ import annotations

import math
from enum import Enum
from functools import lru_cache

import mpmath
import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import loggamma

T_MIN = 100.0

# theta switches from the exact log-gamma formula to its asymptotic series here
_THETA_ASYMPTOTIC_FROM = 50.0
_THETA_TERMS = 8

_LD = np.longdouble
_TWO_PI_LD = _LD("6.283185307179586476925286766559005768394")
_PI_LD = _LD("3.141592653589793238462643383279502884197")


class EvalMode(str, Enum):
    FAST = "fast"
    ORACLE = "oracle"


class DomainError(ValueError):
    """Argument outside the region where the requested evaluation is valid."""


# --------------------------------------------------------------------------
# theta
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _theta_coefficients() -> tuple[float, ...]:
    # theta(t) ~ (t/2)ln(t/2pi) - t/2 - pi/8 + sum_j a_j t^(1-2j)
    out = []
    for j in range(1, _THETA_TERMS + 1):
        b = abs(mpmath.bernoulli(2 * j))
        out.append(float((1 - mpmath.mpf(2) ** (1 - 2 * j)) * b / (4 * j * (2 * j - 1))))
    return tuple(out)


def rs_theta(t):
    """Riemann-Siegel theta, ``-(t/2) ln(pi) + Im ln Gamma(1/4 + it/2)``.

    Scalars in, float out; arrays in, array out.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("rs_theta requires t > 0")
    out = np.empty_like(arr)
    big = arr >= _THETA_ASYMPTOTIC_FROM
    tb = arr[big]
    if tb.size:
        inv = 1.0 / tb
        inv2 = inv * inv
        corr = np.zeros_like(tb)
        # Horner in 1/t^2, highest order first
        for a in reversed(_theta_coefficients()):
            corr = corr * inv2 + a
        out[big] = 0.5 * tb * np.log(tb / (2 * np.pi)) - 0.5 * tb - np.pi / 8 + corr * inv
    ts = arr[~big]
    if ts.size:
        out[~big] = loggamma(0.25 + 0.5j * ts).imag - 0.5 * ts * math.log(math.pi)
    if out.ndim == 0:
        return float(out)
    return out


# --------------------------------------------------------------------------
# Riemann-Siegel remainder coefficients
# --------------------------------------------------------------------------

_PSI_ORDER = 80  # Taylor degree in x = p - 1/2


@lru_cache(maxsize=None)
def _rs_correction_polys() -> tuple[np.ndarray, ...]:
    """Taylor coefficients (in x = p - 1/2) of C0..C4.

    Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) becomes
    -cos(2 pi x^2 - 5 pi / 8) / cos(2 pi x), which is entire; its series is
    obtained by exact power-series division at 50 digits.
    """
    with mpmath.workdps(50):
        n = _PSI_ORDER + 14
        tau = 2 * mpmath.pi
        c58, s58 = mpmath.cos(5 * mpmath.pi / 8), mpmath.sin(5 * mpmath.pi / 8)
        num = [mpmath.mpf(0)] * (n + 1)
        den = [mpmath.mpf(0)] * (n + 1)
        for m in range(n // 2 + 1):
            den[2 * m] = (-1) ** m * tau ** (2 * m) / mpmath.factorial(2 * m)
        for m in range(n // 4 + 1):
            if 4 * m <= n:
                num[4 * m] += c58 * (-1) ** m * tau ** (2 * m) / mpmath.factorial(2 * m)
            if 4 * m + 2 <= n:
                num[4 * m + 2] += s58 * (-1) ** m * tau ** (2 * m + 1) / mpmath.factorial(2 * m + 1)
        quot = [mpmath.mpf(0)] * (n + 1)
        for i in range(n + 1):
            quot[i] = (num[i] - sum(quot[j] * den[i - j] for j in range(i))) / den[0]
        psi = [-c for c in quot]

        def deriv(c, k):
            for _ in range(k):
                c = [c[i] * i for i in range(1, len(c))]
            return c

        def combo(*pairs):
            out = [mpmath.mpf(0)] * (_PSI_ORDER + 1)
            for w, k in pairs:
                d = deriv(psi, k)
                for i in range(_PSI_ORDER + 1):
                    out[i] += w * d[i]
            return np.array([float(v) for v in out])

        pi2 = mpmath.pi ** 2
        polys = (
            combo((1, 0)),
            combo((-1 / (96 * pi2), 3)),
            combo((1 / (64 * pi2), 2), (1 / (18432 * pi2 ** 2), 6)),
            combo((-1 / (64 * pi2), 1), (-1 / (3840 * pi2 ** 2), 5),
                  (-1 / (5308416 * pi2 ** 3), 9)),
            combo((1 / (128 * pi2), 0), (19 / (24576 * pi2 ** 2), 4),
                  (11 / (5898240 * pi2 ** 3), 8), (1 / (2038431744 * pi2 ** 4), 12)),
        )
    return polys


def rs_corrections(p) -> np.ndarray:
    """Evaluate C0..C4 at fractional parts ``p``; shape (5, *p.shape)."""
    x = np.asarray(p, dtype=float) - 0.5
    return np.stack([npoly.polyval(x, c) for c in _rs_correction_polys()])


# --------------------------------------------------------------------------
# Hardy Z
# --------------------------------------------------------------------------

_CHUNK_ELEMS = 1 << 21


def _theta_fast_ld(tl: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Asymptotic theta in extended precision, reduced mod 2 pi."""
    inv = 1.0 / t
    inv2 = inv * inv
    corr = np.zeros_like(t)
    for a in reversed(_theta_coefficients()):
        corr = corr * inv2 + a
    th = 0.5 * tl * np.log(tl / _TWO_PI_LD) - 0.5 * tl - _PI_LD / 8 + (corr * inv).astype(_LD)
    return th - _TWO_PI_LD * np.rint(th / _TWO_PI_LD)


@lru_cache(maxsize=8)
def _log_table(nmax: int) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(1, nmax + 1, dtype=_LD)
    logn = np.log(n)
    rsqrt = (1.0 / np.sqrt(n)).astype(float)
    logn.setflags(write=False)
    rsqrt.setflags(write=False)
    return logn, rsqrt


def _z_fast(t_in: np.ndarray) -> np.ndarray:
    # phases theta - t ln n reach ~1e6 rad; they are formed in extended
    # precision so the result carries ~1e-13 rather than ~1e-10 noise.
    # ``t_in`` may itself be extended precision (quadrature abscissae).
    t_ext = t_in.astype(_LD)
    t = t_in.astype(float)
    a = np.sqrt(t / (2 * np.pi))
    N = np.floor(a).astype(np.int64)
    p = a - N
    out = np.empty_like(t)
    nmax = int(N.max()) if N.size else 0
    logn, rsqrt = _log_table(max(nmax, 1))
    step = max(1, _CHUNK_ELEMS // max(nmax, 1))
    for lo in range(0, t.size, step):
        sl = slice(lo, lo + step)
        tl = t_ext[sl]
        nk = int(N[sl].max())
        ph = _theta_fast_ld(tl, t[sl])[:, None] - tl[:, None] * logn[None, :nk]
        ph = ph - _TWO_PI_LD * np.rint(ph / _TWO_PI_LD)
        terms = rsqrt[None, :nk] * np.cos(ph.astype(float))
        terms[np.arange(1, nk + 1)[None, :] > N[sl, None]] = 0.0
        out[sl] = 2.0 * terms.sum(axis=1)
    corr = rs_corrections(p)
    inv_a = 1.0 / a
    rem = np.zeros_like(t)
    for c in corr[::-1]:
        rem = rem * inv_a + c
    sign = np.where(N % 2 == 1, 1.0, -1.0)
    return out + sign * a ** -0.5 * rem


def _theta_ld(t: float) -> np.longdouble:
    """theta(t) reduced mod 2 pi, exact to extended precision."""
    with mpmath.workdps(40):
        th = mpmath.siegeltheta(mpmath.mpf(t))
        th = th - 2 * mpmath.pi * mpmath.floor(th / (2 * mpmath.pi))
        return _LD(mpmath.nstr(th, 30, strip_zeros=False))


def em_plan(t: float, target: float = 1e-15) -> tuple[int, int, float]:
    """Choose (N, M) for Euler-Maclaurin at s = 1/2 + it.

    Returns the main-sum cutoff N, the number M of Bernoulli terms and the
    remainder bound, which is |s+2M+1|/(sigma+2M+1) times the first omitted
    term.
    """
    s = complex(0.5, t)
    N = max(12, int(math.ceil(abs(t) / math.pi)) + 10)
    weights = _bernoulli_weights(121)
    while True:
        scale = float(N) ** -0.5
        ratio = s / N  # (s)_{2j-1} N^{1-2j}, kept scaled to avoid overflow
        for j in range(1, 122):
            # bound from the first omitted term j
            term = abs(weights[j - 1]) * abs(ratio) * scale
            bound = term * abs(s + 2 * j - 1) / (0.5 + 2 * j - 1)
            if bound < target:
                return N, j - 1, bound
            ratio *= (s + 2 * j - 1) * (s + 2 * j) / (float(N) * N)
        N *= 2


@lru_cache(maxsize=256)
def _bernoulli_weights(M: int) -> tuple[float, ...]:
    return tuple(float(mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j)) for j in range(1, M + 1))


def _z_oracle_scalar(t: float) -> float:
    N, M, _ = em_plan(t)
    s = complex(0.5, t)
    theta = _theta_ld(t)
    n = np.arange(1, N, dtype=_LD)
    ph = theta - _LD(t) * np.log(n)
    ph = ph - _TWO_PI_LD * np.round(ph / _TWO_PI_LD)
    main = np.sum(np.cos(ph) / np.sqrt(n))
    # tail: N^{-s} [N/(s-1) + 1/2 + sum_j B_2j/(2j)! (s)_{2j-1} N^{1-2j}]
    bracket = N / (s - 1) + 0.5
    ratio = s / N
    for j, w in enumerate(_bernoulli_weights(M), start=1):
        bracket += w * ratio
        ratio *= (s + 2 * j - 1) * (s + 2 * j) / (float(N) * N)
    phN = theta - _LD(t) * np.log(_LD(N))
    phN = phN - _TWO_PI_LD * np.round(phN / _TWO_PI_LD)
    rot = complex(float(np.cos(phN)), float(np.sin(phN))) * N ** -0.5
    return float(main + _LD((rot * bracket).real))


def hardy_z(t, mode: EvalMode | str = EvalMode.FAST):
    """Hardy's Z(t) = exp(i theta(t)) zeta(1/2 + it), a real function.

    ``t`` may be a longdouble array in fast mode; the extra digits are used
    in the phase.  The result is always float64.
    """
    mode = EvalMode(mode)
    arr = np.asarray(t)
    if arr.dtype != _LD:
        arr = arr.astype(float)
    if mode is EvalMode.FAST:
        if np.any(arr < T_MIN):
            raise DomainError(f"fast mode needs t >= {T_MIN}")
        out = _z_fast(arr.reshape(-1)).reshape(arr.shape)
    else:
        if np.any(arr <= 0):
            raise DomainError("oracle mode needs t > 0")
        out = np.array([_z_oracle_scalar(float(x)) for x in arr.reshape(-1)],
                       dtype=float).reshape(arr.shape)
    if out.ndim == 0:
        return float(out)
    return out


def zeta_mod_sq(t, mode: EvalMode | str = EvalMode.FAST):
    """|zeta(1/2+it)|^2, computed as Z(t)^2."""
    z = hardy_z(t, mode)
    return z * z
