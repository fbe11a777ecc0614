"""Iterated product integrals of |zeta(1/2+it)|^2 over reversely iterated segments.

Two integrands are carried together on the same quadrature nodes:

* raw:      prod_{r<k} Z(phi_1^r(t))^2
* weighted: prod_{r<k} Z(phi_1^r(t))^2 / ln phi_1^r(t)

The weighted one is exactly d phi_1^k / dt, so its integral over
[T->k, (T+2l)->k] telescopes to 2l.  That gives a self-test for every
energy computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .ladder import LadderTable, phi1_ext
from .quadrature import adaptive_gk, gauss_legendre
from .segments import SegmentHandle, iterated_segment, segment
from .zeta_kernel import zeta_mod_sq

_LD = np.longdouble

DEFAULT_RTOL = 1e-8
MAX_PANEL = 0.05


class MeanValueError(RuntimeError):
    """No sign change of integrand-minus-mean was found on the segment."""


class SpectralResolutionError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnergyRecord:
    p: int | None
    q: int
    T: float
    value: float
    predicted: float
    quad_err: float
    segment: SegmentHandle = field(repr=False)
    weighted: float = float("nan")
    log_bounds: tuple[float, float] = (float("nan"), float("nan"))

    @property
    def ratio(self) -> float:
        return self.value / self.predicted

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "T": self.T, "value": self.value,
                "predicted": self.predicted, "ratio": self.ratio, "quad_err": self.quad_err,
                "weighted": self.weighted, "base_len": self.segment.base_len,
                "lo": self.segment.lo, "hi": self.segment.hi}


@dataclass(frozen=True)
class MeanValuePoints:
    c1: float
    d: tuple[float, ...]
    product: float
    width: float
    residual: float
    c1_ext: np.longdouble = field(repr=False, compare=False, default=None)

    @property
    def reconstructed(self) -> float:
        return self.width * self.product


def product_integrand(table: LadderTable, t, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(raw, weighted) products along the forward orbit t, phi_1(t), ..., phi_1^{k-1}(t)."""
    u = np.asarray(t).reshape(-1).astype(_LD)
    raw = np.ones(u.shape)
    wt = np.ones(u.shape)
    for r in range(k):
        z2 = zeta_mod_sq(u)
        raw = raw * z2
        wt = wt * (z2 / np.log(u.astype(float)))
        if r < k - 1:
            u = phi1_ext(table, u)
    return raw, wt


def _check_scale(T: float, two_l: float):
    if not two_l > 0:
        raise ValueError("segment length 2l must be positive")
    if two_l > 0.01 * T / math.log(T):
        raise ValueError("2l must not exceed 0.01 T / ln T")


def _integrate(table: LadderTable, seg: SegmentHandle, k: int, rtol: float):
    """Adaptive integrals of the raw and weighted products over ``seg``."""
    lo, hi = seg.lo_ext, seg.hi_ext
    if k == 0:
        L = float(hi - lo)
        return L, L, 0.0
    scale = math.log(seg.T) ** k

    def f(t):
        raw, wt = product_integrand(table, t, k)
        return np.stack([raw / scale, wt], axis=1)

    width = float(hi - lo)
    res = adaptive_gk(f, lo, hi, rtol=rtol, max_width=min(MAX_PANEL, width / 64), extended=True)
    raw, wt = float(res.value[0]) * scale, float(res.value[1])
    return raw, wt, res.error * scale


def _log_bounds(seg: SegmentHandle, k: int) -> tuple[float, float]:
    """min and max of prod_r ln phi_1^r(t) over the segment, from the iterated endpoints."""
    lo = math.prod(math.log(float(seg.chain_lo[k - r])) for r in range(k))
    hi = math.prod(math.log(float(seg.chain_hi[k - r])) for r in range(k))
    return lo, hi


def weighted_energy(table: LadderTable, T: float, l: float, k: int, *,
                    rtol: float = DEFAULT_RTOL) -> float:
    """Integral of prod Z~^2(phi_1^r(t)) over [T->k, (T+2l)->k]; equals 2l by telescoping."""
    _check_scale(T, 2 * l)
    seg = iterated_segment(table, T, 2 * l, k)
    return _integrate(table, seg, k, rtol)[1]


def _record(table, seg, k, p, predicted, rtol) -> EnergyRecord:
    raw, wt, err = _integrate(table, seg, k, rtol)
    bounds = _log_bounds(seg, k) if k else (1.0, 1.0)
    return EnergyRecord(p, k, seg.T, raw, predicted, err, seg, wt, bounds)


def energy_general(table: LadderTable, T: float, l: float, k: int, *,
                   rtol: float = DEFAULT_RTOL) -> EnergyRecord:
    """Raw energy over [T->k, (T+2l)->k], predicted 2l ln^k T."""
    _check_scale(T, 2 * l)
    seg = iterated_segment(table, T, 2 * l, k)
    return _record(table, seg, k, None, 2 * l * math.log(T) ** k, rtol)


def energy_pq(table: LadderTable, T: float, p: int, q: int, *,
              rtol: float = DEFAULT_RTOL) -> EnergyRecord:
    """Energy E_{p,q}(T) over segment (p, q), predicted ln^{q-p} T."""
    if p < 1 or q < 1:
        raise ValueError("p and q must be >= 1")
    seg = segment(table, T, p, q)
    _check_scale(T, seg.base_len)
    return _record(table, seg, q, p, math.log(T) ** (q - p), rtol)


def sandwich_ok(rec: EnergyRecord, slack: float = 1e-7) -> bool:
    """raw / weighted must sit between the endpoint products of ln."""
    lo, hi = rec.log_bounds
    r = rec.value / rec.weighted
    return lo * (1 - slack) <= r <= hi * (1 + slack)


def simpson_energy(table: LadderTable, seg: SegmentHandle, k: int, *,
                   rtol: float = 1e-9, n0: int = 256, n_max: int = 1 << 17) -> float:
    """Raw energy by composite Simpson, doubling until successive results agree."""
    lo, hi = seg.lo_ext, seg.hi_ext
    prev = None
    n = n0
    while True:
        t = lo + (hi - lo) * (np.arange(n + 1, dtype=_LD) / _LD(n))
        y = product_integrand(table, t, k)[0] if k else np.ones(n + 1)
        h = float(hi - lo) / n
        val = h / 3.0 * (y[0] + y[-1] + 4.0 * math.fsum(y[1:-1:2].tolist())
                         + 2.0 * math.fsum(y[2:-1:2].tolist()))
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            return val
        if n >= n_max:
            return val
        prev = val
        n *= 2


# --------------------------------------------------------------------------
# mean-value points
# --------------------------------------------------------------------------

def mean_value_points(table: LadderTable, rec: EnergyRecord, *, n_grid: int = 512,
                      max_refine: int = 4) -> MeanValuePoints:
    """Leftmost c1 with |segment| * prod |zeta(phi_1^r(c1))|^2 = rec.value.

    The search variable is the offset from the left end, so brentq works at
    the resolution of the segment rather than of T.
    """
    if not rec.value > 0:
        raise ValueError("record value must be positive")
    seg, q = rec.segment, rec.q
    lo = seg.lo_ext
    width = float(seg.hi_ext - lo)
    mean = rec.value / width

    def g(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        t = lo + u.astype(_LD)
        y = product_integrand(table, t, q)[0] if q else np.ones(u.shape)
        return y - mean

    root = None
    n = n_grid
    for _ in range(max_refine):
        u = np.linspace(0.0, width, n + 1)
        v = g(u)
        tiny = 1e-14 * mean
        zero = np.nonzero(np.abs(v[1:-1]) <= tiny)[0]
        sign = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
        cand = []
        if zero.size:
            cand.append((u[zero[0] + 1], None))
        if sign.size:
            i = sign[0]
            cand.append((u[i], (u[i], u[i + 1])))
        if cand:
            cand.sort(key=lambda c: c[0])
            x, bracket = cand[0]
            if bracket is None:
                root = x
            else:
                root = brentq(lambda s: float(g(s)[0]), *bracket, xtol=1e-300,
                              rtol=4 * np.finfo(float).eps, maxiter=200)
            break
        n *= 4
    if root is None:
        raise MeanValueError(f"no sign change of integrand - mean on segment ({rec.p},{rec.q})")
    t_c = lo + _LD(root)
    if q:
        orbit = [t_c]
        for _ in range(q - 1):
            orbit.append(phi1_ext(table, np.array([orbit[-1]]))[0])
        prod = float(product_integrand(table, np.array([t_c]), q)[0][0])
    else:
        orbit = [t_c]
        prod = 1.0
    recon = width * prod
    return MeanValuePoints(float(t_c), tuple(float(x) for x in orbit), prod, width,
                           abs(recon / rec.value - 1), t_c)


def mean_value_contained(mv: MeanValuePoints, seg: SegmentHandle) -> bool:
    """d^r lies strictly inside the iterated interval of index q - r."""
    for r, d in enumerate(mv.d):
        a, b = seg.level(seg.q - r)
        if not a < d < b:
            return False
    return True


# --------------------------------------------------------------------------
# Parseval check
# --------------------------------------------------------------------------

def _amplitude_nodes(table: LadderTable, seg: SegmentHandle, k: int, n_panels: int, order: int = 8):
    x, w = gauss_legendre(order)
    L = float(seg.hi_ext - seg.lo_ext)
    h = L / n_panels
    s = ((np.arange(n_panels)[:, None] + 0.5 * (x[None, :] + 1)) * h).ravel()
    wts = np.tile(w * (0.5 * h), n_panels)
    t = seg.lo_ext + s.astype(_LD)
    f = np.sqrt(product_integrand(table, t, k)[0]) if k else np.ones(s.size)
    return s, wts, f


def _spectral_sum(G: np.ndarray, a: float, d_omega: float) -> float:
    """Integral over the grid of F^2 = (|G|^2 + Re(e^{2i w a} G^2)) / pi.

    |G|^2 by trapezoid; the oscillatory part by a Filon rule treating G^2 as
    piecewise linear and the exponential exactly.
    """
    mod2 = np.abs(G) ** 2
    trap = d_omega * (math.fsum(mod2[1:-1].tolist()) + 0.5 * (mod2[0] + mod2[-1]))
    g2 = G * G
    beta = 2 * a
    x = beta * d_omega
    omega = d_omega * np.arange(G.size)
    # exact integral of e^{i beta w} * linear interpolant on each cell
    e0 = np.exp(1j * beta * omega[:-1])
    if abs(x) < 1e-6:
        w0 = w1 = 0.5 * d_omega
        cells = e0 * (w0 * g2[:-1] + w1 * g2[1:])
    else:
        eix = np.exp(1j * x)
        # int_0^h e^{i beta s}(1 - s/h) ds and int_0^h e^{i beta s}(s/h) ds
        i1 = (eix - 1) / (1j * beta)
        j1 = (eix / (1j * beta)) - (eix - 1) / (1j * beta) ** 2 / d_omega
        cells = e0 * ((i1 - j1) * g2[:-1] + j1 * g2[1:])
    osc = math.fsum(np.real(cells).tolist())
    return (trap + osc) / math.pi


def spectral_energy(table: LadderTable, rec: EnergyRecord, omega_max: float | None = None,
                    n_omega: int | None = None, *, n_panels: int | None = None,
                    check: bool = True) -> float:
    """Energy recovered from the cosine transform of f = prod |zeta| on the segment.

    Defaults: ``omega_max = 200 * 2 pi / L`` and a spacing of pi / (4 L), which
    is below the Nyquist spacing pi / L for |G|^2.  With ``check`` set, the
    result on the grid of twice the spacing must agree within 5%.
    """
    seg, k = rec.segment, rec.q
    L = float(seg.hi_ext - seg.lo_ext)
    if omega_max is None:
        omega_max = 200 * 2 * math.pi / L
    if n_omega is None:
        n_omega = int(math.ceil(omega_max / (math.pi / (4 * L)))) + 1
    if n_omega < 3:
        raise ValueError("need at least 3 frequencies")
    if n_omega % 2 == 0:
        n_omega += 1
    if n_panels is None:
        n_panels = max(64, int(math.ceil(omega_max * L / math.pi)))
    s, w, f = _amplitude_nodes(table, seg, k, n_panels)
    d_omega = omega_max / (n_omega - 1)
    omega = d_omega * np.arange(n_omega)
    G = np.empty(n_omega, dtype=complex)
    wf = w * f
    for start in range(0, n_omega, 512):
        om = omega[start:start + 512]
        G[start:start + 512] = np.exp(1j * np.outer(om, s)) @ wf
    fine = _spectral_sum(G, seg.lo, d_omega)
    if check:
        coarse = _spectral_sum(G[::2], seg.lo, 2 * d_omega)
        if abs(coarse - fine) > 0.05 * abs(fine):
            raise SpectralResolutionError(
                f"frequency grid too coarse: {coarse:.6g} vs {fine:.6g}")
    return fine


def indicator_transform(a: float, b: float, omega) -> np.ndarray:
    """Cosine transform of the indicator of [a, b]."""
    omega = np.asarray(omega, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = math.sqrt(2 / math.pi) * (np.sin(omega * b) - np.sin(omega * a)) / omega
    return np.where(omega == 0, math.sqrt(2 / math.pi) * (b - a), out)


def second_moment_mean(T: float, L: float, *, rtol: float = 1e-10) -> float:
    """(1/L) * integral of |zeta(1/2+it)|^2 over [T, T + L]."""
    return adaptive_gk(zeta_mod_sq, T, T + L, rtol=rtol, max_width=MAX_PANEL).value / L
