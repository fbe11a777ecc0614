"""A model Jacob's ladder phi_1 tabulated over a working window.

phi_1 is defined by ``phi_1'(t) = |zeta(1/2+it)|^2 / ln t`` and the anchor
``phi_1(t_lo) = t_lo - (1 - c) t_lo / ln t_lo``.  Since the right-hand side
does not depend on phi_1, the ODE is a cumulative quadrature: the table
stores phi_1 at adaptively chosen knots, and between knots phi_1 is the
knot value plus a 16-point Gauss-Legendre integral of the same derivative.
That keeps phi_1 an exact antiderivative of its own integrand to rounding
level, which the downstream change-of-variables identities depend on.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .quadrature import gauss_legendre
from .zeta_kernel import T_MIN, zeta_mod_sq

EULER_GAMMA = 0.57721566490153286061
OMEGA_MODEL = "ln t"

GL_ORDER = 16
_LD = np.longdouble
INITIAL_STEP = 0.5
STEP_FLOOR = 1e-4


class WindowError(ValueError):
    """A query or construction falls outside the tabulated window."""

    def __init__(self, message: str, *, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class LadderBuildError(RuntimeError):
    pass


@dataclass(frozen=True)
class Constants:
    c: float = EULER_GAMMA

    def __post_init__(self):
        if not 0.0 < self.c < 1.0:
            raise ValueError("c must lie in (0, 1)")

    @staticmethod
    def pi_model(T):
        """Prime-counting surrogate T / ln T."""
        return T / np.log(T)


def anchor_value(t_lo: float, c: float = EULER_GAMMA) -> float:
    return t_lo - (1.0 - c) * t_lo / math.log(t_lo)


def ladder_derivative(t):
    """phi_1'(t) = Z(t)^2 / ln t (accepts longdouble abscissae)."""
    t = np.asarray(t)
    return zeta_mod_sq(t) / np.log(t.astype(float))


def _local_integral(left, right) -> np.ndarray:
    """Gauss-Legendre integral of phi_1' over [left, right], elementwise.

    Nodes are placed in extended precision: near t = 1e5 a float64 abscissa
    is off by up to ~7e-12, which would cost ~1e-10 relative per panel.
    """
    x, w = gauss_legendre(GL_ORDER)
    left = np.asarray(left).astype(_LD)
    half = 0.5 * (np.asarray(right).astype(_LD) - left)
    nodes = left[:, None] + half[:, None] * (x.astype(_LD) + 1)[None, :]
    vals = ladder_derivative(nodes.ravel()).reshape(nodes.shape)
    return half * (vals @ w)


@dataclass(frozen=True, eq=False)
class LadderTable:
    knots_t: np.ndarray
    knots_phi: np.ndarray
    tol: float
    c: float = EULER_GAMMA
    omega_model: str = OMEGA_MODEL
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.knots_t, self.knots_phi):
            arr.setflags(write=False)

    @property
    def t_lo(self) -> float:
        return float(self.knots_t[0])

    @property
    def t_hi(self) -> float:
        return float(self.knots_t[-1])

    @property
    def anchor(self) -> tuple[float, float]:
        return self.t_lo, float(self.knots_phi[0])

    @property
    def phi_lo(self) -> float:
        return float(self.knots_phi[0])

    @property
    def phi_hi(self) -> float:
        return float(self.knots_phi[-1])

    def __len__(self) -> int:
        return self.knots_t.size

    # convenience wrappers around the module functions
    def __call__(self, t):
        return phi1(self, t)

    def inverse(self, y):
        return phi1_inv(self, y)

    def iterate(self, t, r: int):
        return phi1_iter(self, t, r)

    def reverse_point(self, T: float, k: int) -> float:
        return reverse_point(self, T, k)

    def sidecar(self) -> dict:
        return {
            "t_lo": self.t_lo,
            "t_hi": self.t_hi,
            "tol": self.tol,
            "omega_model": self.omega_model,
            "anchor": list(self.anchor),
            "c": self.c,
            "gl_order": GL_ORDER,
            "n_knots": len(self),
            **self.meta,
        }


def build_ladder(t_lo: float, t_hi: float, tol: float = 1e-8, *, c: float = EULER_GAMMA,
                 step: float = INITIAL_STEP) -> LadderTable:
    """Tabulate phi_1 on [t_lo, t_hi].

    Each panel's integral is accepted when the single-panel 16-point rule and
    the sum over its two halves agree to ``tol * width``, so the cumulative
    error is bounded by ``tol * (t_hi - t_lo)``.  Panels are bisected down to
    ``STEP_FLOOR``.
    """
    if not (T_MIN <= t_lo < t_hi):
        raise ValueError(f"need {T_MIN} <= t_lo < t_hi, got {t_lo}, {t_hi}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    span = t_hi - t_lo
    if span < STEP_FLOOR:
        raise LadderBuildError("window is narrower than one step")
    Constants(c)
    n = max(1, int(math.ceil(span / step)))
    edges = np.linspace(t_lo, t_hi, n + 1)
    lefts, rights = edges[:-1], edges[1:]
    acc_l, acc_r, acc_v = [], [], []
    while lefts.size:
        whole = _local_integral(lefts, rights)
        mid = 0.5 * (lefts + rights)
        halves = _local_integral(lefts, mid) + _local_integral(mid, rights)
        good = np.abs(whole - halves) <= tol * (rights - lefts)
        acc_l.append(lefts[good])
        acc_r.append(rights[good])
        acc_v.append(whole[good])
        bad = ~good
        if bad.any() and np.min(rights[bad] - lefts[bad]) < 2 * STEP_FLOOR:
            raise LadderBuildError(f"tolerance {tol} not achievable above step floor {STEP_FLOOR}")
        lefts, rights = (np.concatenate([lefts[bad], mid[bad]]),
                         np.concatenate([mid[bad], rights[bad]]))
    L = np.concatenate(acc_l)
    R = np.concatenate(acc_r)
    V = np.concatenate(acc_v)
    order = np.argsort(L, kind="stable")
    L, R, V = L[order], R[order], V[order]
    knots_t = np.concatenate([L, R[-1:]])
    knots_phi = np.cumsum(np.concatenate([[_LD(anchor_value(t_lo, c))], V])).astype(float)
    table = LadderTable(knots_t, knots_phi, tol=tol, c=c)
    if not np.all(np.diff(table.knots_phi) > 0):
        raise LadderBuildError("tabulated phi_1 is not strictly increasing")
    return table


def _check_window(table: LadderTable, t: np.ndarray, *, iteration: int | None = None):
    if t.size and (np.min(t) < table.t_lo or np.max(t) > table.t_hi):
        bad = t[(t < table.t_lo) | (t > table.t_hi)][0]
        where = f" at iterate r={iteration}" if iteration is not None else ""
        raise WindowError(f"t={float(bad)!r} outside window [{table.t_lo!r}, {table.t_hi!r}]{where}",
                          iteration=iteration)


def _out(x: np.ndarray, shape):
    x = x.astype(float).reshape(shape)
    return float(x) if x.ndim == 0 else x


def phi1_ext(table: LadderTable, t) -> np.ndarray:
    """phi_1 in extended precision on a flat array (longdouble in and out)."""
    flat = np.asarray(t).reshape(-1)
    _check_window(table, flat)
    i = np.searchsorted(table.knots_t, flat, side="right") - 1
    i = np.clip(i, 0, len(table) - 2)
    out = table.knots_phi[i].astype(_LD) + _local_integral(table.knots_t[i], flat)
    return np.where(flat == table.knots_t[-1], _LD(table.knots_phi[-1]), out)


def phi1(table: LadderTable, t):
    """Evaluate phi_1 at ``t`` (scalar or array); knots are reproduced exactly."""
    arr = np.asarray(t)
    return _out(phi1_ext(table, arr), arr.shape)


def _solve_in_panel(table: LadderTable, i: int, y) -> np.longdouble:
    left, right = float(table.knots_t[i]), float(table.knots_t[i + 1])
    target = _LD(y) - _LD(table.knots_phi[i])
    if target <= 0:
        return _LD(left)
    full = _LD(table.knots_phi[i + 1]) - _LD(table.knots_phi[i])
    if target >= full:
        return _LD(right)
    lo_arr = np.array([left])

    def g(x):
        return float(_local_integral(lo_arr, np.array([x]))[0] - target)

    x0 = brentq(g, left, right, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    # Newton polish in extended precision, kept inside the panel
    x = _LD(x0)
    lo_ext = lo_arr.astype(_LD)
    for _ in range(4):
        resid = _local_integral(lo_ext, np.array([x]))[0] - target
        slope = _LD(ladder_derivative(np.array([x]))[0])
        if slope <= 0:
            break
        step = resid / slope
        x_new = min(max(x - step, _LD(left)), _LD(right))
        if abs(x_new - x) <= 4 * np.finfo(_LD).eps * abs(x):
            x = x_new
            break
        x = x_new
    return x


def phi1_inv_ext(table: LadderTable, y) -> np.ndarray:
    flat = np.asarray(y).reshape(-1)
    if flat.size and (np.min(flat) < table.phi_lo or np.max(flat) > table.phi_hi):
        raise WindowError(f"y outside [{table.phi_lo!r}, {table.phi_hi!r}]")
    idx = np.searchsorted(table.knots_phi, flat, side="left") - 1
    idx = np.clip(idx, 0, len(table) - 2)
    return np.array([_solve_in_panel(table, int(i), v) for i, v in zip(idx, flat)], dtype=_LD)


def phi1_inv(table: LadderTable, y):
    """The t with phi_1(t) = y, root-found to full double precision."""
    arr = np.asarray(y)
    return _out(phi1_inv_ext(table, arr), arr.shape)


def phi1_iter_ext(table: LadderTable, t, r: int) -> np.ndarray:
    if r < 0:
        raise ValueError("r must be >= 0")
    arr = np.asarray(t).reshape(-1).astype(_LD)
    for j in range(r):
        try:
            arr = phi1_ext(table, arr)
        except WindowError as exc:
            raise WindowError(f"iterate {j + 1} of {r} left the window: {exc}", iteration=j + 1) from exc
    return arr


def phi1_iter(table: LadderTable, t, r: int):
    """r-fold composition phi_1^r(t); phi_1^0 is the identity."""
    arr = np.asarray(t)
    return _out(phi1_iter_ext(table, arr, r), arr.shape)


def reverse_point_ext(table: LadderTable, T, k: int) -> np.longdouble:
    """The k-th reverse iterate of T in extended precision."""
    if k < 0:
        raise ValueError("k must be >= 0")
    x = np.array([T], dtype=_LD)
    for j in range(1, k + 1):
        try:
            x = phi1_inv_ext(table, x)
        except WindowError as exc:
            raise WindowError(f"reverse iterate {j} of {k} left the window: {exc}",
                              iteration=j) from exc
    return x[0]


def reverse_point(table: LadderTable, T: float, k: int) -> float:
    """The k-th reverse iterate of T: phi_1 maps it to the (k-1)-th one.

    Intermediate iterates stay in extended precision; only the final point
    is rounded to float64.
    """
    return float(reverse_point_ext(table, T, k))


# --------------------------------------------------------------------------
# cache file: CSV ``t,phi1`` plus JSON sidecar
# --------------------------------------------------------------------------

def save_ladder(table: LadderTable, csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", newline="") as fh:
        fh.write("t,phi1\n")
        for t, v in zip(table.knots_t.tolist(), table.knots_phi.tolist()):
            fh.write(f"{t:.17g},{v:.17g}\n")
    sidecar = csv_path.with_suffix(".json")
    sidecar.write_text(json.dumps(table.sidecar(), indent=2, sort_keys=True) + "\n")
    return csv_path


def load_ladder(csv_path: str | Path) -> LadderTable:
    csv_path = Path(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    with csv_path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "phi1"]:
            raise ValueError(f"bad ladder cache header {header!r}")
        rows = [(float(a), float(b)) for a, b in reader]
    if meta.get("gl_order", GL_ORDER) != GL_ORDER:
        raise ValueError("cache was written with a different local quadrature order")
    data = np.array(rows)
    t, v = data[:, 0].copy(), data[:, 1].copy()
    if not (np.all(np.diff(t) > 0) and np.all(np.diff(v) > 0)):
        raise ValueError("ladder cache rows are not strictly increasing")
    extra = {k: meta[k] for k in meta
             if k not in {"t_lo", "t_hi", "tol", "omega_model", "anchor", "c", "gl_order", "n_knots"}}
    return LadderTable(t, v, tol=float(meta["tol"]), c=float(meta["c"]),
                       omega_model=meta["omega_model"], meta=extra)
