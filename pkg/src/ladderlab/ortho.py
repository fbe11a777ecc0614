"""Weighted orthogonal systems carried along the ladder.

Given the Fourier system {1, cos(pi t/l), sin(pi t/l), ...} on [0, 2l],
the functions

    F_n(t) = f_n(phi_1^k(t) - T) * prod_{r<k} |Z~(phi_1^r(t))|,  Z~^2 = Z^2 / ln

are orthogonal on [T->k, (T+2l)->k] with the same norms, because the
product of the Z~^2 factors is exactly d phi_1^k / dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ladder import LadderTable, phi1_ext
from .quadrature import adaptive_gk, gauss_legendre
from .segments import SegmentHandle, iterated_segment, reverse_chain
from .zeta_kernel import zeta_mod_sq

_LD = np.longdouble


@dataclass(frozen=True)
class BaseSystem:
    l: float
    N: int

    def __post_init__(self):
        if not self.l > 0 or self.N < 1:
            raise ValueError("need l > 0 and N >= 1")

    @property
    def norms(self) -> np.ndarray:
        out = np.full(self.N, self.l)
        out[0] = 2 * self.l
        return out

    def label(self, n: int) -> str:
        if n == 0:
            return "1"
        j = (n + 1) // 2
        return f"{'cos' if n % 2 else 'sin'}({j} pi t/l)"

    def evaluate(self, n: int, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if n == 0:
            return np.ones_like(u)
        j = (n + 1) // 2
        arg = j * math.pi * u / self.l
        return np.cos(arg) if n % 2 else np.sin(arg)

    def evaluate_all(self, u) -> np.ndarray:
        """Array of shape (N, len(u))."""
        u = np.asarray(u, dtype=float)
        return np.stack([self.evaluate(n, u) for n in range(self.N)])


def base_system(l: float, N: int = 7) -> BaseSystem:
    return BaseSystem(float(l), int(N))


@dataclass
class GramReport:
    k: int
    T: float
    l: float
    N: int
    G: np.ndarray
    target: np.ndarray
    rtol: float
    n_evals: int = 0

    @property
    def offdiag_max(self) -> float:
        off = self.G - np.diag(np.diag(self.G))
        return float(np.max(np.abs(off)))

    @property
    def offdiag_residual(self) -> float:
        return self.offdiag_max / float(np.max(self.target))

    @property
    def diag_residual(self) -> float:
        return float(np.max(np.abs(np.diag(self.G) / self.target - 1)))

    @property
    def worst_residual(self) -> float:
        return max(self.offdiag_residual, self.diag_residual)

    def passes(self, tol: float = 1e-4) -> bool:
        return self.offdiag_residual <= tol and self.diag_residual <= tol

    def to_dict(self) -> dict:
        return {"k": self.k, "T": self.T, "l": self.l, "N": self.N,
                "G": self.G.tolist(), "target": self.target.tolist(), "rtol": self.rtol,
                "offdiag_residual": self.offdiag_residual, "diag_residual": self.diag_residual}

    def residual_rows(self) -> list[dict]:
        rows = []
        for m in range(self.N):
            for n in range(self.N):
                want = self.target[m] if m == n else 0.0
                rows.append({"m": m, "n": n, "value": float(self.G[m, n]), "target": float(want),
                             "residual": abs(float(self.G[m, n]) - want) / float(np.max(self.target))})
        return rows


def _orbit_weight(table: LadderTable, t, k: int):
    """(phi_1^k(t), prod_{r<k} Z~^2(phi_1^r(t))) in extended / double precision."""
    u = np.asarray(t).reshape(-1).astype(_LD)
    w = np.ones(u.shape)
    for _ in range(k):
        w = w * (zeta_mod_sq(u) / np.log(u.astype(float)))
        u = phi1_ext(table, u)
    return u, w


def weighted_eval(table: LadderTable, sys: BaseSystem, T: float, k: int, n: int, t,
                  seg: SegmentHandle | None = None):
    """F_n(t; T, k, l) for t in the k-th iterated segment of [T, T + 2l]."""
    if seg is None:
        seg = iterated_segment(table, T, 2 * sys.l, k) if k else None
    arr = np.asarray(t)
    flat = arr.reshape(-1).astype(_LD)
    lo, hi = (seg.lo_ext, seg.hi_ext) if seg is not None else (_LD(T), _LD(T) + _LD(2 * sys.l))
    if flat.size and (flat.min() < lo or flat.max() > hi):
        raise ValueError("t outside the iterated segment")
    u, w = _orbit_weight(table, flat, k)
    val = sys.evaluate(n, (u - _LD(T)).astype(float)) * np.sqrt(w)
    return float(val[0]) if arr.ndim == 0 else val.reshape(arr.shape)


def gram_matrix(table: LadderTable, sys: BaseSystem, T: float, k: int, *,
                rtol: float = 1e-8, max_width: float | None = 0.05,
                min_panels: int = 64) -> GramReport:
    """Gram matrix of F_0..F_{N-1} over the iterated segment.

    All N(N+1)/2 products share one set of adaptive nodes, and the matrix is
    filled symmetrically from them.
    """
    if k == 0:
        lo, hi = _LD(T), _LD(T) + _LD(2 * sys.l)
    else:
        seg = iterated_segment(table, T, 2 * sys.l, k)
        lo, hi = seg.lo_ext, seg.hi_ext
    iu = np.triu_indices(sys.N)

    def f(t):
        u, w = _orbit_weight(table, t, k)
        basis = sys.evaluate_all((u - _LD(T)).astype(float))
        return (basis[iu[0]] * basis[iu[1]] * w).T

    width = float(hi - lo)
    mw = None if max_width is None else min(max_width, width / max(min_panels, 1))
    res = adaptive_gk(f, lo, hi, rtol=rtol, max_width=mw, extended=True)
    G = np.zeros((sys.N, sys.N))
    G[iu] = res.value
    G[(iu[1], iu[0])] = res.value
    return GramReport(k, float(T), sys.l, sys.N, G, sys.norms, rtol, res.n_evals)


def substitution_gram(table: LadderTable, sys: BaseSystem, T: float, k: int, *,
                      n_nodes: int = 48) -> np.ndarray:
    """Gram matrix computed in the variable u = phi_1^k(t) - T.

    Gauss-Legendre nodes in u are pulled back to t by the reverse iteration;
    the integrand F_m F_n is divided by d phi_1^k/dt at those points and u
    is recomputed from the forward orbit, so the result depends on the
    ladder through both directions of the map.
    """
    x, wq = gauss_legendre(n_nodes)
    u_nodes = sys.l * (x + 1)
    t_nodes = np.array([reverse_chain(table, _LD(T) + _LD(u), k)[-1] for u in u_nodes], dtype=_LD)
    u, w = _orbit_weight(table, t_nodes, k)
    basis = sys.evaluate_all((u - _LD(T)).astype(float))
    vals = basis * np.sqrt(w)
    # F_m F_n / (d phi^k / dt) du
    return (vals * (sys.l * wq / w)) @ vals.T


def exact_gram(sys: BaseSystem) -> np.ndarray:
    return np.diag(sys.norms)
