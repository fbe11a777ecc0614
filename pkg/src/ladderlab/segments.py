"""Reversely iterated segments and the row sets built from them.

The segment with indices (p, q) at height T is the q-fold preimage under
phi_1 of the base interval [T, T + ln^-p T].  Since phi_1(t) < t, preimages
move to the right, so for fixed p the components q = 1, 2, ... are ordered
left to right with gaps of roughly (1 - c) T / ln T between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ladder import EULER_GAMMA, LadderTable, WindowError, phi1_inv_ext

_LD = np.longdouble


@dataclass(frozen=True)
class SegmentHandle:
    """One iterated segment [lo, hi] with lo -> T and hi -> T + base_len after q steps.

    ``p`` is None for segments of arbitrary base length.  ``chain_lo[j]`` and
    ``chain_hi[j]`` hold the j-th reverse iterates of the base endpoints in
    extended precision (``chain_lo[0] == T``).
    """

    p: int | None
    q: int
    T: float
    lo: float
    hi: float
    base_len: float
    chain_lo: tuple = field(repr=False, compare=False, default=())
    chain_hi: tuple = field(repr=False, compare=False, default=())

    @property
    def length(self) -> float:
        return float(self.hi_ext - self.lo_ext)

    @property
    def lo_ext(self):
        return self.chain_lo[-1] if self.chain_lo else _LD(self.lo)

    @property
    def hi_ext(self):
        return self.chain_hi[-1] if self.chain_hi else _LD(self.hi)

    def level(self, j: int) -> tuple[float, float]:
        """Endpoints of the j-th iterated interval (j = 0 is the base)."""
        return float(self.chain_lo[j]), float(self.chain_hi[j])

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "T": self.T, "lo": self.lo, "hi": self.hi,
                "base_len": self.base_len}


@dataclass(frozen=True)
class DeltaSet:
    p: int
    components: tuple[SegmentHandle, ...]

    @property
    def gaps(self) -> list[float]:
        """gap_prev for every component; the first is measured from the base segment."""
        out = []
        for j, seg in enumerate(self.components):
            if j == 0:
                prev_hi = seg.chain_hi[0] if seg.chain_hi else _LD(seg.T + seg.base_len)
            else:
                prev_hi = self.components[j - 1].hi_ext
            out.append(float(seg.lo_ext - prev_hi))
        return out

    def is_ordered(self) -> bool:
        comps = self.components
        return all(a.lo < a.hi < b.lo < b.hi for a, b in zip(comps, comps[1:])) and \
            all(s.lo < s.hi for s in comps)


def reverse_chain(table: LadderTable, x0, q: int) -> tuple:
    chain = [_LD(x0)]
    x = np.array([x0], dtype=_LD)
    for j in range(1, q + 1):
        try:
            x = phi1_inv_ext(table, x)
        except WindowError as exc:
            raise WindowError(f"reverse iterate {j} of {q} left the window: {exc}",
                              iteration=j) from exc
        chain.append(x[0])
    return tuple(chain)


def iterated_segment(table: LadderTable, T: float, length: float, q: int,
                     p: int | None = None) -> SegmentHandle:
    """The q-fold reverse iterate of [T, T + length]."""
    if T <= math.e:
        raise ValueError("T must exceed e")
    if q < 0:
        raise ValueError("q must be >= 0")
    if not length > 0:
        raise ValueError("segment length must be positive")
    lo_chain = reverse_chain(table, _LD(T), q)
    hi_chain = reverse_chain(table, _LD(T) + _LD(length), q)
    return SegmentHandle(p, q, float(T), float(lo_chain[-1]), float(hi_chain[-1]), float(length),
                         lo_chain, hi_chain)


def segment(table: LadderTable, T: float, p: int, q: int) -> SegmentHandle:
    """Segment (p, q): the q-th reverse iterate of [T, T + ln^-p T]."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if T <= math.e:
        raise ValueError("T must exceed e")
    return iterated_segment(table, T, math.log(T) ** (-p), q, p=p)


def delta_set(table: LadderTable, T: float, p: int, k: int) -> DeltaSet:
    """Row p of the segment matrix: components for q = 1..k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    comps = tuple(segment(table, T, p, q) for q in range(1, k + 1))
    return DeltaSet(p, comps)


def segment_matrix(table: LadderTable, T: float, k: int) -> list[DeltaSet]:
    return [delta_set(table, T, p, k) for p in range(1, k + 1)]


def gap_scale(T: float, c: float = EULER_GAMMA) -> float:
    """(1 - c) T / ln T, the expected spacing between consecutive iterates."""
    return (1.0 - c) * T / math.log(T)


def window_requirement(T: float, k: int, c: float = EULER_GAMMA) -> tuple[float, float]:
    """A window [t_lo, t_hi] that should hold T and its first k reverse iterates.

    The lower end sits one gap below T, which keeps T above phi_1(t_lo) for
    the anchor used by ``build_ladder``; the upper end leaves 50% headroom.
    """
    if T <= math.e ** 2:
        raise ValueError("T must exceed e^2")
    g = gap_scale(T, c)
    return T - g, T + 1.5 * k * g


def matrix_rows(rows: list[DeltaSet]) -> list[dict]:
    """JSON-ready rows ``{p, q, lo, hi, base_len, gap_prev}``."""
    out = []
    for ds in rows:
        for seg, gap in zip(ds.components, ds.gaps):
            out.append({"p": seg.p, "q": seg.q, "lo": seg.lo, "hi": seg.hi,
                        "base_len": seg.base_len, "gap_prev": gap})
    return out


def segment_metrics(rows: list[DeltaSet], T: float, c: float = EULER_GAMMA) -> dict:
    """Measured versions of the metric properties of the segment matrix.

    Gap ratios are split into ``gap_ratios`` (q >= 2) and ``first_gap_ratios``
    (q = 1, measured from the base segment), since only the former carry a
    stated asymptote.
    """
    scale = T / math.log(T)
    g = gap_scale(T, c)
    widths = [s.length / scale for ds in rows for s in ds.components]
    log_ratio = [math.log(s.hi) / math.log(T) for ds in rows for s in ds.components]
    gap_ratios, first = [], []
    for ds in rows:
        gaps = ds.gaps
        first.append(gaps[0] / g)
        gap_ratios.extend(x / g for x in gaps[1:])
    ordered = all(ds.is_ordered() for ds in rows)
    # rows with larger p have shorter base segments and smaller right ends
    row_monotone = True
    for a, b in zip(rows, rows[1:]):
        for sa, sb in zip(a.components, b.components):
            row_monotone &= (sb.base_len < sa.base_len) and (sb.hi < sa.hi)
    return {
        "T": T,
        "k": len(rows),
        "ordered": ordered,
        "row_monotone": bool(row_monotone),
        "max_width_ratio": max(widths),
        "max_log_ratio": max(log_ratio),
        "min_log_ratio": min(math.log(s.lo) / math.log(T) for ds in rows for s in ds.components),
        "gap_ratios": gap_ratios,
        "first_gap_ratios": first,
    }
