"""Configuration, ladder caching and the verification suites behind the CLI.

A run report is a list of flat rows, one per check, with the columns

    suite, law, p, q, P, Q, T, value, predicted, ratio, residual, pass

plus ``kind`` (``exact``, ``band`` or ``info``) and an optional ``detail``
dict.  Exact rows gate the exit status; band rows gate it only in strict
mode; info rows are measurements with no verdict attached.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import algebra as alg
from .energy import (energy_pq, mean_value_contained, mean_value_points, sandwich_ok,
                     simpson_energy, spectral_energy, weighted_energy)
from .ladder import (EULER_GAMMA, GL_ORDER, INITIAL_STEP, OMEGA_MODEL, LadderTable, anchor_value,
                     build_ladder, ladder_derivative, load_ladder, phi1_ext, phi1_inv_ext,
                     phi1_iter_ext, save_ladder)
from .ortho import base_system, gram_matrix, substitution_gram
from .quadrature import adaptive_gk
from .segments import gap_scale, matrix_rows, segment_matrix, segment_metrics, window_requirement

CSV_COLUMNS = ["suite", "law", "p", "q", "P", "Q", "T", "value", "predicted", "ratio",
               "residual", "pass"]
_NUMERIC = {"T", "value", "predicted", "ratio", "residual"}
_INTEGER = {"p", "q", "P", "Q"}
_LD = np.longdouble
CACHE_VERSION = 1


class ConfigError(ValueError):
    pass


class CacheError(RuntimeError):
    pass


@dataclass
class LabConfig:
    T_grid: list = field(default_factory=lambda: [1e4, 1e5])
    k: int = 3
    k0: int = 8
    tol_quad: float = 1e-8
    tol_ladder: float = 1e-8
    bands: dict = field(default_factory=lambda: {"ratio_lo": 0.5, "ratio_hi": 2.0})
    unit_bands: dict = field(default_factory=lambda: {"ratio_lo": 0.6, "ratio_hi": 1.7})
    cache_dir: str = ".ladderlab-cache"
    seed: int = 20240611
    c: float = EULER_GAMMA

    def validate(self) -> "LabConfig":
        if not self.T_grid:
            raise ConfigError("T_grid is empty")
        self.T_grid = [float(t) for t in self.T_grid]
        if any(b <= a for a, b in zip(self.T_grid, self.T_grid[1:])):
            raise ConfigError("T_grid must be strictly ascending")
        if self.T_grid[0] < 1e3:
            raise ConfigError("T_grid values must be >= 1e3")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.k > self.k0:
            raise ConfigError("k must not exceed k0")
        for name in ("bands", "unit_bands"):
            b = getattr(self, name)
            if not 0 < b["ratio_lo"] < 1 < b["ratio_hi"]:
                raise ConfigError(f"{name} must satisfy 0 < ratio_lo < 1 < ratio_hi")
        if self.tol_quad <= 0 or self.tol_ladder <= 0:
            raise ConfigError("tolerances must be positive")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "LabConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides) -> "LabConfig":
        data = json.loads(Path(path).read_text()) if path else {}
        cfg = cls.from_dict(data)
        env = os.environ.get("LADDERLAB_CACHE")
        if env:
            cfg.cache_dir = env
        for key, val in overrides.items():
            if val is not None:
                setattr(cfg, key, val)
        return cfg.validate()

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# ladder cache
# --------------------------------------------------------------------------

def ladder_key(cfg: LabConfig, T: float) -> dict:
    t_lo, t_hi = window_requirement(T, cfg.k, cfg.c)
    return {"version": CACHE_VERSION, "T": T, "t_lo": t_lo, "t_hi": t_hi, "tol": cfg.tol_ladder,
            "c": cfg.c, "omega_model": OMEGA_MODEL, "gl_order": GL_ORDER, "step": INITIAL_STEP}


def cache_path(cfg: LabConfig, T: float) -> Path:
    key = json.dumps(ladder_key(cfg, T), sort_keys=True)
    digest = hashlib.sha256(key.encode()).hexdigest()[:16]
    return Path(cfg.cache_dir) / f"ladder-T{T:.6g}-{digest}.csv"


def ensure_ladder(cfg: LabConfig, T: float) -> tuple[Path, bool]:
    """Build the ladder for T unless a cache with the same key exists."""
    path = cache_path(cfg, T)
    if path.exists() and path.with_suffix(".json").exists():
        return path, False
    key = ladder_key(cfg, T)
    table = build_ladder(key["t_lo"], key["t_hi"], cfg.tol_ladder, c=cfg.c)
    table.meta["cache_key"] = key
    save_ladder(table, path)
    return path, True


def get_ladder(cfg: LabConfig, T: float) -> LadderTable:
    path = cache_path(cfg, T)
    if not path.exists():
        raise CacheError(f"no ladder cache for T={T:g} at {path}; run `ladderlab build` first")
    return load_ladder(path)


def cmd_build(cfg: LabConfig) -> list[dict]:
    out = []
    for T in cfg.T_grid:
        t0 = time.perf_counter()
        path, built = ensure_ladder(cfg, T)
        out.append({"T": T, "path": str(path), "built": built,
                    "seconds": round(time.perf_counter() - t0, 3)})
    return out


# --------------------------------------------------------------------------
# report rows
# --------------------------------------------------------------------------

def _row(suite, law, ok, *, kind="exact", T=None, p=None, q=None, P=None, Q=None, value=None,
         predicted=None, ratio=None, residual=None, detail=None) -> dict:
    def num(x):
        return None if x is None else float(x)

    row = {"suite": suite, "law": law, "p": p, "q": q, "P": P, "Q": Q, "T": num(T),
           "value": num(value), "predicted": num(predicted), "ratio": num(ratio),
           "residual": num(residual), "pass": None if ok is None else bool(ok), "kind": kind}
    if detail:
        row["detail"] = detail
    return row


def _rel(a, b) -> float:
    return abs(float(a) / float(b) - 1.0)


def suite_ladder(table: LadderTable, T: float, cfg: LabConfig, rng: np.random.Generator) -> list[dict]:
    rows = []
    kt, kp = table.knots_t, table.knots_phi
    rows.append(_row("ladder", "monotone", bool(np.all(np.diff(kt) > 0) and np.all(np.diff(kp) > 0)),
                     T=T, value=float(np.min(np.diff(kp)))))
    rows.append(_row("ladder", "below_diagonal", bool(np.all(kp < kt)), T=T,
                     value=float(np.max(kp - kt))))
    rows.append(_row("ladder", "anchor", kp[0] == anchor_value(table.t_lo, table.c), T=T,
                     value=float(kp[0]), predicted=anchor_value(table.t_lo, table.c)))

    t = np.sort(rng.uniform(table.t_lo, table.t_hi, 20))
    back = phi1_inv_ext(table, phi1_ext(table, t))
    err_t = float(np.max(np.abs(back - t.astype(_LD)) / t))
    rows.append(_row("ladder", "roundtrip_inv_phi", err_t <= 1e-8, T=T, residual=err_t))
    y = np.sort(rng.uniform(table.phi_lo, table.phi_hi, 20))
    fwd = phi1_ext(table, phi1_inv_ext(table, y))
    err_y = float(np.max(np.abs(fwd - y.astype(_LD)) / y))
    rows.append(_row("ladder", "roundtrip_phi_inv", err_y <= 1e-8, T=T, residual=err_y))

    worst = 0.0
    for _ in range(20):
        a = rng.uniform(table.t_lo, table.t_hi - 2.0)
        b = a + rng.uniform(0.05, 2.0)
        res = adaptive_gk(ladder_derivative, a, b, rtol=1e-11, max_width=0.05, extended=True)
        d = phi1_ext(table, np.array([b])) - phi1_ext(table, np.array([a]))
        worst = max(worst, _rel(res.value, d[0]))
    rows.append(_row("ladder", "change_of_variables", worst <= 1e-6, T=T, residual=worst))

    t_hi = table.t_hi
    gap = (t_hi - table.phi_hi) / gap_scale(t_hi, table.c)
    rows.append(_row("ladder", "gap_at_t_hi", 0.2 <= gap <= 2.0, kind="band", T=T, ratio=gap,
                     value=t_hi - table.phi_hi, predicted=gap_scale(t_hi, table.c)))
    return rows


def suite_segments(table: LadderTable, T: float, cfg: LabConfig) -> tuple[list[dict], list[dict]]:
    rows = []
    mat = segment_matrix(table, T, cfg.k)
    worst = 0.0
    for ds in mat:
        for s in ds.components:
            lo = phi1_iter_ext(table, np.array([s.lo_ext]), s.q)[0]
            hi = phi1_iter_ext(table, np.array([s.hi_ext]), s.q)[0]
            worst = max(worst, abs(float(lo / _LD(T) - 1)),
                        abs(float(hi / (_LD(T) + _LD(s.base_len)) - 1)))
    rows.append(_row("segments", "endpoint_consistency", worst <= 1e-8, T=T, residual=worst))
    m = segment_metrics(mat, T, cfg.c)
    rows.append(_row("segments", "disjoint_ordered", m["ordered"], T=T))
    rows.append(_row("segments", "row_monotone", m["row_monotone"], T=T))
    rows.append(_row("segments", "width_ratio", m["max_width_ratio"] <= 0.01, kind="band", T=T,
                     value=m["max_width_ratio"], predicted=0.01))
    rows.append(_row("segments", "log_stability", 1.0 <= m["min_log_ratio"] and m["max_log_ratio"] <= 1.01,
                     kind="band", T=T, value=m["max_log_ratio"], predicted=1.01))
    gr = m["gap_ratios"]
    rows.append(_row("segments", "gap_ratio", all(0.2 <= g <= 2.0 for g in gr), kind="band", T=T,
                     value=min(gr) if gr else None, ratio=max(gr) if gr else None,
                     detail={"gap_ratios": gr}))
    rows.append(_row("segments", "first_gap_ratio", None, kind="info", T=T,
                     value=min(m["first_gap_ratios"]), ratio=max(m["first_gap_ratios"])))
    return rows, matrix_rows(mat)


def suite_identity(table: LadderTable, T: float, cfg: LabConfig) -> list[dict]:
    rows = []
    for k in range(1, cfg.k + 1):
        for two_l in (1.0, 1 / math.log(T), math.log(T) ** -2):
            v = weighted_energy(table, T, two_l / 2, k, rtol=cfg.tol_quad)
            r = _rel(v, two_l)
            rows.append(_row("identity", "weighted_energy", r <= 1e-6, T=T, q=k, value=v,
                             predicted=two_l, ratio=v / two_l, residual=r))
    return rows


GRAM_REFINEMENT = (1e-2, 5e-3, 2.5e-3)


def suite_gram(table: LadderTable, T: float, cfg: LabConfig) -> tuple[list[dict], list]:
    rows, reports = [], []
    sys = base_system(0.5, 7)
    for k in range(1, min(cfg.k, 2) + 1):
        g = gram_matrix(table, sys, T, k, rtol=cfg.tol_quad)
        reports.append(g)
        rows.append(_row("ortho", "offdiag", g.offdiag_residual <= 1e-4, T=T, q=k,
                         value=g.offdiag_max, predicted=0.0, residual=g.offdiag_residual))
        rows.append(_row("ortho", "diag", g.diag_residual <= 1e-4, T=T, q=k,
                         residual=g.diag_residual))
        seq = [gram_matrix(table, sys, T, k, rtol=rt, max_width=None).worst_residual
               for rt in GRAM_REFINEMENT]
        rows.append(_row("ortho", "tolerance_halving", all(b < a for a, b in zip(seq, seq[1:])),
                         T=T, q=k, residual=seq[-1], detail={"rtol": list(GRAM_REFINEMENT),
                                                            "worst": seq}))
        sub = substitution_gram(table, sys, T, k)
        d = float(np.max(np.abs(sub - g.G)))
        rows.append(_row("ortho", "substitution", d <= 1e-6, T=T, q=k, residual=d))
    return rows, reports


def suite_energy(table: LadderTable, T: float, cfg: LabConfig) -> tuple[list[dict], dict]:
    rows, records = [], {}
    b, ub = cfg.bands, cfg.unit_bands
    for p in range(1, cfg.k + 1):
        for q in range(1, cfg.k + 1):
            rec = energy_pq(table, T, p, q, rtol=cfg.tol_quad)
            records[(p, q)] = rec
            ok = b["ratio_lo"] <= rec.ratio <= b["ratio_hi"]
            if p == q:
                ok = ok and ub["ratio_lo"] <= rec.ratio <= ub["ratio_hi"]
            rows.append(_row("energy", "theorem", ok, kind="band", T=T, p=p, q=q, value=rec.value,
                             predicted=rec.predicted, ratio=rec.ratio, residual=abs(rec.ratio - 1),
                             detail={"quad_err": rec.quad_err, "weighted": rec.weighted}))
            rows.append(_row("energy", "sandwich", sandwich_ok(rec), T=T, p=p, q=q,
                             value=rec.value / rec.weighted, detail={"bounds": list(rec.log_bounds)}))
            s = simpson_energy(table, rec.segment, q)
            r = _rel(s, rec.value)
            rows.append(_row("energy", "simpson_agreement", r <= 1e-6, T=T, p=p, q=q, value=s,
                             predicted=rec.value, residual=r))
    rec = records[(1, 1)]
    L = rec.segment.length
    levels = [spectral_energy(table, rec, m * 2 * math.pi / L) for m in (50, 100, 200)]
    errs = [abs(v / rec.value - 1) for v in levels]
    rows.append(_row("energy", "parseval", errs[-1] <= 0.01, T=T, p=1, q=1, value=levels[-1],
                     predicted=rec.value, ratio=levels[-1] / rec.value, residual=errs[-1]))
    rows.append(_row("energy", "parseval_refinement", errs[0] > errs[1] > errs[2], T=T, p=1, q=1,
                     residual=errs[-1], detail={"errors": errs}))
    return rows, records


def suite_arithmetic(cfg: LabConfig) -> list[dict]:
    """Exhaustive exponent and closure arithmetic for all k <= k0."""
    ok_exp = ok_closure = True
    n = 0
    for k in range(1, cfg.k0 + 1):
        idx = range(1, k + 1)
        for p1 in idx:
            for q1 in idx:
                for p2 in idx:
                    for q2 in idx:
                        n += 1
                        e = q1 + q2 - (p1 + p2)
                        ok_closure &= alg.closure_ok(p1, q1, p2, q2, k) == (abs(e) <= k - 1)
                        for P in idx:
                            for Q in idx:
                                if P == Q:
                                    continue
                                f = alg.product_exponent(p1, q1, p2, q2, P, Q)
                                g = alg.generator_exponent(p1, q1, P, Q) + alg.generator_exponent(p2, q2, P, Q)
                                ok_exp &= f == g and f * (Q - P) == e
    ex = alg.symbolic_inverse(1, 257)
    return [
        _row("algebra", "exponent_arithmetic", ok_exp, value=n),
        _row("algebra", "closure_predicate", ok_closure, value=n),
        _row("algebra", "symbolic_inverse", ex["exponent"] == 256 and ex["inverse_exponent"] == -256
             and ex["sum"] == 0, p=1, q=257, P=257, Q=1, value=ex["sum"], predicted=0),
    ]


def suite_algebra(table: LadderTable, T: float, cfg: LabConfig, records: dict) -> list[dict]:
    rows = []
    b = cfg.bands
    reps = alg.law_reports(records, cfg.k, cfg.k0)
    for rep in reps:
        first, last = rep.inputs[0], rep.inputs[-1]
        P = Q = None
        if rep.law in ("generator", "product", "equivalence", "inverse"):
            P, Q = last["p"], last["q"]
        rows.append(_row("algebra", rep.law, rep.in_band(b["ratio_lo"], b["ratio_hi"]), kind="band",
                         T=T, p=first["p"], q=first["q"], P=P, Q=Q, value=rep.lhs, predicted=rep.rhs,
                         ratio=rep.ratio, residual=rep.residual,
                         detail={"closure_ok": rep.closure_ok, "closure_ok_k0": rep.closure_ok_k0,
                                 "exponent": None if rep.exponent is None else str(rep.exponent),
                                 "inputs": rep.inputs}))
        if rep.law == "inverse":
            r1 = records[(first["p"], first["q"])].ratio
            r2 = records[(last["p"], last["q"])].ratio
            d = abs(rep.residual - abs(r1 * r2 - 1))
            rows.append(_row("algebra", "inverse_consistency", d <= 1e-12, T=T, p=first["p"],
                             q=first["q"], P=last["p"], Q=last["q"], residual=d))
    if cfg.k >= 2:
        gen = records[(2, 1)]
        for (p, q), rec in sorted(records.items()):
            f = alg.factorization_check(table, rec, gen)
            g = alg.generator_check(rec, gen)
            mv = mean_value_points(table, rec)
            contained = mean_value_contained(mv, rec.segment)
            rows.append(_row("algebra", "factorization_exact", f.extra["exact_ok"] and contained,
                             T=T, p=p, q=q, P=2, Q=1, value=f.lhs, predicted=rec.value,
                             residual=f.extra["mean_value_residual"]))
            d = abs(f.residual - g.residual)
            rows.append(_row("algebra", "factorization_vs_generator", d <= 1e-6, T=T, p=p, q=q,
                             P=2, Q=1, value=f.residual, predicted=g.residual, residual=d))
    return rows


def cmd_verify(cfg: LabConfig) -> tuple[list[dict], dict, dict]:
    """Run all suites; returns (rows, verdict, timings)."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    rows = [{"suite": "config", "kind": "info", "config": cfg.to_dict(), "omega_model": OMEGA_MODEL,
             "c_adopted": "euler-mascheroni"}]
    timings = {}
    tables = {T: get_ladder(cfg, T) for T in cfg.T_grid}
    rows.extend(suite_arithmetic(cfg))
    for T in cfg.T_grid:
        table = tables[T]
        t0 = time.perf_counter()
        rows.extend(suite_ladder(table, T, cfg, rng))
        seg_rows, _ = suite_segments(table, T, cfg)
        rows.extend(seg_rows)
        rows.extend(suite_identity(table, T, cfg))
        gram_rows, _ = suite_gram(table, T, cfg)
        rows.extend(gram_rows)
        e_rows, records = suite_energy(table, T, cfg)
        rows.extend(e_rows)
        rows.extend(suite_algebra(table, T, cfg, records))
        timings[f"{T:g}"] = time.perf_counter() - t0
    rows.extend(trend_rows(rows, cfg))
    verdict = summarize(rows)
    rows.append({"suite": "summary", "kind": "info", **verdict})
    return rows, verdict, timings


def trend_rows(rows: list[dict], cfg: LabConfig) -> list[dict]:
    """Energy ratios for each (p, q) across the T grid."""
    out = []
    by = {}
    for r in rows:
        if r.get("suite") == "energy" and r.get("law") == "theorem":
            by.setdefault((r["p"], r["q"]), {})[r["T"]] = r["ratio"]
    for (p, q), m in sorted(by.items()):
        out.append({"suite": "trend", "kind": "info", "p": p, "q": q,
                    "ratios": [m.get(T) for T in cfg.T_grid], "T_grid": list(cfg.T_grid)})
    return out


def summarize(rows: list[dict]) -> dict:
    exact = [r for r in rows if r.get("kind") == "exact"]
    band = [r for r in rows if r.get("kind") == "band"]
    fail_exact = [f"{r['suite']}/{r['law']}@{r['T']}" for r in exact if not r["pass"]]
    fail_band = [f"{r['suite']}/{r['law']}@{r['T']}" for r in band if not r["pass"]]
    return {"exact_ok": not fail_exact, "bands_ok": not fail_band, "n_exact": len(exact),
            "n_band": len(band), "failed_exact": fail_exact, "failed_band": fail_band}


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def dumps_row(row: dict) -> str:
    return json.dumps(row, sort_keys=True, allow_nan=True)


def write_report(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(dumps_row(r) + "\n" for r in rows))
    return path


def read_report(path: str | Path) -> list[dict]:
    rows = []
    for i, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed report line {i}: {exc}") from exc
    if not rows or rows[0].get("suite") != "config":
        raise ValueError("report does not start with a config row")
    return rows


def table_rows(rows: list[dict]) -> list[dict]:
    """Rows that carry a verdict column, projected onto CSV_COLUMNS."""
    return [{c: r.get(c) for c in CSV_COLUMNS} for r in rows if "law" in r]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in table_rows(rows):
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def csv_to_rows(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for rec in reader:
        row = {}
        for c in CSV_COLUMNS:
            v = rec[c]
            if v == "":
                row[c] = None
            elif c in _NUMERIC:
                row[c] = float(v)
            elif c in _INTEGER:
                row[c] = int(v)
            elif c == "pass":
                row[c] = v == "true"
            else:
                row[c] = v
        out.append(row)
    return out


def trend_table(rows: list[dict]) -> str:
    """Plain-text table of energy ratios, one column per T."""
    trend = [r for r in rows if r.get("suite") == "trend"]
    if not trend:
        return ""
    grid = trend[0]["T_grid"]
    head = "p,q," + ",".join(f"ratio@T={T:g}" for T in grid)
    lines = [head]
    for r in trend:
        lines.append(f"{r['p']},{r['q']}," + ",".join(_fmt(x) for x in r["ratios"]))
    return "\n".join(lines) + "\n"


def exit_status(verdict: dict, strict_bands: bool = False) -> int:
    if not verdict["exact_ok"]:
        return 1
    if strict_bands and not verdict["bands_ok"]:
        return 1
    return 0
