"""ladderlab command line.

    ladderlab build   [--config cfg.json] [--T 1e4,1e5] [--k 3]
    ladderlab verify  [--config cfg.json] [--out report.jsonl] [--strict-bands]
    ladderlab report  report.jsonl [--format json|csv] [--trend]
    ladderlab segments|energy|ortho --T 1e5 [--k 3]
    ladderlab algebra records.jsonl
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import lab
from .algebra import law_reports
from .energy import EnergyRecord, energy_pq
from .ortho import base_system, gram_matrix
from .segments import SegmentHandle, matrix_rows, segment_matrix
from .zeta_kernel import EvalMode, hardy_z, rs_theta


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--T", type=_float_list, help="comma-separated heights, e.g. 1e4,1e5")
    p.add_argument("--k", type=int)
    p.add_argument("--k0", type=int)
    p.add_argument("--tol", type=float, help="quadrature tolerance")
    p.add_argument("--ladder-tol", type=float, help="ladder build tolerance")
    p.add_argument("--cache-dir")
    p.add_argument("--seed", type=int)


def _config(args) -> lab.LabConfig:
    return lab.LabConfig.load(args.config, T_grid=args.T, k=args.k, k0=args.k0, tol_quad=args.tol,
                              tol_ladder=args.ladder_tol, cache_dir=args.cache_dir, seed=args.seed)


def _emit(obj, fh=None):
    fh = fh or sys.stdout
    fh.write(lab.dumps_row(obj) + "\n")


def cmd_build(args) -> int:
    cfg = _config(args)
    for row in lab.cmd_build(cfg):
        _emit(row)
    return 0


def cmd_verify(args) -> int:
    cfg = _config(args)
    if args.build:
        lab.cmd_build(cfg)
    rows, verdict, timings = lab.cmd_verify(cfg)
    out = lab.write_report(rows, args.out)
    Path(str(out) + ".timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
    status = lab.exit_status(verdict, args.strict_bands)
    _emit({"report": str(out), **verdict, "exit": status})
    return status


def cmd_report(args) -> int:
    rows = lab.read_report(args.report)
    if args.format == "csv":
        sys.stdout.write(lab.rows_to_csv(rows))
    else:
        for r in lab.table_rows(rows):
            _emit(r)
    if args.trend:
        sys.stdout.write(lab.trend_table(rows))
    return 0


def _tables(args):
    cfg = _config(args)
    lab.cmd_build(cfg)
    return cfg, {T: lab.get_ladder(cfg, T) for T in cfg.T_grid}


def cmd_segments(args) -> int:
    cfg, tables = _tables(args)
    for T, table in tables.items():
        for row in matrix_rows(segment_matrix(table, T, cfg.k)):
            _emit({"T": T, **row})
    return 0


def cmd_energy(args) -> int:
    cfg, tables = _tables(args)
    recs = []
    for T, table in tables.items():
        for p in range(1, cfg.k + 1):
            for q in range(1, cfg.k + 1):
                rec = energy_pq(table, T, p, q, rtol=cfg.tol_quad)
                recs.append(rec)
                _emit(rec.to_dict())
    if args.csv:
        cols = ["p", "q", "T", "value", "predicted", "ratio", "quad_err"]
        with open(args.csv, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for rec in recs:
                d = rec.to_dict()
                fh.write(",".join(lab._fmt(d[c]) for c in cols) + "\n")
    return 0


def cmd_ortho(args) -> int:
    cfg, tables = _tables(args)
    sys_ = base_system(args.l, args.N)
    rows = []
    for T, table in tables.items():
        for k in range(1, min(cfg.k, 2) + 1):
            g = gram_matrix(table, sys_, T, k, rtol=cfg.tol_quad)
            _emit(g.to_dict())
            rows.extend({"T": T, "k": k, **r} for r in g.residual_rows())
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("T,k,m,n,value,target,residual\n")
            for r in rows:
                fh.write(",".join(lab._fmt(r[c]) for c in ("T", "k", "m", "n", "value", "target", "residual")) + "\n")
    return 0


def record_from_dict(d: dict) -> EnergyRecord:
    seg = SegmentHandle(d.get("p"), d["q"], d["T"], d["lo"], d["hi"], d["base_len"])
    return EnergyRecord(d.get("p"), d["q"], d["T"], d["value"], d["predicted"], d["quad_err"], seg,
                        d.get("weighted", float("nan")))


def cmd_algebra(args) -> int:
    recs = [record_from_dict(json.loads(line)) for line in Path(args.records).read_text().splitlines()
            if line.strip()]
    by_T: dict = {}
    for r in recs:
        by_T.setdefault(r.T, {})[(r.p, r.q)] = r
    ok = True
    for T, records in sorted(by_T.items()):
        k = max(max(pq) for pq in records)
        if set(records) != {(p, q) for p in range(1, k + 1) for q in range(1, k + 1)}:
            raise SystemExit(f"records at T={T:g} do not form a full {k}x{k} grid")
        for rep in law_reports(records, k, max(args.k0, k)):
            _emit({"T": T, **rep.to_dict()})
            if rep.law == "inverse":
                a, b = rep.inputs
                r1, r2 = records[(a["p"], a["q"])].ratio, records[(b["p"], b["q"])].ratio
                ok &= abs(rep.residual - abs(r1 * r2 - 1)) <= 1e-12
            if rep.law == "product":
                e = sum(x["q"] - x["p"] for x in rep.inputs[:2])
                ok &= rep.closure_ok == (abs(e) <= k - 1)
    return 0 if ok else 1


def cmd_zeta_probe(args) -> int:
    mode = EvalMode(args.mode)
    z = float(hardy_z(args.t, mode))
    _emit({"t": args.t, "mode": mode.value, "theta": float(rs_theta(args.t)) if args.t > 0 else math.nan,
           "Z": z, "Z2": z * z})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ladderlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("build", help="build or reuse ladder caches for the T grid")
    _add_common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="run all suites and write a JSON-lines report")
    _add_common(p)
    p.add_argument("--out", default="ladderlab-report.jsonl")
    p.add_argument("--strict-bands", action="store_true",
                   help="also fail when an asymptotic ratio leaves its band")
    p.add_argument("--build", action="store_true", help="build missing caches first")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="render a report as JSON lines or CSV")
    p.add_argument("report")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--trend", action="store_true", help="append the ratio trend table")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("segments", help="emit the segment matrix")
    _add_common(p)
    p.set_defaults(func=cmd_segments)

    p = sub.add_parser("energy", help="emit energy records")
    _add_common(p)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("ortho", help="emit Gram matrices")
    _add_common(p)
    p.add_argument("--l", type=float, default=0.5)
    p.add_argument("--N", type=int, default=7)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_ortho)

    p = sub.add_parser("algebra", help="algebra reports from an energy-record file")
    p.add_argument("records")
    p.add_argument("--k0", type=int, default=8)
    p.set_defaults(func=cmd_algebra)

    p = sub.add_parser("zeta-probe", help=argparse.SUPPRESS)
    p.add_argument("t", type=float)
    p.add_argument("--mode", choices=[m.value for m in EvalMode], default="fast")
    p.set_defaults(func=cmd_zeta_probe)
    # keep the debugging command out of the command list
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "zeta-probe"]
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except lab.ConfigError as exc:
        parser.error(str(exc))
    except lab.CacheError as exc:
        print(f"ladderlab: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
