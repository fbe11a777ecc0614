import json
import subprocess
import sys

import pytest

from ladderlab import lab
from ladderlab.cli import main
from ladderlab.ladder import save_ladder
from ladderlab.segments import window_requirement


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, [json.loads(x) for x in out.splitlines() if x.startswith("{")], out


def test_config_defaults_and_validation():
    cfg = lab.LabConfig().validate()
    assert cfg.T_grid == [1e4, 1e5] and cfg.k == 3 and cfg.k0 == 8
    for bad in ({"T_grid": []}, {"T_grid": [1e5, 1e4]}, {"k": 9}, {"k": 0},
                {"bands": {"ratio_lo": 1.5, "ratio_hi": 2.0}}):
        with pytest.raises(lab.ConfigError):
            lab.LabConfig(**bad).validate()
    with pytest.raises(lab.ConfigError):
        lab.LabConfig.from_dict({"colour": "red"})


def test_empty_grid_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["build", "--T", ""])
    assert exc.value.code == 2


def test_config_precedence(tmp_path, monkeypatch):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"k": 2, "cache_dir": "from-file"}))
    monkeypatch.setenv("LADDERLAB_CACHE", str(tmp_path / "env"))
    cfg = lab.LabConfig.load(cfg_file)
    assert cfg.k == 2 and cfg.cache_dir == str(tmp_path / "env")
    cfg = lab.LabConfig.load(cfg_file, cache_dir="flag", k=None)
    assert cfg.cache_dir == "flag" and cfg.k == 2


def test_cache_key_separates_settings():
    a = lab.LabConfig(cache_dir="x")
    b = lab.LabConfig(cache_dir="x", tol_ladder=1e-9)
    c = lab.LabConfig(cache_dir="x", k=2)
    assert len({lab.cache_path(cfg, 1e4) for cfg in (a, b, c)}) == 3
    assert lab.ladder_key(a, 1e4)["t_lo"] == window_requirement(1e4, 3)[0]


def test_missing_cache_exit_3(tmp_path, capsys):
    cfg = lab.LabConfig(T_grid=[1e4], cache_dir=str(tmp_path)).validate()
    with pytest.raises(lab.CacheError):
        lab.get_ladder(cfg, 1e4)
    assert main(["verify", "--T", "1e4", "--k", "1", "--cache-dir", str(tmp_path),
                 "--out", str(tmp_path / "r.jsonl")]) == 3


@pytest.fixture(scope="module")
def k1_cache(tmp_path_factory):
    d = tmp_path_factory.mktemp("cache-k1")
    return d


def test_build_idempotent_and_k1_verify(k1_cache, tmp_path, capsys):
    common = ["--T", "1e4", "--k", "1", "--cache-dir", str(k1_cache)]
    code, rows, _ = _run(["build", *common], capsys)
    assert code == 0 and rows[0]["built"] is True
    code, rows, _ = _run(["build", *common], capsys)
    assert code == 0 and [r["built"] for r in rows] == [False]

    out = tmp_path / "rep.jsonl"
    code, rows, _ = _run(["verify", *common, "--out", str(out)], capsys)
    assert code == 0 and rows[-1]["exact_ok"]
    report = lab.read_report(out)
    theorem = [r for r in report if r.get("law") == "theorem"]
    assert [(r["p"], r["q"]) for r in theorem] == [(1, 1)]
    assert theorem[0]["predicted"] == 1.0
    assert (tmp_path / "rep.jsonl.timings.json").exists()
    assert not any("seconds" in r for r in report)

    # JSON -> CSV -> JSON
    csv_text = lab.rows_to_csv(report)
    back = lab.csv_to_rows(csv_text)
    assert back == lab.table_rows(report)
    assert lab.rows_to_csv(back) == csv_text

    code, _, text = _run(["report", str(out), "--format", "csv", "--trend"], capsys)
    assert text.startswith(",".join(lab.CSV_COLUMNS))
    assert "p,q,ratio@T=10000" in text and "\n1,1," in text


def test_trend_table_columns():
    cfg = lab.LabConfig()
    rows = [{"suite": "energy", "law": "theorem", "p": 1, "q": 2, "T": T, "ratio": r}
            for T, r in ((1e4, 1.1), (1e5, 1.05))]
    trend = lab.trend_rows(rows, cfg)
    assert trend[0]["ratios"] == [1.1, 1.05]
    assert lab.trend_table(trend).splitlines() == ["p,q,ratio@T=10000,ratio@T=100000", "1,2,1.1000000000000001,1.05"]


def test_exit_status_policy():
    assert lab.exit_status({"exact_ok": True, "bands_ok": False}) == 0
    assert lab.exit_status({"exact_ok": True, "bands_ok": False}, strict_bands=True) == 1
    assert lab.exit_status({"exact_ok": False, "bands_ok": True}) == 1


@pytest.fixture(scope="module")
def warm_cache(tmp_path_factory, ladder_1e4):
    d = tmp_path_factory.mktemp("cache-k3")
    cfg = lab.LabConfig(T_grid=[1e4], cache_dir=str(d)).validate()
    ladder_1e4.meta["cache_key"] = lab.ladder_key(cfg, 1e4)
    save_ladder(ladder_1e4, lab.cache_path(cfg, 1e4))
    return d


def test_segments_subcommand(warm_cache, capsys):
    code, rows, _ = _run(["segments", "--T", "1e4", "--cache-dir", str(warm_cache)], capsys)
    assert code == 0 and len(rows) == 9
    assert set(rows[0]) == {"T", "p", "q", "lo", "hi", "base_len", "gap_prev"}


def test_energy_then_algebra(warm_cache, tmp_path, capsys):
    csv_path = tmp_path / "e.csv"
    code, rows, _ = _run(["energy", "--T", "1e4", "--cache-dir", str(warm_cache), "--csv", str(csv_path)],
                         capsys)
    assert code == 0 and len(rows) == 9
    assert csv_path.read_text().splitlines()[0] == "p,q,T,value,predicted,ratio,quad_err"
    rec_file = tmp_path / "records.jsonl"
    rec_file.write_text("".join(json.dumps(r) + "\n" for r in rows))
    code, reps, _ = _run(["algebra", str(rec_file)], capsys)
    assert code == 0
    assert {r["law"] for r in reps} == {"generator", "product", "unit", "equivalence", "inverse"}


def test_ortho_subcommand(warm_cache, tmp_path, capsys):
    code, rows, _ = _run(["ortho", "--T", "1e4", "--k", "1", "--cache-dir", str(warm_cache),
                          "--csv", str(tmp_path / "g.csv")], capsys)
    # k=1 uses a different window key, so the cache is built here
    assert code == 0 and rows[-1]["offdiag_residual"] <= 1e-4


def test_zeta_probe_hidden(capsys):
    code, rows, _ = _run(["zeta-probe", "1000", "--mode", "oracle"], capsys)
    assert code == 0 and rows[0]["Z2"] == rows[0]["Z"] ** 2
    main_help = subprocess.run([sys.executable, "-m", "ladderlab", "--help"], capture_output=True, text=True)
    assert "zeta-probe" not in main_help.stdout and "verify" in main_help.stdout


def test_determinism_small(warm_cache, tmp_path, capsys):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.jsonl"
        assert main(["verify", "--T", "1e4", "--cache-dir", str(warm_cache), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]
