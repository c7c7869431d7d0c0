import csv
import json

import pytest

from nestchan.cli import main

TINY = {"name": "tiny", "N": 12, "M": 5, "L": 3, "K": 2, "snr_db": [20.0], "trials": 2}


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(TINY))
    return p


def test_array_json(capsys):
    assert main(["array", "--type", "nested", "--N", "32", "--M", "11", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["indices"] == [1, 2, 3, 4, 5, 6, 7, 8, 16, 24, 32]
    assert out["hole_free"] and out["contiguous_span"] == 31


def test_array_explicit_indices(capsys):
    assert main(["array", "--N", "7", "--indices", "1,2,5,7"]) == 0
    assert "holes: none" in capsys.readouterr().out
    assert main(["array", "--N", "7", "--indices", "[1, 2, 5, 9]"]) == 2


def test_array_needs_size():
    with pytest.raises(SystemExit):
        main(["array", "--N", "7"])


def test_estimate_writes_files(cfg, tmp_path, capsys):
    out = tmp_path / "est"
    rc = main(["estimate", "--config", str(cfg), "--method", "all", "--trace", "--snr-db", "30",
               "--out", str(out)])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report["methods"]) == {"primal", "dual", "anm"}
    for m in ("primal", "dual", "anm"):
        assert report["methods"][m]["nmse"] < 0.1
        rows = list(csv.reader(open(out / f"h_hat_{m}.csv")))
        assert rows[0] == ["antenna", "re", "im"] and len(rows) == 1 + TINY["N"]
        assert (out / f"trace_{m}.csv").exists()
    snap = (out / "snapshots.csv").read_text().splitlines()
    assert len(snap) == 1 + TINY["M"] and len(snap[0].split(",")) == 1 + 2 * TINY["L"]
    assert json.loads((out / "estimate.json").read_text()) == report


def test_bench_outputs_and_digest(cfg, tmp_path, capsys):
    out = tmp_path / "b"
    assert main(["bench", "--config", str(cfg), "--method", "dual", "--quiet", "--out", str(out)]) == 0
    first = capsys.readouterr().out
    assert "digest" in first
    for name in ("trials.csv", "summary.json", "scatter.csv"):
        assert (out / name).exists()
    assert main(["bench", "--config", str(cfg), "--method", "dual", "--quiet", "--threads", "2"]) == 0
    second = capsys.readouterr().out
    assert first.split("digest")[1] == second.split("digest")[1]


def test_bench_rejects_bad_config(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({**TINY, "typo_key": 3}))
    assert main(["bench", "--config", str(p), "--quiet"]) == 2
    assert "typo_key" in capsys.readouterr().err
    assert main(["bench", "--config", str(tmp_path / "missing.json"), "--quiet"]) == 2


def test_figures_csv(tmp_path):
    out = tmp_path / "figs"
    rc = main(["figures", "--which", "fig5,fig6", "--trials", "1", "--method", "dual", "--quiet",
               "--out", str(out)])
    assert rc == 0
    rows = list(csv.DictReader(open(out / "fig5_nmse_runtime.csv")))
    assert {r["method"] for r in rows} == {"dual"} and len(rows) >= 2
    rows = list(csv.DictReader(open(out / "fig6_se.csv")))
    assert all(float(r["mean_se_bits"]) <= float(r["mean_se_ideal_bits"]) + 1e-9 for r in rows)
    assert main(["figures", "--which", "fig9", "--out", str(out)]) == 2
