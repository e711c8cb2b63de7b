import csv
import hashlib
import json
import math
import subprocess
import sys

import pytest

from mzlab.cli import canonical_json, config_key, jsonable, main


@pytest.fixture(autouse=True)
def no_env_cache(monkeypatch):
    monkeypatch.delenv("MZLAB_CACHE_DIR", raising=False)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_examples(capsys):
    code, out, _ = run(capsys, "classify", "--q", "1,1", "--p", "3", "--r", "5")
    assert code == 0 and out.startswith("finite 1.0") and "all q_i = 1" in out
    code, out, _ = run(capsys, "classify", "--q", "2,2", "--p", "inf", "--r", "1")
    assert code == 0 and out.startswith("infinite")
    code, out, _ = run(capsys, "classify", "--q", "1.5", "--p", "1.2", "--r", "1.8", "--json")
    res = json.loads(out)["result"]
    assert res["status"] == "finite" and res["value"] == pytest.approx(1.2213557959, rel=1e-9)
    assert 0 < res["value_error"] < 1e-8


def test_invalid_exponent_exit_2(capsys):
    code, _, err = run(capsys, "classify", "--q", "0.5", "--p", "2", "--r", "2")
    assert code == 2 and "exponent" in err
    with pytest.raises(SystemExit) as info:
        main(["classify", "--q", "2"])
    assert info.value.code == 2


def test_moment(capsys):
    code, out, _ = run(capsys, "moment", "--r", "2", "--s", "2", "--json")
    res = json.loads(out)["result"]
    assert res["value"] == pytest.approx(math.sqrt(2), abs=1e-8)
    assert res["error_estimate"] < 1e-8
    code, _, err = run(capsys, "moment", "--r", "1.5", "--s", "1.5")
    assert code == 2 and "diverges" in err


def test_witness_and_norm_round_trip(capsys, tmp_path):
    out = tmp_path / "lw.json"
    code, _, _ = run(capsys, "witness", "--kind", "littlewood", "--n", "4", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    assert doc["result"]["metadata"]["bracket"]["upper"] == 8.0
    assert doc["result"]["metadata"]["kind"] == "littlewood"
    assert (tmp_path / "lw.meta.json").exists()
    code, text, _ = run(capsys, "norm", "--operator", str(out), "--q", "inf,inf", "--p", "inf", "--json")
    assert code == 0 and json.loads(text)["result"]["upper"] == 8.0
    bare = tmp_path / "op.json"
    bare.write_text(json.dumps(doc["result"]["operator"]))
    code, text, _ = run(capsys, "norm", "--operator", str(bare), "--q", "inf,inf", "--p", "inf", "--json")
    assert json.loads(text)["result"]["upper"] == 8.0
    code, _, err = run(capsys, "norm", "--operator", str(bare), "--q", "inf", "--p", "inf")
    assert code == 2 and "arity" in err


def test_schema_error_names_path(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"arity": 1, "input_dims": [2], "coeffs": [1, "x"], "output_measure": {"weights": [1]}}))
    code, _, err = run(capsys, "norm", "--operator", str(bad), "--q", "2", "--p", "2")
    assert code == 2 and "$.coeffs[1]" in err
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"q": [2], "p": 2, "r": 2, "n": -1}))
    code, _, err = run(capsys, "estimate", "--config", str(cfg))
    assert code == 2 and "$.n" in err


def test_estimate_csv(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"q": [2, 2], "p": 2, "r": 2, "n": 2, "budget": 3, "seed": 1}))
    table = tmp_path / "t.csv"
    code, out, _ = run(capsys, "estimate", "--config", str(cfg), "--csv", str(table))
    assert code == 0 and "certified lower bound" in out
    rows = list(csv.DictReader(table.open()))
    assert list(rows[0]) == ["n", "lower_bound", "norm_upper", "lhs", "rhs_product", "seed"]
    assert rows[0]["seed"] == "1" and float(rows[0]["lower_bound"]) == pytest.approx(1.0)


def test_probe_csv(capsys, tmp_path):
    table = tmp_path / "lw.csv"
    code, _, _ = run(capsys, "witness", "--kind", "littlewood_probe", "--ns", "2,4,8,16", "--r", "1", "--csv", str(table))
    assert code == 0
    rows = list(csv.DictReader(table.open()))
    assert [float(r["lower_bound"]) for r in rows] == pytest.approx([2, 2, 3.2, 4])


def test_verify_positivity_exit_codes(capsys, tmp_path):
    out = tmp_path / "pos.json"
    code, text, _ = run(capsys, "verify", "--suite", "positivity", "--trials", "1000", "--seed", "7", "--out", str(out))
    assert code == 0 and "PASS" in text
    res = json.loads(out.read_text())["result"]
    assert res["min_margin"] >= -1e-12
    code, _, err = run(capsys, "verify", "--suite", "missing")
    assert code == 2


def test_verify_failure_exit_1(capsys, monkeypatch):
    from mzlab import cli
    from mzlab.witnesses import CheckReport

    def failing(name, trials, seed):
        rep = CheckReport(name)
        rep.add("forced", False, -1.0)
        return rep

    monkeypatch.setattr(cli, "run_suite", failing)
    code, text, _ = run(capsys, "verify", "--suite", "weak", "--trials", "1")
    assert code == 1 and "FAIL" in text


def test_byte_identical_and_cache(capsys, tmp_path):
    cache = tmp_path / "cache"
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    args = ["estimate", "--q", "2", "--p", "1.5", "--r", "2", "--n", "2", "--budget", "3", "--seed", "2"]
    assert main(args + ["--out", str(a), "--no-cache"]) == 0
    assert main(args + ["--out", str(b), "--cache-dir", str(cache)]) == 0
    assert main(args + ["--out", str(c), "--cache-dir", str(cache)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    meta_b = json.loads((tmp_path / "b.meta.json").read_text())
    meta_c = json.loads((tmp_path / "c.meta.json").read_text())
    assert meta_b["cache_hit"] is False and meta_c["cache_hit"] is True
    assert meta_c["report_sha256"] == hashlib.sha256(a.read_bytes()).hexdigest()
    assert len(list(cache.glob("*.json"))) == 1
    assert not list(cache.glob("*.tmp"))


def test_cache_env_variable(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("MZLAB_CACHE_DIR", str(tmp_path / "env"))
    assert main(["classify", "--q", "2", "--p", "2", "--r", "2"]) == 0
    assert len(list((tmp_path / "env").glob("*.json"))) == 1


def test_seed_recorded_and_key_stable():
    assert config_key("x", {"seed": 0}) == config_key("x", {"seed": 0})
    assert config_key("x", {"seed": 0}) != config_key("x", {"seed": 1})
    assert jsonable({"a": math.inf, "b": [1.5]}) == {"a": "inf", "b": [1.5]}
    with pytest.raises(ValueError):
        canonical_json({"a": math.nan})


@pytest.mark.parametrize(
    "argv",
    [
        ("classify", "--q", "2", "--p", "2", "--r", "2"),
        ("moment", "--r", "2", "--s", "1"),
        ("estimate", "--q", "2", "--p", "2", "--r", "2", "--n", "2", "--budget", "1"),
        ("witness", "--kind", "littlewood", "--n", "2"),
        ("verify", "--suite", "weak", "--trials", "5"),
    ],
)
def test_every_report_names_its_seed(capsys, argv):
    code, out, _ = run(capsys, *argv, "--seed", "3", "--json")
    assert code == 0 and json.loads(out)["config"]["seed"] == 3


def test_report_command(capsys, tmp_path):
    main(["classify", "--q", "2", "--p", "2", "--r", "2", "--out", str(tmp_path / "one.json")])
    main(["verify", "--suite", "duality", "--out", str(tmp_path / "two.json")])
    capsys.readouterr()
    code, out, _ = run(capsys, "report", "--dir", str(tmp_path))
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert [e["file"] for e in summary["reports"]] == ["one.json", "two.json"]
    assert summary["all_pass"] is True
    code, _, _ = run(capsys, "report", "--dir", str(tmp_path / "missing"))
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mzlab", "classify", "--q", "2,2", "--p", "inf", "--r", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("infinite")
