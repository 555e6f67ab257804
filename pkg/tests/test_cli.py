import csv
import json

import pytest

from pointwise_emergence.cli import main


def write_config(path, **kw):
    cfg = {"kind": "shift", "words": ["1", "2", "12"], "L_max": 1, "eps_grid": "dyadic:1,5",
           "windows": [[0.25, 0.03125]], "per_run": 2}
    cfg.update(kw)
    path.write_text(json.dumps(cfg))
    return str(path)


def test_build_code_minimal(tmp_path):
    cfg = write_config(tmp_path / "c.json", eps_tilde=[1])
    out = tmp_path / "code.json"
    assert main(["build-code", "--config", cfg, "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["code"]["blocks"]) == 1 and data["verification"]["pass"]
    again = tmp_path / "again.json"
    main(["build-code", "--config", cfg, "--out", str(again)])
    assert again.read_bytes() == out.read_bytes()


def test_config_errors(tmp_path, capsys):
    assert main(["build-code", "--config", write_config(tmp_path / "c.json", eps_tilde=[2])]) == 2
    assert main(["build-code", "--config", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "bad.json").write_text(json.dumps({"colour": 1}))
    assert main(["build-code", "--config", str(tmp_path / "bad.json")]) == 2
    assert main(["emergence-curve", "--code", str(tmp_path / "nope.json")]) == 2
    assert main(["verify-lemmas", "--suite", "nonexistent"]) == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["no-such-command"])


def test_pipeline_commands(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    code = tmp_path / "code.json"
    assert main(["build-code", "--config", cfg, "--out", str(code)]) == 0
    orbit = tmp_path / "orbit.csv"
    assert main(["realize", "--config", cfg, "--code", str(code), "--stop", "20", "--out", str(orbit)]) == 0
    rows = list(csv.reader(orbit.open()))
    assert rows[0] == ["n", "symbol"] and len(rows) == 21
    prefix = tmp_path / "curve"
    assert main(["emergence-curve", "--config", cfg, "--code", str(code), "--out", str(prefix)]) == 0
    text = (tmp_path / "curve.csv").read_bytes()
    assert text.startswith(b"eps,pack,cover,theory\n") and b"\r" not in text
    blocks = tmp_path / "blocks.csv"
    assert main(["export", "--config", cfg, "--code", str(code), "--out", str(blocks)]) == 0
    assert len(blocks.read_text().splitlines()) == 4
    samples = tmp_path / "samples.json"
    assert main(["export", "--what", "samples", "--config", cfg, "--code", str(code), "--out", str(samples)]) == 0
    assert len(json.loads(samples.read_text())["measures"]) >= 3


def test_master_kind(tmp_path):
    cfg = write_config(tmp_path / "c.json", kind="master", words=["2", "12"], per_run=0)
    code = tmp_path / "code.json"
    assert main(["build-code", "--config", cfg, "--out", str(code)]) == 0
    orbit = tmp_path / "orbit.csv"
    assert main(["realize", "--config", cfg, "--code", str(code), "--stop", "50", "--out", str(orbit)]) == 0
    assert next(csv.reader(orbit.open())) == ["n", "anchor", "phase", "tag"]


def test_run_is_deterministic(tmp_path):
    cfg = write_config(tmp_path / "c.json", net_denominators=[64], per_run=0)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--out-dir", str(a)]) == 0
    assert main(["run", "--config", cfg, "--out-dir", str(b), "--jobs", "2"]) == 0
    for name in ("code.json", "curve.csv", "curve.json", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    summary = json.loads((a / "summary.json").read_text())
    assert summary["pass"] and summary["exponents"][0]["exponent"] > 0.5


def test_verify_lemmas_subset(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify-lemmas", "--suite", "dirac_identity", "--suite", "reset_bound", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["pass"] and [s["name"] for s in data["suites"]] == ["dirac_identity", "reset_bound"]
