import filecmp
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from frlab.cli import CAPS, run_captured

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def cli(tmp_path):
    cache = tmp_path / "cache"

    def run(*argv, cached=True):
        extra = ["--cache-dir", str(cache)] if cached else ["--no-cache"]
        return run_captured([*argv, *extra])

    run.cache = cache
    return run


def _json(cli, *argv, **kw):
    code, out = cli(*argv, "--format", "json", **kw)
    return code, json.loads(out)


def test_krk_table_on_s4_is_tsv(cli):
    code, out = cli("rank", "krk", "--builtin", "s4", "--all")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split("\t") == ["a", "B", "Drk", "Krk"]
    assert len(lines) == 1 + 4 * 16
    row = dict(zip(lines[0].split("\t"), lines[1].split("\t")))
    assert row["a"] == "0" and row["Krk"] == "3"


def test_pairs_disjoint_amalgamation_counterexample(cli):
    code, rep = _json(cli, "fraisse", "check", "--builtin", "pairs", "--flavor", "disjoint", "--bound", "3")
    assert code == 1 and rep["status"] == "fail"
    assert rep["witness"]
    code, rep = _json(cli, "fraisse", "check", "--builtin", "pairs", "--flavor", "plain", "--bound", "3")
    assert code == 0


def test_cl_equivalence_suite(cli):
    code, rep = _json(cli, "props", "run", "--suite", "cl-equivalence", "--seed", "7")
    assert code == 0
    assert all(p["status"] == "pass" for p in rep["result"]["properties"])


def test_report_envelope(cli):
    code, rep = _json(cli, "group", "orbit", "--builtin", "s4", "--point", "0", "--over", "1,2")
    assert code == 0
    assert rep["schema"] == "frlab.report/1" and rep["tool"] == "frlab"
    assert rep["exit_code"] == 0 and rep["status"] == "ok"


@pytest.mark.parametrize(
    "argv",
    [
        ["rank", "drk", "--builtin", "s5", "--all"],
        ["fraisse", "limit", "--builtin", "graphs", "--n", "12", "--depth", "2"],
        ["props", "run", "--suite", "decompose", "--seed", "4", "--samples", "50"],
    ],
)
def test_cache_does_not_change_bytes(cli, argv):
    first = cli(*argv, "--format", "json")
    cached = cli(*argv, "--format", "json")
    bypass = cli(*argv, "--format", "json", cached=False)
    assert first == cached == bypass
    assert any(cli.cache.glob("*.json"))


def test_cache_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("FRLAB_CACHE_DIR", str(tmp_path / "env-cache"))
    code, _ = run_captured(["group", "orbit", "--builtin", "s3", "--point", "0"])
    assert code == 0
    assert list((tmp_path / "env-cache").glob("*.json"))


def test_corrupt_cache_entry_is_ignored(cli):
    argv = ("group", "orbit", "--builtin", "s3", "--point", "1", "--format", "json")
    _, good = cli(*argv)
    for f in cli.cache.glob("*.json"):
        f.write_text("{not json")
    assert cli(*argv)[1] == good


@pytest.mark.parametrize("name", ["q5", "e2-5"])
def test_unknown_builtin_is_input_error(cli, capsys, name):
    code, out = cli("group", "orbit", "--builtin", name, "--point", "0")
    assert code == 3 and out == ""
    assert "input error" in capsys.readouterr().err


def test_non_bijective_generator_is_rejected(cli, tmp_path, capsys):
    doc = {"kind": "fixed", "group": {"domain_size": 3, "generators": [[0, 0, 1]]}}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, _ = cli("group", "orbit", "--instance", str(path), "--point", "0")
    assert code == 3
    assert "/group/generators/0" in capsys.readouterr().err


def test_malformed_json_reports_position(cli, tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"kind": "fixed",\n  "group": [}\n')
    code, _ = cli("group", "orbit", "--instance", str(path), "--point", "0")
    assert code == 3
    assert f"{path}:2:" in capsys.readouterr().err


def test_cap_rejection(cli, capsys):
    code, _ = cli("closure", "check", "--builtin", "s4", "--set-size", str(CAPS["set_size"] + 1))
    assert code == 3
    assert "--set-size" in capsys.readouterr().err
    code, _ = cli("props", "run", "--suite", "decompose", "--seed", str(2**64))
    assert code == 3


def test_unknown_argument_exit_code(cli):
    assert cli("rank", "drk", "--bogus")[0] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["fraisse", "check", "--builtin", "pairs", "--flavor", "disjoint", "--bound", "3"],
        ["closure", "check", "--builtin", "s4", "--closure", "identity", "--form", "4"],
        ["props", "run", "--suite", "weak-transitivity", "--samples", "20"],
        ["support", "axioms", "--builtin", "s4", "--supp", "constant-zero", "--axiom", "3"],
    ],
)
def test_failing_reports_have_recheckable_witnesses(cli, tmp_path, argv):
    out = tmp_path / "rep.json"
    code, _ = cli(*argv, "--output", str(out))
    assert code == 1
    rep = json.loads(out.read_text())
    assert rep.get("witness") is not None
    code, text = run_captured(["verify-witness", str(out), "--format", "json"])
    assert code == 0, text
    assert json.loads(text)["result"]["confirmed"] is True


def test_tampered_witness_is_not_confirmed(cli, tmp_path):
    out = tmp_path / "rep.json"
    cli("closure", "check", "--builtin", "s4", "--closure", "constant-full", "--form", "4", "--output", str(out))
    rep = json.loads(out.read_text())
    assert rep["status"] == "ok"
    rep["status"], rep["exit_code"] = "fail", 1
    rep["witness"] = {"form": 4, "a": 0, "C": []}
    out.write_text(json.dumps(rep))
    code, _ = run_captured(["verify-witness", str(out)])
    assert code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["rank", "table", "--builtin", "s4", "--all"],
        ["closure", "enumerate", "--builtin", "c4"],
        ["fraisse", "limit", "--builtin", "graphs", "--n", "10", "--depth", "2"],
        ["involve", "run", "--builtin", "graphs", "--stages", "4"],
        ["support", "axioms", "--builtin", "pairs-limit", "--set-size", "2", "--budget", "12"],
        ["props", "run", "--suite", "decompose", "--samples", "20"],
        ["eplus", "verify", "--samples", "20"],
    ],
)
def test_figures_are_written(cli, tmp_path, argv):
    fig = tmp_path / "out" / "fig.png"
    code, _ = cli(*argv, "--figure", str(fig))
    assert code in (0, 2)
    assert fig.exists() and fig.stat().st_size > 1000
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_schemas_are_published_and_versioned():
    pkg = ROOT / "src" / "frlab" / "schemas"
    docs = ROOT / "docs" / "schemas"
    names = sorted(p.name for p in pkg.glob("*.schema.json"))
    assert names == sorted(p.name for p in docs.glob("*.schema.json"))
    for name in names:
        assert filecmp.cmp(pkg / name, docs / name, shallow=False), name
        assert json.loads((pkg / name).read_text())["x-version"] >= 1


def test_report_schema_accepts_real_reports(cli):
    import jsonschema

    schema = json.loads((ROOT / "docs" / "schemas" / "report.schema.json").read_text())
    for argv in (["rank", "drk", "--builtin", "s3", "--a", "0"], ["fraisse", "check", "--builtin", "pairs", "--flavor", "disjoint"]):
        _, rep = _json(cli, *argv)
        jsonschema.validate(rep, schema)


@pytest.mark.skipif(shutil.which("frlab") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["frlab", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "frlab" in proc.stdout


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "frlab.cli", "group", "orbit", "--builtin", "s3", "--point", "0", "--no-cache"], capture_output=True, text=True)
    assert proc.returncode == 0
