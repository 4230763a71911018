import json
import shutil
import subprocess

import pytest

from gkminer.cli import run, write_atomic
from gkminer.synth import FIG1_NT


@pytest.fixture
def g1_file(tmp_path):
    path = tmp_path / "g1.nt"
    path.write_text(FIG1_NT, encoding="utf-8")
    return path


def mine(tmp_path, g1_file, *extra, out="keys.json"):
    return run(["mine", "--graph", str(g1_file), "--type", "College", "--k", "5", "--sup", "0.6",
                "--out", str(tmp_path / out), *extra])


def test_mine_fixture(tmp_path, g1_file, capsys):
    assert mine(tmp_path, g1_file) == 0
    data = json.loads((tmp_path / "keys.json").read_text())
    assert any(k["type"] == "College" and k["variables"] and k["variables"][0]["keyRefs"] == ["City#0"]
               for k in data["keys"])
    summary = json.loads(capsys.readouterr().out)
    assert summary["sup"] == "3/5" and summary["dependencies"] == [["City", "Country"], ["College", "City"]]
    assert {"load", "summary", "mine:College", "mine:City", "mine:Country", "total"} <= set(summary["timings"])


def test_mine_outputs_are_reproducible(tmp_path, g1_file):
    assert mine(tmp_path, g1_file, out="a.json") == 0
    assert mine(tmp_path, g1_file, "--no-opt", out="b.json") == 0
    assert mine(tmp_path, g1_file, "--threads", "3", "--sup", "3/5", out="c.json") == 0
    a = (tmp_path / "a.json").read_bytes()
    assert a == (tmp_path / "b.json").read_bytes() == (tmp_path / "c.json").read_bytes()


@pytest.mark.parametrize("argv", [
    ["--sup", "0"], ["--sup", "1.5"], ["--sup", "x"], ["--k", "0"], ["--threads", "0"], ["--type-k", "College"],
])
def test_mine_usage_errors(tmp_path, g1_file, argv, capsys):
    base = ["mine", "--graph", str(g1_file), "--type", "College", "--k", "5", "--sup", "0.6",
            "--out", str(tmp_path / "k.json")]
    assert run(base + argv) == 1
    assert "usage:" in capsys.readouterr().err
    assert not (tmp_path / "k.json").exists()


def test_mine_unknown_type_and_missing_file(tmp_path, g1_file):
    assert run(["mine", "--graph", str(g1_file), "--type", "Planet", "--k", "2", "--sup", "1",
                "--out", str(tmp_path / "k.json")]) == 1
    assert run(["mine", "--graph", str(tmp_path / "nope.nt"), "--type", "T", "--k", "2", "--sup", "1",
                "--out", str(tmp_path / "k.json")]) == 1


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.nt"
    bad.write_text("<a> <type> <T> .\nbroken\n", encoding="utf-8")
    assert run(["mine", "--graph", str(bad), "--type", "T", "--k", "2", "--sup", "1",
                "--out", str(tmp_path / "k.json")]) == 2
    assert run(["stats", "--graph", str(bad)]) == 2


def test_overrides(tmp_path, g1_file):
    assert mine(tmp_path, g1_file, "--type-sup", "College=1", "--type-k", "City=5") == 0
    data = json.loads((tmp_path / "keys.json").read_text())
    assert all(k["support"] == "1/1" for k in data["keys"] if k["type"] == "College")


def test_validate(tmp_path, g1_file, capsys):
    keys = tmp_path / "p1.json"
    keys.write_text(json.dumps({"type": "College", "keys": [{"id": "P1", "constants": ["name", "motto"]}]}))
    assert run(["validate", "--graph", str(g1_file), "--keys", str(keys)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["keys"][0]["support"] == "2/3"
    out = tmp_path / "report.json"
    assert run(["validate", "--graph", str(g1_file), "--keys", str(keys), "--out", str(out)]) == 0
    assert json.loads(out.read_text()) == report
    keys.write_text("{")
    assert run(["validate", "--graph", str(g1_file), "--keys", str(keys)]) == 2


def test_stats(g1_file, capsys):
    assert run(["stats", "--graph", str(g1_file)]) == 0
    data = json.loads(capsys.readouterr().out)
    college = next(t for t in data["types"] if t["name"] == "College")
    assert college["count"] == 3
    assert {"src": "College", "label": "city", "dst": "City", "count": 3} in data["edges"]


def test_synth_and_link(tmp_path, capsys):
    g1 = tmp_path / "g1.nt"
    assert run(["synth", "--fixture", "fig1", "--out", str(g1)]) == 0
    assert g1.read_text() == FIG1_NT
    tsv = tmp_path / "g1.tsv"
    assert run(["synth", "--fixture", "fig1", "--out", str(tsv)]) == 0
    assert run(["mine", "--graph", str(tsv), "--type", "College", "--k", "5", "--sup", "1",
                "--out", str(tmp_path / "keys.json")]) == 0
    gold = tmp_path / "gold.tsv"
    gold.write_text("".join(f"college_{i}\tcollege_{i}\n" for i in (1, 2, 3)))
    capsys.readouterr()
    assert run(["link", "--left", str(g1), "--right", str(tsv), "--keys", str(tmp_path / "keys.json"),
                "--type", "College", "--gold", str(gold), "--out", str(tmp_path / "links.tsv")]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["links"] == 3 and result["score"]["f1"] == 1.0
    assert (tmp_path / "links.tsv").read_text().count("\n") == 3
    gold.write_text("oops\n")
    assert run(["link", "--left", str(g1), "--right", str(tsv), "--keys", str(tmp_path / "keys.json"),
                "--type", "College", "--gold", str(gold), "--out", str(tmp_path / "links.tsv")]) == 2


def test_synth_spec(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"seed": 1, "types": [{"name": "A", "count": 5}],
                                "attributes": {"A": [{"name": "x", "presence": 1.0, "domain": 3}]}}))
    out1, out2 = tmp_path / "a.nt", tmp_path / "b.nt"
    assert run(["synth", "--spec", str(spec), "--out", str(out1)]) == 0
    assert run(["synth", "--spec", str(spec), "--seed", "1", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert run(["synth", "--out", str(out1)]) == 1
    assert run(["synth", "--fixture", "nope", "--out", str(out1)]) == 1


def test_version_and_missing_command(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["--version"])
    assert exc.value.code == 0
    assert run([]) == 1


def test_write_atomic_leaves_no_temp(tmp_path):
    target = tmp_path / "x.txt"
    write_atomic(target, "hello")
    write_atomic(target, "again")
    assert target.read_text() == "again"
    assert [p.name for p in tmp_path.iterdir()] == ["x.txt"]


def test_console_script(tmp_path):
    exe = shutil.which("gkminer")
    if exe is None:
        pytest.skip("console script not installed")
    out = tmp_path / "g1.nt"
    proc = subprocess.run([exe, "synth", "--fixture", "fig1", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0 and out.exists()
    proc = subprocess.run([exe, "mine", "--graph", str(out), "--type", "College", "--k", "5", "--sup", "0",
                           "--out", str(tmp_path / "k.json")], capture_output=True, text=True)
    assert proc.returncode == 1
