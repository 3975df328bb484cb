from __future__ import annotations

import json
import subprocess
import sys

import pytest

from quilthedra.cli import main, run
from quilthedra.examples import write_fixtures


def report(argv, capsys) -> tuple[int, dict]:
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


def strip_time(data: dict) -> dict:
    return {k: v for k, v in data.items() if k != "wall_time"}


def test_enumerate(capsys):
    code, data = report(["enumerate", "--family", "colored", "--d", "3"], capsys)
    assert code == 0
    assert data["data"]["count"] == 13
    from quilthedra.trees import enumerate_trees
    assert data["data"]["trees"] == [t.expression() for t in enumerate_trees("colored", 3)]
    assert set(data) == {"command", "ok", "checks", "data", "wall_time"}


def test_faces_and_dot(capsys):
    code, data = report(["faces", "--family", "bicolored", "--d", "2"], capsys)
    assert code == 0 and data["data"]["f_vector"] == [5, 5, 1]
    assert main(["faces", "--family", "stable", "--d", "4", "--format", "dot"]) == 0
    assert capsys.readouterr().out.startswith("digraph")


def test_facets(capsys):
    code, data = report(["facets", "--family", "seam", "--d", "2", "--e", "1"], capsys)
    assert code == 0
    assert data["data"]["facet_families"]["h-product"] == 7


def test_signs(capsys):
    code, data = report(["signs", "verify", "--family", "functor", "--dmax", "5"], capsys)
    assert code == 0
    assert data["data"]["functor"]["failures"] == 0


def test_ainfty_and_relations(capsys):
    code, data = report(["ainfty", "--dmax", "3"], capsys)
    assert code == 0, [c for c in data["checks"] if c["status"] == "fail"]
    names = {c["name"] for c in data["checks"]}
    assert {"negative-quiver3-unsigned", "homotopy", "terms-assoc-3"} <= names
    code, data = report(["relations"], capsys)
    assert code == 0


def test_delays(capsys):
    code, data = report(["delays", "--d", "3"], capsys)
    assert code == 0
    assert data["data"]["d"] == 3


def test_output_is_deterministic(capsys):
    argv = ["facets", "--family", "bicolored", "--d", "3"]
    _, a = report(argv, capsys)
    _, b = report(argv, capsys)
    assert strip_time(a) == strip_time(b)


def test_text_format(capsys):
    assert main(["faces", "--family", "stable", "--d", "4", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "PASS  euler" in out and out.rstrip().endswith("ok")


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    assert main(["enumerate", "--d", "3", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["data"]["count"] == 3


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["enumerate", "--bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_failed_check_exits_1(capsys):
    code, data = report(["enumerate", "--family", "stable", "--d", "1"], capsys)
    assert code == 1 and not data["ok"]
    assert data["checks"][0]["name"] == "error"


def test_corrupted_fixtures_exit_1(tmp_path, capsys):
    write_fixtures(tmp_path)
    good = json.loads((tmp_path / "quiver3-unsigned.json").read_text())
    (tmp_path / "quiver3.json").write_text(json.dumps(good))
    code, data = report(["ainfty", "--dmax", "2", "--fixtures", str(tmp_path)], capsys)
    assert code == 1
    failed = {c["name"] for c in data["checks"] if c["status"] == "fail"}
    assert failed == {"ainfty-quiver3"}


def test_shipped_fixtures_are_current(tmp_path):
    from quilthedra.ainfty import FIXTURE_DIR
    for path in write_fixtures(tmp_path):
        assert json.loads(path.read_text()) == json.loads((FIXTURE_DIR / path.name).read_text())


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "quilthedra", "enumerate", "--d", "3"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0
    assert json.loads(out.stdout)["data"]["count"] == 3


def test_run_returns_report(capsys):
    code, rep = run(["enumerate", "--d", "3"])
    capsys.readouterr()
    assert code == 0 and rep.ok
