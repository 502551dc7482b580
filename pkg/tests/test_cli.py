import io
import json

import pytest

from riemann_kdv import __version__
from riemann_kdv.cli import OUTPUT_ENV, clean, run


def call(args, tmp_path):
    out = io.StringIO()
    code = run(list(args) + ["--output-dir", str(tmp_path)], stdout=out)
    return code, out.getvalue()


def test_family_csv(tmp_path):
    code, text = call(["family", "--t", "0.5,1,2"], tmp_path)
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "t,a_t,e2,h"
    assert len(lines) == 4
    assert (tmp_path / "family.csv").read_text() == text
    report = json.loads((tmp_path / "family_report.json").read_text())
    assert report["version"] == __version__
    assert report["config"]["t"] == "0.5,1,2"


def test_hierarchy_latex(tmp_path):
    code, text = call(["hierarchy", "--n", "3", "--format", "latex"], tmp_path)
    assert code == 0
    assert r"\mathcal{P}_{2} = u'' + 3 u^{2}" in text
    assert r"u^{(4)} + 10 u u'' + 5 (u')^{2} + 10 u^{3}" in text


def test_kdv_soliton(tmp_path):
    code, text = call(["kdv", "--soliton", "--L", "40", "--T", "1"], tmp_path)
    assert code == 0
    rows = [list(map(float, r.split(","))) for r in text.splitlines()[1:]]
    assert max(max(r[1:]) for r in rows) < 1e-6


def test_kdv_tolerance_failure(tmp_path):
    code, _ = call(["kdv", "--soliton", "--T", "0.1", "--tol", "1e-20"], tmp_path)
    assert code == 2


def test_validation_errors(tmp_path):
    assert call(["family", "--t", "-1"], tmp_path)[0] == 1
    assert call(["family", "--nope", "1"], tmp_path)[0] == 1
    assert call(["hierarchy", "--format", "pdf"], tmp_path)[0] == 1
    assert call(["check", "--criteria", "13"], tmp_path)[0] == 1


def test_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(["family", "--output-dir", str(blocker / "sub")], stdout=io.StringIO()) == 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"t": "1.5", "extra": 1}))
    assert call(["family", "--config", str(cfg)], tmp_path)[0] == 1
    cfg.write_text(json.dumps({"t": "1.5"}))
    code, text = call(["family", "--config", str(cfg)], tmp_path)
    assert code == 0 and text.splitlines()[1].startswith("1.5,")
    code, text = call(["family", "--config", str(cfg), "--t", "2"], tmp_path)
    assert text.splitlines()[1].startswith("2,")


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert run(["hierarchy", "--n", "1"], stdout=io.StringIO()) == 0
    assert (tmp_path / "hierarchy.txt").exists()


def test_reruns_are_identical(tmp_path):
    call(["shiffman", "--n", "16"], tmp_path / "a")
    call(["shiffman", "--n", "16"], tmp_path / "b")
    for name in ("shiffman.csv", "shiffman_report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("fmt", ["obj", "ply"])
def test_mesh_export(tmp_path, fmt):
    code, _ = call(["mesh", "--resolution", "12", "--format", fmt], tmp_path)
    assert code == 0
    assert (tmp_path / f"mesh.{fmt}").stat().st_size > 0


def test_spectrum_and_detection(tmp_path):
    assert call(["spectrum"], tmp_path)[0] == 0
    rep = json.loads((tmp_path / "spectrum_report.json").read_text())
    assert rep["results"]["dimension"] == 3
    code, text = call(["detect-ag", "--n", "128", "--dps", "40"], tmp_path)
    assert code == 0 and "order 1" in text


def test_twelve_digit_formatting():
    assert clean(1 / 3) == 0.333333333333
    assert clean(1 + 2j) == [1.0, 2.0]
    assert clean({"a": (0.1, True)}) == {"a": [0.1, True]}
