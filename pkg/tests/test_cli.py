import io
import json
import subprocess
import sys

import pytest

from baumbott import __version__
from baumbott.cli import JobSpec, emit, exit_code, main, run
from baumbott.errors import JobError


def test_bb_job():
    rep = run({"command": "bb", "field": ["z1", "z2"], "phi": "c2", "point": [0, 0]})
    assert rep["error"] is None
    assert rep["result"]["value"] == "1"
    assert rep["result"]["approx"] == 1.0
    assert rep["schema_version"] == 1 and rep["version"] == __version__
    assert exit_code(rep) == 0


def test_sum_check_job():
    rep = run({"command": "sum-check-p2", "degree": 1, "field": ["x", "3*y"], "phi": "c1^2",
               "points": {"0": [[0, 0]], "1": [[0, 0]], "2": [[0, 0]]}})
    res = rep["result"]
    assert res["sum"] == "9" and res["match"] is True
    assert [r["value"] for r in res["residues"]] == ["16/3", "-1/2", "25/6"]
    assert abs(res["residues"][0]["approx"] - 16 / 3) < 1e-15


def test_degree_mismatch_job():
    rep = run({"command": "bb", "field": ["z1", "z2"], "phi": "c1^3"})
    assert rep["error"]["code"] == "DegreeMismatch"
    assert exit_code(rep) == 2


@pytest.mark.parametrize("job, code", [
    ({"command": "bb", "field": ["z1*z2", "z1^2"], "phi": "c2"}, "InfiniteDimensional"),
    ({"command": "bb", "field": ["z1 - z1^2", "z2"], "phi": "c2"}, "OriginNotOnlyZero"),
    ({"command": "bb", "field": ["z1 - 1", "z2"], "phi": "c2"}, "NotSingular"),
    ({"command": "sum-check-p2", "degree": 1, "field": ["x^2", "y"], "phi": "c2",
      "points": {"0": [[0, 0]]}}, "PoleClearingFailed"),
    ({"command": "bb", "field": ["z1 +", "z2"], "phi": "c2"}, "ParseError"),
])
def test_structured_errors(job, code):
    rep = run(job)
    assert rep["error"]["code"] == code
    assert exit_code(rep) == (3 if code == "ParseError" else 2)


def test_localized_bb_job():
    job = {"command": "bb", "field": ["z1 - z1^2", "z2"], "phi": "c2", "localize": True,
           "points": [[0, 0], [1, 0]]}
    rep = run(job)
    assert [r["value"] for r in rep["result"]["residues"]] == ["1", "1"]


def test_other_commands():
    rep = run({"command": "residue", "field": ["z1^2 - z2^3", "z2^2"], "polynomial": "z1*z2"})
    assert rep["result"]["value"] == "1"
    assert rep["diagnostics"]["quotient_dimension"] == 4
    rep = run({"command": "milnor", "field": ["z1^2", "z2^3"]})
    assert rep["result"]["value"] == "6"
    rep = run({"command": "phi-eval", "phi": "c1*c2", "matrix": [[1, 0, 0], [0, 2, 0], [0, 0, "3"]]})
    assert rep["result"]["value"] == "66"
    assert "wall_time_s" in rep["diagnostics"]


def test_unknown_and_missing_keys():
    with pytest.raises(JobError):
        JobSpec.from_dict({"command": "bb", "field": ["z1"], "phi": "c1", "colour": 1})
    with pytest.raises(JobError):
        JobSpec.from_dict({"command": "bb", "field": ["z1"]})
    with pytest.raises(JobError):
        JobSpec.from_dict({"command": "frobnicate"})
    with pytest.raises(JobError):
        JobSpec.from_dict({"command": "bb", "n": 3, "field": ["z1", "z2"], "phi": "c2"})


def test_emit_json_roundtrip():
    rep = run({"command": "bb", "field": ["z1", "2*z2"], "phi": "c1^2"})
    out = emit(rep)
    back = json.loads(out)
    assert back == rep
    assert emit(back) == out
    assert back["result"]["value"] == "9/2"


def test_exact_value_string():
    rep = run({"command": "bb", "field": ["z1 + z2^2", "3*z2"], "phi": "c1^2"})
    assert rep["result"]["value"] == "16/3"
    assert abs(rep["result"]["approx"] - 5.333333333333333) < 1e-15


def test_emit_csv():
    rep = run({"command": "numeric", "field": ["z1", "z2"], "phi": "c2",
               "eps_schedule": [0.1, 0.03, 0.01], "grid": 16})
    text = emit(rep, "csv").decode()
    lines = text.strip().split("\n")
    assert lines[0] == "eps,value_re,value_im,abs_error"
    assert len(lines) == 4
    with pytest.raises(ValueError):
        emit(run({"command": "bb", "field": ["z1", "z2"], "phi": "c2"}), "csv")
    with pytest.raises(ValueError):
        emit(rep, "xml")


def test_numeric_job():
    rep = run({"command": "numeric", "field": ["z1", "2*z2"], "phi": "c1^2", "eps": 0.01})
    res = rep["result"]
    assert res["exact"] == "9/2"
    assert abs(res["value_re"] - 4.5) < 0.09 and abs(res["value_im"]) < 1e-6
    assert rep["diagnostics"]["quadrature_nodes"] == 40 ** 4


def test_numeric_job_thread_independent():
    base = {"command": "numeric", "field": ["z1", "z2"], "phi": "c2", "eps": 0.01, "grid": 20}
    a = run(dict(base, threads=1))["result"]
    b = run(dict(base, threads=3))["result"]
    assert (a["value_re"], a["value_im"]) == (b["value_re"], b["value_im"])


def _main(argv, stdin_text, monkeypatch, capsysbinary):
    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin_text))
    code = main(argv)
    return code, capsysbinary.readouterr().out


def test_main_stdin_and_flags(monkeypatch, capsysbinary):
    job = json.dumps({"field": ["z1"], "phi": "c1", "eps": 0.1})
    code, out = _main(["numeric", "-", "--eps", "0.001", "--grid", "100"], job,
                      monkeypatch, capsysbinary)
    rep = json.loads(out)
    assert code == 0
    assert rep["job"]["eps"] == 0.001 and rep["result"]["grid"] == 100


def test_main_exit_codes(monkeypatch, capsysbinary):
    code, out = _main(["bb"], json.dumps({"field": ["z1", "z2"], "phi": "c1^3"}),
                      monkeypatch, capsysbinary)
    assert code == 2 and json.loads(out)["error"]["code"] == "DegreeMismatch"
    code, out = _main(["bb"], "{not json", monkeypatch, capsysbinary)
    assert code == 3 and json.loads(out)["error"]["code"] == "ParseError"
    code, out = _main(["bb"], json.dumps({"field": ["z1"], "phi": "c1", "x": 1}),
                      monkeypatch, capsysbinary)
    assert code == 3
    code, out = _main(["bb", "--format", "csv"], json.dumps({"field": ["z1"], "phi": "c1"}),
                      monkeypatch, capsysbinary)
    assert code == 3


def test_main_csv(monkeypatch, capsysbinary):
    job = json.dumps({"field": ["z1"], "phi": "c1", "eps_schedule": [0.1, 0.01]})
    code, out = _main(["numeric", "--format", "csv"], job, monkeypatch, capsysbinary)
    assert code == 0 and out.decode().count("\n") == 3


def test_console_entry_point(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"field": ["z1^2 - z2^3", "z2^2"], "phi": "c2"}))
    proc = subprocess.run([sys.executable, "-m", "baumbott", "bb", str(path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["value"] == "4"
