"""Exercises the command line layer through main(argv).

Numerical content is covered by the module suites; here the concern is
argument parsing, exit codes, report structure, and determinism of the
emitted files.
"""

import json

import numpy as np
import pytest

from hmlab.cli import COLUMNS, UsageError, main, member_label, parse_family
from hmlab.errors import FamilyMismatch


def run_to_dir(argv, tmp_path, name, sub="out"):
    out = tmp_path / sub
    rc = main(argv + ["--out", str(out)])
    path = out / name
    assert path.exists()
    return rc, path.read_text()


def test_parse_family_members():
    l, members = parse_family("3:2,0;1,1")
    assert l == 3
    assert members == [(2, 0), (1, 1)]
    l, members = parse_family("1:1,0")
    assert (l, members) == (1, [(1, 0)])
    # trailing separators and spaces are tolerated
    assert parse_family("3:2,0; 1,1;")[1] == [(2, 0), (1, 1)]


@pytest.mark.parametrize("text", [
    "", "3", "x:1,0", "3:1", "3:1,0,0", "3:a,b", "3:0,0", "3:", "3:-1,2",
])
def test_parse_family_rejects_malformed(text):
    with pytest.raises(UsageError):
        parse_family(text)


def test_parse_family_requires_shared_total():
    with pytest.raises(FamilyMismatch):
        parse_family("3:2,0;1,0")


def test_member_label_format():
    assert member_label(3, 2, 0) == "l3-a2b0"


def test_usage_failures_exit_two(capsys):
    assert main(["verify", "--family", "nonsense"]) == 2
    assert main(["verify", "--family", "3:2,0;1,0"]) == 2
    assert main(["counterexample", "--family", "1:1,0"]) == 2
    assert main(["isospec", "--family", "3:2,0;1,1;2,0"]) == 2
    err = capsys.readouterr().err
    assert err.count("error:") == 4


def test_verify_clean_family(tmp_path):
    rc, text = run_to_dir(
        ["verify", "--family", "1:1,0", "--directions", "8"],
        tmp_path, "verify.json")
    assert rc == 0
    payload = json.loads(text)
    assert payload["schema_version"] == 1
    assert payload["passed"] is True
    assert "control_tripped" not in payload
    (member,) = payload["members"]
    assert member["member"] == "l1-a1b0"
    names = [row["identity"] for block in member["blocks"]
             for row in block["rows"]]
    assert "spread[C]" in names
    assert "einstein" in names
    assert "beta-average" in names
    assert all(row["passed"] for block in member["blocks"]
               for row in block["rows"])


def test_verify_perturbed_control_trips(tmp_path):
    # detuned bracket must fail the batteries; the run reports success
    # (exit 0) exactly because the control tripped
    rc, text = run_to_dir(
        ["verify", "--family", "1:1,0", "--directions", "8",
         "--perturb", "1.25"],
        tmp_path, "verify.json")
    assert rc == 0
    payload = json.loads(text)
    assert payload["perturb"] == 1.25
    assert payload["control_tripped"] is True
    assert payload["passed"] is False


def test_counterexample_marks_split_by_degree(tmp_path):
    rc, text = run_to_dir(
        ["counterexample", "--family", "3:2,0;1,1", "--tol", "1e-7"],
        tmp_path, "counterexample.json")
    assert rc == 0
    payload = json.loads(text)
    assert payload["columns"][0] == "member"
    assert [row["member"] for row in payload["rows"]] == \
        ["l3-a2b0", "l3-a1b1"]
    marks = payload["marks"]
    for col in ("C", "H", "L", "A2", "A4", "A6"):
        assert marks[col] == "agree", col
    for col in ("grad_R_sq", "R_hat", "R_ring", "avg_alpha2_direction",
                "avg_beta2_direction", "p2_r3", "p3_dirichlet_r3",
                "p3_neumann_r3"):
        assert marks[col] == "differ", col
    sym, ns = payload["rows"]
    assert abs(sym["grad_R_sq"]) < 1e-10
    assert abs(ns["grad_R_sq"] - 576.0) < 1e-6


def test_counterexample_reruns_byte_identical(tmp_path):
    argv = ["counterexample", "--family", "3:2,0;1,1"]
    _, first = run_to_dir(argv, tmp_path, "counterexample.json", sub="a")
    _, second = run_to_dir(argv, tmp_path, "counterexample.json", sub="b")
    assert first == second


def test_counterexample_csv_layout(tmp_path):
    rc, text = run_to_dir(
        ["counterexample", "--family", "3:2,0;1,1", "--format", "csv"],
        tmp_path, "counterexample.csv")
    assert rc == 0
    lines = text.strip().split("\n")
    assert len(lines) == 4
    header = lines[0].split(",")
    assert header == ["member"] + list(COLUMNS)
    assert lines[1].startswith("l3-a2b0,")
    assert lines[3].startswith("mark,")


def test_isospec_pair_and_detuned_control(tmp_path):
    base = ["isospec", "--family", "3:2,0;1,1", "--max-degree", "0",
            "--grid", "64"]
    rc, text = run_to_dir(base, tmp_path, "isospec.json", sub="pos")
    assert rc == 0
    payload = json.loads(text)
    assert payload["members"] == ["l3-a2b0", "l3-a1b1"]
    assert payload["isospectral"] is True
    rc, text = run_to_dir(base + ["--detune", "1.05"], tmp_path,
                          "isospec.json", sub="neg")
    assert rc == 1
    payload = json.loads(text)
    assert payload["detune"] == 1.05
    assert payload["isospectral"] is False


def test_sis_transcript_contents(tmp_path):
    rc, text = run_to_dir(["sis", "--family", "3:2,0"],
                          tmp_path, "sis.json")
    assert rc == 0
    payload = json.loads(text)
    assert payload["dim"] == 12
    names = [g["name"] for g in payload["generators"]]
    assert names == ["density-r6", "ricci-square-r2", "gradient-square-r2"]
    assert payload["membership_plain"]["member"] is False
    assert payload["membership_graded"]["member"] is False
    assert payload["elimination_proper"].startswith("DegreeMismatch")
    assert payload["moment_gram"].startswith("DegreeTooHigh")
    assert "noise_wave" in payload
    assert "elimination_rudimentary" in payload


def test_expand_reports_series(tmp_path):
    argv = ["expand", "--family", "3:1,1", "--seed", "5"]
    rc, text = run_to_dir(argv, tmp_path, "expand.json", sub="a")
    assert rc == 0
    payload = json.loads(text)
    assert np.isclose(np.linalg.norm(payload["direction"]), 1.0)
    dens = payload["density_normalized"]
    assert dens["offset"] == 0
    assert dens["coeffs"][0] == 1.0
    tr = payload["tr_sigma"]
    assert tr["offset"] == -1
    assert np.isclose(tr["coeffs"][0], 11.0)
    # same seed reproduces the file, another seed moves the direction
    _, again = run_to_dir(argv, tmp_path, "expand.json", sub="b")
    assert again == text
    _, other = run_to_dir(["expand", "--family", "3:1,1", "--seed", "6"],
                          tmp_path, "expand.json", sub="c")
    assert json.loads(other)["direction"] != payload["direction"]


def test_spectrum_matches_direct_solver(tmp_path):
    from hmlab.spectra import RadialOperator, radial_spectrum
    rc, text = run_to_dir(
        ["spectrum", "--k", "2", "--grid", "64", "--count", "3"],
        tmp_path, "spectrum.json")
    assert rc == 0
    payload = json.loads(text)
    direct = radial_spectrum(RadialOperator(k=2, n=0, m=0, mu=0.0),
                             10.0, grid=64, count=3)
    assert payload["eigenvalues"] == [float(x) for x in direct.eigenvalues]
    assert len(payload["error_bars"]) == 3


def test_spectrum_error_paths(capsys):
    # non-integrable measure, degenerate Robin data, malformed Robin data
    assert main(["spectrum", "--k", "0", "--grid", "64"]) == 2
    assert main(["spectrum", "--k", "2", "--bc", "0,0", "--grid", "64"]) == 2
    assert main(["spectrum", "--k", "2", "--bc", "oops", "--grid", "64"]) == 2
    # solver-level failures map to exit 1
    assert main(["spectrum", "--k", "4", "--mu", "40",
                 "--t-domain", "10", "--grid", "64"]) == 1
    err = capsys.readouterr().err
    assert "ConvergenceFailure" in err


def test_stdout_emission_without_out_dir(capsys):
    rc = main(["verify", "--family", "1:1,0", "--directions", "4"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["command"] == "verify"
