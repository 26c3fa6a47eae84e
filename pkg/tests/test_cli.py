"""End-to-end tests of the command line: exit codes, formats, determinism."""

import json

import numpy as np
import pytest

from zeroratio import cli
from zeroratio.factors import ZeroSet
from zeroratio.jost import Kernel, save_kernel
from zeroratio.report import VerificationReport


def run(argv):
    return cli.main(argv)


def kernel_file(tmp_path, kernel=None):
    path = tmp_path / "kernel.json"
    save_kernel(kernel or Kernel.constant(1.0, 1.0), str(path))
    return str(path)


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


def test_constants_golden_values(tmp_path):
    out = tmp_path / "c.json"
    rc = run([
        "constants", "--C0", "2", "--C1", "1", "--rho", "1", "--sigma", "1",
        "--mu", "1", "--r0", "1", "--delta", "0.6667", "--eps", "0.1",
        "--out", str(out),
    ])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["p"] == "2"
    assert data["c"] == "2"
    assert data["r1"] == "2"
    assert data["exponent"].startswith("0.3333")


def test_constants_missing_class_flag_exits_64(tmp_path):
    rc = run(["constants", "--C1", "1", "--rho", "1", "--sigma", "1",
              "--mu", "1", "--r0", "1", "--delta", "0.6667"])
    assert rc == 64


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------


def test_bad_grid_shape_exits_64():
    rc = run(["verify", "decomposition", "--grid", "16x"])
    assert rc == 64


def test_missing_pair_file_exits_66(tmp_path):
    rc = run(["verify", "theorem", "--pair", str(tmp_path / "absent.json"),
              "--R", "60", "--delta", "0.6667"])
    assert rc == 66


def test_zero_inside_cutoff_exits_2(tmp_path):
    zpath = tmp_path / "zeros.csv"
    ZeroSet.from_points([30.0 + 0j]).to_csv(str(zpath))
    rc = run(["verify", "lemma2", "--zeros", str(zpath), "--R", "60",
              "--grid", "12x32"])
    assert rc == 2


def test_unwritable_output_exits_73(tmp_path):
    rc = run(["constants", "--C0", "2", "--C1", "1", "--rho", "1",
              "--sigma", "1", "--mu", "1", "--r0", "1", "--delta", "0.6667",
              "--out", str(tmp_path / "no_such_dir" / "c.json")])
    assert rc == 73


def test_failing_verdict_exits_1(tmp_path, monkeypatch):
    # fabricate a bound violation to confirm the exit-code contract; honest
    # runs of the shipped checks do not produce one
    def fake(coeffs, r, mu, grid=None, segment_samples=2048, threads=None):
        return VerificationReport(
            check="segment-to-disk-amplification",
            bound=1.0, observed=2.0, samples=8,
        )

    monkeypatch.setattr(cli, "check_lemma3", fake)
    rc = run(["verify", "lemma3", "--coeffs", "0,1e-6",
              "--out", str(tmp_path / "r.json")])
    assert rc == 1
    data = json.loads((tmp_path / "r.json").read_text())
    assert data[0]["verdict"] == "fail"


# ---------------------------------------------------------------------------
# verify output formats
# ---------------------------------------------------------------------------


def test_verify_decomposition_deterministic_bytes(tmp_path):
    args = ["verify", "decomposition", "--grid", "16x48", "--seed", "3"]
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert run(args + ["--out", str(out1)]) == 0
    assert run(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    data = json.loads(out1.read_text())
    assert data[0]["check"] == "decomposition-identity"
    assert data[0]["verdict"] == "pass"


def test_verify_lemma3_json_and_csv(tmp_path):
    base = ["verify", "lemma3", "--coeffs", "0,1e-6+2e-6j", "--r", "5",
            "--mu", "1", "--grid", "12x32"]
    jout = tmp_path / "r.json"
    assert run(base + ["--out", str(jout)]) == 0
    report = json.loads(jout.read_text())[0]
    assert report["verdict"] == "pass"
    assert all(p["satisfied"] for p in report["preconditions"])

    cout = tmp_path / "r.csv"
    assert run(base + ["--format", "csv", "--out", str(cout)]) == 0
    lines = cout.read_text().splitlines()
    assert lines[0] == "check,verdict,bound,observed,margin,samples,unmet_preconditions"
    assert lines[1].startswith("segment-to-disk-amplification,pass,")


def test_verify_lemma3_poly_seed(tmp_path):
    out = tmp_path / "r.json"
    rc = run(["verify", "lemma3", "--poly-seed", "11", "--p", "3", "--r", "2",
              "--mu", "2", "--grid", "12x32", "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())[0]
    assert report["verdict"] == "pass"
    assert all(p["satisfied"] for p in report["preconditions"])


def test_plot_data_profile_csv(tmp_path):
    plot = tmp_path / "profile.csv"
    rc = run(["verify", "lemma3", "--coeffs", "0,1e-6", "--r", "5",
              "--grid", "12x32", "--out", str(tmp_path / "r.json"),
              "--plot-data", str(plot)])
    assert rc == 0
    lines = plot.read_text().splitlines()
    assert lines[0] == "r,bound,observed"
    assert len(lines) > 4
    row = lines[1].split(",")
    assert float(row[1]) >= float(row[2])


# ---------------------------------------------------------------------------
# zeros, jensen, jost
# ---------------------------------------------------------------------------


def test_zeros_subcommand_writes_csv(tmp_path):
    kpath = kernel_file(tmp_path)
    out = tmp_path / "zeros.csv"
    rc = run(["zeros", "--kernel", kpath, "--radius", "12", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "re,im,mult"
    assert len(lines) == 5  # four transcendental roots inside radius 12
    found = ZeroSet.from_csv(str(out))
    assert all(m == 1 for _loc, m in found)


def test_jensen_subcommand_identity(tmp_path):
    kpath = kernel_file(tmp_path)
    out = tmp_path / "j.json"
    rc = run(["jensen", "--kernel", kpath, "--radius", "8", "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert abs(float(data["lhs"]) - float(data["rhs"])) <= 1e-8 * (1 + abs(float(data["lhs"])))


def test_jost_eval_at_origin(tmp_path):
    kpath = kernel_file(tmp_path)
    out = tmp_path / "v.json"
    rc = run(["jost", "--kernel", kpath, "--eval", "0,0", "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    value = complex(float(data["value"][0]), float(data["value"][1]))
    assert value == pytest.approx(2.0, abs=1e-12)


def test_jost_needs_a_mode_flag(tmp_path):
    rc = run(["jost", "--kernel", kernel_file(tmp_path)])
    assert rc == 64


def test_jost_growth_fit_unit_kernel(tmp_path):
    out = tmp_path / "g.json"
    rc = run(["jost", "--kernel", kernel_file(tmp_path), "--growth-fit",
              "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert float(data["rho"]) == pytest.approx(1.0, abs=0.05)
    assert float(data["sigma"]) == pytest.approx(1.0, abs=0.05)
    assert not data["degenerate"]
