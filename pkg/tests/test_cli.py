"""Command-line behaviour: reports, exit codes, determinism, round-trips."""

import json

import pytest

from mimodof import cli
from mimodof.cli import ChannelSpec, main
from mimodof.errors import NumericalError


def write_spec(tmp_path, payload, name="chan.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


IDENTITY = {"h1": [[1.0, 0.0], [0.0, 1.0]], "h2": [[1.0, 0.0], [0.0, 1.0]], "power": 4.0}
CROSSED = {"h1": [[1.0, 0.0]], "h2": [[0.0, 1.0]], "power": 4.0}


# ---------------------------------------------------------------------------
# gsvd


def test_gsvd_identity_pair(tmp_path, capsys):
    spec = write_spec(tmp_path, IDENTITY)
    code, out, _ = run(capsys, "gsvd", "--input", spec)
    assert code == 0
    report = json.loads(out)
    res = report["results"]
    assert (res["k"], res["p"], res["s"]) == (2, 0, 2)
    assert res["set_sizes"] == {"s1": 0, "sc": 2, "s2": 0}
    assert max(res["residuals"]["reconstruction"]) < 1e-8


def test_gsvd_crossed_sizes(tmp_path, capsys):
    spec = write_spec(tmp_path, CROSSED)
    code, out, _ = run(capsys, "gsvd", "--input", spec)
    assert code == 0
    res = json.loads(out)["results"]
    assert res["set_sizes"] == {"s1": 1, "sc": 0, "s2": 1}
    assert res["zeta"] == pytest.approx(1.0)


def test_gsvd_generated_channel(tmp_path, capsys):
    spec = write_spec(tmp_path, {"dims": [4, 3, 2], "seed": 11, "power": 2.0})
    code, out, _ = run(capsys, "gsvd", "--input", spec)
    assert code == 0
    res = json.loads(out)["results"]
    assert res["k"] == 4
    assert res["channel"]["source"] == "generated"
    assert "seed" in res["channel"]


def test_gsvd_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"h1": [[1.0]], ')
    code, out, err = run(capsys, "gsvd", "--input", str(path))
    assert code == 1
    assert out == ""
    assert "line" in err and "malformed" in err


def test_gsvd_dimension_mismatch(tmp_path, capsys):
    spec = write_spec(tmp_path, {"h1": [[1.0, 0.0]], "h2": [[1.0]], "power": 1.0})
    code, _, err = run(capsys, "gsvd", "--input", spec)
    assert code == 1
    assert "column" in err


def test_spec_requires_exactly_one_source(tmp_path, capsys):
    spec = write_spec(
        tmp_path, {"h1": [[1.0]], "h2": [[1.0]], "dims": [1, 1, 1], "seed": 0}
    )
    code, _, err = run(capsys, "gsvd", "--input", spec)
    assert code == 1
    assert "exactly one" in err


# ---------------------------------------------------------------------------
# region


def test_region_inner_simplex(capsys):
    code, out, _ = run(capsys, "region", "--sizes", "0,2,0", "--which", "inner")
    assert code == 0
    res = json.loads(out)["results"]
    verts = {tuple(v) for v in res["inner"]["vertices"]}
    assert verts == {("0", "0", "0"), ("2", "0", "0"), ("0", "2", "0"), ("0", "0", "2")}


def test_region_both_reports_equality(capsys):
    code, out, _ = run(capsys, "region", "--sizes", "1,1,1")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["equal"] is True
    assert "inner" in res and "outer" in res


def test_region_origin(capsys):
    code, out, _ = run(capsys, "region", "--sizes", "0,0,0", "--which", "outer")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["outer"]["vertices"] == [["0", "0", "0"]]


def test_region_bad_sizes(capsys):
    code, _, err = run(capsys, "region", "--sizes", "1,2")
    assert code == 1
    assert "three" in err


# ---------------------------------------------------------------------------
# sweep


def test_sweep_identity_dpc_slopes(tmp_path, capsys):
    spec = write_spec(tmp_path, IDENTITY)
    code, out, _ = run(
        capsys, "sweep", "--input", spec, "--params", "0,0,0", "--scheme", "dpc"
    )
    assert code == 0
    res = json.loads(out)["results"]
    assert res["slopes"] == pytest.approx([2.0, 0.0, 0.0], abs=0.05)
    assert res["expected_point"] == [2, 0, 0]
    assert res["verdict"] is True


def test_sweep_crossed_zf_common_on_private_pair(tmp_path, capsys):
    spec = write_spec(tmp_path, CROSSED)
    code, out, _ = run(
        capsys, "sweep", "--input", spec, "--params", "0,0,1", "--scheme", "zf"
    )
    assert code == 0
    res = json.loads(out)["results"]
    assert res["slopes"] == pytest.approx([1.0, 0.0, 0.0], abs=0.05)
    assert res["verdict"] is True


def test_sweep_csv_format(tmp_path, capsys):
    spec = write_spec(tmp_path, IDENTITY)
    out_path = tmp_path / "table.csv"
    code, _, _ = run(
        capsys,
        "sweep", "--input", spec, "--params", "0,0,0",
        "--powers", "1e6,1e12,4", "--format", "csv", "--output", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().strip().splitlines()
    assert lines[0] == "P,R0,R1,R2"
    assert len(lines) == 5
    assert all(len(line.split(",")) == 4 for line in lines[1:])


def test_sweep_rejects_single_power(tmp_path, capsys):
    spec = write_spec(tmp_path, IDENTITY)
    code, _, err = run(
        capsys, "sweep", "--input", spec, "--params", "0,0,0", "--powers", "1e6,1e6,1"
    )
    assert code == 1
    assert "at least 2" in err


def test_sweep_infeasible_params_names_bound(tmp_path, capsys):
    spec = write_spec(tmp_path, IDENTITY)  # sizes (0, 2, 0)
    code, _, err = run(capsys, "sweep", "--input", spec, "--params", "0,0,1")
    assert code == 1
    assert "beta" in err and "exceeds" in err


# ---------------------------------------------------------------------------
# verify


def test_verify_passes(capsys):
    code, out, err = run(
        capsys, "verify", "--trials", "2", "--seed", "42", "--region-grid", "1"
    )
    assert code == 0, err
    res = json.loads(out)["results"]
    assert res["ok"] is True
    assert res["failed"] == 0


def test_verify_zero_trials(capsys):
    code, _, err = run(capsys, "verify", "--trials", "0")
    assert code == 1
    assert "at least 1" in err


def test_verify_impossible_tolerance(capsys):
    code, out, err = run(
        capsys, "verify", "--trials", "1", "--seed", "1",
        "--tol", "0", "--region-grid", "0",
    )
    assert code == 2
    assert "FAILED" in err
    res = json.loads(out)["results"]
    assert res["failed"] >= 1


# ---------------------------------------------------------------------------
# report plumbing


def test_reports_are_deterministic(tmp_path, capsys):
    spec = write_spec(tmp_path, {"dims": [3, 2, 2], "seed": 7, "power": 1.0})
    code1, out1, _ = run(capsys, "gsvd", "--input", spec)
    code2, out2, _ = run(capsys, "gsvd", "--input", spec)
    assert code1 == code2 == 0
    assert out1 == out2
    code3, out3, _ = run(capsys, "sweep", "--input", spec, "--params", "0,0,0")
    code4, out4, _ = run(capsys, "sweep", "--input", spec, "--params", "0,0,0")
    assert code3 == code4 == 0
    assert out3 == out4


def test_spec_round_trip(tmp_path, capsys):
    payload = {"h1": [[1.0, 0.5]], "h2": [[0.25, -1.0]], "power": 2.5}
    spec_path = write_spec(tmp_path, payload)
    _, out, _ = run(capsys, "gsvd", "--input", spec_path)
    echoed = json.loads(out)["inputs"]
    assert ChannelSpec.from_dict(echoed) == ChannelSpec.from_dict(payload)


def test_output_file(tmp_path, capsys):
    spec = write_spec(tmp_path, IDENTITY)
    out_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "gsvd", "--input", spec, "--output", str(out_path))
    assert code == 0
    assert out == ""
    assert json.loads(out_path.read_text())["command"] == "gsvd"


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    def boom(args):
        raise NumericalError("synthetic breakdown")

    monkeypatch.setattr(cli, "cmd_gsvd", boom)
    parser = cli.make_parser()
    args = parser.parse_args(["gsvd", "--input", "whatever"])
    # the parser wires func at definition time; rebuild dispatch through main
    monkeypatch.setattr(args, "func", boom)
    spec = write_spec(tmp_path, IDENTITY)
    monkeypatch.setattr(cli, "make_parser", lambda: _StubParser(boom))
    code, _, err = run(capsys, "gsvd", "--input", spec)
    assert code == 3
    assert "numerical failure" in err


class _StubParser:
    def __init__(self, func):
        self._func = func

    def parse_args(self, argv):
        class _Args:
            pass

        a = _Args()
        a.func = self._func
        return a


def test_unknown_subcommand(capsys):
    code, _, err = run(capsys, "never-heard-of-it")
    assert code == 1
    assert "invalid choice" in err
