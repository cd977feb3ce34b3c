import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rank1horn import cli

ADD2 = '{"values":[1,0],"multiplicities":[1,1]}'


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)


def test_sample_additive_trace(capsys):
    code, out, _ = run(["sample", "--case", "additive", "--spectrum", ADD2, "--b", "1",
                        "--method", "secular", "--n", "3", "--seed", "7"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "sample_index,eig_1,eig_2"
    assert len(lines) == 4
    data = rows(out)
    assert np.all(np.abs(data[:, 1:].sum(axis=1) - 2.0) < 1e-9)


def test_sample_digits_round_trip(capsys):
    _, out, _ = run(["sample", "--case", "additive", "--spectrum", ADD2, "--b", "1", "--n", "2"], capsys)
    field = out.splitlines()[1].split(",")[1]
    assert len(field.replace(".", "").lstrip("0")) <= 17
    assert float(field) == float(repr(float(field)))


def test_projection_single_level_row(capsys):
    code, out, _ = run(["sample", "--case", "projection", "--spectrum", "[2]", "--n", "1"], capsys)
    assert code == 0
    assert out.splitlines() == ["sample_index", "0"]


def test_column_names(capsys):
    _, out, _ = run(["sample", "--case", "multiplicative", "--spectrum", "[0.5,3.0]", "--phi", "1"], capsys)
    assert out.splitlines()[0] == "sample_index,angle_1,angle_2"
    _, out, _ = run(["sample", "--case", "quadform", "--spectrum", "[1,0]", "--n", "2"], capsys)
    assert out.splitlines()[0] == "sample_index,x_1"


def test_seed_from_environment(capsys, monkeypatch):
    args = ["sample", "--case", "additive", "--spectrum", ADD2, "--b", "1", "--n", "2"]
    monkeypatch.setenv(cli.SEED_ENV, "9")
    _, env_out, _ = run(args, capsys)
    _, flag_out, _ = run(args + ["--seed", "9"], capsys)
    _, other, _ = run(args + ["--seed", "10"], capsys)
    assert env_out == flag_out != other


def test_streams_change_output(capsys):
    args = ["sample", "--case", "additive", "--spectrum", ADD2, "--b", "1", "--n", "2", "--seed", "1"]
    _, a, _ = run(args, capsys)
    _, b, _ = run(args + ["--streams", "1"], capsys)
    assert a != b


def test_out_file(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, stdout, _ = run(["sample", "--case", "additive", "--spectrum", ADD2, "--b", "1", "--n", "5",
                           "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    assert len(out.read_text().splitlines()) == 6


def test_spectrum_from_file(tmp_path, capsys):
    path = tmp_path / "spec.json"
    path.write_text(ADD2)
    code, out, _ = run(["sample", "--case", "additive", "--spectrum", str(path), "--b", "1"], capsys)
    assert code == 0 and len(out.splitlines()) == 2


@pytest.mark.parametrize("argv", [
    ["sample", "--case", "additive", "--spectrum", ADD2],                       # missing --b
    ["sample", "--case", "additive", "--spectrum", "[0,1]", "--b", "1"],       # order
    ["sample", "--case", "additive", "--spectrum", "{oops", "--b", "1"],       # bad json
    ["sample", "--case", "nope", "--spectrum", ADD2],                          # bad choice
    ["sample", "--case", "multiplicative", "--spectrum", "[1,2]", "--phi", "1", "--field", "real"],
    ["hciz", "--x", "1,0", "--y", "1"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err


def test_numerical_failure_exit_3(capsys):
    code, _, err = run(["hciz", "--x", "1,1.000000000001", "--y", "1,0"], capsys)
    assert code == 3 and "numerical" in err


def test_density_outputs(capsys):
    _, out, _ = run(["density", "--case", "additive", "--spectrum", ADD2, "--b", "1", "--at", "1.5"], capsys)
    assert float(out) == pytest.approx(1.0)
    _, out, _ = run(["density", "--case", "quadform", "--spectrum", "[1,0]", "--at", "0.4"], capsys)
    assert float(out) == pytest.approx(1.0)
    _, out, _ = run(["density", "--case", "projection", "--spectrum", ADD2, "--field", "real",
                     "--at", "0.5"], capsys)
    assert float(out) == pytest.approx(2 / math.pi, rel=1e-14)
    _, out, _ = run(["density", "--case", "spacing", "--spectrum", ADD2, "--b", "0.7", "--at", "1"], capsys)
    assert float(out) > 0
    _, out, _ = run(["density", "--case", "heckman", "--spectrum", "[2,0.5,-1]", "--at", "1,0.3"], capsys)
    assert float(out) > 0


def test_hciz_command(capsys):
    _, out, _ = run(["hciz", "--x", "1,0", "--y", "1,0"], capsys)
    assert out.strip().startswith("1.71828182845")
    _, out, _ = run(["hciz", "--x", "3", "--y", "2"], capsys)
    assert float(out) == pytest.approx(math.exp(6))
    _, out, _ = run(["hciz", "--x", "1,0", "--y", "1,0", "--mc", "100000", "--seed", "3"], capsys)
    parts = out.splitlines()[1].split()
    mean, se = float(parts[1]), float(parts[3])
    assert abs(mean - (math.e - 1)) < 3 * se


def test_verify_ks_pipeline_from_files(tmp_path, capsys):
    paths = []
    for method, seed in (("secular", "1"), ("oracle", "2")):
        p = tmp_path / f"{method}.csv"
        cli.main(["sample", "--case", "projection", "--spectrum", "[2,0.5,-1]", "--method", method,
                  "--n", "10000", "--seed", seed, "--out", str(p)])
        paths.append(str(p))
    code, out, _ = run(["verify", "--test", "ks", "--case", "projection", "--files", *paths], capsys)
    reports = [json.loads(line) for line in out.splitlines()]
    assert len(reports) == 2
    assert code == 0 and all(r["pass"] for r in reports)


@pytest.mark.parametrize("argv", [
    ["--test", "normalization", "--case", "additive", "--spectrum", "[1,0,-1]", "--b", "1.5"],
    ["--test", "normalization", "--case", "multiplicative", "--spectrum", "[0.5,3]", "--phi", "1.2"],
    ["--test", "roundtrip", "--case", "projection", "--spectrum", "[3,2,1,0]", "--n", "200"],
    ["--test", "jacobian", "--spectrum", "[3,1,0,-2]", "--b", "1", "--n", "50"],
    ["--test", "constraints", "--case", "multiplicative", "--spectrum", "[0.3,2,4.5]", "--phi", "2",
     "--n", "500"],
    ["--test", "ks", "--case", "additive", "--spectrum", "[1,0]", "--b", "0.5", "--n", "3000"],
])
def test_verify_commands_pass(argv, capsys):
    code, out, _ = run(["verify", *argv], capsys)
    assert code == 0, out
    assert all(json.loads(line)["pass"] for line in out.splitlines())


def test_verify_failure_exit_4(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("sample_index,x_1\n" + "".join(f"{i},{i / 100}\n" for i in range(100)))
    b.write_text("sample_index,x_1\n" + "".join(f"{i},{i / 100 + 5}\n" for i in range(100)))
    code, out, _ = run(["verify", "--test", "ks", "--case", "quadform", "--files", str(a), str(b)], capsys)
    assert code == 4
    assert json.loads(out)["pass"] is False


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rank1horn", "hciz", "--x", "3", "--y", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert float(res.stdout) == pytest.approx(math.exp(6))
