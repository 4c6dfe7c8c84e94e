"""CLI: subcommands, config resolution, determinism, exit codes."""

from __future__ import annotations

import json

import pytest

from puresig.cli import (
    EXIT_BAD_CONFIG,
    EXIT_RESOURCE,
    EXIT_SOLVER,
    main,
)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_hall_output(capsys):
    code, out, _ = run(capsys, "hall", "--d", "2", "--m", "4")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "index,bracket,l1_norm,hs_norm"
    norms = sorted(line.split(",")[-2] for line in lines[1:4])
    assert norms == ["6", "8", "8"]
    assert lines[-1].startswith("# puresig ")


def test_tail_csv_schema(capsys):
    code, out, _ = run(capsys, "tail", "--lie", "e1 + [e1,e2]", "--m", "2", "--N", "8")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,norm,t_n,window_sup"
    assert len(lines) == 10  # header + 8 rows + meta comment
    assert lines[-1].startswith("# puresig 0.1.0 config_hash=")


def test_determinism_byte_identical(capsys):
    args = ("solve", "--m", "3", "--targets", "4,4", "--seed", "5", "--format", "json")
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2


def test_seed_changes_solution(capsys):
    _, out1, _ = run(capsys, "solve", "--m", "3", "--targets", "4,4", "--seed", "1")
    _, out2, _ = run(capsys, "solve", "--m", "3", "--targets", "4,4", "--seed", "2")
    assert json.loads(out1)["solve"]["solution"] != json.loads(out2)["solve"]["solution"]


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "exp.toml"
    cfg.write_text('lie = "e1 + [e1,e2]"\nm = 2\nN = 6\nnorm = "l1"\n')
    code, out, _ = run(capsys, "tail", "--config", str(cfg))
    assert code == 0
    assert len(out.strip().splitlines()) == 8
    code, out, _ = run(capsys, "tail", "--config", str(cfg), "--N", "4")
    assert code == 0
    assert len(out.strip().splitlines()) == 6


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.csv"
    code, out, _ = run(
        capsys, "tail", "--lie", "e1", "--m", "1", "--N", "4", "--out", str(target)
    )
    assert code == 0 and out == ""
    assert target.read_text().startswith("n,norm,t_n,window_sup")


def test_develop_preset_factor(capsys):
    code, out, _ = run(
        capsys, "develop", "--preset", "deg4_so5", "--signs", "+++", "--format", "json"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["factor"] == pytest.approx(5 / 32, rel=1e-9)
    assert doc["expected_factor"] == pytest.approx(5 / 32)
    assert doc["operator_norm"] == pytest.approx(1.5905414575341015, rel=1e-9)


def test_develop_deg2_report(capsys):
    code, out, _ = run(capsys, "develop", "--preset", "deg2", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["eigen_lower_bound"] == pytest.approx(2.0)
    assert doc["factor"] == pytest.approx(1.0)


def test_upper_table(capsys):
    code, out, _ = run(
        capsys, "upper", "--lie", "e1 + [e1,e2]", "--m", "2", "--N", "6"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,actual,bound,ratio"
    for line in lines[1:7]:
        _, actual, bound, _ = line.split(",")
        assert float(actual) <= float(bound) * (1 + 1e-12)


def test_localvar(capsys):
    code, out, _ = run(capsys, "localvar", "--lie", "[e1,e2]", "--m", "2", "--levels", "3")
    assert code == 0
    values = [float(l.split(",")[1]) for l in out.strip().splitlines()[1:5]]
    assert all(v == pytest.approx(2.0) for v in values)


def test_hs_check(capsys):
    code, out, _ = run(capsys, "hs-check", "--a", "e1", "--b", "[e1,e2]", "--K", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[1] == "1,0,True,1.4142135623730951"


def test_separate(capsys):
    code, out, _ = run(
        capsys, "separate", "--lie", "e1", "--lie2", "e1 + [e1,e2]", "--format", "json"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["separate"]["epsilon"] == 1.0


def test_exit_code_bad_config(capsys):
    code, _, err = run(capsys, "tail", "--m", "2", "--N", "4")  # no lie element
    assert code == EXIT_BAD_CONFIG
    assert "invalid configuration" in err


def test_exit_code_resource_guard(capsys):
    code, _, err = run(
        capsys,
        "tail",
        "--lie",
        "e1 + e2 + [e1,e2]",
        "--m",
        "2",
        "--N",
        "16",
        "--budget",
        "100",
    )
    assert code == EXIT_RESOURCE
    assert "resource guard" in err


def test_exit_code_solver(capsys):
    code, _, err = run(
        capsys,
        "solve",
        "--m",
        "2",
        "--targets",
        "2",
        "--restarts",
        "1",
        "--tol",
        "1e-30",
    )
    assert code == EXIT_SOLVER
    assert "solver failed" in err


def test_solve_wrong_target_count(capsys):
    code, _, err = run(capsys, "solve", "--m", "3", "--targets", "4")
    assert code == EXIT_BAD_CONFIG


def test_develop_custom_matrices(tmp_path, capsys):
    from puresig.develop import preset_development

    dev_file = tmp_path / "dev.json"
    dev_file.write_text(preset_development("deg2").dev.to_json())
    code, out, _ = run(
        capsys,
        "develop",
        "--dev-json",
        str(dev_file),
        "--m",
        "2",
        "--lie",
        "e1 + [e1,e2]",
        "--format",
        "json",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["eigen_lower_bound"] == pytest.approx(2.0)


def test_develop_custom_requires_lie(tmp_path, capsys):
    from puresig.develop import preset_development

    dev_file = tmp_path / "dev.json"
    dev_file.write_text(preset_development("deg2").dev.to_json())
    code, _, err = run(capsys, "develop", "--dev-json", str(dev_file), "--m", "2")
    assert code == EXIT_BAD_CONFIG


def test_develop_csv_header_first(capsys):
    code, out, _ = run(capsys, "develop", "--preset", "deg2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "lambda,value,agreement,trunc"
    assert lines[-2].startswith("# operator_norm=")
    assert lines[-1].startswith("# puresig ")


def test_tail_example_even_degrees_at_least_two(capsys):
    code, out, _ = run(
        capsys, "tail", "--lie", "e1 + [e1,e2]", "--m", "2", "--N", "14", "--norm", "l1"
    )
    assert code == 0
    for line in out.strip().splitlines()[1:-1]:
        n, _, t, _ = line.split(",")
        if int(n) % 2 == 0:
            assert float(t) >= 2.0
