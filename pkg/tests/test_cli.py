import json

import numpy as np
import pytest

from pairsha import (
    diagonal_elements,
    enumerate_basis,
    parse_model_config,
    single_level_spectrum,
)
from pairsha.cli import main

SMALL = {
    "levels": [{"j": 2, "epsilon": 0.0}, {"j": 1.5, "epsilon": 1.0}],
    "N": 3,
    "G": {"rule": "paper", "g": 0.3},
}


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps(SMALL))
    return path


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


def test_exact_command(small_config, tmp_path):
    out = tmp_path / "exact.csv"
    assert main(["--config", str(small_config), "--command", "exact", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["index", "energy", "excitation"]
    assert float(rows[0][2]) == 0.0
    energies = [float(r[1]) for r in rows]
    assert energies == sorted(energies)


def test_exact_csv_is_byte_identical(small_config, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["--config", str(small_config), "--command", "exact", "--out", str(out1)])
    main(["--config", str(small_config), "--command", "exact", "--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()


def test_exact_single_level_matches_closed_form(tmp_path):
    cfg = {"levels": [{"j": 2.5, "epsilon": 0.8}], "N": 3, "G": [[0.35]]}
    path = tmp_path / "one.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "one.csv"
    assert main(["--config", str(path), "--command", "exact", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 1
    expected = single_level_spectrum(2.5, 0.8, 0.35)[3]
    assert float(rows[0][1]) == pytest.approx(expected, rel=1e-12)


def test_exact_zero_coupling_matches_diagonal(tmp_path):
    cfg = {
        "levels": [{"j": 1.5, "epsilon": 0.4}, {"j": 1, "epsilon": 1.7}],
        "N": 2,
        "G": [[0.0, 0.0], [0.0, 0.0]],
    }
    path = tmp_path / "zero.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "zero.csv"
    assert main(["--config", str(path), "--command", "exact", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    model = parse_model_config(cfg)
    diag = np.sort(diagonal_elements(model, enumerate_basis(model)))
    for row, expected in zip(rows, diag):
        assert float(row[1]) == pytest.approx(expected, rel=1e-12)


def test_g_override_matches_explicit_matrix(small_config, tmp_path):
    explicit = {
        "levels": SMALL["levels"],
        "N": SMALL["N"],
        "G": [[0.0, 0.0], [0.0, 0.0]],
    }
    path = tmp_path / "explicit.json"
    path.write_text(json.dumps(explicit))
    out1, out2 = tmp_path / "o1.csv", tmp_path / "o2.csv"
    assert main(["--config", str(small_config), "--command", "exact", "--g", "0", "--out", str(out1)]) == 0
    assert main(["--config", str(path), "--command", "exact", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_sha_command_writes_csv_json_and_diagnostics(small_config, tmp_path):
    out = tmp_path / "report.csv"
    assert main(
        ["--config", str(small_config), "--command", "sha", "--quanta-max", "3", "--out", str(out)]
    ) == 0
    header, rows = read_csv(out)
    assert header == ["quanta", "energy", "excitation"]
    assert rows[0][0] == "0"
    assert len(rows) == 4
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["method"] == "newton"
    assert len(report["omega"]) == 1
    assert (tmp_path / "report.diag.txt").exists()
    # excitation column reproduces the harmonic ladder
    excitations = [float(r[2]) for r in rows]
    omega = report["omega"][0]
    assert np.allclose(excitations, [0, omega, 2 * omega, 3 * omega], rtol=1e-12)


def test_subspace_command(small_config, tmp_path, capsys):
    out = tmp_path / "sub.csv"
    assert main(
        [
            "--config", str(small_config),
            "--command", "subspace",
            "--subspace", "su2-states:3",
            "--rank", "diagonal-energy",
            "--out", str(out),
        ]
    ) == 0
    _, rows = read_csv(out)
    assert len(rows) == 3
    assert "subspace size used: 3" in capsys.readouterr().err


def test_compare_full_space_equals_exact(small_config, tmp_path):
    model = parse_model_config(SMALL)
    dim = enumerate_basis(model).dimension
    out = tmp_path / "cmp.csv"
    assert main(
        [
            "--config", str(small_config),
            "--command", "compare",
            "--subspace", f"su2-states:{dim}",
            "--count", "4",
            "--out", str(out),
        ]
    ) == 0
    header, rows = read_csv(out)
    assert header == [
        "index", "exact_excitation", "subspace_excitation",
        "sha_excitation", "sha_quanta", "overlap",
    ]
    for row in rows:
        assert float(row[1]) == pytest.approx(float(row[2]), abs=1e-9)
        assert abs(float(row[5])) == pytest.approx(1.0, abs=1e-8)


def test_sweep_command(small_config, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(
        ["--config", str(small_config), "--command", "sweep", "--sweep", "0.2:0.4:3", "--out", str(out)]
    ) == 0
    header, rows = read_csv(out)
    assert header[:3] == ["g", "sha_1", "sha_2"]
    assert header[3:] == ["exact_1", "exact_2", "exact_3"]
    assert [float(r[0]) for r in rows] == [0.2, 0.3, 0.4]
    for row in rows:
        assert float(row[2]) == pytest.approx(2.0 * float(row[1]), rel=1e-12)


def test_sweep_marks_failed_points_with_nan(tmp_path):
    cfg = {
        "levels": [{"j": 2, "epsilon": 0.0}, {"j": 1.5, "epsilon": 1.0}],
        "N": 3,
        "G": {"rule": "paper", "g": 0.3},
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "sweep.csv"
    assert main(
        ["--config", str(path), "--command", "sweep", "--sweep", "0:0.3:2", "--out", str(out)]
    ) == 0
    _, rows = read_csv(out)
    assert rows[0][1] == "nan"  # g = 0 has no interior stationary point
    assert rows[1][1] != "nan"


def test_config_error_exit_codes(tmp_path, capsys):
    missing = tmp_path / "missing.json"
    assert main(["--config", str(missing), "--command", "exact"]) == 2

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad), "--command", "exact"]) == 2

    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({**SMALL, "bogus": 1}))
    assert main(["--config", str(unknown), "--command", "exact"]) == 2

    explicit = tmp_path / "explicit.json"
    explicit.write_text(json.dumps({"levels": SMALL["levels"], "N": 3, "G": [[0.1, 0.0], [0.0, 0.1]]}))
    assert main(["--config", str(explicit), "--command", "exact", "--g", "0.2"]) == 2

    good = tmp_path / "good.json"
    good.write_text(json.dumps(SMALL))
    assert main(["--config", str(good), "--command", "subspace"]) == 2
    assert main(["--config", str(good), "--command", "sweep", "--sweep", "0.4:0.2:3"]) == 2
    assert main(["--config", str(good), "--command", "sweep", "--sweep", "nonsense"]) == 2
    assert main(["--config", str(good), "--command", "exact", "--count", "0"]) == 2
    capsys.readouterr()


def test_numerical_failure_exit_code(tmp_path, capsys):
    cfg = {
        "levels": [{"j": 2, "epsilon": 0.0}, {"j": 2, "epsilon": 1.0}],
        "N": 2,
        "G": [[0.0, 0.0], [0.0, 0.0]],
    }
    path = tmp_path / "flat.json"
    path.write_text(json.dumps(cfg))
    assert main(["--config", str(path), "--command", "sha"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_unknown_command_rejected(small_config):
    with pytest.raises(SystemExit) as excinfo:
        main(["--config", str(small_config), "--command", "bogus"])
    assert excinfo.value.code == 2
