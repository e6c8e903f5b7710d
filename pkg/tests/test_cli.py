import csv
import json
import math

import pytest

from cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED, main
from utils import const


def _read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_curve_single_point(tmp_path):
    code = main(["curve", "--count", "1", "--start", "0", "--out", str(tmp_path), "--quiet"])
    assert code == EXIT_OK
    rows = _read_csv(tmp_path / "curve_rho_0.csv")
    assert tuple(rows[0]) == const.CURVE_HEADER
    row = dict(zip(rows[0], rows[1]))
    assert float(row["P"]) == pytest.approx(1.0, abs=1e-10)
    assert float(row["Gamma"]) == 0.0
    assert row["flag"] == ""


def test_curve_line_endings_and_precision(tmp_path):
    main(["curve", "--rho", "1", "--count", "3", "--stop", "4", "--out", str(tmp_path), "--quiet"])
    raw = (tmp_path / "curve_rho_1.csv").read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode().splitlines()
    assert len(lines) == 4
    # 17 significant digits survive a round trip
    value = lines[2].split(",")[1]
    assert format(float(value), ".17g") == value


def test_curve_is_reproducible(tmp_path):
    args = ["curve", "--alpha", "1", "--rho", "0", "2", "--count", "5", "--stop", "30", "--quiet"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("curve_rho_0.csv", "curve_rho_2.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_curve_mass_scale(tmp_path):
    base = ["curve", "--rho", "1", "--count", "2", "--start", "1", "--stop", "2", "--quiet"]
    main(base + ["--out", str(tmp_path / "plain")])
    main(base + ["--out", str(tmp_path / "scaled"), "--mass-scale", "4"])
    plain = _read_csv(tmp_path / "plain" / "curve_rho_1.csv")[1]
    scaled = _read_csv(tmp_path / "scaled" / "curve_rho_1.csv")[1]
    assert float(scaled[0]) == pytest.approx(float(plain[0]) / 4)
    assert float(scaled[5]) == pytest.approx(float(plain[5]) * 4)
    assert float(scaled[4]) == float(plain[4])


def test_curve_json_format(tmp_path):
    code = main(["curve", "--count", "1", "--format", "json", "--out", str(tmp_path), "--quiet"])
    assert code == EXIT_OK
    payload = json.loads((tmp_path / "curve_rho_0.json").read_text())
    assert payload["rows"][0]["tau"] == 0.0


def test_invalid_alpha_names_field(tmp_path, capsys):
    code = main(["curve", "--alpha", "-1", "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "alpha" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"rho": [3.0], "grid": {"count": 1}, "out": str(tmp_path / "cfg")}))
    assert main(["curve", "--config", str(config), "--quiet"]) == EXIT_OK
    assert (tmp_path / "cfg" / "curve_rho_3.csv").exists()
    assert main(["curve", "--config", str(config), "--rho", "1", "--quiet"]) == EXIT_OK
    assert (tmp_path / "cfg" / "curve_rho_1.csv").exists()


def test_missing_config_file(tmp_path):
    assert main(["curve", "--config", str(tmp_path / "absent.json")]) == EXIT_USAGE


def test_convergence_failure_exit_code(tmp_path):
    code = main(["curve", "--count", "2", "--stop", "100", "--max-panels", "5",
                 "--out", str(tmp_path), "--quiet"])
    assert code == EXIT_NUMERICAL
    rows = _read_csv(tmp_path / "curve_rho_0.csv")
    assert [r[-1] for r in rows[1:]] == ["not-converged", "not-converged"]


@pytest.mark.parametrize("n", ["0", "16"])
def test_figure_out_of_range(n):
    assert main(["figure", n]) == EXIT_USAGE


def test_unknown_command():
    assert main(["plot"]) == EXIT_USAGE


def test_asymptotics_report(tmp_path):
    code = main(["asymptotics", "--rho", "0", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "asymptotics.json").read_text())
    moving = report["momenta"]["1"]["long_time"]
    assert moving["chi_p"] == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert moving["c0"] == pytest.approx(2.0, rel=1e-14)
    assert report["momenta"]["0"]["long_time"]["kappa_p"] == 0.0


def test_asymptotics_short_time_breit_wigner(tmp_path):
    code = main(["asymptotics", "--family", "breit-wigner", "--xi0", "0.5", "--short-time",
                 "--out", str(tmp_path)])
    assert code == EXIT_NUMERICAL


def test_asymptotics_breit_wigner_long_time_only(tmp_path):
    code = main(["asymptotics", "--family", "breit-wigner", "--xi0", "0.5", "--out", str(tmp_path)])
    assert code == EXIT_OK


def test_verify_single_check(tmp_path):
    code = main(["verify", "--check", "chi_identity", "--out", str(tmp_path), "--quiet"])
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "verify_summary.json").read_text())
    assert summary["passed"] is True
    assert list(summary["checks"]) == ["chi_identity"]
    assert "wall_time_sec" in summary["runtime"]


def test_verify_corrupted_table(tmp_path, toy_table, capsys):
    table = toy_table(1.01)
    code = main(["verify", "--family", "tabulated", "--table", str(table), "--check", "normalization",
                 "--out", str(tmp_path)])
    assert code == EXIT_VERIFY_FAILED
    summary = json.loads((tmp_path / "verify_summary.json").read_text())
    assert summary["failed_checks"] == ["normalization"]
    assert "normalization" in capsys.readouterr().err


def test_tabulated_without_table_is_usage_error(tmp_path):
    assert main(["curve", "--family", "tabulated", "--out", str(tmp_path)]) == EXIT_USAGE


@pytest.mark.slow
def test_figure_reproducible(tmp_path):
    assert main(["figure", "1", "--out", str(tmp_path / "a"), "--quiet"]) == EXIT_OK
    assert main(["figure", "1", "--out", str(tmp_path / "b"), "--quiet"]) == EXIT_OK
    for label in "abcde":
        name = f"figure_01_{label}.csv"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.slow
def test_verify_tight_slope_tolerance_fails(tmp_path):
    code = main(["verify", "--check", "survival_exponent", "--slope-tol", "0.001",
                 "--out", str(tmp_path), "--quiet"])
    assert code == EXIT_VERIFY_FAILED


@pytest.mark.slow
def test_verify_default_suite(tmp_path):
    code = main(["verify", "--out", str(tmp_path), "--quiet"])
    summary = json.loads((tmp_path / "verify_summary.json").read_text())
    assert code == EXIT_OK, summary["failed_checks"]


@pytest.mark.parametrize("argv", [
    ["asymptotics", "--rho", "0", "1"],
    ["asymptotics", "--alpha", "1"],
    ["verify", "--check", "chi_identity", "--quiet"],
])
def test_runs_without_config_file(tmp_path, monkeypatch, argv):
    monkeypatch.delenv("DECAYLAB_OUT", raising=False)
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_OK


def test_tabulated_zero_endpoint_value_is_usage_error(tmp_path, toy_table, capsys):
    table = toy_table()
    meta_path = table.with_suffix(".json")
    meta = json.loads(meta_path.read_text())
    meta["omega0_at_xi0"] = 0.0
    meta_path.write_text(json.dumps(meta))
    code = main(["asymptotics", "--family", "tabulated", "--table", str(table), "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "omega0_at_xi0" in capsys.readouterr().err


def test_global_flags_before_subcommand(tmp_path):
    code = main(["--out", str(tmp_path / "global"), "--quiet", "curve", "--count", "1"])
    assert code == EXIT_OK
    assert (tmp_path / "global" / "curve_rho_0.csv").exists()


def test_subcommand_flag_overrides_global(tmp_path):
    code = main(["--out", str(tmp_path / "global"), "--format", "csv",
                 "curve", "--count", "1", "--out", str(tmp_path / "local"), "--format", "json"])
    assert code == EXIT_OK
    assert (tmp_path / "local" / "curve_rho_0.json").exists()
    assert not (tmp_path / "global").exists()
