import math

import pytest

from app.main import cli


def _csv_row(output: str) -> dict[str, str]:
    lines = [line for line in output.splitlines() if line]
    header, values = lines[-2].split(","), lines[-1].split(",")
    return dict(zip(header, values))


def test_eval_fibre_array_csv(runner, fibre_array_scenario):
    result = runner.invoke(cli, ["--config", str(fibre_array_scenario), "--csv", "eval"])

    assert result.exit_code == 0, result.output
    row = _csv_row(result.stdout)
    assert row["q"] == "3e-07"
    assert float(row["eta"]) == pytest.approx(0.4)
    assert row["M"] == "8"
    assert float(row["key_bits"]) == pytest.approx(8 * float(row["H_bits"]), rel=1e-14)


def test_eval_human_readable(runner, ideal_scenario):
    result = runner.invoke(cli, ["--config", str(ideal_scenario), "eval"])

    assert result.exit_code == 0, result.output
    assert "H(A:B) [bits/slot]" in result.stdout
    assert float(_csv_row(result.stdout)["H_bits"]) == pytest.approx(1.0, abs=1e-12)


def test_eval_rejects_invalid_config(runner, write_scenario):
    path = write_scenario(source="poissonian", mean_pairs=0.1, detector_efficiency=1.2)

    result = runner.invoke(cli, ["--config", str(path), "eval"])

    assert result.exit_code == 2
    assert "detector_efficiency" in result.output


def test_eval_requires_config(runner):
    result = runner.invoke(cli, ["eval"])
    assert result.exit_code == 2


def test_optimize_ideal_link(runner, ideal_scenario):
    result = runner.invoke(cli, ["--config", str(ideal_scenario), "--csv", "optimize"])

    assert result.exit_code == 0, result.output
    row = _csv_row(result.stdout)
    assert row["objective"] == "H"
    assert float(row["lambda_star"]) == pytest.approx(math.log(2.0), abs=1e-5)


def test_optimize_objective_flag_is_case_insensitive(runner, fibre_array_scenario):
    result = runner.invoke(
        cli, ["--config", str(fibre_array_scenario), "--csv", "optimize", "--objective", "ig"]
    )
    assert result.exit_code == 0, result.output
    assert _csv_row(result.stdout)["objective"] == "Ig"


def test_optimize_empirical_source_fails(runner, tmp_path, write_scenario):
    (tmp_path / "probs.txt").write_text("0.9\n0.1\n")
    path = write_scenario(
        source="empirical", probability_file="probs.txt", detector_efficiency=0.7
    )

    result = runner.invoke(cli, ["--config", str(path), "optimize"])

    assert result.exit_code == 1
    assert "brightness" in result.output


def test_figure_writes_csv(runner, tmp_path):
    output = tmp_path / "fig1.csv"

    result = runner.invoke(cli, ["--output", str(output), "figure", "fig1", "--points", "10"])

    assert result.exit_code == 0, result.output
    raw = output.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == "lambda,H_eta0.8,H_eta0.7,H_eta0.6"
    assert len(lines) == 11


def test_figure_to_stdout(runner):
    result = runner.invoke(
        cli,
        ["--output", "-", "figure", "fig2b", "--log10-low", "-7", "--log10-high", "-6",
         "--points", "3"],
    )
    assert result.exit_code == 0, result.output
    assert result.stdout.splitlines()[0] == "lambda,Ig_eta0.8,Ig_eta0.6"
    assert result.stdout.splitlines()[1].startswith("1e-07,")


def test_figure_is_deterministic(runner, tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    runner.invoke(cli, ["--output", str(first), "figure", "fig3b", "--points", "25"])
    runner.invoke(cli, ["--output", str(second), "figure", "fig3b", "--points", "25"])
    assert first.read_bytes() == second.read_bytes()


def test_figure_unknown_name(runner):
    result = runner.invoke(cli, ["figure", "fig9"])
    assert result.exit_code == 2


def test_figure_unwritable_output(runner, tmp_path):
    result = runner.invoke(
        cli, ["--output", str(tmp_path / "missing" / "fig1.csv"), "figure", "fig1", "--points", "3"]
    )
    assert result.exit_code == 1


VERIFY_QUICK = ["--trials", "20000", "--lambdas", "0.1,1", "--etas", "0.4,0.8", "--qs", "0,1e-3"]


def test_verify_passes(runner):
    result = runner.invoke(cli, ["--seed", "11", "verify", *VERIFY_QUICK])

    assert result.exit_code == 0, result.output
    assert "FAIL" not in result.stdout
    assert "PASS closed_form_equivalence" in result.stdout


def test_verify_zero_tolerance_fails(runner):
    result = runner.invoke(cli, ["verify", *VERIFY_QUICK, "--tolerance-scale", "0"])

    assert result.exit_code == 3
    assert "FAIL" in result.stdout


def test_verify_is_deterministic(runner, tmp_path):
    report = tmp_path / "report.txt"
    first = runner.invoke(cli, ["--seed", "5", "verify", *VERIFY_QUICK])
    second = runner.invoke(cli, ["--seed", "5", "--output", str(report), "verify", *VERIFY_QUICK])

    assert first.stdout == second.stdout
    assert report.read_text() == first.stdout


def test_seed_out_of_range(runner):
    result = runner.invoke(cli, ["--seed", str(2**64), "verify"])
    assert result.exit_code == 2
