import math

import pytest

from app.schemas.optimize_schemas import ObjectiveKind, SourceKind
from app.services.information_service import mutual_information_poisson
from app.services.scenario_service import (
    evaluate_scenario,
    load_scenario,
    optimize_scenario,
    parse_scenario,
    scenario_link,
)
from app.utils.errors import ConfigError, DomainError


def test_parse_scenario_with_comments_and_case():
    config = parse_scenario(
        "# lab link\n"
        "name = bench\n"
        "source = Poissonian\n"
        "mean_pairs = 0.01   # per slot\n"
        "\n"
        "detector_efficiency = 0.8\n"
        "objective = ig\n"
    )

    assert config.name == "bench"
    assert config.source is SourceKind.POISSONIAN
    assert config.mean_pairs == 0.01
    assert config.objective is ObjectiveKind.PER_GENERATED
    assert config.outcome_count == 1


def test_parse_scenario_rejects_out_of_range_efficiency():
    with pytest.raises(ConfigError) as exc:
        parse_scenario("source = poissonian\nmean_pairs = 0.1\ndetector_efficiency = 1.2\n")

    assert exc.value.field == "detector_efficiency"
    assert exc.value.line == 3
    assert "detector_efficiency" in str(exc.value)


def test_parse_scenario_rejects_unknown_key():
    with pytest.raises(ConfigError) as exc:
        parse_scenario("source = poissonian\ncolour = blue\n")

    assert exc.value.field == "colour"
    assert exc.value.line == 2


def test_parse_scenario_rejects_repeated_key():
    with pytest.raises(ConfigError) as exc:
        parse_scenario("source = poissonian\nsource = thermal\n")
    assert exc.value.line == 2


def test_parse_scenario_rejects_malformed_line():
    with pytest.raises(ConfigError) as exc:
        parse_scenario("source poissonian\n")
    assert exc.value.line == 1


def test_parse_scenario_requires_brightness():
    with pytest.raises(ConfigError):
        parse_scenario("source = thermal\ndetector_efficiency = 0.5\n")


def test_parse_scenario_rejects_saturated_dark_counts():
    with pytest.raises(ConfigError):
        parse_scenario(
            "source = poissonian\nmean_pairs = 0.1\ndetector_efficiency = 0.5\n"
            "dark_rate = 2e9\nbin_width = 1e-9\n"
        )


def test_load_scenario_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "absent.cfg")


def test_fibre_array_link(fibre_array_scenario):
    config = load_scenario(fibre_array_scenario)
    link = scenario_link(config, config.mean_pairs)

    assert config.name == "fibre-array"
    assert link.eta == pytest.approx(0.4)
    assert link.q == 3e-7


def test_evaluate_fibre_array(fibre_array_scenario):
    evaluation = evaluate_scenario(load_scenario(fibre_array_scenario))
    report = evaluation.report

    assert report.mutual_info_bits == pytest.approx(
        mutual_information_poisson(1e-4, 0.4, 3e-7), rel=1e-12
    )
    assert evaluation.outcome_count == 8
    assert evaluation.key_bits == 8 * report.mutual_info_bits


def test_evaluate_ideal_link(ideal_scenario):
    evaluation = evaluate_scenario(load_scenario(ideal_scenario))

    assert evaluation.report.mutual_info_bits == pytest.approx(1.0, abs=1e-12)
    assert evaluation.key_bits == pytest.approx(4.0, abs=1e-11)


def test_fibre_loss_is_applied(write_scenario):
    path = write_scenario(
        source="poissonian",
        mean_pairs=0.01,
        detector_efficiency=0.5,
        fibre_length_km=10,
        fibre_loss_db_per_km=0.2,
    )
    link = scenario_link(load_scenario(path), 0.01)
    assert link.eta == pytest.approx(0.5 * 10.0**-0.2)


def test_crosstalk_is_folded_in(write_scenario):
    path = write_scenario(
        source="poissonian",
        mean_pairs=0.01,
        detector_efficiency=0.8,
        dark_rate=1000,
        bin_width=1e-9,
        crosstalk_fraction=0.1,
    )
    link = scenario_link(load_scenario(path), 0.01)
    assert link.eta == pytest.approx(0.72)
    assert link.q == pytest.approx(1e-6 + 8e-4)


def test_empirical_scenario(tmp_path, write_scenario):
    (tmp_path / "probs.txt").write_text("0.9\n0.08\n0.02\n")
    path = write_scenario(
        source="empirical", probability_file="probs.txt", detector_efficiency=0.7
    )

    evaluation = evaluate_scenario(load_scenario(path))

    assert evaluation.report.mean_pairs == pytest.approx(0.12)
    assert 0.0 < evaluation.report.mutual_info_bits < 1.0


def test_optimize_scenario(ideal_scenario):
    result = optimize_scenario(load_scenario(ideal_scenario))
    assert result.lambda_star == pytest.approx(math.log(2.0), abs=1e-5)


def test_optimize_empirical_scenario_is_rejected(tmp_path, write_scenario):
    (tmp_path / "probs.txt").write_text("0.9\n0.1\n")
    path = write_scenario(
        source="empirical", probability_file="probs.txt", detector_efficiency=0.7
    )
    with pytest.raises(DomainError):
        optimize_scenario(load_scenario(path))
