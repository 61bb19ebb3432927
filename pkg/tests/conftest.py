import math
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from app.schemas.detection_schemas import LinkParams
from app.schemas.photon_schemas import EmpiricalSource, PoissonianSource, ThermalSource

# 300 dark counts per second in 130 ps bins
Q_TYPICAL = 3.9e-8


@pytest.fixture
def poisson_source():
    return PoissonianSource(mean_pairs=1.0)


@pytest.fixture
def thermal_source():
    return ThermalSource(mean_pairs=1.0)


@pytest.fixture
def empirical_source():
    return EmpiricalSource(probs=(0.5, 0.3, 0.15, 0.05))


@pytest.fixture
def typical_link():
    return LinkParams(eta=0.8, q=Q_TYPICAL)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_scenario(tmp_path):
    """Write ``key = value`` lines to a scenario file and return its path."""

    def _write(filename: str = "scenario.cfg", **values) -> Path:
        path = tmp_path / filename
        lines = [f"{key} = {value}" for key, value in values.items()]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture
def fibre_array_scenario(write_scenario):
    return write_scenario(
        "fibre_array.cfg",
        name="fibre-array",
        source="poissonian",
        mean_pairs=1e-4,
        detector_efficiency=0.5,
        transmission_efficiency=0.8,
        dark_rate=300,
        bin_width=1e-9,
        outcome_count=8,
    )


@pytest.fixture
def ideal_scenario(write_scenario):
    return write_scenario(
        "ideal.cfg",
        name="ideal",
        source="poissonian",
        mean_pairs=math.log(2.0),
        detector_efficiency=1.0,
        outcome_count=4,
    )
