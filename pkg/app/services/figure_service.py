from enum import Enum
from typing import Callable, Optional

import numpy as np
import pandas as pd

from app.config.config import settings
from app.config.logging import logger
from app.schemas.optimize_schemas import ObjectiveKind, SourceKind
from app.services.detection_service import dark_count_probability
from app.services.optimize_service import (
    sweep_dark_count_optimum,
    sweep_efficiency_optimum,
    sweep_lambda,
)

# 300 dark counts per second in 130 ps bins
Q_FIG1 = 3.9e-8
Q_BRIGHT = 3.9e-6
FIBRE_ARRAY_INPUTS = 8
FIBRE_ARRAY_ETA = 0.4


class FigureName(str, Enum):
    FIG1 = "fig1"
    FIG2A = "fig2a"
    FIG2B = "fig2b"
    FIG3A = "fig3a"
    FIG3B = "fig3b"
    FIG5 = "fig5"
    FIBRE_ARRAY = "fibre-array"
    DARK_SENSITIVITY = "dark-sensitivity"


# default log10(lambda) ranges, each a decade or more around the maxima
DEFAULT_RANGES: dict[FigureName, tuple[float, float]] = {
    FigureName.FIG1: (-3.0, 1.0),
    FigureName.FIG2A: (-9.0, -1.0),
    FigureName.FIG2B: (-9.0, -1.0),
    FigureName.FIG3A: (-9.0, -1.0),
    FigureName.FIG3B: (-9.0, -1.0),
    FigureName.FIBRE_ARRAY: (-9.0, 0.0),
}


def _lambda_curves(
    objective: ObjectiveKind,
    q: float,
    etas: tuple[float, ...],
    log10_range: tuple[float, float],
    points: int,
    jobs: Optional[int],
) -> pd.DataFrame:
    columns: dict[str, list[float]] = {}
    for eta in etas:
        curve = sweep_lambda(
            SourceKind.POISSONIAN, eta, q, objective, log10_range, points, jobs
        )
        columns.setdefault("lambda", curve.parameters)
        columns[f"{objective.value}_eta{eta:g}"] = curve.values
    return pd.DataFrame(columns)


def _efficiency_table(jobs: Optional[int]) -> pd.DataFrame:
    etas = np.round(np.arange(5, 101) / 100.0, 2).tolist()
    per_generated = sweep_efficiency_optimum(
        Q_FIG1, etas, ObjectiveKind.PER_GENERATED, jobs=jobs
    )
    per_detected = sweep_efficiency_optimum(
        Q_FIG1, etas, ObjectiveKind.PER_DETECTED, jobs=jobs
    )
    return pd.DataFrame(
        {
            "eta": per_generated.parameters,
            "Ig_max": per_generated.values,
            "Id_max": per_detected.values,
        }
    )


def _dark_sensitivity_table(jobs: Optional[int]) -> pd.DataFrame:
    qs = np.logspace(-10.0, -3.0, 15).tolist()
    per_generated = sweep_dark_count_optimum(
        0.8, qs, ObjectiveKind.PER_GENERATED, jobs=jobs
    )
    per_detected = sweep_dark_count_optimum(
        0.8, qs, ObjectiveKind.PER_DETECTED, jobs=jobs
    )
    return pd.DataFrame(
        {
            "q": per_generated.parameters,
            "Ig_max": per_generated.values,
            "Id_max": per_detected.values,
        }
    )


def _fibre_array_table(
    log10_range: tuple[float, float], points: int, jobs: Optional[int]
) -> pd.DataFrame:
    # 1 ns bins between the delayed inputs, 300 dark counts per second
    q = dark_count_probability(300.0, 1e-9)
    per_generated = sweep_lambda(
        SourceKind.POISSONIAN,
        FIBRE_ARRAY_ETA,
        q,
        ObjectiveKind.PER_GENERATED,
        log10_range,
        points,
        jobs,
    )
    per_slot = sweep_lambda(
        SourceKind.POISSONIAN,
        FIBRE_ARRAY_ETA,
        q,
        ObjectiveKind.MUTUAL_INFO,
        log10_range,
        points,
        jobs,
    )
    return pd.DataFrame(
        {
            "lambda": per_generated.parameters,
            "Ig": per_generated.values,
            "H": per_slot.values,
            f"total_bits_M{FIBRE_ARRAY_INPUTS}": [
                FIBRE_ARRAY_INPUTS * h for h in per_slot.values
            ],
        }
    )


def build_figure(
    name: FigureName,
    log10_range: Optional[tuple[float, float]] = None,
    points: Optional[int] = None,
    jobs: Optional[int] = None,
) -> pd.DataFrame:
    """Data table behind one figure; lambda sweeps honour range/points overrides."""
    log10_range = log10_range or DEFAULT_RANGES.get(name)
    points = points or settings.SWEEP_POINTS

    builders: dict[FigureName, Callable[[], pd.DataFrame]] = {
        FigureName.FIG1: lambda: _lambda_curves(
            ObjectiveKind.MUTUAL_INFO, Q_FIG1, (0.8, 0.7, 0.6), log10_range, points, jobs
        ),
        FigureName.FIG2A: lambda: _lambda_curves(
            ObjectiveKind.PER_GENERATED, Q_BRIGHT, (0.85, 0.6), log10_range, points, jobs
        ),
        FigureName.FIG2B: lambda: _lambda_curves(
            ObjectiveKind.PER_GENERATED, Q_FIG1, (0.8, 0.6), log10_range, points, jobs
        ),
        FigureName.FIG3A: lambda: _lambda_curves(
            ObjectiveKind.PER_DETECTED, Q_BRIGHT, (0.8, 0.4), log10_range, points, jobs
        ),
        FigureName.FIG3B: lambda: _lambda_curves(
            ObjectiveKind.PER_DETECTED, Q_FIG1, (0.8, 0.4), log10_range, points, jobs
        ),
        FigureName.FIG5: lambda: _efficiency_table(jobs),
        FigureName.FIBRE_ARRAY: lambda: _fibre_array_table(log10_range, points, jobs),
        FigureName.DARK_SENSITIVITY: lambda: _dark_sensitivity_table(jobs),
    }
    table = builders[name]()
    logger.info("figure_built", figure=name.value, rows=len(table))
    return table
