from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.information_schemas import InfoReport
from app.schemas.optimize_schemas import ObjectiveKind, SourceKind


class ScenarioConfig(BaseModel):
    """
    Named experiment read from a flat ``key = value`` scenario file.

    Efficiencies are dimensionless, ``dark_rate`` is in counts per second and
    ``bin_width`` in seconds.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "scenario"
    source: SourceKind
    mean_pairs: Optional[float] = Field(None, ge=0.0, allow_inf_nan=False)
    probability_file: Optional[Path] = None
    detector_efficiency: float = Field(..., ge=0.0, le=1.0)
    transmission_efficiency: float = Field(1.0, ge=0.0, le=1.0)
    fibre_length_km: float = Field(0.0, ge=0.0, allow_inf_nan=False)
    fibre_loss_db_per_km: float = Field(0.0, ge=0.0, allow_inf_nan=False)
    dark_rate: float = Field(0.0, ge=0.0, allow_inf_nan=False)
    bin_width: float = Field(0.0, ge=0.0, allow_inf_nan=False)
    crosstalk_fraction: float = Field(0.0, ge=0.0, le=1.0)
    outcome_count: int = Field(1, ge=1)
    objective: ObjectiveKind = ObjectiveKind.MUTUAL_INFO

    @model_validator(mode="after")
    def _consistent(self) -> "ScenarioConfig":
        if self.dark_rate * self.bin_width > 1.0:
            raise ValueError("dark_rate * bin_width must not exceed 1")
        if self.source is SourceKind.EMPIRICAL:
            if self.probability_file is None:
                raise ValueError("empirical source requires probability_file")
        elif self.mean_pairs is None:
            raise ValueError(f"{self.source.value} source requires mean_pairs")
        return self


class ScenarioEvaluation(BaseModel):
    """InfoReport of a scenario together with the raw-string length over its slots."""

    model_config = ConfigDict(frozen=True)

    name: str
    report: InfoReport
    outcome_count: int
    key_bits: float
