from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator


class SourceKind(str, Enum):
    POISSONIAN = "poissonian"
    THERMAL = "thermal"
    EMPIRICAL = "empirical"


class ObjectiveKind(str, Enum):
    MUTUAL_INFO = "H"
    PER_GENERATED = "Ig"
    PER_DETECTED = "Id"


class OptimizationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambda_star: float = Field(..., gt=0.0)
    objective_value: float
    objective_kind: ObjectiveKind
    iterations: int = Field(..., ge=0)
    # search interval in log10(lambda)
    bracket: tuple[float, float]


class SweepCurve(BaseModel):
    model_config = ConfigDict(frozen=True)

    parameter_name: str
    points: tuple[tuple[float, float], ...]

    @field_validator("points")
    @classmethod
    def _strictly_increasing(
        cls, points: tuple[tuple[float, float], ...]
    ) -> tuple[tuple[float, float], ...]:
        for (x0, _), (x1, _) in zip(points, points[1:]):
            if not x1 > x0:
                raise ValueError("parameter values must be strictly increasing")
        return points

    @property
    def parameters(self) -> list[float]:
        return [x for x, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [y for _, y in self.points]
