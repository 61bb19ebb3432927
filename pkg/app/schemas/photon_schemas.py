import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.config.config import settings


class _Source(BaseModel):
    model_config = ConfigDict(frozen=True)


class PoissonianSource(_Source):
    """SPDC pairs from long pump pulses: P(m) = e^-λ λ^m / m!."""

    kind: Literal["poissonian"] = "poissonian"
    mean_pairs: float = Field(..., ge=0.0, allow_inf_nan=False)

    def describe(self) -> str:
        return f"poissonian(lambda={self.mean_pairs!r})"


class ThermalSource(_Source):
    """Short pump pulses: P(m) = λ^m / (λ+1)^(m+1)."""

    kind: Literal["thermal"] = "thermal"
    mean_pairs: float = Field(..., ge=0.0, allow_inf_nan=False)

    def describe(self) -> str:
        return f"thermal(lambda={self.mean_pairs!r})"


class EmpiricalSource(_Source):
    """
    Arbitrary pair-number statistics p_0 ... p_K (index = pair count).

    The sequence must sum to 1 within EMPIRICAL_SUM_TOLERANCE and is then
    renormalised exactly.
    """

    kind: Literal["empirical"] = "empirical"
    probs: tuple[float, ...] = Field(..., min_length=1)

    @field_validator("probs")
    @classmethod
    def _normalised(cls, probs: tuple[float, ...]) -> tuple[float, ...]:
        if len(probs) > settings.EMPIRICAL_MAX_TERMS:
            raise ValueError(
                f"at most {settings.EMPIRICAL_MAX_TERMS} terms allowed, got {len(probs)}"
            )
        for m, p in enumerate(probs):
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability p_{m}={p!r} outside [0, 1]")
        total = math.fsum(probs)
        if abs(total - 1.0) > settings.EMPIRICAL_SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        return tuple(p / total for p in probs)

    def describe(self) -> str:
        return f"empirical(terms={len(self.probs)})"


PairDistribution = Annotated[
    Union[PoissonianSource, ThermalSource, EmpiricalSource],
    Field(discriminator="kind"),
]
