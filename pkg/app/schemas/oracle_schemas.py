from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.detection_schemas import JointClickDistribution


class SimulationReport(BaseModel):
    """Counts of a seeded Monte-Carlo run over (Alice, Bob) click outcomes."""

    model_config = ConfigDict(frozen=True)

    n00: int = Field(..., ge=0)
    n0c: int = Field(..., ge=0)
    nc0: int = Field(..., ge=0)
    ncc: int = Field(..., ge=0)
    trials: int = Field(..., ge=1)
    seed: int = Field(..., ge=0, lt=2**64)
    per_photon: bool = False

    @model_validator(mode="after")
    def _counts_add_up(self) -> "SimulationReport":
        if self.n00 + self.n0c + self.nc0 + self.ncc != self.trials:
            raise ValueError("cell counts must sum to the number of trials")
        return self

    @property
    def empirical(self) -> JointClickDistribution:
        # arms are symmetric, so the two disagreement cells are pooled
        n = self.trials
        return JointClickDistribution(
            p00=self.n00 / n,
            p0c=(self.n0c + self.nc0) / (2 * n),
            pcc=self.ncc / n,
        )

    def counts(self) -> tuple[int, int, int, int]:
        return (self.n00, self.n0c, self.nc0, self.ncc)


class CheckResult(BaseModel):
    """Outcome of one verification check."""

    name: str
    passed: bool
    worst_error: float
    tolerance: float
    cases: int
    failures: tuple[str, ...] = ()
