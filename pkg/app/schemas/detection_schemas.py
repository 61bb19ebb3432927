from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

NORMALISATION_TOL = 1e-12
COVARIANCE_TOL = 1e-12


class LinkParams(BaseModel):
    """Identical arms: total efficiency eta = eta_d * eta_l and dark-count probability q."""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(..., ge=0.0, le=1.0, allow_inf_nan=False)
    q: float = Field(0.0, ge=0.0, le=1.0, allow_inf_nan=False)

    @classmethod
    def from_components(
        cls,
        detector_efficiency: float,
        transmission_efficiency: float = 1.0,
        dark_rate: float = 0.0,
        bin_width: float = 0.0,
    ) -> "LinkParams":
        # local import: detection_service depends on this module
        from app.services.detection_service import dark_count_probability

        return cls(
            eta=detector_efficiency * transmission_efficiency,
            q=dark_count_probability(dark_rate, bin_width),
        )


class JointClickDistribution(BaseModel):
    """
    Joint table over (Alice, Bob) in {0 = no click, c = click}.

    pc0 mirrors p0c. ``covariance`` is p00*pcc - p0c*pc0; analytic
    constructors supply it in closed form, otherwise it is computed from
    the entries. A supplied value must agree with the entries to 1e-12.
    """

    model_config = ConfigDict(frozen=True)

    p00: float = Field(..., ge=0.0, le=1.0)
    p0c: float = Field(..., ge=0.0, le=1.0)
    pcc: float = Field(..., ge=0.0, le=1.0)
    covariance: Optional[float] = None

    @computed_field
    @property
    def pc0(self) -> float:
        return self.p0c

    @model_validator(mode="before")
    @classmethod
    def _fill_covariance(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("covariance") is None:
            p00, p0c, pcc = (float(data[k]) for k in ("p00", "p0c", "pcc"))
            data = {**data, "covariance": p00 * pcc - p0c * p0c}
        return data

    @model_validator(mode="after")
    def _check_normalised(self) -> "JointClickDistribution":
        total = self.p00 + 2.0 * self.p0c + self.pcc
        if abs(total - 1.0) > NORMALISATION_TOL:
            raise ValueError(f"joint probabilities sum to {total!r}, expected 1")
        from_cells = self.p00 * self.pcc - self.p0c * self.pc0
        if abs(self.covariance - from_cells) > COVARIANCE_TOL:
            raise ValueError(
                f"covariance {self.covariance!r} disagrees with the cells ({from_cells!r})"
            )
        return self

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p00, self.p0c, self.pc0, self.pcc)
