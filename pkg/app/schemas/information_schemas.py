from pydantic import BaseModel, ConfigDict, Field

from app.schemas.detection_schemas import LinkParams


class InfoReport(BaseModel):
    """Shared information of one link configuration, per outcome slot and per photon."""

    model_config = ConfigDict(frozen=True)

    mutual_info_bits: float = Field(..., ge=0.0, le=1.0)
    info_per_generated_bits: float
    info_per_detected_bits: float
    source: str = Field(..., description="Descriptor of the pair distribution")
    mean_pairs: float = Field(..., gt=0.0)
    link: LinkParams

    def key_bits(self, slot_count: int) -> float:
        """Bits shared over ``slot_count`` equiprobable outcome slots."""
        return slot_count * self.mutual_info_bits
