"""
Classification model - one network decision per audio segment
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from backend.models.hopfield import UNID_LABEL
from backend.models.pattern import BipolarPattern

# outcome values; "empty_peaks" marks segments that never reached the network
OUTCOME_RETRIEVED = "retrieved"
OUTCOME_SPURIOUS = "spurious"
OUTCOME_NON_CONVERGENT = "non_convergent"
OUTCOME_EMPTY_PEAKS = "empty_peaks"
OUTCOMES = (OUTCOME_RETRIEVED, OUTCOME_SPURIOUS, OUTCOME_NON_CONVERGENT, OUTCOME_EMPTY_PEAKS)


class SegmentClassification(BaseModel):
    """Label assigned to one segment of a recording"""
    model_config = ConfigDict(frozen=True)

    source_id: str = ""
    segment_index: int = Field(..., ge=0)
    start_time_s: float = Field(..., ge=0)
    label: str = Field(..., min_length=1)
    # None when read back from a CSV, which only carries the label
    outcome: Optional[str] = None
    passes_used: int = Field(default=0, ge=0)
    final_state: Optional[BipolarPattern] = None

    @model_validator(mode="after")
    def _check_outcome(self) -> "SegmentClassification":
        if self.outcome is None:
            return self
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome '{self.outcome}'")
        if (self.label == UNID_LABEL) == (self.outcome == OUTCOME_RETRIEVED):
            raise ValueError(f"label '{self.label}' contradicts outcome '{self.outcome}'")
        return self

    @property
    def is_unid(self) -> bool:
        return self.label == UNID_LABEL

    @property
    def outcome_detail(self) -> str:
        """Outcome summary, e.g. 'retrieved:2' or 'empty_peaks'"""
        if self.outcome is None:
            return ""
        if self.outcome == OUTCOME_EMPTY_PEAKS:
            return self.outcome
        return f"{self.outcome}:{self.passes_used}"
