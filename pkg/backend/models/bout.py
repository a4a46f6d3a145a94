"""
Bout models - sustained call sequences and the rules that define them
"""

import math
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

GRUMBLE = "grumble"
ALARM = "alarm"
NON_CALL = "non-call"
CALL_CLASSES = (GRUMBLE, ALARM)
BOUT_CLASSES = (GRUMBLE, ALARM, NON_CALL)

# slack for times that passed through three-decimal CSV rendering
TIME_TOL = 1e-6
# a duration whose two ends were each rounded to three decimals
DURATION_TOL = 1e-3
REFERENCE_SEGMENT_S = 1.0


class Bout(BaseModel):
    """One bout in one recording, [start_time_s, end_time_s)"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    source_id: str = ""
    call_class: str = Field(..., alias="class")
    start_time_s: float = Field(..., ge=0)
    end_time_s: float

    @field_validator("call_class")
    @classmethod
    def _check_class(cls, value: str) -> str:
        value = value.strip().lower()
        if value not in BOUT_CLASSES:
            raise ValueError(f"bout class must be one of {list(BOUT_CLASSES)}, got '{value}'")
        return value

    @model_validator(mode="after")
    def _check_span(self) -> "Bout":
        if not self.end_time_s > self.start_time_s:
            raise ValueError(
                f"bout end {self.end_time_s} must be after its start {self.start_time_s}"
            )
        return self

    @property
    def duration_s(self) -> float:
        return self.end_time_s - self.start_time_s

    def overlap_s(self, other: "Bout") -> float:
        """Length of the intersection of two bouts (0 if disjoint)"""
        return max(0.0, min(self.end_time_s, other.end_time_s) - max(self.start_time_s, other.start_time_s))

    def to_row(self) -> Dict[str, object]:
        return {
            "source_file": self.source_id,
            "class": self.call_class,
            "start_time_s": self.start_time_s,
            "end_time_s": self.end_time_s,
        }


class BoutRules(BaseModel):
    """Consecutive-detection and separation rules for turning labels into bouts"""
    model_config = ConfigDict(frozen=True)

    grumble_min_consecutive: int = Field(default=2, ge=1)
    alarm_min_consecutive: int = Field(default=3, ge=1)
    grumble_separation_s: float = Field(default=1.0, ge=1.0)
    alarm_separation_s: float = Field(default=5.0, ge=1.0)
    # None lets non-call stretches run to any length
    noncall_max_s: Optional[float] = Field(default=60.0)
    noncall_min_s: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _check_noncall(self) -> "BoutRules":
        if self.noncall_max_s is not None and self.noncall_max_s < self.noncall_min_s:
            raise ValueError(
                f"noncall_max_s ({self.noncall_max_s}) must be at least noncall_min_s ({self.noncall_min_s})"
            )
        return self

    def min_consecutive(self, call_class: str) -> int:
        return self.grumble_min_consecutive if call_class == GRUMBLE else self.alarm_min_consecutive

    def separation_s(self, call_class: str) -> float:
        return self.grumble_separation_s if call_class == GRUMBLE else self.alarm_separation_s

    def min_duration_s(self, call_class: str) -> float:
        """Shortest bout of a class these rules can produce, in seconds"""
        if call_class == NON_CALL:
            return self.noncall_min_s
        # consecutive detections are counted in 1 s segments
        return self.min_consecutive(call_class) * REFERENCE_SEGMENT_S

    def min_segments(self, call_class: str, segment_length_s: float) -> int:
        """Consecutive segments of the given length needed to reach min_duration_s"""
        return max(1, math.ceil(self.min_duration_s(call_class) / segment_length_s - 1e-9))

    def violations(self, bout: Bout) -> Optional[str]:
        """Why a bout could not come from these rules, or None"""
        shortest = self.min_duration_s(bout.call_class)
        if bout.duration_s + DURATION_TOL < shortest:
            return f"{bout.call_class} bout lasts {bout.duration_s:.3f} s, shorter than {shortest:g} s"
        if (bout.call_class == NON_CALL and self.noncall_max_s is not None
                and bout.duration_s > self.noncall_max_s + DURATION_TOL):
            return f"non-call bout lasts {bout.duration_s:.3f} s, longer than {self.noncall_max_s:g} s"
        return None
