"""
Report models - bout matching counts and the per-class classification report
"""

from typing import Dict

from pydantic import BaseModel, ConfigDict, Field, model_validator

from backend.models.bout import BOUT_CLASSES


class ClassCounts(BaseModel):
    """Matching outcome for one class"""
    model_config = ConfigDict(frozen=True)

    tp: int = Field(default=0, ge=0)
    fp: int = Field(default=0, ge=0)
    fn: int = Field(default=0, ge=0)

    @property
    def support(self) -> int:
        """Number of labelled bouts (tp + fn)"""
        return self.tp + self.fn

    def __add__(self, other: "ClassCounts") -> "ClassCounts":
        return ClassCounts(tp=self.tp + other.tp, fp=self.fp + other.fp, fn=self.fn + other.fn)


class ConfusionCounts(BaseModel):
    """Per-class tp/fp/fn for grumble, alarm and non-call"""
    model_config = ConfigDict(frozen=True)

    per_class: Dict[str, ClassCounts] = Field(
        default_factory=lambda: {c: ClassCounts() for c in BOUT_CLASSES}
    )

    @model_validator(mode="after")
    def _check_classes(self) -> "ConfusionCounts":
        unknown = set(self.per_class) - set(BOUT_CLASSES)
        if unknown:
            raise ValueError(f"unknown classes {sorted(unknown)}")
        for c in BOUT_CLASSES:
            self.per_class.setdefault(c, ClassCounts())
        return self

    def support(self, call_class: str) -> int:
        return self.per_class[call_class].support

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(per_class={
            c: self.per_class[c] + other.per_class[c] for c in BOUT_CLASSES
        })


class ClassMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    f1: float = Field(..., ge=0, le=1)
    support: int = Field(..., ge=0)


class ClassificationReport(BaseModel):
    """Per-class precision/recall/F1 plus overall accuracy (micro precision)"""
    model_config = ConfigDict(frozen=True)

    per_class: Dict[str, ClassMetrics]
    overall_accuracy: float = Field(..., ge=0, le=1)
    total_tp: int = Field(default=0, ge=0)
    total_fp: int = Field(default=0, ge=0)
    total_fn: int = Field(default=0, ge=0)
