"""
Hopfield network models - stored weights, patterns and convergence results
"""

import math
from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from backend.models.pattern import BipolarPattern, EncoderConfig

CAPACITY_RATIO = 0.138
UNID_LABEL = "unid"

CapacityPolicy = Literal["strict", "boundary", "off"]


def capacity_bound(n_neurons: int) -> int:
    """Classic Hopfield estimate: floor(0.138 N) random patterns"""
    return int(math.floor(CAPACITY_RATIO * n_neurons))


class StoredPattern(BaseModel):
    """A retrieval state and the class it stands for"""
    model_config = ConfigDict(frozen=True)

    label: str = Field(..., min_length=1)
    pattern: BipolarPattern

    @field_validator("label")
    @classmethod
    def _check_label(cls, value: str) -> str:
        value = value.strip().lower()
        if not value or any(ch in value for ch in ",\n\r\""):
            raise ValueError(f"invalid class label '{value}'")
        if value == UNID_LABEL:
            raise ValueError(f"'{UNID_LABEL}' is reserved for spurious outcomes")
        return value


class HopfieldModel(BaseModel):
    """Trained network: symmetric zero-diagonal weights plus the stored patterns"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    weights: np.ndarray
    bias: np.ndarray
    stored: Tuple[StoredPattern, ...]
    encoder_config: EncoderConfig
    capacity_policy: CapacityPolicy = "boundary"

    @field_validator("weights", "bias", mode="before")
    @classmethod
    def _as_readonly_array(cls, value):
        array = np.array(value, dtype=np.float64)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _check_structure(self) -> "HopfieldModel":
        n = self.encoder_config.n_neurons
        if self.weights.shape != (n, n):
            raise ValueError(f"weights must be {n}x{n}, got {self.weights.shape}")
        if self.bias.shape != (n,):
            raise ValueError(f"bias must have {n} entries, got {self.bias.shape}")
        if not np.array_equal(self.weights, self.weights.T):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(self.weights) != 0):
            raise ValueError("neurons must not be self-connected (zero diagonal)")
        if not self.stored:
            raise ValueError("a model needs at least one stored pattern")
        labels = [s.label for s in self.stored]
        if len(set(labels)) != len(labels):
            raise ValueError(f"stored labels must be unique, got {labels}")
        for s in self.stored:
            if s.pattern.n_neurons != n:
                raise ValueError(f"pattern '{s.label}' has {s.pattern.n_neurons} neurons, expected {n}")
        return self

    @property
    def n_neurons(self) -> int:
        return self.encoder_config.n_neurons

    @property
    def n_patterns(self) -> int:
        return len(self.stored)

    @property
    def labels(self) -> List[str]:
        return [s.label for s in self.stored]

    def pattern_for(self, label: str) -> BipolarPattern:
        for s in self.stored:
            if s.label == label:
                return s.pattern
        raise KeyError(label)

    def label_of(self, state: BipolarPattern) -> Optional[str]:
        """Label of the stored pattern exactly equal to state, if any"""
        for s in self.stored:
            if s.pattern.states == state.states:
                return s.label
        return None

    def capacity_status(self) -> Dict[str, object]:
        """Pattern count against the 0.138 N bound"""
        bound = capacity_bound(self.n_neurons)
        if self.n_patterns <= bound:
            status = "within"
        elif self.n_patterns == bound + 1:
            status = "boundary"
        else:
            status = "exceeded"
        return {
            "n_neurons": self.n_neurons,
            "n_patterns": self.n_patterns,
            "bound": bound,
            "status": status,
            "policy": self.capacity_policy,
        }


class Outcome(str, Enum):
    """Where the dynamics ended"""
    RETRIEVED = "retrieved"
    SPURIOUS = "spurious"
    NON_CONVERGENT = "non_convergent"


class ConvergenceResult(BaseModel):
    """Final state of a retrieval run and what it means"""
    model_config = ConfigDict(frozen=True)

    final_state: BipolarPattern
    outcome: Outcome
    label: Optional[str] = None
    passes_used: int = Field(..., ge=1)
    flips: int = Field(default=0, ge=0)
    final_energy: float
    energy_trace: Optional[Tuple[float, ...]] = None

    @model_validator(mode="after")
    def _check_label(self) -> "ConvergenceResult":
        if (self.outcome == Outcome.RETRIEVED) != (self.label is not None):
            raise ValueError("a label is present exactly when the outcome is retrieved")
        return self

    @property
    def class_label(self) -> str:
        """Stored label, or 'unid' for spurious and non-convergent runs"""
        return self.label if self.label is not None else UNID_LABEL

    def summary(self) -> str:
        """Short form for CSV/log detail columns"""
        return f"{self.outcome.value}:{self.passes_used}"
