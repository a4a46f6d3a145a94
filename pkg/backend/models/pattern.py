"""
Pattern models - encoder configuration and bipolar neuron states
"""

from typing import Iterable, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class EncoderConfig(BaseModel):
    """Maps a frequency band onto N equal-width neuron bins"""
    model_config = ConfigDict(frozen=True)

    n_neurons: int = Field(default=14, ge=2)
    band_low_hz: float = Field(default=0.0, ge=0)
    band_high_hz: float = Field(default=1300.0, gt=0)
    threshold: float = Field(default=0.1, gt=0, lt=1)

    @model_validator(mode="after")
    def _check_band(self) -> "EncoderConfig":
        if not self.band_low_hz < self.band_high_hz:
            raise ValueError(
                f"band low edge {self.band_low_hz} Hz must be below high edge {self.band_high_hz} Hz"
            )
        return self

    @property
    def band(self) -> Tuple[float, float]:
        return (self.band_low_hz, self.band_high_hz)

    @property
    def bin_width_hz(self) -> float:
        return (self.band_high_hz - self.band_low_hz) / self.n_neurons


class BipolarPattern(BaseModel):
    """N-neuron state vector over {-1, +1}"""
    model_config = ConfigDict(frozen=True)

    states: Tuple[int, ...]

    @field_validator("states", mode="before")
    @classmethod
    def _as_int_tuple(cls, value):
        if isinstance(value, np.ndarray):
            value = value.tolist()
        return tuple(int(v) for v in value)

    @field_validator("states")
    @classmethod
    def _check_states(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("pattern must have at least one neuron")
        if any(v not in (-1, 1) for v in value):
            raise ValueError("pattern states must be -1 or +1")
        return value

    @classmethod
    def from_active(cls, n_neurons: int, active: Iterable[int]) -> "BipolarPattern":
        """Pattern with +1 at the given indices and -1 elsewhere"""
        states = [-1] * n_neurons
        for index in active:
            states[index] = 1
        return cls(states=states)

    @property
    def n_neurons(self) -> int:
        return len(self.states)

    @property
    def active(self) -> Tuple[int, ...]:
        """Indices of firing (+1) neurons"""
        return tuple(i for i, v in enumerate(self.states) if v == 1)

    @property
    def activity(self) -> int:
        return len(self.active)

    def as_array(self) -> np.ndarray:
        return np.array(self.states, dtype=np.float64)

    def negated(self) -> "BipolarPattern":
        return BipolarPattern(states=tuple(-v for v in self.states))

    def flipped(self, indices: Iterable[int]) -> "BipolarPattern":
        """Copy with the given neurons inverted"""
        states = list(self.states)
        for index in indices:
            states[index] = -states[index]
        return BipolarPattern(states=states)

    def overlap(self, other: "BipolarPattern") -> int:
        return int(sum(a * b for a, b in zip(self.states, other.states)))

    def to_string(self) -> str:
        """Compact '+-' rendering used in logs and census tables"""
        return "".join("+" if v == 1 else "-" for v in self.states)
