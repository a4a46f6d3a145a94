"""
Audio models for the Hopfield call monitor
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class AudioBuffer(BaseModel):
    """Mono recording: samples in [-1, 1] and the file's own sample rate"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: np.ndarray
    sample_rate_hz: int = Field(..., gt=0)

    @field_validator("samples", mode="before")
    @classmethod
    def _as_float_array(cls, value):
        array = np.array(value, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(array)):
            raise ValueError("samples must be finite")
        if array.size and np.max(np.abs(array)) > 1.0:
            raise ValueError("samples must lie within [-1, 1]")
        array.setflags(write=False)
        return array

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2.0

    def scaled(self, factor: float) -> "AudioBuffer":
        """Copy with every sample multiplied by factor"""
        return AudioBuffer(samples=self.samples * factor, sample_rate_hz=self.sample_rate_hz)


class Segment(BaseModel):
    """Fixed-length slice of a recording passed to the network"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: np.ndarray
    sample_rate_hz: int = Field(..., gt=0)
    start_time_s: float = Field(..., ge=0)
    segment_index: int = Field(default=0, ge=0)
    source_id: str = Field(default="")

    @field_validator("samples", mode="before")
    @classmethod
    def _as_float_array(cls, value):
        array = np.array(value, dtype=np.float64).reshape(-1)
        array.setflags(write=False)
        return array

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2.0

    @classmethod
    def from_buffer(cls, buffer: AudioBuffer, source_id: str = "") -> "Segment":
        """Treat a whole buffer as one segment (used for exemplars)"""
        return cls(samples=buffer.samples, sample_rate_hz=buffer.sample_rate_hz,
                   start_time_s=0.0, segment_index=0, source_id=source_id)
