"""
Spectrum models - power spectra, peak sets and spectral parameters
"""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SpectralParams(BaseModel):
    """How a segment becomes a spectrum"""
    model_config = ConfigDict(frozen=True)

    fft_length: int = Field(default=1024, ge=2)
    window: str = Field(default="hamming", min_length=1)
    overlap: float = Field(default=0.5, ge=0.0, lt=1.0)
    segment_length_s: float = Field(default=1.0, gt=0.0)

    @field_validator("fft_length")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"fft_length must be a power of two, got {value}")
        return value

    @property
    def hop_length(self) -> int:
        return max(1, self.fft_length - int(round(self.fft_length * self.overlap)))


class PowerSpectrum(BaseModel):
    """One-sided power spectrum indexed by FFT bin"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    power: np.ndarray
    bin_width_hz: float = Field(..., gt=0)
    normalized: bool = False

    @field_validator("power", mode="before")
    @classmethod
    def _as_power_array(cls, value):
        array = np.array(value, dtype=np.float64).reshape(-1)
        if array.size < 2:
            raise ValueError("spectrum needs at least two bins")
        if np.any(array < 0) or not np.all(np.isfinite(array)):
            raise ValueError("power must be finite and non-negative")
        array.setflags(write=False)
        return array

    @property
    def fft_length(self) -> int:
        return 2 * (self.power.shape[0] - 1)

    @property
    def sample_rate_hz(self) -> float:
        return self.bin_width_hz * self.fft_length

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2.0

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.power.shape[0]) * self.bin_width_hz


class Peak(BaseModel):
    """Above-threshold local maximum of a normalized spectrum"""
    model_config = ConfigDict(frozen=True)

    freq_hz: float = Field(..., ge=0)
    power: float = Field(..., gt=0, le=1)
    bin: int = Field(..., ge=0)


class PeakSet(BaseModel):
    """Peaks inside a band, sorted by frequency"""
    model_config = ConfigDict(frozen=True)

    peaks: Tuple[Peak, ...] = ()
    band: Tuple[float, float]
    threshold: float = Field(..., gt=0, lt=1)

    @model_validator(mode="after")
    def _check_peaks(self) -> "PeakSet":
        low, high = self.band
        if not 0 <= low < high:
            raise ValueError(f"invalid band {self.band}")
        bins = [p.bin for p in self.peaks]
        if bins != sorted(set(bins)):
            raise ValueError("peaks must be sorted by frequency without duplicate bins")
        for peak in self.peaks:
            if not low <= peak.freq_hz <= high:
                raise ValueError(f"peak at {peak.freq_hz} Hz lies outside band {self.band}")
            if peak.power < self.threshold:
                raise ValueError(f"peak power {peak.power} is below threshold {self.threshold}")
        return self

    @property
    def frequencies(self) -> Tuple[float, ...]:
        return tuple(p.freq_hz for p in self.peaks)

    def __len__(self) -> int:
        return len(self.peaks)

    def is_empty(self) -> bool:
        return not self.peaks

    def strongest(self) -> Peak:
        """Highest-power peak (lowest frequency on ties)"""
        return max(self.peaks, key=lambda p: (p.power, -p.freq_hz))
