"""
Run configuration model - every tunable of the call monitor in one place
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from backend.models.bout import BoutRules
from backend.models.hopfield import CapacityPolicy
from backend.models.pattern import EncoderConfig
from backend.models.spectrum import SpectralParams


class ExemplarSpec(BaseModel):
    """Exemplar recording and the class it is stored as"""
    model_config = ConfigDict(frozen=True)

    label: str = Field(..., min_length=1)
    path: str = Field(..., min_length=1)

    @field_validator("label")
    @classmethod
    def _lower(cls, value: str) -> str:
        return value.strip().lower()


class RunConfig(BaseModel):
    """Merged configuration; defaults reproduce the 14-neuron, 0-1.3 kHz model"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    # encoder
    band_low_hz: float = 0.0
    band_high_hz: float = 1300.0
    threshold: float = 0.1
    n_neurons: int = 14

    # spectra
    segment_length_s: float = 1.0
    fft_length: int = 1024
    window: str = "hamming"
    overlap: float = 0.5

    # network
    max_passes: int = Field(default=100, ge=1)
    capacity_policy: CapacityPolicy = "boundary"

    # bouts
    grumble_min_consecutive: int = 2
    alarm_min_consecutive: int = 3
    grumble_separation_s: float = 1.0
    alarm_separation_s: float = 5.0
    noncall_max_s: Optional[float] = 60.0

    # files and execution
    exemplars: List[ExemplarSpec] = Field(default_factory=list)
    inputs: List[str] = Field(default_factory=list)
    output: Optional[str] = None
    model_path: Optional[str] = None
    workers: Optional[int] = Field(default=None, ge=1)
    log_level: str = "INFO"

    @field_validator("noncall_max_s")
    @classmethod
    def _zero_is_unbounded(cls, value: Optional[float]) -> Optional[float]:
        return None if value is not None and value == 0 else value

    @field_validator("log_level")
    @classmethod
    def _check_level(cls, value: str) -> str:
        value = value.strip().upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level '{value}'")
        return value

    @model_validator(mode="after")
    def _check_components(self) -> "RunConfig":
        # each owning model re-validates its own constraints
        self.encoder_config()
        self.spectral_params()
        self.bout_rules()
        labels = [e.label for e in self.exemplars]
        if len(set(labels)) != len(labels):
            raise ValueError(f"exemplar labels must be distinct, got {labels}")
        return self

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            n_neurons=self.n_neurons,
            band_low_hz=self.band_low_hz,
            band_high_hz=self.band_high_hz,
            threshold=self.threshold,
        )

    def spectral_params(self) -> SpectralParams:
        return SpectralParams(
            fft_length=self.fft_length,
            window=self.window,
            overlap=self.overlap,
            segment_length_s=self.segment_length_s,
        )

    def bout_rules(self) -> BoutRules:
        return BoutRules(
            grumble_min_consecutive=self.grumble_min_consecutive,
            alarm_min_consecutive=self.alarm_min_consecutive,
            grumble_separation_s=self.grumble_separation_s,
            alarm_separation_s=self.alarm_separation_s,
            noncall_max_s=self.noncall_max_s,
        )
