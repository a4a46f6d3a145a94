"""
Encoder service - turns spectral peaks into neuron firing patterns
"""

import math

from backend.models.pattern import BipolarPattern, EncoderConfig
from backend.models.spectrum import PeakSet
from backend.utils.errors import ConfigMismatch, OutOfBand


def bin_of(freq_hz: float, config: EncoderConfig) -> int:
    """Neuron index of the equal-width band bin holding freq_hz"""
    low, high = config.band
    if not low <= freq_hz <= high:
        raise OutOfBand(f"{freq_hz} Hz lies outside the encoder band ({low}, {high}) Hz")
    index = int(math.floor((freq_hz - low) / (high - low) * config.n_neurons))
    return min(index, config.n_neurons - 1)


def encode(peaks: PeakSet, config: EncoderConfig) -> BipolarPattern:
    """Neuron i fires (+1) iff some peak falls in bin i; silence encodes as all -1"""
    if tuple(float(v) for v in peaks.band) != config.band:
        raise ConfigMismatch(
            f"peaks were extracted over band {peaks.band} but the encoder uses {config.band}"
        )
    return BipolarPattern.from_active(
        config.n_neurons, {bin_of(p.freq_hz, config) for p in peaks.peaks}
    )
