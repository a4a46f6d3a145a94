"""
Spectral service - Welch power spectra and band-limited peak extraction
"""

import logging
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.signal import get_window

from backend.models.audio import Segment
from backend.models.spectrum import Peak, PeakSet, PowerSpectrum, SpectralParams
from backend.utils.errors import BandExceedsNyquist, InputError, SegmentTooShort

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def window_values(window: str, length: int) -> np.ndarray:
    """Periodic analysis window, cached per (name, length)"""
    try:
        values = get_window(window, length, fftbins=True).astype(np.float64)
    except ValueError as e:
        raise InputError(f"unknown window function '{window}'") from e
    values.setflags(write=False)
    return values


def frame_signal(samples: np.ndarray, fft_length: int, hop_length: int) -> np.ndarray:
    """Overlapping frames of fft_length samples; frames that would run past the end are dropped"""
    if samples.shape[0] < fft_length:
        raise SegmentTooShort(
            f"{samples.shape[0]} samples is fewer than one {fft_length}-point FFT frame"
        )
    view = np.lib.stride_tricks.sliding_window_view(samples, fft_length)
    return view[::hop_length]


def frame_power(frames: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Un-normalized one-sided power per frame.

    Scaled so each frame's bins sum to the energy of the windowed frame.
    """
    n = window.shape[0]
    spectrum = np.fft.rfft(frames * window, n=n, axis=-1)
    power = (spectrum.real ** 2 + spectrum.imag ** 2) / n
    if n % 2 == 0:
        power[..., 1:-1] *= 2.0
    else:
        power[..., 1:] *= 2.0
    return power


def normalize(spectrum: PowerSpectrum) -> PowerSpectrum:
    """Scale so the largest bin is exactly 1; silence stays all zero"""
    peak = float(spectrum.power.max())
    power = spectrum.power / peak if peak > 0 else np.zeros_like(spectrum.power)
    return PowerSpectrum(power=power, bin_width_hz=spectrum.bin_width_hz, normalized=True)


def power_spectrum(segment: Segment, fft_length: int = 1024, window: str = "hamming",
                   overlap: float = 0.5, normalized: bool = True) -> PowerSpectrum:
    """Welch average of windowed frame power, one-sided, peak-normalized by default"""
    params = SpectralParams(fft_length=fft_length, window=window, overlap=overlap)
    frames = frame_signal(segment.samples, params.fft_length, params.hop_length)
    power = frame_power(frames, window_values(params.window, params.fft_length)).mean(axis=0)

    spectrum = PowerSpectrum(power=power, bin_width_hz=segment.sample_rate_hz / params.fft_length)
    return normalize(spectrum) if normalized else spectrum


def check_band(band: Tuple[float, float], nyquist_hz: float) -> Tuple[float, float]:
    """Validate a (low, high) band against a Nyquist frequency"""
    low, high = float(band[0]), float(band[1])
    if not 0 <= low < high:
        raise InputError(f"band must satisfy 0 <= low < high, got ({low}, {high})")
    if high > nyquist_hz:
        raise BandExceedsNyquist(
            f"band high edge {high} Hz exceeds the Nyquist frequency {nyquist_hz} Hz"
        )
    return low, high


def local_maxima(power: np.ndarray) -> np.ndarray:
    """Bins strictly above both neighbours; a flat plateau reports its lowest bin"""
    # collapse runs of equal values so plateaus compare as one point
    starts = np.concatenate(([0], np.flatnonzero(np.diff(power) != 0) + 1))
    values = power[starts]
    left = np.concatenate(([-np.inf], values[:-1]))
    right = np.concatenate((values[1:], [-np.inf]))
    return starts[(values > left) & (values > right)]


def extract_peaks(spectrum: PowerSpectrum, band: Tuple[float, float], threshold: float) -> PeakSet:
    """Above-threshold local maxima of a normalized spectrum inside a band"""
    if not spectrum.normalized:
        raise InputError("extract_peaks needs a normalized spectrum")
    if not 0 < threshold < 1:
        raise InputError(f"threshold must lie in (0, 1), got {threshold}")
    low, high = check_band(band, spectrum.nyquist_hz)

    freqs = spectrum.frequencies
    candidates = local_maxima(spectrum.power)
    keep = candidates[
        (freqs[candidates] >= low)
        & (freqs[candidates] <= high)
        & (spectrum.power[candidates] >= threshold)
    ]

    peaks = tuple(
        Peak(freq_hz=float(freqs[b]), power=float(spectrum.power[b]), bin=int(b)) for b in keep
    )
    return PeakSet(peaks=peaks, band=(low, high), threshold=threshold)


def segment_peaks(segment: Segment, params: SpectralParams, band: Tuple[float, float],
                  threshold: float) -> PeakSet:
    """Spectrum and peak extraction in one step"""
    check_band(band, segment.nyquist_hz)
    spectrum = power_spectrum(segment, params.fft_length, params.window, params.overlap)
    return extract_peaks(spectrum, band, threshold)
