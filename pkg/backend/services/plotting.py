"""
Plotting service - spectrogram and network weight images (PNG)
"""

import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import pyplot as plt

from backend.models.audio import AudioBuffer
from backend.models.hopfield import HopfieldModel
from backend.models.spectrum import SpectralParams
from backend.services import spectral
from backend.utils.errors import IoError

logger = logging.getLogger(__name__)

# floor for log power so silence renders as a flat low value
LOG_FLOOR = 1e-12

POSITIVE_COLOR = "tab:green"
NEGATIVE_COLOR = "tab:red"
ZERO_COLOR = "lightgrey"


def spectrogram(buffer: AudioBuffer, params: Optional[SpectralParams] = None
                ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Frame start times (s), bin frequencies (Hz) and log10 power [frame, bin]"""
    params = params or SpectralParams()
    frames = spectral.frame_signal(buffer.samples, params.fft_length, params.hop_length)
    power = spectral.frame_power(frames, spectral.window_values(params.window, params.fft_length))
    times = np.arange(frames.shape[0]) * params.hop_length / buffer.sample_rate_hz
    freqs = np.arange(power.shape[1]) * buffer.sample_rate_hz / params.fft_length
    return times, freqs, np.log10(power + LOG_FLOOR)


def _save(fig, out: Union[str, Path]) -> Path:
    out = Path(out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, format="png", dpi=100)
    except OSError as e:
        raise IoError(f"cannot write image: {e.strerror or e}", path=str(out)) from e
    finally:
        plt.close(fig)
    return out


def spectrogram_image(buffer: AudioBuffer, out: Union[str, Path], params: Optional[SpectralParams] = None,
                      max_freq_hz: Optional[float] = None, title: Optional[str] = None) -> Path:
    """Time on x, frequency (kHz) on y, log power as colour (jet: high red, low blue)"""
    params = params or SpectralParams()
    times, freqs, log_power = spectrogram(buffer, params)
    frame_s = params.fft_length / buffer.sample_rate_hz
    time_edges = np.append(times, times[-1] + frame_s)
    bin_width = buffer.sample_rate_hz / params.fft_length
    freq_edges = np.append(freqs - bin_width / 2.0, freqs[-1] + bin_width / 2.0) / 1000.0

    fig, ax = plt.subplots(figsize=(10, 4))
    mesh = ax.pcolormesh(time_edges, freq_edges, log_power.T, cmap="jet", shading="flat")
    ax.set_xlabel("Time (s)")
    ax.set_ylabel("Frequency (kHz)")
    if max_freq_hz is not None:
        ax.set_ylim(0, max_freq_hz / 1000.0)
    if title:
        ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label="log10 power")
    fig.tight_layout()
    path = _save(fig, out)
    logger.info(f"Spectrogram of {buffer.duration_s:.2f} s written to {path}")
    return path


def edge_color(weight: float) -> str:
    if weight > 0:
        return POSITIVE_COLOR
    if weight < 0:
        return NEGATIVE_COLOR
    return ZERO_COLOR


def neuron_positions(n_neurons: int) -> np.ndarray:
    """Neurons evenly spaced on the unit circle, neuron 0 at the top"""
    angles = np.pi / 2 - 2 * np.pi * np.arange(n_neurons) / n_neurons
    return np.column_stack((np.cos(angles), np.sin(angles)))


def network_diagram(model: HopfieldModel, out: Union[str, Path]) -> Path:
    """One panel per stored pattern: weights coloured by sign, firing neurons filled"""
    n = model.n_neurons
    positions = neuron_positions(n)
    scale = float(np.max(np.abs(model.weights))) or 1.0

    fig, axes = plt.subplots(1, model.n_patterns, figsize=(4 * model.n_patterns, 4), squeeze=False)
    for ax, stored in zip(axes[0], model.stored):
        for i in range(n):
            for j in range(i + 1, n):
                w = float(model.weights[i, j])
                ax.plot(positions[[i, j], 0], positions[[i, j], 1], color=edge_color(w),
                        linewidth=0.3 + 1.5 * abs(w) / scale, zorder=1)
        active = np.array(stored.pattern.states) == 1
        ax.scatter(positions[active, 0], positions[active, 1], s=120, c="black", zorder=2)
        ax.scatter(positions[~active, 0], positions[~active, 1], s=120, facecolors="white",
                   edgecolors="black", zorder=2)
        for i, (x, y) in enumerate(positions):
            ax.annotate(str(i), (1.15 * x, 1.15 * y), ha="center", va="center", fontsize=7)
        ax.set_title(stored.label)
        ax.set_aspect("equal")
        ax.set_xlim(-1.3, 1.3)
        ax.set_ylim(-1.3, 1.3)
        ax.axis("off")

    fig.suptitle(f"{n} neurons, {model.n_patterns} stored patterns")
    fig.tight_layout()
    path = _save(fig, out)
    logger.info(f"Network diagram written to {path}")
    return path
