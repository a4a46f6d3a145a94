"""
Audio I/O service - WAV decoding, segmentation and test-signal synthesis
"""

import io
import logging
import struct
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
from scipy.io import wavfile

from backend.models.audio import AudioBuffer, Segment
from backend.utils.errors import (
    AliasedFrequency,
    CorruptHeader,
    EmptyAudio,
    InputError,
    IoError,
    UnsupportedFormat,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

PCM_BIT_DEPTHS = (8, 16, 24, 32)
FLOAT_BIT_DEPTHS = (32, 64)


def _inspect_riff(raw: bytes, path: str) -> None:
    """Walk the RIFF chunks and reject anything scipy would misread"""
    if len(raw) < 12:
        raise CorruptHeader("file too short for a RIFF header", path=path)
    if raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise CorruptHeader("missing RIFF/WAVE signature", path=path)

    offset = 12
    fmt_seen = False
    while True:
        if offset + 8 > len(raw):
            break
        chunk_id, chunk_size = struct.unpack("<4sI", raw[offset:offset + 8])
        body = offset + 8
        if chunk_id == b"fmt ":
            if chunk_size < 16 or body + 16 > len(raw):
                raise CorruptHeader("truncated fmt chunk", path=path)
            format_tag, channels, _, _, _, bits = struct.unpack("<HHIIHH", raw[body:body + 16])
            if format_tag == WAVE_FORMAT_EXTENSIBLE:
                if chunk_size < 40 or body + 26 > len(raw):
                    raise CorruptHeader("truncated extensible fmt chunk", path=path)
                format_tag = struct.unpack("<H", raw[body + 24:body + 26])[0]
            if format_tag == WAVE_FORMAT_PCM:
                if bits not in PCM_BIT_DEPTHS:
                    raise UnsupportedFormat(f"{bits}-bit integer PCM is not supported", path=path)
            elif format_tag == WAVE_FORMAT_IEEE_FLOAT:
                if bits not in FLOAT_BIT_DEPTHS:
                    raise UnsupportedFormat(f"{bits}-bit float PCM is not supported", path=path)
            else:
                raise UnsupportedFormat(f"non-PCM codec (format tag 0x{format_tag:04x})", path=path)
            if channels < 1:
                raise CorruptHeader("fmt chunk declares zero channels", path=path)
            fmt_seen = True
        elif chunk_id == b"data":
            if not fmt_seen:
                raise CorruptHeader("data chunk before fmt chunk", path=path)
            if chunk_size == 0:
                raise EmptyAudio("data chunk holds zero samples", path=path)
            if body + chunk_size > len(raw):
                raise CorruptHeader("data chunk is truncated", path=path)
            return
        offset = body + chunk_size + (chunk_size % 2)

    if not fmt_seen:
        raise CorruptHeader("no fmt chunk found", path=path)
    raise CorruptHeader("no data chunk found", path=path)


def _normalize(data: np.ndarray) -> np.ndarray:
    """Scale decoded samples to [-1, 1] according to their storage type"""
    if data.dtype == np.uint8:
        scaled = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype == np.int16:
        scaled = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        # 24-bit PCM arrives left-justified in int32
        scaled = data.astype(np.float64) / 2147483648.0
    elif np.issubdtype(data.dtype, np.floating):
        scaled = np.clip(data.astype(np.float64), -1.0, 1.0)
    else:
        raise UnsupportedFormat(f"unexpected sample type {data.dtype}")
    if scaled.ndim == 2:
        scaled = scaled.mean(axis=1)
    return scaled


def read_wav(path: PathLike) -> AudioBuffer:
    """Decode a PCM WAV file into a mono buffer scaled to [-1, 1]"""
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"cannot read file: {e.strerror or e}", path=str(path)) from e
    return decode_wav(raw, str(path))


def decode_wav(raw: bytes, path_str: str = "<memory>") -> AudioBuffer:
    """Decode in-memory WAV bytes; path_str only labels error messages"""
    _inspect_riff(raw, path_str)

    try:
        sample_rate, data = wavfile.read(io.BytesIO(raw))
    except ValueError as e:
        raise CorruptHeader(f"cannot decode: {e}", path=path_str) from e

    samples = _normalize(np.asarray(data))
    if samples.size == 0:
        raise EmptyAudio("file holds zero samples", path=path_str)
    if sample_rate <= 0:
        raise CorruptHeader(f"invalid sample rate {sample_rate}", path=path_str)

    logger.debug(f"Decoded {path_str}: {samples.size} samples at {sample_rate} Hz")
    return AudioBuffer(samples=samples, sample_rate_hz=int(sample_rate))


def write_wav(buffer: AudioBuffer, path: PathLike) -> Path:
    """Write a buffer as 16-bit PCM mono"""
    path = Path(path)
    pcm = np.clip(np.round(buffer.samples * 32768.0), -32768, 32767).astype(np.int16)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        wavfile.write(str(path), buffer.sample_rate_hz, pcm)
    except OSError as e:
        raise IoError(f"cannot write file: {e.strerror or e}", path=str(path)) from e
    return path


def segment_sample_count(segment_length_s: float, sample_rate_hz: int) -> int:
    """Number of samples in one segment"""
    count = int(round(segment_length_s * sample_rate_hz))
    if segment_length_s <= 0 or count < 1:
        raise InputError(
            f"segment length {segment_length_s} s is shorter than one sample at {sample_rate_hz} Hz"
        )
    return count


def segment(buffer: AudioBuffer, segment_length_s: float, source_id: str = "") -> List[Segment]:
    """Split a buffer into consecutive whole segments; a partial tail is dropped"""
    size = segment_sample_count(segment_length_s, buffer.sample_rate_hz)
    count = buffer.n_samples // size
    if count == 0:
        raise EmptyAudio(
            f"{buffer.duration_s:.3f} s of audio is shorter than one {segment_length_s} s segment",
            path=source_id or None,
        )

    return [
        Segment(
            samples=buffer.samples[k * size:(k + 1) * size],
            sample_rate_hz=buffer.sample_rate_hz,
            start_time_s=k * segment_length_s,
            segment_index=k,
            source_id=source_id,
        )
        for k in range(count)
    ]


def synthesize_tone(freq_hz: float, duration_s: float, sample_rate_hz: int,
                    amplitude: float, phase: float = 0.0) -> AudioBuffer:
    """Deterministic pure sinusoid"""
    if sample_rate_hz <= 0:
        raise InputError(f"sample rate must be positive, got {sample_rate_hz}")
    if freq_hz >= sample_rate_hz / 2.0:
        raise AliasedFrequency(
            f"{freq_hz} Hz is at or above the Nyquist frequency {sample_rate_hz / 2.0} Hz"
        )
    if freq_hz <= 0:
        raise InputError(f"tone frequency must be positive, got {freq_hz}")
    if not 0 < amplitude <= 1:
        raise InputError(f"amplitude must lie in (0, 1], got {amplitude}")
    if duration_s <= 0:
        raise InputError(f"duration must be positive, got {duration_s}")

    n = int(round(duration_s * sample_rate_hz))
    t = np.arange(n, dtype=np.float64) / sample_rate_hz
    return AudioBuffer(samples=amplitude * np.sin(2.0 * np.pi * freq_hz * t + phase),
                       sample_rate_hz=sample_rate_hz)


def silence(duration_s: float, sample_rate_hz: int) -> AudioBuffer:
    """All-zero buffer"""
    n = int(round(duration_s * sample_rate_hz))
    return AudioBuffer(samples=np.zeros(n), sample_rate_hz=sample_rate_hz)


def concatenate(buffers: Sequence[AudioBuffer]) -> AudioBuffer:
    """Join buffers that share a sample rate"""
    if not buffers:
        raise EmptyAudio("nothing to concatenate")
    rates = {b.sample_rate_hz for b in buffers}
    if len(rates) != 1:
        raise InputError(f"cannot concatenate buffers with sample rates {sorted(rates)}")
    return AudioBuffer(samples=np.concatenate([b.samples for b in buffers]),
                       sample_rate_hz=rates.pop())


def mix(base: AudioBuffer, overlay: AudioBuffer) -> AudioBuffer:
    """Sum two equal-length buffers, clipped to [-1, 1]"""
    if base.sample_rate_hz != overlay.sample_rate_hz or base.n_samples != overlay.n_samples:
        raise InputError("mixed buffers must share sample rate and length")
    return AudioBuffer(samples=np.clip(base.samples + overlay.samples, -1.0, 1.0),
                       sample_rate_hz=base.sample_rate_hz)
