"""
Classifier service - segment -> spectrum -> peaks -> pattern -> network -> label
"""

import logging
from collections import Counter
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from backend.models.audio import AudioBuffer, Segment
from backend.models.classification import (
    OUTCOME_EMPTY_PEAKS,
    OUTCOMES,
    SegmentClassification,
)
from backend.models.hopfield import UNID_LABEL, CapacityPolicy, HopfieldModel
from backend.models.pattern import BipolarPattern, EncoderConfig
from backend.models.spectrum import SpectralParams
from backend.services import audio_io, encoder, hopfield_core, spectral
from backend.utils.errors import BandExceedsNyquist, EmptyPeaks, IoError, SchemaError

logger = logging.getLogger(__name__)

CLASSIFICATION_COLUMNS = ["source_file", "segment_index", "start_time_s", "label"]


def _check_nyquist(model: HopfieldModel, sample_rate_hz: int) -> None:
    high = model.encoder_config.band_high_hz
    if high > sample_rate_hz / 2.0:
        raise BandExceedsNyquist(
            f"model band reaches {high} Hz but audio at {sample_rate_hz} Hz "
            f"has a Nyquist frequency of {sample_rate_hz / 2.0} Hz"
        )


def probe_pattern(segment: Segment, config: EncoderConfig,
                  spectral_params: SpectralParams) -> Tuple[BipolarPattern, int]:
    """Encoded probe for a segment and the number of peaks behind it"""
    peaks = spectral.segment_peaks(segment, spectral_params, config.band, config.threshold)
    return encoder.encode(peaks, config), len(peaks)


def classify_segment(model: HopfieldModel, segment: Segment,
                     spectral_params: Optional[SpectralParams] = None,
                     max_passes: int = hopfield_core.DEFAULT_MAX_PASSES) -> SegmentClassification:
    """Classify one segment; silence short-circuits to 'unid' without touching the network"""
    spectral_params = spectral_params or SpectralParams()
    _check_nyquist(model, segment.sample_rate_hz)

    probe, n_peaks = probe_pattern(segment, model.encoder_config, spectral_params)
    if n_peaks == 0:
        logger.debug(f"{segment.source_id}#{segment.segment_index}: no peaks above threshold")
        return SegmentClassification(
            source_id=segment.source_id,
            segment_index=segment.segment_index,
            start_time_s=segment.start_time_s,
            label=UNID_LABEL,
            outcome=OUTCOME_EMPTY_PEAKS,
        )

    result = hopfield_core.converge(model, probe, max_passes)
    logger.debug(f"{segment.source_id}#{segment.segment_index}: {probe.to_string()} -> "
                 f"{result.final_state.to_string()} ({result.summary()})")
    return SegmentClassification(
        source_id=segment.source_id,
        segment_index=segment.segment_index,
        start_time_s=segment.start_time_s,
        label=result.class_label,
        outcome=result.outcome.value,
        passes_used=result.passes_used,
        final_state=result.final_state,
    )


def classify_file(model: HopfieldModel, buffer: AudioBuffer,
                  spectral_params: Optional[SpectralParams] = None, source_id: str = "",
                  max_passes: int = hopfield_core.DEFAULT_MAX_PASSES) -> List[SegmentClassification]:
    """One classification per whole segment, ordered by segment index"""
    spectral_params = spectral_params or SpectralParams()
    _check_nyquist(model, buffer.sample_rate_hz)
    segments = audio_io.segment(buffer, spectral_params.segment_length_s, source_id=source_id)
    return [classify_segment(model, s, spectral_params, max_passes) for s in segments]


def exemplar_pattern(buffer: AudioBuffer, label: str, config: EncoderConfig,
                     spectral_params: SpectralParams) -> BipolarPattern:
    """Retrieval state for one exemplar recording (the whole buffer is one spectrum)"""
    segment = Segment.from_buffer(buffer, source_id=label)
    spectral.check_band(config.band, segment.nyquist_hz)
    pattern, n_peaks = probe_pattern(segment, config, spectral_params)
    if n_peaks == 0:
        raise EmptyPeaks(
            f"exemplar '{label}' has no spectral peaks above {config.threshold} "
            f"in {config.band_low_hz}-{config.band_high_hz} Hz and cannot be stored"
        )
    return pattern


def store_from_audio(exemplars: Sequence[Tuple[AudioBuffer, str]], encoder_config: EncoderConfig,
                     spectral_params: Optional[SpectralParams] = None,
                     capacity_policy: CapacityPolicy = "boundary") -> HopfieldModel:
    """Encode each exemplar and store the resulting patterns"""
    spectral_params = spectral_params or SpectralParams()
    patterns = [
        (exemplar_pattern(buffer, label, encoder_config, spectral_params), label)
        for buffer, label in exemplars
    ]
    for pattern, label in patterns:
        logger.info(f"Exemplar '{label}' fires neurons {list(pattern.active)}")
    return hopfield_core.store(patterns, encoder_config, capacity_policy)


def outcome_breakdown(classifications: Sequence[SegmentClassification]) -> Dict[str, int]:
    """How many segments ended in each outcome"""
    counts = Counter(c.outcome for c in classifications if c.outcome is not None)
    return {outcome: counts.get(outcome, 0) for outcome in OUTCOMES}


def label_counts(classifications: Sequence[SegmentClassification]) -> Dict[str, int]:
    return dict(sorted(Counter(c.label for c in classifications).items()))


def spurious_census(classifications: Sequence[SegmentClassification],
                    top: Optional[int] = None) -> List[Tuple[str, int]]:
    """Distinct spurious end states by frequency, most common first"""
    counts = Counter(
        c.final_state.to_string()
        for c in classifications
        if c.outcome == "spurious" and c.final_state is not None
    )
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:top] if top is not None else ranked


def classifications_to_frame(classifications: Sequence[SegmentClassification]) -> pd.DataFrame:
    return pd.DataFrame(
        [[c.source_id, c.segment_index, float(c.start_time_s), c.label] for c in classifications],
        columns=CLASSIFICATION_COLUMNS,
    ).astype({"segment_index": "int64", "start_time_s": "float64"})


def format_classifications_csv(classifications: Sequence[SegmentClassification]) -> str:
    """CSV text: fixed header, three-decimal times, LF line endings"""
    return classifications_to_frame(classifications).to_csv(
        index=False, lineterminator="\n", float_format="%.3f"
    )


def write_classifications_csv(classifications: Sequence[SegmentClassification],
                              path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(format_classifications_csv(classifications).encode("utf-8"))
    except OSError as e:
        raise IoError(f"cannot write classification CSV: {e.strerror or e}", path=str(path)) from e
    return path


def read_classifications_csv(path: Union[str, Path]) -> List[SegmentClassification]:
    """Load per-segment labels written by write_classifications_csv"""
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"source_file": str, "label": str}, keep_default_na=False)
    except OSError as e:
        raise IoError(f"cannot read classification CSV: {e.strerror or e}", path=str(path)) from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaError(f"unreadable classification CSV: {e}", path=str(path)) from e

    if list(frame.columns) != CLASSIFICATION_COLUMNS:
        raise SchemaError(f"expected columns {CLASSIFICATION_COLUMNS}, got {list(frame.columns)}",
                          path=str(path))
    rows = []
    for line, record in enumerate(frame.itertuples(index=False), start=2):
        try:
            rows.append(SegmentClassification(
                source_id=record.source_file,
                segment_index=int(record.segment_index),
                start_time_s=float(record.start_time_s),
                label=str(record.label).strip().lower(),
            ))
        except (ValueError, TypeError) as e:
            raise SchemaError(f"line {line}: {e}", path=str(path)) from e
    return rows
