"""
Fixtures service - deterministic synthetic calls, labelled corpora and brute-force attractor tables
"""

import itertools
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from backend.models.audio import AudioBuffer
from backend.models.bout import ALARM, CALL_CLASSES, GRUMBLE, Bout, BoutRules
from backend.models.classification import SegmentClassification
from backend.models.hopfield import HopfieldModel
from backend.services import audio_io, bout_extractor
from backend.services.hopfield_core import DEFAULT_MAX_PASSES, ZERO_FIELD_TOL
from backend.utils.errors import AliasedFrequency, InputError

logger = logging.getLogger(__name__)

FIXTURE_SAMPLE_RATE_HZ = 8000
TONE_AMPLITUDE = 0.12
NOISE_OVERLAY_DB = -20.0
BRUTE_FORCE_MAX_NEURONS = 12


class SyntheticCallSpec(BaseModel):
    """Multi-tone stand-in for one call type"""
    model_config = ConfigDict(frozen=True)

    label: str = Field(..., min_length=1)
    frequencies_hz: Tuple[float, ...] = Field(..., min_length=1)
    amplitudes: Optional[Tuple[float, ...]] = None
    duration_s: float = Field(default=1.5, gt=0)
    sample_rate_hz: int = Field(default=FIXTURE_SAMPLE_RATE_HZ, gt=0)
    seed: int = 0
    # None disables the noise overlay
    noise_db: Optional[float] = NOISE_OVERLAY_DB

    @model_validator(mode="after")
    def _check_components(self) -> "SyntheticCallSpec":
        nyquist = self.sample_rate_hz / 2.0
        for f in self.frequencies_hz:
            if not 0 < f < nyquist:
                raise ValueError(f"component {f} Hz must lie in (0, {nyquist}) Hz")
        amplitudes = self.tone_amplitudes
        if len(amplitudes) != len(self.frequencies_hz):
            raise ValueError("one amplitude per component frequency is required")
        if any(a <= 0 for a in amplitudes) or sum(amplitudes) > 1.0:
            raise ValueError("amplitudes must be positive and sum to at most 1")
        return self

    @property
    def tone_amplitudes(self) -> Tuple[float, ...]:
        if self.amplitudes is None:
            return (TONE_AMPLITUDE,) * len(self.frequencies_hz)
        return self.amplitudes


# Components sit on exact 7.8125 Hz FFT bin centres (8 kHz, 1024 points)
GRUMBLE_CALL = SyntheticCallSpec(
    label=GRUMBLE, frequencies_hz=(156.25, 234.375, 312.5, 390.625, 468.75, 546.875), seed=11
)
ALARM_CALL = SyntheticCallSpec(
    label=ALARM, frequencies_hz=(781.25, 859.375, 937.5, 1015.625, 1093.75, 1171.875), seed=12
)
# low-frequency movement noise sharing bins with the grumble in a 14-neuron encoding
MOVEMENT_NOISE = SyntheticCallSpec(
    label="noise", frequencies_hz=(70.3125, 140.625, 218.75, 296.875, 351.5625), seed=13
)
STANDARD_CALLS: Dict[str, SyntheticCallSpec] = {
    s.label: s for s in (GRUMBLE_CALL, ALARM_CALL, MOVEMENT_NOISE)
}


def synthesize_call(spec: SyntheticCallSpec, duration_s: Optional[float] = None,
                    seed: Optional[int] = None) -> AudioBuffer:
    """Sum of the call's tones plus seeded uniform noise"""
    duration_s = duration_s if duration_s is not None else spec.duration_s
    try:
        tones = [
            audio_io.synthesize_tone(f, duration_s, spec.sample_rate_hz, a).samples
            for f, a in zip(spec.frequencies_hz, spec.tone_amplitudes)
        ]
    except AliasedFrequency as e:
        raise InputError(f"call '{spec.label}': {e}") from e
    samples = np.sum(tones, axis=0)

    if spec.noise_db is not None:
        rng = np.random.default_rng(spec.seed if seed is None else seed)
        level = max(spec.tone_amplitudes) * 10.0 ** (spec.noise_db / 20.0)
        samples = samples + rng.uniform(-level, level, size=samples.shape[0])

    return AudioBuffer(samples=np.clip(samples, -1.0, 1.0), sample_rate_hz=spec.sample_rate_hz)


def exemplar(label: str, duration_s: Optional[float] = None) -> AudioBuffer:
    """Exemplar recording for one of the standard call types"""
    if label not in STANDARD_CALLS:
        raise InputError(f"no standard call named '{label}'; choose from {sorted(STANDARD_CALLS)}")
    return synthesize_call(STANDARD_CALLS[label], duration_s)


class CorpusEvent(BaseModel):
    """A call or noise burst placed on a corpus timeline (whole seconds)"""
    model_config = ConfigDict(frozen=True)

    label: str
    start_s: int = Field(..., ge=0)
    duration_s: int = Field(..., ge=1)

    @property
    def end_s(self) -> int:
        return self.start_s + self.duration_s


class SyntheticCorpus(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    source_id: str
    buffer: AudioBuffer
    events: Tuple[CorpusEvent, ...]
    labels: Tuple[Bout, ...]


def _truth_labels(events: Sequence[CorpusEvent], duration_s: int) -> List[str]:
    labels = ["unid"] * duration_s
    for event in events:
        for t in range(event.start_s, event.end_s):
            labels[t] = event.label if event.label in CALL_CLASSES else "unid"
    return labels


def generate_corpus(events: Sequence[CorpusEvent], duration_s: int,
                    specs: Optional[Dict[str, SyntheticCallSpec]] = None, seed: int = 0,
                    source_id: str = "corpus.wav", rules: Optional[BoutRules] = None) -> SyntheticCorpus:
    """Digital silence with calls at known times, plus the ground-truth bouts.

    Grumble and alarm events become call bouts; any other event (noise) is
    part of the surrounding non-call bouts.
    """
    specs = specs or STANDARD_CALLS
    rules = rules or BoutRules()
    events = tuple(sorted(events, key=lambda e: e.start_s))
    if duration_s < 1:
        raise InputError(f"corpus duration must be at least 1 s, got {duration_s}")

    sample_rates = {s.sample_rate_hz for s in specs.values()}
    if len(sample_rates) != 1:
        raise InputError(f"call specs disagree on sample rate: {sorted(sample_rates)}")
    sample_rate = sample_rates.pop()

    samples = np.zeros(duration_s * sample_rate)
    previous_end = 0
    for index, event in enumerate(events):
        if event.label not in specs:
            raise InputError(f"no call spec for event label '{event.label}'")
        if event.start_s < previous_end:
            raise InputError(f"event at {event.start_s} s overlaps the previous event")
        if event.end_s > duration_s:
            raise InputError(f"event at {event.start_s} s runs past the end of the corpus")
        call = synthesize_call(specs[event.label], float(event.duration_s), seed=seed + index)
        begin = event.start_s * sample_rate
        samples[begin:begin + call.n_samples] = call.samples
        previous_end = event.end_s

    truth = [
        SegmentClassification(source_id=source_id, segment_index=t, start_time_s=float(t), label=label)
        for t, label in enumerate(_truth_labels(events, duration_s))
    ]
    exact = BoutRules(
        grumble_min_consecutive=1,
        alarm_min_consecutive=1,
        grumble_separation_s=rules.grumble_separation_s,
        alarm_separation_s=rules.alarm_separation_s,
        noncall_max_s=rules.noncall_max_s,
        noncall_min_s=rules.noncall_min_s,
    )
    labels = bout_extractor.extract_bouts(truth, exact)

    calls = [e for e in events if e.label in CALL_CLASSES]
    call_bouts = [b for b in labels if b.call_class in CALL_CLASSES]
    if len(call_bouts) != len(calls):
        raise InputError("call events of one class are closer than that class's bout separation")
    for bout in labels:
        problem = rules.violations(bout)
        if problem:
            raise InputError(f"timeline yields an invalid labelled bout: {problem}")

    logger.debug(f"Generated {duration_s} s corpus with {len(events)} events and {len(labels)} bouts")
    return SyntheticCorpus(
        source_id=source_id,
        buffer=AudioBuffer(samples=samples, sample_rate_hz=sample_rate),
        events=events,
        labels=tuple(labels),
    )


def standard_timeline(duration_s: int = 600, seed: int = 0) -> List[CorpusEvent]:
    """Alternating grumble and alarm bouts every 30 s with seeded lengths"""
    rng = np.random.default_rng(seed)
    events = []
    for k, start in enumerate(range(10, duration_s - 20, 30)):
        if k % 2 == 0:
            events.append(CorpusEvent(label=GRUMBLE, start_s=start, duration_s=int(rng.integers(2, 6))))
        else:
            events.append(CorpusEvent(label=ALARM, start_s=start, duration_s=int(rng.integers(3, 7))))
    return events


def noise_overlap_timeline(duration_s: int = 120) -> List[CorpusEvent]:
    """Calls interleaved with movement-noise bursts kept at least 5 s away from them"""
    if duration_s < 110:
        raise InputError(f"the noise-overlap timeline needs at least 110 s, got {duration_s}")
    return [
        CorpusEvent(label=GRUMBLE, start_s=10, duration_s=3),
        CorpusEvent(label="noise", start_s=25, duration_s=3),
        CorpusEvent(label=GRUMBLE, start_s=40, duration_s=2),
        CorpusEvent(label="noise", start_s=55, duration_s=4),
        CorpusEvent(label=ALARM, start_s=75, duration_s=4),
        CorpusEvent(label="noise", start_s=95, duration_s=2),
    ]


def write_corpus(corpus: SyntheticCorpus, directory: Union[str, Path]) -> Tuple[Path, Path]:
    """Layout: <directory>/<source_id> (16-bit WAV) and <directory>/<stem>_labels.csv"""
    directory = Path(directory)
    wav_path = audio_io.write_wav(corpus.buffer, directory / corpus.source_id)
    label_path = bout_extractor.save_bouts(corpus.labels, directory / f"{wav_path.stem}_labels.csv")
    return wav_path, label_path


class AttractorEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    final_state: Tuple[int, ...]
    outcome: str
    label: Optional[str] = None


def _run_dynamics(weights: List[List[float]], bias: List[float], state: List[int],
                  max_passes: int) -> Tuple[List[int], bool]:
    n = len(state)
    for _ in range(max_passes):
        changed = False
        for i in range(n):
            field = bias[i]
            for j in range(n):
                field += weights[i][j] * state[j]
            if field > ZERO_FIELD_TOL and state[i] != 1:
                state[i] = 1
                changed = True
            elif field < -ZERO_FIELD_TOL and state[i] != -1:
                state[i] = -1
                changed = True
        if not changed:
            return state, True
    return state, False


def brute_force_attractors(model: HopfieldModel,
                           max_passes: int = DEFAULT_MAX_PASSES) -> Dict[Tuple[int, ...], AttractorEntry]:
    """Outcome of the asynchronous dynamics from every one of the 2^N states (plain Python loops)"""
    n = model.n_neurons
    if n > BRUTE_FORCE_MAX_NEURONS:
        raise InputError(f"exhaustive enumeration is limited to {BRUTE_FORCE_MAX_NEURONS} neurons, got {n}")

    weights = model.weights.tolist()
    bias = model.bias.tolist()
    stored = {s.pattern.states: s.label for s in model.stored}

    table = {}
    for start in itertools.product((-1, 1), repeat=n):
        final, converged = _run_dynamics(weights, bias, list(start), max_passes)
        final_state = tuple(final)
        label = stored.get(final_state)
        if label is not None:
            outcome = "retrieved"
        else:
            outcome = "spurious" if converged else "non_convergent"
        table[start] = AttractorEntry(final_state=final_state, outcome=outcome, label=label)
    return table


def basin_sizes(table: Dict[Tuple[int, ...], AttractorEntry]) -> Dict[Tuple[int, ...], int]:
    """Number of starting states ending in each final state"""
    sizes: Dict[Tuple[int, ...], int] = {}
    for entry in table.values():
        sizes[entry.final_state] = sizes.get(entry.final_state, 0) + 1
    return sizes
