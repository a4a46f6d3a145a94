"""
Bout extractor service - per-segment labels to call and non-call bouts
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
from pydantic import ValidationError

from backend.models.bout import BOUT_CLASSES, CALL_CLASSES, NON_CALL, Bout, BoutRules
from backend.models.classification import SegmentClassification
from backend.utils.errors import (
    InputError,
    InvariantViolation,
    IoError,
    MixedSources,
    SchemaError,
    UnsortedInput,
)

logger = logging.getLogger(__name__)

BOUT_COLUMNS = ["source_file", "class", "start_time_s", "end_time_s"]

# (first position, one past last position) in segment units
Run = Tuple[int, int]

# two start times each rounded to three decimals
START_TIME_TOL = 1e-3 + 1e-6


def _check_stream(classifications: Sequence[SegmentClassification],
                  segment_length_s: Optional[float]) -> float:
    """Single source, contiguous indices, evenly spaced start times; returns the segment length"""
    sources = {c.source_id for c in classifications}
    if len(sources) > 1:
        raise MixedSources(f"classifications mix {len(sources)} sources: {sorted(sources)}")

    first = classifications[0]
    for k, c in enumerate(classifications):
        if c.segment_index != first.segment_index + k:
            raise UnsortedInput(
                f"segment {c.segment_index} found at position {k}; expected {first.segment_index + k}",
                path=c.source_id or None,
            )

    if segment_length_s is None:
        if len(classifications) > 1:
            # mean spacing; start times may carry three-decimal rounding
            span = classifications[-1].start_time_s - first.start_time_s
            segment_length_s = span / (len(classifications) - 1)
        else:
            segment_length_s = 1.0
    if segment_length_s <= 0:
        raise UnsortedInput("start times must increase with segment index", path=first.source_id or None)

    for k, c in enumerate(classifications):
        expected = first.start_time_s + k * segment_length_s
        if abs(c.start_time_s - expected) > START_TIME_TOL:
            raise UnsortedInput(
                f"segment {c.segment_index} starts at {c.start_time_s:.3f} s, expected {expected:.3f} s",
                path=c.source_id or None,
            )
    return segment_length_s


def label_runs(labels: Sequence[str], label: str) -> List[Run]:
    """Maximal runs of one label"""
    runs: List[Run] = []
    start = None
    for k, value in enumerate(labels):
        if value == label and start is None:
            start = k
        elif value != label and start is not None:
            runs.append((start, k))
            start = None
    if start is not None:
        runs.append((start, len(labels)))
    return runs


def _merge_runs(runs: List[Run], blockers: List[Run], max_gap: float) -> List[Run]:
    """Join neighbouring runs whose gap is shorter than max_gap segments and holds no blocker"""
    merged: List[Run] = []
    for run in runs:
        if merged:
            prev_start, prev_end = merged[-1]
            gap = run[0] - prev_end
            blocked = any(prev_end <= b_start and b_end <= run[0] for b_start, b_end in blockers)
            if gap < max_gap and not blocked:
                merged[-1] = (prev_start, run[1])
                continue
        merged.append(run)
    return merged


def call_runs(labels: Sequence[str], rules: BoutRules, segment_length_s: float) -> Dict[str, List[Run]]:
    """Qualifying runs per call class, merged across short gaps"""
    qualifying = {
        call_class: [r for r in label_runs(labels, call_class)
                     if r[1] - r[0] >= rules.min_segments(call_class, segment_length_s)]
        for call_class in CALL_CLASSES
    }
    result = {}
    for call_class in CALL_CLASSES:
        blockers = [r for other in CALL_CLASSES if other != call_class for r in qualifying[other]]
        max_gap = rules.separation_s(call_class) / segment_length_s - 1e-9
        result[call_class] = _merge_runs(qualifying[call_class], blockers, max_gap)
    return result


def _split_noncall(start: int, end: int, rules: BoutRules, segment_length_s: float) -> List[Run]:
    """Greedy left-to-right pieces of at most noncall_max_s; a short tail is dropped"""
    min_len = math.ceil(rules.noncall_min_s / segment_length_s - 1e-9)
    if rules.noncall_max_s is None:
        max_len = end - start
    else:
        max_len = max(1, math.floor(rules.noncall_max_s / segment_length_s + 1e-9))

    pieces = []
    for piece_start in range(start, end, max_len):
        piece_end = min(piece_start + max_len, end)
        if piece_end - piece_start >= min_len:
            pieces.append((piece_start, piece_end))
    return pieces


def extract_bouts(classifications: Sequence[SegmentClassification], rules: Optional[BoutRules] = None,
                  segment_length_s: Optional[float] = None) -> List[Bout]:
    """Call bouts from consecutive detections plus the non-call bouts between them.

    The segment length is read from the start times unless given. End times
    are exclusive: detections at 287, 288 and 289 s form the bout [287, 290).
    """
    if not classifications:
        return []
    rules = rules or BoutRules()
    segment_length_s = _check_stream(classifications, segment_length_s)

    source_id = classifications[0].source_id
    labels = [c.label for c in classifications]
    # boundary k is the start of segment k; the last one closes the final segment
    boundaries = [c.start_time_s for c in classifications]
    boundaries.append(boundaries[-1] + segment_length_s)

    def to_bout(call_class: str, run: Run) -> Bout:
        return Bout(
            source_id=source_id,
            call_class=call_class,
            start_time_s=round(boundaries[run[0]], 6),
            end_time_s=round(boundaries[run[1]], 6),
        )

    bouts: List[Bout] = []
    covered = [False] * len(labels)
    for call_class, runs in call_runs(labels, rules, segment_length_s).items():
        for run in runs:
            bouts.append(to_bout(call_class, run))
            for k in range(run[0], run[1]):
                covered[k] = True

    for start, end in label_runs(["call" if c else "" for c in covered], ""):
        for piece in _split_noncall(start, end, rules, segment_length_s):
            bouts.append(to_bout(NON_CALL, piece))

    bouts.sort(key=lambda b: (b.start_time_s, BOUT_CLASSES.index(b.call_class)))
    logger.debug(f"{source_id or '<stream>'}: {len(labels)} segments -> {len(bouts)} bouts")
    return bouts


def bouts_by_source(bouts: Sequence[Bout]) -> Dict[str, List[Bout]]:
    """Group bouts per recording, each group sorted by start time"""
    groups: Dict[str, List[Bout]] = {}
    for bout in bouts:
        groups.setdefault(bout.source_id, []).append(bout)
    return {source: sorted(group, key=lambda b: (b.start_time_s, b.call_class))
            for source, group in sorted(groups.items())}


def bouts_to_frame(bouts: Sequence[Bout]) -> pd.DataFrame:
    return pd.DataFrame([b.to_row() for b in bouts], columns=BOUT_COLUMNS).astype(
        {"start_time_s": "float64", "end_time_s": "float64"}
    )


def format_bouts_csv(bouts: Sequence[Bout]) -> str:
    return bouts_to_frame(bouts).to_csv(index=False, lineterminator="\n", float_format="%.3f")


def save_bouts(bouts: Sequence[Bout], path: Union[str, Path]) -> Path:
    """Write bouts as CSV; times are rounded to milliseconds"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(format_bouts_csv(bouts).encode("utf-8"))
    except OSError as e:
        raise IoError(f"cannot write bout CSV: {e.strerror or e}", path=str(path)) from e
    return path


def _parse_row(record, line: int, source: str) -> Tuple[str, str, float, float]:
    call_class = str(record[1]).strip().lower()
    if call_class not in BOUT_CLASSES:
        raise SchemaError(f"line {line}: unknown bout class '{record[1]}'", path=source)
    try:
        start, end = float(record[2]), float(record[3])
    except (TypeError, ValueError) as e:
        raise SchemaError(f"line {line}: bout times must be numbers", path=source) from e
    if math.isnan(start) or math.isnan(end):
        raise SchemaError(f"line {line}: bout times must not be empty", path=source)
    return str(record[0]), call_class, start, end


def load_labels(path: Union[str, Path], rules: Optional[BoutRules] = None) -> List[Bout]:
    """Read a bout CSV and check every row against the bout invariants"""
    rules = rules or BoutRules()
    source = str(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except OSError as e:
        raise IoError(f"cannot read bout CSV: {e.strerror or e}", path=source) from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaError(f"unreadable bout CSV: {e}", path=source) from e

    if list(frame.columns) != BOUT_COLUMNS:
        raise SchemaError(f"expected columns {BOUT_COLUMNS}, got {list(frame.columns)}", path=source)

    bouts = []
    for line, record in enumerate(frame.itertuples(index=False, name=None), start=2):
        source_id, call_class, start, end = _parse_row(record, line, source)
        try:
            bout = Bout(source_id=source_id, call_class=call_class, start_time_s=start, end_time_s=end)
        except ValidationError as e:
            raise InvariantViolation(f"line {line}: {e.errors()[0]['msg']}", path=source) from e
        problem = rules.violations(bout)
        if problem:
            raise InvariantViolation(f"line {line}: {problem}", path=source)
        bouts.append(bout)

    logger.debug(f"Loaded {len(bouts)} labelled bouts from {source}")
    return bouts


def parse_bouts(rows: Sequence[Dict[str, object]], rules: Optional[BoutRules] = None) -> List[Bout]:
    """Bouts from JSON-style rows (HTTP payloads), with the same checks as load_labels"""
    rules = rules or BoutRules()
    if not isinstance(rows, (list, tuple)):
        raise InputError("bouts must be given as a list")
    bouts = []
    for index, row in enumerate(rows):
        if not isinstance(row, dict):
            raise InputError(f"bout {index}: expected an object")
        data = dict(row)
        if "source_file" in data:
            data["source_id"] = data.pop("source_file")
        try:
            bout = Bout.model_validate(data)
        except ValidationError as e:
            raise InputError(f"bout {index}: {e.errors()[0]['msg']}") from e
        problem = rules.violations(bout)
        if problem:
            raise InvariantViolation(f"bout {index}: {problem}")
        bouts.append(bout)
    return bouts
