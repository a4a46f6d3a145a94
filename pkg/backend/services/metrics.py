"""
Metrics service - bout matching and Table-style classification reports
"""

import io
import logging
from typing import Dict, Optional, Sequence, Tuple

import orjson
from rich.console import Console
from rich.table import Table

from backend.models.bout import BOUT_CLASSES, TIME_TOL, Bout
from backend.models.report import ClassCounts, ClassificationReport, ClassMetrics, ConfusionCounts
from backend.services.bout_extractor import bouts_by_source
from backend.utils.errors import InputError, MixedSources

logger = logging.getLogger(__name__)

MIN_MATCH_OVERLAP_S = 1.0
ACCURACY_DEFINITION = "micro precision: sum(tp) / (sum(tp) + sum(fp)) over all classes"


def _single_source(predicted: Sequence[Bout], labelled: Sequence[Bout]) -> None:
    sources = {b.source_id for b in predicted} | {b.source_id for b in labelled}
    if len(sources) > 1:
        raise MixedSources(f"bouts from {len(sources)} sources cannot be matched together: {sorted(sources)}")


def match_bouts(predicted: Sequence[Bout], labelled: Sequence[Bout],
                min_overlap_s: float = MIN_MATCH_OVERLAP_S) -> ConfusionCounts:
    """Greedy one-to-one matching per class, earliest start first"""
    _single_source(predicted, labelled)

    per_class: Dict[str, ClassCounts] = {}
    for call_class in BOUT_CLASSES:
        preds = sorted((b for b in predicted if b.call_class == call_class),
                       key=lambda b: (b.start_time_s, b.end_time_s))
        labels = sorted((b for b in labelled if b.call_class == call_class),
                        key=lambda b: (b.start_time_s, b.end_time_s))
        used = [False] * len(labels)

        tp = 0
        for pred in preds:
            for j, label in enumerate(labels):
                if not used[j] and pred.overlap_s(label) >= min_overlap_s - TIME_TOL:
                    used[j] = True
                    tp += 1
                    break
        per_class[call_class] = ClassCounts(tp=tp, fp=len(preds) - tp, fn=len(labels) - tp)

    return ConfusionCounts(per_class=per_class)


def match_recordings(predicted: Sequence[Bout], labelled: Sequence[Bout],
                     min_overlap_s: float = MIN_MATCH_OVERLAP_S) -> ConfusionCounts:
    """match_bouts per source file, summed"""
    pred_groups = bouts_by_source(predicted)
    label_groups = bouts_by_source(labelled)
    total = ConfusionCounts()
    for source in sorted(set(pred_groups) | set(label_groups)):
        counts = match_bouts(pred_groups.get(source, []), label_groups.get(source, []), min_overlap_s)
        logger.debug(f"{source}: {counts.model_dump()}")
        total = total + counts
    return total


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def f1_score(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def report(counts: ConfusionCounts) -> ClassificationReport:
    """Per-class P/R/F1 and overall accuracy, kept at full precision"""
    per_class = {}
    for call_class in BOUT_CLASSES:
        c = counts.per_class[call_class]
        precision = _ratio(c.tp, c.tp + c.fp)
        recall = _ratio(c.tp, c.support)
        per_class[call_class] = ClassMetrics(
            precision=precision, recall=recall, f1=f1_score(precision, recall), support=c.support
        )

    total_tp = sum(c.tp for c in counts.per_class.values())
    total_fp = sum(c.fp for c in counts.per_class.values())
    total_fn = sum(c.fn for c in counts.per_class.values())
    return ClassificationReport(
        per_class=per_class,
        overall_accuracy=_ratio(total_tp, total_tp + total_fp),
        total_tp=total_tp,
        total_fp=total_fp,
        total_fn=total_fn,
    )


def counts_from_scores(rows: Dict[str, Tuple[float, float, int]]) -> ConfusionCounts:
    """Rebuild integer counts from published (precision, recall, support) rows.

    tp = round(recall * support), fp = round(tp * (1 - precision) / precision).
    """
    per_class = {}
    for call_class, (precision, recall, support) in rows.items():
        if not 0 < precision <= 1 or not 0 <= recall <= 1 or support < 0:
            raise InputError(f"invalid score row for {call_class}: P={precision}, R={recall}, n={support}")
        tp = int(round(recall * support))
        fp = int(round(tp * (1 - precision) / precision))
        per_class[call_class] = ClassCounts(tp=tp, fp=fp, fn=support - tp)
    return ConfusionCounts(per_class=per_class)


def render_report_table(result: ClassificationReport, title: Optional[str] = None) -> str:
    """Aligned plain-text table: class rows, P/R/F1/support columns, accuracy footer"""
    table = Table(title=title, show_footer=False, box=None, pad_edge=False)
    table.add_column("class", justify="left")
    for name in ("precision", "recall", "f1-score", "support"):
        table.add_column(name, justify="right")
    for call_class, m in result.per_class.items():
        table.add_row(call_class, f"{m.precision:.2f}", f"{m.recall:.2f}", f"{m.f1:.2f}", str(m.support))

    buffer = io.StringIO()
    console = Console(file=buffer, width=80, color_system=None, force_terminal=False)
    console.print(table)
    console.print(f"\nOverall Accuracy: {result.overall_accuracy:.2f}")
    return buffer.getvalue()


def report_document(result: ClassificationReport, counts: Optional[ConfusionCounts] = None) -> Dict[str, object]:
    document: Dict[str, object] = {
        "classes": {c: m.model_dump() for c, m in result.per_class.items()},
        "overall_accuracy": result.overall_accuracy,
        "overall_accuracy_definition": ACCURACY_DEFINITION,
        "totals": {"tp": result.total_tp, "fp": result.total_fp, "fn": result.total_fn},
    }
    if counts is not None:
        document["counts"] = {c: k.model_dump() for c, k in counts.per_class.items()}
    return document


def report_json(result: ClassificationReport, counts: Optional[ConfusionCounts] = None) -> bytes:
    """Machine-readable report"""
    return orjson.dumps(report_document(result, counts),
                        option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS) + b"\n"


def evaluate(predicted: Sequence[Bout], labelled: Sequence[Bout]) -> Tuple[ConfusionCounts, ClassificationReport]:
    """Match per recording and report"""
    counts = match_recordings(predicted, labelled)
    result = report(counts)
    logger.info(f"Evaluated {len(predicted)} predicted against {len(labelled)} labelled bouts: "
                f"accuracy {result.overall_accuracy:.3f}")
    return counts, result
