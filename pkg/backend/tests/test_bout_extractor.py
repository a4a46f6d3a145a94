"""
Tests for bout extraction and the bout CSV format
"""

from typing import List, Sequence

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backend.models.bout import Bout, BoutRules
from backend.models.classification import SegmentClassification
from backend.services import bout_extractor, classifier
from backend.utils.errors import InputError, InvariantViolation, MixedSources, SchemaError, UnsortedInput

CODES = {"U": "unid", "G": "grumble", "A": "alarm", "N": "noise"}


def stream(codes: str, start: float = 0.0, step: float = 1.0, source: str = "rec.wav") -> List[SegmentClassification]:
    return [
        SegmentClassification(source_id=source, segment_index=k, start_time_s=start + k * step,
                              label=CODES[code])
        for k, code in enumerate(codes.replace(",", ""))
    ]


def spans(bouts: Sequence[Bout]):
    return [(b.call_class, b.start_time_s, b.end_time_s) for b in bouts]


def bout(call_class: str, start: float, end: float, source: str = "rec.wav") -> Bout:
    return Bout(source_id=source, call_class=call_class, start_time_s=start, end_time_s=end)


def test_model1_sequence_gives_two_grumble_bouts():
    bouts = bout_extractor.extract_bouts(stream("U,U,G,G,G,U,U,G,G,G,U,U,U,U,U", start=280))

    assert spans(bouts) == [
        ("non-call", 280.0, 282.0),
        ("grumble", 282.0, 285.0),
        ("non-call", 285.0, 287.0),
        ("grumble", 287.0, 290.0),
        ("non-call", 290.0, 295.0),
    ]


def test_model2_sequence_gives_one_grumble_bout():
    bouts = bout_extractor.extract_bouts(stream("N,N,U,U,N,U,G,G,G,G,U,N,N,N,N", start=280))

    assert spans(bouts) == [
        ("non-call", 280.0, 286.0),
        ("grumble", 286.0, 290.0),
        ("non-call", 290.0, 295.0),
    ]


def test_all_unid_is_one_noncall_bout():
    bouts = bout_extractor.extract_bouts(stream("U" * 15))

    assert spans(bouts) == [("non-call", 0.0, 15.0)]


def test_long_noncall_stretch_is_split():
    bouts = bout_extractor.extract_bouts(stream("U" * 130))

    assert spans(bouts) == [("non-call", 0.0, 60.0), ("non-call", 60.0, 120.0), ("non-call", 120.0, 130.0)]


def test_noncall_split_can_be_disabled():
    bouts = bout_extractor.extract_bouts(stream("U" * 130), BoutRules(noncall_max_s=None))

    assert spans(bouts) == [("non-call", 0.0, 130.0)]


def test_short_noncall_tail_is_dropped():
    rules = BoutRules(noncall_max_s=4.0, noncall_min_s=2.0)

    bouts = bout_extractor.extract_bouts(stream("U" * 9), rules)

    assert spans(bouts) == [("non-call", 0.0, 4.0), ("non-call", 4.0, 8.0)]


@pytest.mark.parametrize("codes, expected", [
    ("G", []),
    ("GG", [("grumble", 0.0, 2.0)]),
    ("AA", []),
    ("AAA", [("alarm", 0.0, 3.0)]),
])
def test_minimum_consecutive_detections(codes, expected):
    bouts = bout_extractor.extract_bouts(stream(codes + "UU"))

    assert [s for s in spans(bouts) if s[0] != "non-call"] == expected


def test_alarm_runs_merge_across_short_gaps():
    bouts = bout_extractor.extract_bouts(stream("AAAUUAAAU"))

    assert spans(bouts) == [("alarm", 0.0, 8.0), ("non-call", 8.0, 9.0)]


def test_alarm_runs_stay_apart_across_long_gaps():
    bouts = bout_extractor.extract_bouts(stream("AAAUUUUUAAA"))

    assert [s for s in spans(bouts) if s[0] == "alarm"] == [("alarm", 0.0, 3.0), ("alarm", 8.0, 11.0)]


def test_grumble_between_alarms_blocks_the_merge():
    bouts = bout_extractor.extract_bouts(stream("AAAGGAAA"))

    assert spans(bouts) == [("alarm", 0.0, 3.0), ("grumble", 3.0, 5.0), ("alarm", 5.0, 8.0)]


def test_short_grumble_gap_merges_at_half_second_segments():
    bouts = bout_extractor.extract_bouts(stream("GGGGUGGGGUUUU", step=0.5))

    assert spans(bouts)[0] == ("grumble", 0.0, 4.5)


@pytest.mark.parametrize("codes, step, expected", [
    ("GG" + "U" * 6, 0.5, []),
    ("GGG" + "U" * 5, 0.5, []),
    ("GGGG" + "U" * 4, 0.5, [("grumble", 0.0, 2.0)]),
    ("AAAAA" + "U" * 3, 0.5, []),
    ("AAAAAA" + "U" * 2, 0.5, [("alarm", 0.0, 3.0)]),
    ("GUU", 2.0, [("grumble", 0.0, 2.0)]),
    ("AUU", 2.0, []),
    ("AAUU", 2.0, [("alarm", 0.0, 4.0)]),
])
def test_minimum_bout_length_is_in_seconds(codes, step, expected):
    bouts = bout_extractor.extract_bouts(stream(codes, step=step))

    assert [s for s in spans(bouts) if s[0] != "non-call"] == expected
    assert all(BoutRules().violations(b) is None for b in bouts)


def test_half_second_bouts_load_back(tmp_path):
    bouts = bout_extractor.extract_bouts(stream("GGUUUUUUGGGGUUUU", step=0.5))

    path = bout_extractor.save_bouts(bouts, tmp_path / "rec_labels.csv")

    assert spans(bouts) == [("non-call", 0.0, 4.0), ("grumble", 4.0, 6.0), ("non-call", 6.0, 8.0)]
    assert bout_extractor.load_labels(path) == bouts


def test_third_second_segments_survive_the_classification_csv(tmp_path):
    rows = stream("U" * 6 + "G" * 6, step=1 / 3)
    direct = bout_extractor.extract_bouts(rows)

    path = classifier.write_classifications_csv(rows, tmp_path / "rows.csv")
    reread = bout_extractor.extract_bouts(classifier.read_classifications_csv(path))

    assert [b.call_class for b in reread] == [b.call_class for b in direct] == ["non-call", "grumble"]
    assert reread[1].start_time_s == pytest.approx(2.0, abs=1e-3)
    assert reread[1].end_time_s == pytest.approx(4.0, abs=1e-3)
    saved = bout_extractor.save_bouts(reread, tmp_path / "bouts.csv")
    assert len(bout_extractor.load_labels(saved)) == 2


def test_explicit_segment_length_must_match_start_times():
    with pytest.raises(UnsortedInput):
        bout_extractor.extract_bouts(stream("UUUU", step=0.5), segment_length_s=1.0)


def test_segment_length_is_inferred_from_start_times():
    bouts = bout_extractor.extract_bouts(stream("UUGG", start=10.0, step=2.0))

    assert spans(bouts) == [("non-call", 10.0, 14.0), ("grumble", 14.0, 18.0)]


def test_empty_stream_gives_no_bouts():
    assert bout_extractor.extract_bouts([]) == []


def test_gap_in_segment_indices():
    rows = stream("UUU")
    rows[2] = rows[2].model_copy(update={"segment_index": 3})

    with pytest.raises(UnsortedInput):
        bout_extractor.extract_bouts(rows)


def test_uneven_start_times():
    rows = stream("UUU")
    rows[2] = rows[2].model_copy(update={"start_time_s": 2.5})

    with pytest.raises(UnsortedInput):
        bout_extractor.extract_bouts(rows)


def test_mixed_sources():
    rows = stream("UU", source="a.wav") + stream("UU", start=2.0, source="b.wav")

    with pytest.raises(MixedSources):
        bout_extractor.extract_bouts(rows)


def test_bout_csv_layout():
    text = bout_extractor.format_bouts_csv([bout("grumble", 286.6, 290.2)])

    assert text == "source_file,class,start_time_s,end_time_s\nrec.wav,grumble,286.600,290.200\n"


def test_saved_bouts_load_back(tmp_path):
    bouts = bout_extractor.extract_bouts(stream("U,U,G,G,G,U,U,A,A,A,U,U,U,U,U", start=280))

    path = bout_extractor.save_bouts(bouts, tmp_path / "labels" / "rec_labels.csv")

    assert bout_extractor.load_labels(path) == bouts


def test_three_row_label_file(tmp_path):
    path = tmp_path / "labels.csv"
    path.write_text(
        "source_file,class,start_time_s,end_time_s\n"
        "rec.wav,non-call,250,286.6\n"
        "rec.wav,GRUMBLE,286.6,290.2\n"
        "rec.wav,non-call,290.2,300\n"
    )

    bouts = bout_extractor.load_labels(path)

    assert spans(bouts) == [("non-call", 250.0, 286.6), ("grumble", 286.6, 290.2), ("non-call", 290.2, 300.0)]


@pytest.mark.parametrize("row, error", [
    ("rec.wav,grumble,12,10", InvariantViolation),
    ("rec.wav,grumble,10,11", InvariantViolation),
    ("rec.wav,non-call,0,90", InvariantViolation),
    ("rec.wav,bark,10,12", SchemaError),
    ("rec.wav,alarm,ten,13", SchemaError),
])
def test_bad_label_rows(tmp_path, row, error):
    path = tmp_path / "labels.csv"
    path.write_text("source_file,class,start_time_s,end_time_s\n" + row + "\n")

    with pytest.raises(error) as info:
        bout_extractor.load_labels(path)

    assert "line 2" in str(info.value)


def test_label_file_with_wrong_columns(tmp_path):
    path = tmp_path / "labels.csv"
    path.write_text("file,label,start,end\nrec.wav,grumble,1,3\n")

    with pytest.raises(SchemaError):
        bout_extractor.load_labels(path)


def test_bouts_from_json_rows():
    bouts = bout_extractor.parse_bouts([
        {"source_file": "rec.wav", "class": "alarm", "start_time_s": 5, "end_time_s": 9},
    ])

    assert bouts == [bout("alarm", 5.0, 9.0)]


def test_json_rows_are_checked():
    with pytest.raises(InputError):
        bout_extractor.parse_bouts([["rec.wav", "alarm", 5, 9]])
    with pytest.raises(InvariantViolation):
        bout_extractor.parse_bouts([{"class": "alarm", "start_time_s": 5, "end_time_s": 6}])


def test_bouts_grouped_by_source():
    groups = bout_extractor.bouts_by_source([bout("alarm", 9, 12, "b.wav"), bout("grumble", 3, 5, "a.wav"),
                                             bout("grumble", 1, 3, "b.wav")])

    assert list(groups) == ["a.wav", "b.wav"]
    assert spans(groups["b.wav"]) == [("grumble", 1.0, 3.0), ("alarm", 9.0, 12.0)]


def from_labels(labels: Sequence[str]) -> List[SegmentClassification]:
    return [SegmentClassification(source_id="rec.wav", segment_index=k, start_time_s=float(k), label=label)
            for k, label in enumerate(labels)]


def render(bouts: Sequence[Bout], n: int) -> List[str]:
    labels = ["unid"] * n
    for b in bouts:
        if b.call_class != "non-call":
            for k in range(int(b.start_time_s), int(b.end_time_s)):
                labels[k] = b.call_class
    return labels


label_codes = st.text(alphabet="UGAN", min_size=1, max_size=200)


@settings(deadline=None)
@given(codes=label_codes)
def test_bouts_are_ordered_disjoint_and_valid(codes):
    rules = BoutRules()

    bouts = bout_extractor.extract_bouts(stream(codes), rules)

    for a, b in zip(bouts, bouts[1:]):
        assert a.end_time_s <= b.start_time_s
    assert all(rules.violations(b) is None for b in bouts)
    assert all(b.duration_s <= 60.0 for b in bouts if b.call_class == "non-call")
    assert sum(b.duration_s for b in bouts) == len(codes)


@settings(deadline=None)
@given(codes=label_codes)
def test_every_qualifying_run_is_inside_a_bout(codes):
    rules = BoutRules()
    labels = [CODES[c] for c in codes]

    bouts = bout_extractor.extract_bouts(stream(codes), rules)

    for call_class in ("grumble", "alarm"):
        for start, end in bout_extractor.label_runs(labels, call_class):
            if end - start < rules.min_segments(call_class, 1.0):
                continue
            assert any(b.call_class == call_class and b.start_time_s <= start and end <= b.end_time_s
                       for b in bouts)


@settings(deadline=None)
@given(codes=label_codes)
def test_extracting_rendered_bouts_gives_the_same_bouts(codes):
    bouts = bout_extractor.extract_bouts(stream(codes))

    again = bout_extractor.extract_bouts(from_labels(render(bouts, len(codes))))

    assert spans(again) == spans(bouts)
