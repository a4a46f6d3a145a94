"""
Tests for segment and file classification
"""

import pytest

from backend.models.audio import Segment
from backend.models.classification import SegmentClassification
from backend.models.pattern import BipolarPattern, EncoderConfig
from backend.services import audio_io, classifier, fixtures
from backend.utils.errors import BandExceedsNyquist, CapacityExceeded, EmptyAudio, EmptyPeaks, SchemaError

SAMPLE_RATE = 8000


def test_alarm_tone_is_classified_as_alarm(tone_model, tone_930):
    result = classifier.classify_segment(tone_model, Segment.from_buffer(tone_930, "t.wav"))

    assert result.label == "alarm"
    assert result.outcome == "retrieved"
    assert result.outcome_detail == "retrieved:1"


def test_silence_short_circuits_to_unid(tone_model):
    result = classifier.classify_segment(tone_model, Segment.from_buffer(audio_io.silence(1.0, SAMPLE_RATE)))

    assert result.label == "unid"
    assert result.outcome == "empty_peaks"
    assert result.final_state is None


@pytest.mark.parametrize("label", ["grumble", "alarm"])
def test_exemplar_audio_retrieves_its_own_label(model1, label):
    result = classifier.classify_segment(model1, Segment.from_buffer(fixtures.exemplar(label)))

    assert result.label == label


def test_noise_exemplar_under_both_models(model1, model2, noise_exemplar):
    segment = Segment.from_buffer(noise_exemplar)

    assert classifier.classify_segment(model1, segment).label == "grumble"
    assert classifier.classify_segment(model2, segment).label == "noise"


def test_tone_silence_tone(tone_model, tone_930):
    buffer = audio_io.concatenate([tone_930, audio_io.silence(1.0, SAMPLE_RATE), tone_930])

    rows = classifier.classify_file(tone_model, buffer, source_id="tst.wav")

    assert [r.label for r in rows] == ["alarm", "unid", "alarm"]
    assert [r.start_time_s for r in rows] == [0.0, 1.0, 2.0]
    assert {r.source_id for r in rows} == {"tst.wav"}


def test_one_minute_gives_sixty_rows(tone_model):
    rows = classifier.classify_file(tone_model, audio_io.silence(60.0, SAMPLE_RATE))

    assert len(rows) == 60
    assert [r.segment_index for r in rows] == list(range(60))
    assert classifier.outcome_breakdown(rows)["empty_peaks"] == 60


def test_half_second_file(tone_model):
    with pytest.raises(EmptyAudio):
        classifier.classify_file(tone_model, audio_io.silence(0.5, SAMPLE_RATE))


def test_grumble_call_segments(model1):
    call = fixtures.synthesize_call(fixtures.GRUMBLE_CALL, duration_s=3.0, seed=99)

    rows = classifier.classify_file(model1, call)

    assert [r.label for r in rows] == ["grumble"] * 3


@pytest.mark.parametrize("factor", [0.05, 0.3])
def test_label_does_not_depend_on_gain(tone_model, tone_930, factor):
    quiet = Segment.from_buffer(tone_930.scaled(factor))

    assert classifier.classify_segment(tone_model, quiet).label == "alarm"


def test_audio_below_band_nyquist(tone_model):
    low_rate = audio_io.synthesize_tone(300.0, 2.0, 2000, 0.5)

    with pytest.raises(BandExceedsNyquist):
        classifier.classify_file(tone_model, low_rate)


def test_single_tone_exemplars_fire_their_bins(tone_model):
    assert tone_model.pattern_for("grumble").active == (3,)
    assert tone_model.pattern_for("alarm").active == (10,)


def test_three_tone_exemplars_at_34_neurons(tone_320, tone_930, model2_config):
    tone_70 = audio_io.synthesize_tone(70.0, 1.0, SAMPLE_RATE, 0.5)

    model = classifier.store_from_audio(
        [(tone_320, "grumble"), (tone_930, "alarm"), (tone_70, "noise")], model2_config
    )

    assert [model.pattern_for(label).active for label in ("noise", "grumble", "alarm")] == [(1,), (8,), (24,)]
    assert model.capacity_status()["status"] == "within"


def test_three_exemplars_do_not_fit_fourteen_neurons(tone_320, tone_930):
    tone_70 = audio_io.synthesize_tone(70.0, 1.0, SAMPLE_RATE, 0.5)

    with pytest.raises(CapacityExceeded):
        classifier.store_from_audio(
            [(tone_320, "grumble"), (tone_930, "alarm"), (tone_70, "noise")], EncoderConfig()
        )


def test_silent_exemplar_cannot_be_stored(tone_930):
    with pytest.raises(EmptyPeaks):
        classifier.store_from_audio(
            [(tone_930, "alarm"), (audio_io.silence(1.0, SAMPLE_RATE), "grumble")], EncoderConfig()
        )


def test_spurious_census_ranks_end_states():
    state_a = BipolarPattern.from_active(4, [0])
    state_b = BipolarPattern.from_active(4, [1, 2])
    rows = [
        SegmentClassification(segment_index=k, start_time_s=float(k), label="unid", outcome="spurious",
                              passes_used=2, final_state=state)
        for k, state in enumerate([state_b, state_a, state_b])
    ]

    assert classifier.spurious_census(rows) == [("-++-", 2), ("+---", 1)]
    assert classifier.spurious_census(rows, top=1) == [("-++-", 2)]


def test_classification_csv_layout(tone_model, tone_930):
    buffer = audio_io.concatenate([tone_930, audio_io.silence(1.0, SAMPLE_RATE)])
    rows = classifier.classify_file(tone_model, buffer, source_id="rec.wav")

    text = classifier.format_classifications_csv(rows)

    assert text == (
        "source_file,segment_index,start_time_s,label\n"
        "rec.wav,0,0.000,alarm\n"
        "rec.wav,1,1.000,unid\n"
    )


def test_classification_csv_reads_back(tmp_path, tone_model, tone_930):
    rows = classifier.classify_file(tone_model, tone_930, source_id="rec.wav")
    path = classifier.write_classifications_csv(rows, tmp_path / "out" / "rows.csv")

    loaded = classifier.read_classifications_csv(path)

    assert [(r.source_id, r.segment_index, r.start_time_s, r.label) for r in loaded] == [
        ("rec.wav", 0, 0.0, "alarm")
    ]
    assert loaded[0].outcome is None


def test_classification_csv_with_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("file,index,time,label\na.wav,0,0.0,alarm\n")

    with pytest.raises(SchemaError):
        classifier.read_classifications_csv(path)


def test_label_must_agree_with_outcome():
    with pytest.raises(ValueError):
        SegmentClassification(segment_index=0, start_time_s=0.0, label="unid", outcome="retrieved")
    with pytest.raises(ValueError):
        SegmentClassification(segment_index=0, start_time_s=0.0, label="alarm", outcome="spurious")
