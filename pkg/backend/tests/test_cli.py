"""
Tests for the command line front end
"""

import logging
from pathlib import Path

import orjson
import pytest

from backend import cli
from backend.models.bout import BoutRules
from backend.models.classification import SegmentClassification
from backend.services import audio_io, bout_extractor, classifier, fixtures, hopfield_core
from backend.services.fixtures import CorpusEvent


@pytest.fixture(autouse=True)
def _reset_logging():
    yield
    # drop the handlers the CLI bound to this test's captured stderr
    logging.basicConfig(handlers=[logging.NullHandler()], force=True)


@pytest.fixture
def model_file(tmp_path, model1):
    return str(hopfield_core.save_model(model1, tmp_path / "model1.json"))


@pytest.fixture
def corpus_files(tmp_path):
    events = [CorpusEvent(label="grumble", start_s=3, duration_s=3), CorpusEvent(label="alarm", start_s=10, duration_s=4)]
    corpus = fixtures.generate_corpus(events, 20, source_id="short.wav")
    wav, labels = fixtures.write_corpus(corpus, tmp_path / "corpus")
    return str(wav), str(labels)


def exemplar_files(tmp_path, labels):
    return [f"{label}={audio_io.write_wav(fixtures.exemplar(label), tmp_path / f'{label}.wav')}" for label in labels]


def test_store_writes_a_model(tmp_path, capsys):
    args = ["store", "--out", str(tmp_path / "m.json")]
    for item in exemplar_files(tmp_path, ["grumble", "alarm"]):
        args += ["--exemplar", item]

    assert cli.main(args) == 0

    out = capsys.readouterr().out
    assert "labels: grumble, alarm" in out
    assert "capacity bound: 1" in out and "status: boundary" in out
    assert hopfield_core.load_model(tmp_path / "m.json").labels == ["grumble", "alarm"]


def test_store_three_patterns_needs_more_neurons(tmp_path, capsys):
    args = ["store", "--out", str(tmp_path / "m2.json")]
    for item in exemplar_files(tmp_path, ["grumble", "alarm", "noise"]):
        args += ["--exemplar", item]

    assert cli.main(args) == 1
    assert "increase the number of neurons" in capsys.readouterr().err
    assert cli.main(args + ["--neurons", "34"]) == 0


def test_store_without_exemplars(tmp_path, capsys):
    assert cli.main(["store", "--out", str(tmp_path / "m.json")]) == 1
    assert "no exemplars" in capsys.readouterr().err


def test_classify_bouts_evaluate(tmp_path, capsys, model_file, corpus_files):
    wav, labels = corpus_files
    rows_csv = str(tmp_path / "rows.csv")
    bouts_csv = str(tmp_path / "bouts.csv")
    report_json = str(tmp_path / "report.json")

    assert cli.main(["classify", wav, "--model", model_file, "--out", rows_csv, "--workers", "1"]) == 0
    rows = Path(rows_csv).read_text().splitlines()
    assert rows[0] == "source_file,segment_index,start_time_s,label"
    assert len(rows) == 21
    assert rows[4] == "short.wav,3,3.000,grumble"

    assert cli.main(["bouts", rows_csv, "--out", bouts_csv]) == 0
    assert Path(bouts_csv).read_text() == Path(labels).read_text()

    assert cli.main(["evaluate", bouts_csv, labels, "--json", report_json]) == 0
    out = capsys.readouterr().out
    assert "Overall Accuracy: 1.00" in out
    assert orjson.loads(Path(report_json).read_bytes())["overall_accuracy"] == 1.0


def test_classify_expands_globs(tmp_path, model_file, tone_930):
    for name in ("b.wav", "a.wav"):
        audio_io.write_wav(tone_930, tmp_path / "in" / name)

    assert cli.main(["classify", str(tmp_path / "in" / "*.wav"), "--model", model_file,
                     "--out", str(tmp_path / "rows.csv")]) == 0

    lines = (tmp_path / "rows.csv").read_text().splitlines()
    assert [line.split(",")[0] for line in lines[1:]] == ["a.wav", "b.wav"]


def test_classify_without_inputs(tmp_path, capsys, model_file):
    assert cli.main(["classify", "--model", model_file, "--out", str(tmp_path / "rows.csv")]) == 1
    assert "no input files" in capsys.readouterr().err


def test_classify_reports_bad_files_but_keeps_going(tmp_path, capsys, model_file, tone_930):
    good = audio_io.write_wav(tone_930, tmp_path / "good.wav")

    code = cli.main(["classify", str(good), str(tmp_path / "gone.wav"), "--model", model_file,
                     "--out", str(tmp_path / "rows.csv")])

    assert code == 1
    assert "gone.wav" in capsys.readouterr().err
    assert len((tmp_path / "rows.csv").read_text().splitlines()) == 2


def test_corrupt_model_file(tmp_path, capsys, tone_930):
    bad_model = tmp_path / "bad.json"
    bad_model.write_text("[]")
    wav = audio_io.write_wav(tone_930, tmp_path / "t.wav")

    assert cli.main(["classify", str(wav), "--model", str(bad_model), "--out", str(tmp_path / "r.csv")]) == 1
    assert "model document" in capsys.readouterr().err


def test_unexpected_failure_exits_with_two(tmp_path, monkeypatch, capsys, model_file, tone_930):
    def explode(*_args, **_kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli.hopfield_core, "load_model", explode)
    wav = audio_io.write_wav(tone_930, tmp_path / "t.wav")

    assert cli.main(["classify", str(wav), "--model", model_file, "--out", str(tmp_path / "r.csv")]) == 2
    assert "internal error: boom" in capsys.readouterr().err


def test_bench_reports_throughput(tmp_path, capsys, model_file, corpus_files):
    wav, _ = corpus_files

    assert cli.main(["bench", wav, "--model", model_file, "--out", str(tmp_path / "bench.json")]) == 0

    document = orjson.loads(capsys.readouterr().out)
    assert document["segments"] == 20
    assert document["audio_seconds"] == 20.0
    assert document["segments_per_second"] > 0
    assert document["outcomes"]["empty_peaks"] == 13
    assert document["labels"] == {"alarm": 4, "grumble": 3, "unid": 13}
    assert orjson.loads((tmp_path / "bench.json").read_bytes()) == document


def test_images(tmp_path, model_file, tone_930):
    wav = audio_io.write_wav(tone_930, tmp_path / "t.wav")

    assert cli.main(["spectrogram", str(wav), "--out", str(tmp_path / "s.png"), "--max-freq", "1300"]) == 0
    assert cli.main(["network", "--model", model_file, "--out", str(tmp_path / "n.png")]) == 0
    assert (tmp_path / "s.png").stat().st_size > 0
    assert (tmp_path / "n.png").stat().st_size > 0


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--version"])

    assert info.value.code == 0
    assert cli.__version__ in capsys.readouterr().out


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["bouts"], ["classify", "--workers", "many"]])
def test_usage_errors_exit_with_one(argv, capsys):
    assert cli.main(argv) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_unknown_log_level(tmp_path, capsys, model_file):
    assert cli.main(["--log-level", "loud", "network", "--model", model_file, "--out", str(tmp_path / "n.png")]) == 1
    assert "log level" in capsys.readouterr().err


def test_config_file_supplies_defaults(tmp_path, model_file, tone_930):
    wav = audio_io.write_wav(tone_930, tmp_path / "t.wav")
    conf = tmp_path / "run.conf"
    conf.write_text(f"model_path = {model_file}\ninputs = {wav}\noutput = {tmp_path / 'rows.csv'}\n")

    assert cli.main(["--config", str(conf), "classify"]) == 0
    assert (tmp_path / "rows.csv").exists()


def write_rows(path, labels, step):
    rows = [SegmentClassification(source_id="r.wav", segment_index=k, start_time_s=k * step, label=label)
            for k, label in enumerate(labels)]
    return str(classifier.write_classifications_csv(rows, path))


def test_bouts_from_third_second_segments(tmp_path, capsys):
    rows_csv = write_rows(tmp_path / "rows.csv", ["unid"] * 6 + ["grumble"] * 6, 1 / 3)

    assert cli.main(["bouts", rows_csv, "--out", str(tmp_path / "bouts.csv")]) == 0
    assert "(grumble 1, alarm 0, non-call 1)" in capsys.readouterr().out

    bouts = bout_extractor.load_labels(tmp_path / "bouts.csv")
    assert [b.call_class for b in bouts] == ["non-call", "grumble"]


def test_bouts_segment_length_flag_is_used(tmp_path, capsys):
    rows_csv = write_rows(tmp_path / "rows.csv", ["grumble"] * 4 + ["unid"] * 4, 0.5)

    assert cli.main(["bouts", rows_csv, "--out", str(tmp_path / "a.csv"), "--segment-length", "0.5"]) == 0
    assert cli.main(["bouts", rows_csv, "--out", str(tmp_path / "b.csv"), "--segment-length", "1.0"]) == 1
    assert "expected" in capsys.readouterr().err


def test_bouts_noncall_max_zero_is_unbounded(tmp_path):
    rows_csv = write_rows(tmp_path / "rows.csv", ["unid"] * 70, 1.0)

    assert cli.main(["bouts", rows_csv, "--out", str(tmp_path / "capped.csv")]) == 0
    assert cli.main(["bouts", rows_csv, "--out", str(tmp_path / "open.csv"), "--noncall-max", "0"]) == 0

    capped = bout_extractor.load_labels(tmp_path / "capped.csv")
    assert [b.duration_s for b in capped] == [60.0, 10.0]
    opened = bout_extractor.load_labels(tmp_path / "open.csv", BoutRules(noncall_max_s=None))
    assert [(b.start_time_s, b.end_time_s) for b in opened] == [(0.0, 70.0)]
