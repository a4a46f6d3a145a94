"""
Command line front end - store, classify, bouts, evaluate, spectrogram, bench, network, serve
"""

import argparse
import glob
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import orjson
from rich.console import Console

from backend.models.bout import BOUT_CLASSES
from backend.models.config import RunConfig
from backend.models.spectrum import SpectralParams
from backend.services import (
    audio_io,
    bout_extractor,
    classifier,
    hopfield_core,
    metrics,
    plotting,
    settings,
)
from backend.services.pipeline import ClassificationCoordinator
from backend.utils.errors import (
    EXIT_INTERNAL_ERROR,
    EXIT_OK,
    HopfieldAudioError,
    InputError,
    exit_code_for,
)
from backend.utils.logging_setup import configure_logging
from backend.utils.validation import LOG_LEVELS

__version__ = "1.0.0"
PROG = "hopfield-call-monitor"

logger = logging.getLogger("cli")
console = Console(highlight=False, markup=False, soft_wrap=True)


class CliParser(argparse.ArgumentParser):
    """Usage errors are input errors (exit code 1)"""

    def error(self, message: str):
        raise InputError(message)


def _write_json(document: Dict[str, Any], out: Optional[str]) -> None:
    payload = orjson.dumps(document, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS) + b"\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_bytes(payload)
    sys.stdout.write(payload.decode("utf-8"))


def expand_inputs(patterns: Sequence[str]) -> List[str]:
    """Expand globs in order, dropping duplicates"""
    paths: List[str] = []
    for pattern in patterns:
        matches = sorted(glob.glob(pattern)) if any(ch in pattern for ch in "*?[") else [pattern]
        for match in matches:
            if match not in paths:
                paths.append(match)
    return paths


def _config(args: argparse.Namespace, **overrides: Any) -> RunConfig:
    common = {
        "band_low_hz": getattr(args, "band_low", None),
        "band_high_hz": getattr(args, "band_high", None),
        "threshold": getattr(args, "threshold", None),
        "n_neurons": getattr(args, "neurons", None),
        "segment_length_s": getattr(args, "segment_length", None),
        "fft_length": getattr(args, "fft_length", None),
        "window": getattr(args, "window", None),
        "overlap": getattr(args, "overlap", None),
        "max_passes": getattr(args, "max_passes", None),
        "capacity_policy": getattr(args, "capacity_policy", None),
        "workers": getattr(args, "workers", None),
        "grumble_min_consecutive": getattr(args, "grumble_min", None),
        "alarm_min_consecutive": getattr(args, "alarm_min", None),
        "grumble_separation_s": getattr(args, "grumble_separation", None),
        "alarm_separation_s": getattr(args, "alarm_separation", None),
        "noncall_max_s": getattr(args, "noncall_max", None),
    }
    common.update(overrides)
    return settings.load_run_config(args.config, overrides=common)


def cmd_store(args: argparse.Namespace) -> int:
    exemplars = None
    if args.exemplar:
        try:
            exemplars = [e for item in args.exemplar for e in settings.parse_exemplars(item)]
        except ValueError as e:
            raise InputError(str(e)) from e
    config = _config(args, exemplars=exemplars, model_path=args.out)
    if len(config.exemplars) == 0:
        raise InputError("no exemplars given; use --exemplar label=path")
    if not config.model_path:
        raise InputError("no model output path; use --out")

    buffers = [(audio_io.read_wav(e.path), e.label) for e in config.exemplars]
    started = time.perf_counter()
    model = classifier.store_from_audio(buffers, config.encoder_config(), config.spectral_params(),
                                        config.capacity_policy)
    store_ms = (time.perf_counter() - started) * 1000.0
    path = hopfield_core.save_model(model, config.model_path)

    status = model.capacity_status()
    logger.info(f"Stored {model.n_patterns} patterns in {store_ms:.2f} ms")
    console.print(f"model: {path}")
    console.print(f"labels: {', '.join(model.labels)}")
    console.print(f"neurons: {status['n_neurons']}  patterns: {status['n_patterns']}  "
                  f"capacity bound: {status['bound']}  status: {status['status']} "
                  f"(policy {status['policy']})")
    console.print(f"store time: {store_ms:.2f} ms")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    config = _config(args, model_path=args.model, inputs=args.inputs or None, output=args.out)
    paths = expand_inputs(config.inputs)
    if not paths:
        raise InputError("no input files")
    if not config.output:
        raise InputError("no output CSV; use --out")
    if not config.model_path:
        raise InputError("no model file; use --model or HNN_MODEL_PATH")

    model = hopfield_core.load_model(config.model_path)
    coordinator = ClassificationCoordinator(model, config.spectral_params(), config.max_passes, config.workers)
    started = time.perf_counter()
    results = coordinator.run(paths)
    elapsed = time.perf_counter() - started

    rows = [row for result in results for row in result.classifications]
    classifier.write_classifications_csv(rows, config.output)

    for label, count in classifier.spurious_census(rows, top=5):
        logger.info(f"Spurious state {label} reached {count} times")
    rate = len(rows) / elapsed if elapsed > 0 else float("inf")
    console.print(f"{len(rows)} segments from {sum(1 for r in results if r.ok)} files -> {config.output}")
    console.print(f"throughput: {rate:.1f} segments/s")

    failed = [r for r in results if not r.ok]
    for result in failed:
        print(f"error: {result.error}", file=sys.stderr)
    return max((r.exit_code for r in failed), default=EXIT_OK)


def cmd_bouts(args: argparse.Namespace) -> int:
    config = _config(args)
    rows = classifier.read_classifications_csv(args.classifications)
    by_source: Dict[str, List] = {}
    for row in rows:
        by_source.setdefault(row.source_id, []).append(row)

    bouts = []
    for source in sorted(by_source):
        stream = sorted(by_source[source], key=lambda r: r.segment_index)
        # an explicit flag wins; otherwise multi-row streams infer it from their start times
        length = args.segment_length
        if length is None and len(stream) == 1:
            length = config.segment_length_s
        bouts.extend(bout_extractor.extract_bouts(stream, config.bout_rules(), segment_length_s=length))

    bout_extractor.save_bouts(bouts, args.out)
    counts = ", ".join(f"{c} {sum(1 for b in bouts if b.call_class == c)}" for c in BOUT_CLASSES)
    console.print(f"{len(bouts)} bouts -> {args.out} ({counts})")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _config(args)
    rules = config.bout_rules()
    predicted = bout_extractor.load_labels(args.predicted, rules)
    labelled = bout_extractor.load_labels(args.labels, rules)
    counts, result = metrics.evaluate(predicted, labelled)
    console.print(metrics.render_report_table(result), end="")
    if args.json:
        path = Path(args.json)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(metrics.report_json(result, counts))
    return EXIT_OK


def cmd_spectrogram(args: argparse.Namespace) -> int:
    config = _config(args)
    buffer = audio_io.read_wav(args.wav)
    params = SpectralParams(fft_length=config.fft_length, window=config.window, overlap=config.overlap)
    path = plotting.spectrogram_image(buffer, args.out, params, max_freq_hz=args.max_freq,
                                      title=Path(args.wav).name)
    console.print(f"spectrogram -> {path}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    """Throughput on in-memory audio; decode time is reported separately"""
    config = _config(args, model_path=args.model)
    if not config.model_path:
        raise InputError("no model file; use --model or HNN_MODEL_PATH")
    model = hopfield_core.load_model(config.model_path)

    started = time.perf_counter()
    buffer = audio_io.read_wav(args.wav)
    decode_s = time.perf_counter() - started

    patterns = [(s.pattern, s.label) for s in model.stored]
    started = time.perf_counter()
    hopfield_core.store(patterns, model.encoder_config, model.capacity_policy)
    store_ms = (time.perf_counter() - started) * 1000.0

    params = config.spectral_params()
    segments = audio_io.segment(buffer, params.segment_length_s, source_id=Path(args.wav).name)
    started = time.perf_counter()
    rows = [classifier.classify_segment(model, s, params, config.max_passes) for s in segments]
    classify_s = time.perf_counter() - started

    rate = len(rows) / classify_s if classify_s > 0 else float("inf")
    audio_s = len(rows) * params.segment_length_s
    document = {
        "segments": len(rows),
        "audio_seconds": audio_s,
        "decode_ms": decode_s * 1000.0,
        "classify_seconds": classify_s,
        "segments_per_second": rate,
        "audio_hours_per_minute": rate * params.segment_length_s * 60.0 / 3600.0,
        "store_ms": store_ms,
        "outcomes": classifier.outcome_breakdown(rows),
        "labels": classifier.label_counts(rows),
    }
    logger.info(f"{len(rows)} segments at {rate:.1f} segments/s")
    _write_json(document, args.out)
    return EXIT_OK


def cmd_network(args: argparse.Namespace) -> int:
    model = hopfield_core.load_model(args.model)
    path = plotting.network_diagram(model, args.out)
    console.print(f"network diagram -> {path}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("main:app", host=args.host, port=args.port)
    return EXIT_OK


def _add_spectral_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--segment-length", type=float, help="segment length in seconds (default 1.0)")
    parser.add_argument("--fft-length", type=int, help="FFT length, a power of two (default 1024)")
    parser.add_argument("--window", help="window function (default hamming)")
    parser.add_argument("--overlap", type=float, help="frame overlap fraction in [0, 1) (default 0.5)")


def _add_bout_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grumble-min", type=int, help="consecutive 1 s grumble detections for a bout (default 2)")
    parser.add_argument("--alarm-min", type=int, help="consecutive 1 s alarm detections for a bout (default 3)")
    parser.add_argument("--grumble-separation", type=float,
                        help="seconds separating distinct grumble bouts (default 1)")
    parser.add_argument("--alarm-separation", type=float,
                        help="seconds separating distinct alarm bouts (default 5)")
    parser.add_argument("--noncall-max", type=float,
                        help="longest non-call bout in seconds, 0 for unbounded (default 60)")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog=PROG, description="Hopfield-network call monitor for long field recordings")
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (default from HNN_LOG_LEVEL or INFO)")
    parser.add_argument("--no-color", action="store_true", help="plain log output")
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=CliParser)
    commands.required = True

    store = commands.add_parser("store", help="build a model file from exemplar recordings")
    store.add_argument("--exemplar", action="append", metavar="LABEL=WAV",
                       help="exemplar recording and its class label (repeatable)")
    store.add_argument("--out", help="model file to write")
    store.add_argument("--neurons", type=int, help="number of neurons N (default 14)")
    store.add_argument("--band-low", type=float, help="band low edge in Hz (default 0)")
    store.add_argument("--band-high", type=float, help="band high edge in Hz (default 1300)")
    store.add_argument("--threshold", type=float, help="normalized power threshold (default 0.1)")
    store.add_argument("--capacity-policy", choices=["strict", "boundary", "off"],
                       help="capacity check (default boundary: one pattern over floor(0.138N) allowed)")
    _add_spectral_flags(store)
    store.set_defaults(handler=cmd_store)

    classify = commands.add_parser("classify", help="label every segment of one or more recordings")
    classify.add_argument("inputs", nargs="*", help="WAV files or glob patterns")
    classify.add_argument("--model", help="model file")
    classify.add_argument("--out", help="classification CSV to write")
    classify.add_argument("--workers", type=int, help="parallel files (default: CPU count)")
    classify.add_argument("--max-passes", type=int, help="update passes before giving up (default 100)")
    _add_spectral_flags(classify)
    classify.set_defaults(handler=cmd_classify)

    bouts = commands.add_parser("bouts", help="turn a classification CSV into a bout CSV")
    bouts.add_argument("classifications", help="classification CSV")
    bouts.add_argument("--out", required=True, help="bout CSV to write")
    bouts.add_argument("--segment-length", type=float,
                       help="segment length in seconds (default: inferred from start times, 1.0 for one row)")
    _add_bout_flags(bouts)
    bouts.set_defaults(handler=cmd_bouts)

    evaluate = commands.add_parser("evaluate", help="score predicted bouts against labelled bouts")
    evaluate.add_argument("predicted", help="predicted bout CSV")
    evaluate.add_argument("labels", help="labelled bout CSV")
    evaluate.add_argument("--json", help="also write the report as JSON")
    _add_bout_flags(evaluate)
    evaluate.set_defaults(handler=cmd_evaluate)

    spectrogram = commands.add_parser("spectrogram", help="render a spectrogram PNG")
    spectrogram.add_argument("wav", help="WAV file")
    spectrogram.add_argument("--out", required=True, help="PNG file to write")
    spectrogram.add_argument("--max-freq", type=float, help="upper frequency limit of the plot in Hz")
    _add_spectral_flags(spectrogram)
    spectrogram.set_defaults(handler=cmd_spectrogram)

    bench = commands.add_parser("bench", help="measure store time and classification throughput")
    bench.add_argument("wav", help="WAV file classified in memory")
    bench.add_argument("--model", help="model file")
    bench.add_argument("--out", help="also write the timing JSON here")
    bench.add_argument("--max-passes", type=int, help="update passes before giving up (default 100)")
    _add_spectral_flags(bench)
    bench.set_defaults(handler=cmd_bench)

    network = commands.add_parser("network", help="draw the weight network of a model")
    network.add_argument("--model", required=True, help="model file")
    network.add_argument("--out", required=True, help="PNG file to write")
    network.set_defaults(handler=cmd_network)

    serve = commands.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(handler=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code"""
    try:
        args = build_parser().parse_args(argv)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)

    try:
        level = (args.log_level or settings.env_overrides().get("log_level") or "INFO").upper()
        if level not in LOG_LEVELS:
            raise InputError(f"unknown log level '{level}'")
        configure_logging(level, rich_output=False if args.no_color else None)
        return args.handler(args)
    except HopfieldAudioError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except Exception as e:
        logger.error(f"Internal error in '{args.command}': {e}", exc_info=True)
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
