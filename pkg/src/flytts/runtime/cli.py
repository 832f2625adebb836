"""Command-line entry point: ``flytts {init,synth,params,bench,macs}``.

Exit codes: 0 success, 2 usage error, 3 data/format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import MissingWeightError, ShapeError, WeightFormatError
from .config import PRESETS, preset_config
from .macs import estimate_macs
from .model import init_reference_weights, init_weights, parameter_breakdown, store_config
from .pipeline import (DEFAULT_LENGTH_SCALE, DEFAULT_NOISE_SCALE, measure_rtf, run_pipeline,
                       time_decoders)
from .wav import write_wav
from .weights import load_weights, save_weights

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3


class DataError(Exception):
    pass


def parse_tokens(spec: str) -> list:
    """Integer ids from a file path, or from an inline comma/space separated list."""
    path = Path(spec)
    text = path.read_text() if path.is_file() else spec
    parts = text.replace(",", " ").split()
    try:
        ids = [int(p) for p in parts]
    except ValueError:
        raise DataError(f"token input is not a list of integers: {spec!r}") from None
    if not ids:
        raise DataError("token input is empty")
    return ids


def text_to_tokens(text: str) -> list:
    return list(text.encode("utf-8"))


def _load(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read weights: {exc}") from None
    return load_weights(data)


def cmd_init(args) -> int:
    store = init_weights(preset_config(args.preset), args.seed)
    Path(args.out).write_bytes(save_weights(store))
    print(f"wrote {args.out} ({parameter_breakdown(store)['total']} parameters)")
    return EXIT_OK


def _tokens_from(args) -> list:
    if args.text is not None:
        return text_to_tokens(args.text)
    return parse_tokens(args.tokens)


def cmd_synth(args) -> int:
    store = _load(args.weights)
    config = store_config(store)
    if args.config_preset and args.config_preset != config.name:
        raise DataError(f"weights were built for {config.name!r}, not {args.config_preset!r}")
    trace = run_pipeline(_tokens_from(args), store, config, args.noise_scale,
                         args.length_scale, args.seed)
    write_wav(args.out, trace.waveform)
    print(f"wrote {args.out}: {len(trace.waveform)} samples, {trace.waveform.seconds:.3f} s, "
          f"{trace.durations.total_frames} frames")
    return EXIT_OK


def cmd_params(args) -> int:
    store = _load(args.weights)
    counts = parameter_breakdown(store)
    if args.breakdown:
        for name, n in counts.items():
            if name != "total":
                print(f"{name:<18s} {n}")
    print(f"{'total':<18s} {counts['total']}")
    return EXIT_OK


def cmd_bench(args) -> int:
    store = _load(args.weights)
    config = store_config(store)
    report = measure_rtf(config, store, parse_tokens(args.tokens), args.repeats, args.warmups,
                         seed=args.seed)
    if args.compare_reference:
        if config.decoder != "convnext":
            raise DataError("--compare-reference needs weights with the convnext decoder")
        ref_cfg = preset_config("vits-base-shaped")
        ref = init_reference_weights(ref_cfg, args.seed)
        cmp = time_decoders(config, store, ref, ref_cfg, args.frames, repeats=args.repeats)
        report.extra.update({f"cmp.{k}": v for k, v in cmp.items()})
    for line in report.lines():
        print(line)
    if args.json:
        payload = json.dumps(report.to_dict(), indent=2, sort_keys=True)
        if args.json == "-":
            print(payload)
        else:
            Path(args.json).write_text(payload + "\n")
    return EXIT_OK


def cmd_macs(args) -> int:
    config = preset_config(args.preset)
    for k, v in estimate_macs(config, args.frames, args.tokens).items():
        print(f"{k:<30s} {v:.2f}" if isinstance(v, float) else f"{k:<30s} {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flytts", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    presets = sorted(PRESETS)

    s = sub.add_parser("init", help="write deterministic random weights for a preset")
    s.add_argument("--preset", required=True, choices=presets)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_init)

    s = sub.add_parser("synth", help="synthesize a WAV file")
    s.add_argument("--weights", required=True)
    s.add_argument("--config-preset", choices=presets)
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--tokens", help="file of integer ids, or an inline list like '3,14,15'")
    src.add_argument("--text", help="text, tokenized as UTF-8 bytes")
    s.add_argument("--noise-scale", type=float, default=DEFAULT_NOISE_SCALE)
    s.add_argument("--length-scale", type=float, default=DEFAULT_LENGTH_SCALE)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("params", help="count distinct parameters")
    s.add_argument("--weights", required=True)
    s.add_argument("--breakdown", action="store_true")
    s.set_defaults(func=cmd_params)

    s = sub.add_parser("bench", help="measure real-time factor")
    s.add_argument("--weights", required=True)
    s.add_argument("--tokens", required=True)
    s.add_argument("--repeats", type=int, default=5)
    s.add_argument("--warmups", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--compare-reference", action="store_true",
                   help="also time the transposed-conv reference decoder")
    s.add_argument("--frames", type=int, default=400, help="latent frames for --compare-reference")
    s.add_argument("--json", metavar="PATH", help="write the report as JSON ('-' for stdout)")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("macs", help="analytic MAC counts per stage")
    s.add_argument("--preset", required=True, choices=presets)
    s.add_argument("--frames", type=int, required=True)
    s.add_argument("--tokens", type=int, default=None)
    s.set_defaults(func=cmd_macs)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (DataError, WeightFormatError, MissingWeightError, ShapeError, ValueError) as exc:
        print(f"flytts: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
