"""Command-line entry point.

Exit codes: 0 success; 1 a criterion was unmet or a flow stage failed;
2 bad input or configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dse import DseStageError, run_dse
from .errors import KwsflowError
from .flow import resume_flow, run_flow, validate_config
from .frontend import PipelineConfig, mfcc_pipeline, spectrogram_distance
from .signal import gen_signal, read_wav, write_wav

EXIT_OK = 0
EXIT_UNMET = 1
EXIT_BAD_INPUT = 2


def _load_pipeline_config(path: str | None, mode: str) -> PipelineConfig:
    overrides = {}
    if path:
        overrides = json.loads(Path(path).read_text())
    overrides["mode"] = mode
    return PipelineConfig(**overrides)


def _cmd_gen(args) -> int:
    params = json.loads(args.params) if args.params else {}
    if args.freq is not None:
        params.setdefault("freq", args.freq)
    if args.amp is not None:
        params.setdefault("amp", args.amp)
    n = int(round(args.dur * args.sr))
    buf = gen_signal(args.kind, params, seed=args.seed, sample_rate=args.sr, n=n)
    write_wav(args.out, buf)
    return EXIT_OK


def _frames_json(result, cfg: PipelineConfig) -> str:
    return json.dumps({
        "config": {
            "sample_rate": cfg.sample_rate,
            "bit_width": cfg.bit_width,
            "preemphasis_k": cfg.preemphasis_k,
            "fft_size": cfg.fft_size,
            "frame_hop": cfg.frame_hop,
            "window_policy": cfg.window_policy,
            "mel_shape": cfg.mel_shape,
            "n_mel": cfg.n_mel,
            "n_mfcc": cfg.n_mfcc,
            "mode": cfg.mode,
        },
        "frames": [[float(v) for v in row] for row in result.mfcc],
    }, indent=2, sort_keys=True) + "\n"


def _cmd_mfcc(args) -> int:
    cfg = _load_pipeline_config(args.config, args.mode)
    buf = read_wav(args.infile)
    result = mfcc_pipeline(buf, cfg)
    out = Path(args.out)
    if out.suffix.lower() == ".json":
        out.write_text(_frames_json(result, cfg))
        return EXIT_OK
    header = ",".join(f"c{i}" for i in range(cfg.n_mfcc))
    rows = [header]
    for row in result.mfcc:
        rows.append(",".join(repr(float(v)) for v in row))
    out.write_text("\n".join(rows) + "\n")
    return EXIT_OK


def _cmd_compare(args) -> int:
    buf = read_wav(args.infile)
    cfg_fx = _load_pipeline_config(args.config, "fixed")
    cfg_fl = _load_pipeline_config(args.config, "float")
    rx = mfcc_pipeline(buf, cfg_fx)
    rf = mfcc_pipeline(buf, cfg_fl)
    stats = {
        "post_fft": {
            "distance": spectrogram_distance(rx.power, rf.power),
            "max_abs_error": float(np.max(np.abs(rx.power - rf.power))),
        },
        "post_mel": {
            "distance": spectrogram_distance(rx.log_mel, rf.log_mel),
            "max_abs_error": float(np.max(np.abs(rx.log_mel - rf.log_mel))),
        },
        "post_dct": {
            "distance": spectrogram_distance(rx.mfcc, rf.mfcc),
            "max_abs_error": float(np.max(np.abs(rx.mfcc - rf.mfcc))),
        },
        "n_frames": int(rx.mfcc.shape[0]),
    }
    text = json.dumps(stats, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_dse(args) -> int:
    dse_cfg = json.loads(Path(args.config).read_text()) if args.config else None
    try:
        report = run_dse(args.corpus, dse_cfg)
    except DseStageError as exc:
        text = exc.report.to_json()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNMET
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_flow(args) -> int:
    config = json.loads(Path(args.config).read_text())
    validate_config(config)
    if args.flow_cmd == "resume":
        result = resume_flow(config, args.checkpoint)
    else:
        result = run_flow(config, checkpoint_path=args.checkpoint)
    text = result.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if result.overall in ("success", "partial") else EXIT_UNMET


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kwsflow",
        description="MFCC front-end design flow: signals, pipeline, "
                    "design-space exploration, and the staged tool loop.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a test signal WAV")
    p.add_argument("--kind", required=True,
                   choices=["sine", "multitone", "noise", "speechlike"])
    p.add_argument("--freq", type=float)
    p.add_argument("--amp", type=float)
    p.add_argument("--sr", type=int, default=8000)
    p.add_argument("--dur", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--params", help="extra generator params as JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("mfcc", help="compute MFCC frames from a WAV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--mode", choices=["fixed", "float"], default="fixed")
    p.add_argument("--out", required=True, help=".csv or .json")
    p.set_defaults(func=_cmd_mfcc)

    p = sub.add_parser("compare", help="fixed vs float error report")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("dse", help="run the design-space exploration")
    p.add_argument("--corpus", help="directory of WAV files (default: bundled)")
    p.add_argument("--config", help="criterion threshold overrides, JSON")
    p.add_argument("--out", help="report path (default: stdout)")
    p.set_defaults(func=_cmd_dse)

    p = sub.add_parser("flow", help="run or resume the staged flow")
    fsub = p.add_subparsers(dest="flow_cmd", required=True)
    for name in ("run", "resume"):
        fp = fsub.add_parser(name)
        fp.add_argument("--config", required=True)
        fp.add_argument("--checkpoint", required=(name == "resume"))
        fp.add_argument("--out")
        fp.set_defaults(func=_cmd_flow)
    return parser


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (KwsflowError, OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
