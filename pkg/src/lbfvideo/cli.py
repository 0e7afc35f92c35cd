"""Command-line interface: ``lbf encode|decode|metrics|sweep|mask|bma``."""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

from . import bma, codec, metrics, video_io
from .errors import LBFError
from .trajectory import DEFAULT_DELTA, DEFAULT_LAMBDA, FitConfig

SWEEP_HEADER = ["lambda", "entropy_bpp", "psnr_db", "keypixel_fraction", "encode_seconds"]
BMA_HEADER = ["frame", "mse", "psnr_db", "mae"]


class CommandError(Exception):
    def __init__(self, stage: str, detail: str):
        super().__init__(f"{stage}: {detail}")
        self.stage = stage


@contextlib.contextmanager
def stage(name: str):
    """Re-raise I/O and format errors tagged with the pipeline stage."""
    try:
        yield
    except LBFError as exc:
        raise CommandError(name, f"{exc.kind}: {exc}") from exc
    except OSError as exc:
        raise CommandError(name, f"{exc.filename or ''}: {exc.strerror or exc}") from exc


def _non_negative(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(value) or value < 0:
        raise argparse.ArgumentTypeError(f"lambda must be >= 0, got {text}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _lambda_list(text: str) -> list[float]:
    values = [_non_negative(t) for t in text.split(",") if t.strip()]
    if not values:
        raise argparse.ArgumentTypeError("lambda list is empty")
    return sorted(values)


def _format_float(value: float, digits: int) -> str:
    return "inf" if math.isinf(value) else f"{value:.{digits}f}"


def _add_video_flags(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=["auto", "y4m", "raw"], default="auto",
                   help="input container; auto picks y4m for *.y4m, raw otherwise")
    p.add_argument("--width", type=_positive_int)
    p.add_argument("--height", type=_positive_int)
    p.add_argument("--channels", type=int, choices=[1, 3], default=1)


def _add_fit_flags(p: argparse.ArgumentParser):
    p.add_argument("--lambda", dest="lam", type=_non_negative, default=DEFAULT_LAMBDA,
                   help="maximum per-segment MSE (default %(default)s)")
    p.add_argument("--delta", type=_positive_int, default=DEFAULT_DELTA,
                   help="initial keypixel interval in frames (default %(default)s)")


def read_video(path: str, args) -> codec.VideoSequence:
    with stage("read input"):
        data = Path(path).read_bytes()
        fmt = args.format
        if fmt == "auto":
            fmt = "y4m" if path.lower().endswith(".y4m") or data.startswith(video_io.Y4M_SIGNATURE) else "raw"
        if fmt == "y4m":
            return video_io.read_y4m(data)
        if args.width is None or args.height is None:
            raise CommandError("read input", f"{path}: raw input needs --width and --height")
        return video_io.read_raw(data, video_io.RawVideoSpec(args.width, args.height, args.channels))


def _write_bytes(path: str, data: bytes):
    with stage("write output"):
        if path == "-":
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        else:
            Path(path).write_bytes(data)


def _encode(video, lam, delta):
    with stage("encode"):
        t0 = time.perf_counter()
        enc = codec.encode_video(video, FitConfig(lam, delta))
        return enc, time.perf_counter() - t0


def cmd_encode(args) -> int:
    video = read_video(args.input, args)
    enc, seconds = _encode(video, args.lam, args.delta)
    _write_bytes(args.output, codec.serialize(enc))
    line = f"keypixel_fraction={enc.keypixel_fraction:.6f}"
    if not args.no_timing:
        line += f" encode_seconds={seconds:.3f}"
    print(line)
    return 0


def cmd_decode(args) -> int:
    with stage("read input"):
        data = Path(args.input).read_bytes()
    with stage("parse container"):
        enc = codec.deserialize(data)
    with stage("decode"):
        video = codec.decode_video(enc)
    with stage("write output"):
        out = video_io.write_y4m(video) if args.format == "y4m" else video_io.write_raw(video)
    _write_bytes(args.output, out)
    return 0


def cmd_metrics(args) -> int:
    original = read_video(args.original, args)
    reconstructed = read_video(args.reconstructed, args)
    enc = None
    if args.encoded:
        with stage("read encoded"):
            enc = codec.deserialize(Path(args.encoded).read_bytes())
    with stage("metrics"):
        report = metrics.video_report(original, reconstructed, enc)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def sweep_rows(video, lambdas, delta, timing=True) -> list[list[str]]:
    rows = []
    for lam in sorted(lambdas):
        enc, seconds = _encode(video, lam, delta)
        with stage("decode"):
            rec = codec.decode_video(enc)
        with stage("metrics"):
            rep = metrics.video_report(video, rec, enc)
        rows.append([
            f"{lam:g}",
            f"{rep.entropy_bpp:.6f}",
            _format_float(rep.aggregate_psnr_db, 4),
            f"{rep.keypixel_fraction:.6f}",
            f"{seconds:.3f}" if timing else "",
        ])
    return rows


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    video = read_video(args.input, args)
    rows = sweep_rows(video, args.lambdas, args.delta, timing=not args.no_timing)
    _write_bytes(args.output, _csv_text(SWEEP_HEADER, rows).encode("ascii"))
    return 0


def cmd_mask(args) -> int:
    video = read_video(args.input, args)
    if not 0 <= args.frame < video.frame_count:
        raise CommandError("select frame", f"frame {args.frame} out of range [0, {video.frame_count})")
    enc, _ = _encode(video, args.lam, args.delta)
    with stage("render mask"):
        frame = codec.keypixel_mask_frame(video, enc, args.frame)
        out = video_io.write_pgm(frame) if video.channels == 1 else video_io.write_ppm(frame)
    _write_bytes(args.output, out)
    return 0


def bma_rows(video, method: str, config: bma.BmaConfig, frames_dir: str | None = None) -> list[list[str]]:
    search = bma.full_search if method == "full" else bma.diamond_search
    rows = []
    for t in range(1, video.frame_count):
        ref, cur = video.frames[t - 1], video.frames[t]
        with stage("motion search"):
            field = search(ref, cur, config)
            pred = bma.reconstruct(ref, field, config)
        mse = metrics.frame_mse(cur[:, :, 0], pred)
        # blocks tile the frame, so this is the area-weighted block MAE
        mae = bma.block_mae(cur[:, :, 0], pred)
        rows.append([str(t), f"{mse:.6f}", _format_float(metrics.psnr(mse), 4), f"{mae:.6f}"])
        if frames_dir:
            _write_bytes(str(Path(frames_dir) / f"pred_{t:04d}.pgm"), video_io.write_pgm(pred))
    return rows


def cmd_bma(args) -> int:
    video = read_video(args.input, args)
    if video.channels != 1:
        raise CommandError("read input", "block matching needs 1-channel video")
    if args.frames_dir:
        with stage("write output"):
            Path(args.frames_dir).mkdir(parents=True, exist_ok=True)
    config = bma.BmaConfig(args.block, args.range)
    rows = bma_rows(video, args.method, config, args.frames_dir)
    _write_bytes(args.output, _csv_text(BMA_HEADER, rows).encode("ascii"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lbf", description="Per-pixel linear Bezier video approximation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="fit a video and write an LBF1 file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    _add_video_flags(p)
    _add_fit_flags(p)
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="reconstruct a video from an LBF1 file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=["raw", "y4m"], default="raw")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("metrics", help="entropy / MSE / PSNR report as JSON")
    p.add_argument("--original", required=True)
    p.add_argument("--reconstructed", required=True)
    p.add_argument("--encoded", help="LBF1 file for entropy and keypixel fraction")
    _add_video_flags(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("sweep", help="rate-distortion sweep over lambda values, CSV output")
    p.add_argument("--input", required=True)
    p.add_argument("--lambdas", type=_lambda_list, default=_lambda_list("5,10,20,50,100,200"))
    p.add_argument("--delta", type=_positive_int, default=DEFAULT_DELTA)
    p.add_argument("--output", default="-")
    p.add_argument("--no-timing", action="store_true", help="leave encode_seconds empty")
    _add_video_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mask", help="export one frame with non-keypixels painted white")
    p.add_argument("--input", required=True)
    p.add_argument("--frame", type=int, required=True)
    p.add_argument("--output", required=True)
    _add_video_flags(p)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("bma", help="block-matching prediction baseline, CSV output")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=["full", "ds"], default="ds")
    p.add_argument("--block", type=_positive_int, default=16)
    p.add_argument("--range", type=_non_negative_int, default=7)
    p.add_argument("--output", default="-")
    p.add_argument("--frames-dir", help="also write predicted frames as PGM files here")
    _add_video_flags(p)
    p.set_defaults(func=cmd_bma)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"lbf {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
