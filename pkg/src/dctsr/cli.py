"""Command-line front end: degrade, register, encode, decode, superres, metrics."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from . import degrade as dg
from .dctcodec import MASK_KINDS, zonal_mask
from .deblur import IbdConfig
from .errors import ParameterError, SRError
from .imgcore import load_pgm, save_pgm
from .interp import InterpConfig
from .metrics import SSIM_MODES, evaluate
from .pipeline import decode_stream, encode_frames, register_frames, superres
from .progressive import StagedBitstream

log = logging.getLogger("dctsr")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class StageFailure(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def stage(name: str):
    """Tag pipeline errors with the stage they came from."""
    try:
        yield
    except ParameterError:
        raise
    except (SRError, OSError, ValueError) as exc:
        raise StageFailure(name, exc) from exc


def _write_json(obj, path: Optional[str]) -> None:
    text = json.dumps(obj, indent=2)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _ibd_config(args) -> Optional[IbdConfig]:
    if args.no_deblur:
        return None
    return IbdConfig(iterations=args.ibd_iters, alpha=args.ibd_alpha, psf_support=args.ibd_psf_support)


def _interp_config(args) -> InterpConfig:
    return InterpConfig(uniformity_threshold=args.interp_threshold, edge_threshold=args.edge_threshold)


def _dump_stages(images, directory: str) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for k, img in enumerate(images, start=1):
        save_pgm(img, out / f"stage_{k:02d}.pgm")


def cmd_degrade(args) -> int:
    with stage("load"):
        ref = load_pgm(args.reference)
        params = dg.load_profile(args.profile)
    with stage("degrade"):
        frames = dg.simulate(ref, params, args.order)
    out = Path(args.output)
    with stage("write"):
        out.mkdir(parents=True, exist_ok=True)
        for i, frame in enumerate(frames):
            save_pgm(frame, out / f"frame_{i:03d}.pgm")
    log.info("wrote %d frames to %s", len(frames), out)
    return EXIT_OK


def cmd_register(args) -> int:
    with stage("load"):
        frames = [load_pgm(p) for p in args.frames]
    with stage("register"):
        aligned, estimates = register_frames(frames)
    out = Path(args.output)
    with stage("write"):
        out.mkdir(parents=True, exist_ok=True)
        for path, img in zip(args.frames, aligned):
            save_pgm(img, out / Path(path).name)
        if args.report:
            lines = [json.dumps(dict(frame=i, **e.as_dict())) for i, e in enumerate(estimates)]
            Path(args.report).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_encode(args) -> int:
    ibd = _ibd_config(args)
    with stage("load"):
        frames = [load_pgm(p) for p in args.frames]
    with stage("encode"):
        stream = encode_frames(frames, zonal_mask(args.mask), ibd)
    with stage("write"):
        Path(args.output).write_bytes(stream.to_bytes())
    return EXIT_OK


def cmd_decode(args) -> int:
    interp = _interp_config(args)
    with stage("load"):
        stream = StagedBitstream.from_bytes(Path(args.stream).read_bytes())
    with stage("decode"):
        recon, coarse = decode_stream(stream, args.stages, args.factor, interp)
    with stage("write"):
        save_pgm(recon, args.output)
        if args.stage_dir:
            _dump_stages(coarse, args.stage_dir)
    return EXIT_OK


def cmd_superres(args) -> int:
    ibd, interp = _ibd_config(args), _interp_config(args)
    with stage("load"):
        ref = load_pgm(args.reference)
        params = dg.load_profile(args.profile)
    with stage("superres"):
        result = superres(
            ref,
            params,
            mask=zonal_mask(args.mask),
            ibd=ibd,
            interp=interp,
            factor=args.factor,
            order=args.order,
            ssim_mode=args.ssim_mode,
        )
    with stage("write"):
        save_pgm(result.reconstruction, args.output)
        if args.stream:
            Path(args.stream).write_bytes(result.stream.to_bytes())
        if args.stage_dir:
            _dump_stages(result.stage_images, args.stage_dir)
        _write_json(result.report(), args.report)
    return EXIT_OK


def cmd_metrics(args) -> int:
    with stage("load"):
        ref, degraded, recon = (load_pgm(p) for p in (args.reference, args.degraded, args.reconstruction))
    with stage("metrics"):
        report = evaluate(ref, degraded, recon, args.ssim_mode)
    with stage("write"):
        _write_json(report.as_dict(), args.output)
    return EXIT_OK


def _add_ibd_flags(p: argparse.ArgumentParser) -> None:
    d = IbdConfig()
    p.add_argument("--mask", choices=MASK_KINDS, default="triangle10", help="zonal mask")
    p.add_argument("--ibd-iters", type=int, default=d.iterations, help="blind deconvolution iterations")
    p.add_argument("--ibd-alpha", type=float, default=d.alpha, help="spectral regularizer")
    p.add_argument("--ibd-psf-support", type=int, default=d.psf_support, help="PSF support side (odd)")
    p.add_argument("--no-deblur", action="store_true", help="skip blind deconvolution")


def _add_interp_flags(p: argparse.ArgumentParser) -> None:
    d = InterpConfig()
    p.add_argument("--factor", type=int, choices=(2, 4), default=2, help="upscaling factor")
    p.add_argument("--interp-threshold", type=float, default=d.uniformity_threshold,
                   help="uniform-cell threshold (gray levels)")
    p.add_argument("--edge-threshold", type=float, default=d.edge_threshold,
                   help="edge similarity threshold (gray levels)")
    p.add_argument("--stage-dir", help="directory for per-stage coarse images")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dctsr",
        description="Progressive DCT-domain multi-frame super-resolution.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("degrade", help="simulate low-resolution frames", formatter_class=fmt)
    p.add_argument("reference", help="high-resolution PGM")
    p.add_argument("profile", help="degradation profile, one frame per line")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--order", choices=(dg.BLUR_FIRST, dg.DECIMATE_FIRST), default=dg.BLUR_FIRST)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("register", help="align frames to the first one", formatter_class=fmt)
    p.add_argument("frames", nargs="+", help="frame PGMs; the first is the reference")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--report", help="JSON-lines file, one motion estimate per frame")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("encode", help="restore, fuse and write a staged bitstream", formatter_class=fmt)
    p.add_argument("frames", nargs="+", help="registered frame PGMs")
    p.add_argument("-o", "--output", required=True, help="output .srp file")
    _add_ibd_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode stages and interpolate", formatter_class=fmt)
    p.add_argument("stream", help=".srp bitstream")
    p.add_argument("-o", "--output", required=True, help="output PGM")
    p.add_argument("--stages", type=int, help="number of stages to decode; all when omitted")
    _add_interp_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("superres", help="degrade, register, encode, decode and score", formatter_class=fmt)
    p.add_argument("reference", help="high-resolution PGM")
    p.add_argument("profile", help="degradation profile")
    p.add_argument("-o", "--output", required=True, help="reconstruction PGM")
    p.add_argument("--report", help="JSON report file; printed to stdout when omitted")
    p.add_argument("--stream", help="also write the .srp bitstream here")
    p.add_argument("--order", choices=(dg.BLUR_FIRST, dg.DECIMATE_FIRST), default=dg.BLUR_FIRST)
    p.add_argument("--ssim-mode", choices=SSIM_MODES, default="paper")
    _add_ibd_flags(p)
    _add_interp_flags(p)
    p.set_defaults(func=cmd_superres)

    p = sub.add_parser("metrics", help="score a reconstruction", formatter_class=fmt)
    p.add_argument("reference")
    p.add_argument("degraded")
    p.add_argument("reconstruction")
    p.add_argument("--ssim-mode", choices=SSIM_MODES, default="paper")
    p.add_argument("-o", "--output", help="JSON file; printed to stdout when omitted")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageFailure as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
