"""Command-line interface.

Subcommands: mask, spr, undersample, recon, phantom, run, pad.  All
randomness is controlled by --seed; `run` executes a plan file and is
the batch driver, the rest are single-step conveniences over the
library.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import kio
from .experiment import (
    NoiseModel,
    load_plan,
    run_experiment,
    sinogram_from_kspace,
    undersample,
)
from .geometry import GridGeometry
from .incoherence import report_csv_header, report_csv_row, spr_exact, spr_monte_carlo
from .metrics import metrics_report
from .phantom import pad_to_prime, shepp_logan
from .recon import (
    CsBaselineConfig,
    HSchedule,
    KSpace,
    NlmParams,
    ReconConfig,
    ScheduleKind,
    Solver,
    cs_baseline,
    ffr,
    fsirt,
    zero_fill,
)
from .sampling import (
    Dims,
    SamplingMask,
    actual_reduction,
    cartesian_for_reduction,
    load_mask,
    pfrac_for_reduction,
    save_mask,
)

_CARTESIAN_DIMS = {"cartesian1d": Dims.OneD, "cartesian2d": Dims.TwoD}


def _build_mask_args(args) -> SamplingMask:
    geom = GridGeometry(args.n)
    if args.kind == "pfrac":
        return pfrac_for_reduction(geom, args.reduction, args.mu, args.ctr, args.seed)
    return cartesian_for_reduction(
        geom, args.reduction, args.alpha, _CARTESIAN_DIMS[args.kind], args.ctr, args.seed
    )


def _cmd_mask(args) -> int:
    if args.inspect:
        mask = load_mask(args.inspect)
        rep = spr_exact(mask)
        print(f"kind = {rep.mask_kind}")
        print(f"N = {mask.geometry.n}")
        print(f"points = {mask.point_count}")
        print(f"actual_reduction = {actual_reduction(mask):.6g}")
        print(f"spr_exact = {rep.spr:.6g}")
        return 0
    mask = _build_mask_args(args)
    save_mask(mask, args.out)
    print(f"{args.out}: {mask.point_count} points, actual R = {actual_reduction(mask):.6g}")
    return 0


def _cmd_spr(args) -> int:
    print(report_csv_header())
    if args.mask:
        report = spr_exact(load_mask(args.mask))
        print(report_csv_row(report, args.reduction))
        return 0
    geom = GridGeometry(args.n)

    def factory(seed: int) -> SamplingMask:
        if args.kind == "pfrac":
            return pfrac_for_reduction(geom, args.reduction, args.mu, args.ctr, seed)
        return cartesian_for_reduction(
            geom, args.reduction, args.alpha, _CARTESIAN_DIMS[args.kind], args.ctr, seed
        )

    report = spr_monte_carlo(factory, args.samples, args.bases, args.seed)
    print(report_csv_row(report, args.reduction))
    return 0


def _cmd_undersample(args) -> int:
    mask = load_mask(args.mask)
    if args.input.endswith(".fcsk"):
        channels = kio.read_fcsk(args.input)
    else:
        channels = kio.read_image(args.input)[None]
    out = np.empty(channels.shape, dtype=np.complex128)
    for ch in range(channels.shape[0]):
        out[ch] = undersample(channels[ch], mask, NoiseModel(args.sigma), args.seed + ch).data
    kio.write_fcsk(args.out, out)
    print(f"{args.out}: {channels.shape[0]} channel(s), N={mask.geometry.n}")
    return 0


def _schedule_from_args(args) -> HSchedule | None:
    if args.schedule == "none":
        return None
    kind = ScheduleKind.Staged if args.schedule == "staged" else ScheduleKind.PowerCurve
    return HSchedule(kind, args.h0, args.exponent)


def _cmd_recon(args) -> int:
    mask = load_mask(args.mask)
    channels = kio.read_fcsk(args.kspace)
    ground = kio.read_image(args.ground) if args.ground else None
    solver = Solver(args.solver)
    images = []
    last_result = None
    for ch in range(channels.shape[0]):
        y = KSpace(mask, np.where(mask.selected, channels[ch], 0.0))
        if solver is Solver.ZeroFill:
            images.append(zero_fill(y))
            continue
        if solver is Solver.CsBaseline:
            cfg = CsBaselineConfig(args.wavelet_weight, args.tv_weight, args.iterations, args.step)
            last_result = cs_baseline(y, cfg, ground=ground)
        elif solver is Solver.FFR:
            cfg = ReconConfig(Solver.FFR, args.iterations, args.lambda_relax, args.denoise_every, _schedule_from_args(args))
            last_result = ffr(y, cfg, NlmParams(), ground=ground)
        else:
            cfg = ReconConfig(Solver.FSIRT, args.iterations, args.lambda_relax, args.denoise_every, _schedule_from_args(args))
            last_result = fsirt(sinogram_from_kspace(y), cfg, mask=mask, nlm=NlmParams(), ground=ground)
        images.append(last_result.image)
    combined = np.sqrt(sum(np.abs(im) ** 2 for im in images))
    if ground is not None:
        peak = float(ground.max())
        scale = 255.0 / peak if peak > 0 else 1.0
        rep = metrics_report(ground * scale, combined * scale)
        print(f"psnr_db = {rep.psnr:.6g}")
        print(f"ssim = {rep.ssim:.6g}")
        print(f"rmse = {rep.rmse:.6g}")
        out_img = combined * scale
    else:
        peak = float(combined.max())
        out_img = combined * (255.0 / peak if peak > 0 else 1.0)
    if args.out.endswith(".png"):
        kio.write_png(args.out, out_img)
    else:
        kio.write_pgm(args.out, out_img)
    if args.log and last_result is not None:
        Path(args.log).write_text(last_result.log_csv(), encoding="ascii")
    print(f"wrote {args.out}")
    return 0


def _cmd_phantom(args) -> int:
    img = shepp_logan(args.n)
    if args.out.endswith(".png"):
        kio.write_png(args.out, img)
    else:
        kio.write_pgm(args.out, img)
    print(f"wrote {args.out} ({args.n}x{args.n})")
    return 0


def _cmd_pad(args) -> int:
    img = kio.read_image(args.input)
    padded = pad_to_prime(img)
    if args.out.endswith(".png"):
        kio.write_png(args.out, padded.image)
    else:
        kio.write_pgm(args.out, padded.image)
    print(f"wrote {args.out}: {padded.original_n} -> {padded.image.shape[0]}, offset {padded.offset}")
    return 0


def _cmd_run(args) -> int:
    plan = load_plan(args.plan)
    results = run_experiment(plan, out_dir=args.out_dir, threads=args.threads)
    print(f"wrote {results}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="finrad", description=__doc__)
    parser.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    parser.add_argument("--out-dir", default=None, help="output directory for `run`")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for `run`")
    sub = parser.add_subparsers(dest="command", required=True)

    kinds = ("pfrac", "cartesian1d", "cartesian2d")

    p = sub.add_parser("mask", help="build or inspect a sampling mask")
    p.add_argument("--inspect", metavar="PBM", help="print stats of an existing mask file")
    p.add_argument("--kind", choices=kinds, default="pfrac")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--reduction", type=float, default=4.0)
    p.add_argument("--mu", type=int, default=16)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--ctr", type=int, default=0)
    p.add_argument("--out", default="mask.pbm")
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("spr", help="incoherence report (CSV to stdout)")
    p.add_argument("--mask", help="exact SPR of an existing mask file")
    p.add_argument("--kind", choices=kinds, default="pfrac")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--reduction", type=float, default=4.0)
    p.add_argument("--mu", type=int, default=16)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--ctr", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--bases", type=int, default=10)
    p.set_defaults(func=_cmd_spr)

    p = sub.add_parser("undersample", help="mask (and noise) an image or k-space file")
    p.add_argument("--input", required=True, help="PGM/PNG image or FCSK k-space")
    p.add_argument("--mask", required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--out", default="masked.fcsk")
    p.set_defaults(func=_cmd_undersample)

    p = sub.add_parser("recon", help="reconstruct masked k-space")
    p.add_argument("--kspace", required=True, help="FCSK file from `undersample`")
    p.add_argument("--mask", required=True)
    p.add_argument("--solver", choices=[s.value for s in Solver], default="ffr")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--lambda", dest="lambda_relax", type=float, default=1.0)
    p.add_argument("--denoise-every", type=int, default=3)
    p.add_argument("--schedule", choices=("none", "staged", "power"), default="none")
    p.add_argument("--h0", type=float, default=6.0)
    p.add_argument("--exponent", type=float, default=1.0)
    p.add_argument("--wavelet-weight", type=float, default=2.0)
    p.add_argument("--tv-weight", type=float, default=6e-4)
    p.add_argument("--step", type=float, default=0.5)
    p.add_argument("--ground", help="reference image for metrics")
    p.add_argument("--log", help="write the per-iteration log CSV here")
    p.add_argument("--out", default="recon.pgm")
    p.set_defaults(func=_cmd_recon)

    p = sub.add_parser("phantom", help="write the head phantom")
    p.add_argument("--n", type=int, default=257)
    p.add_argument("--out", default="phantom.pgm")
    p.set_defaults(func=_cmd_phantom)

    p = sub.add_parser("pad", help="zero-pad an image to the next prime size")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default="padded.pgm")
    p.set_defaults(func=_cmd_pad)

    p = sub.add_parser("run", help="execute an experiment plan file")
    p.add_argument("plan")
    p.set_defaults(func=_cmd_run)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
