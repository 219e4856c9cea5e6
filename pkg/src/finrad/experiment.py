"""Experiment orchestration: retrospective under-sampling, batch
reconstruction, metrics, and CSV/image reporting.

A plan is the cross product (inputs x masks x reduction targets x recon
configs); every cell derives its own seeds from the plan seed and the
cell's position, so runs replay byte-identically regardless of worker
thread count.  Timing is only recorded when the plan asks for it, since
wall-clock values would break replay identity.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _rng, kio
from .geometry import GridGeometry
from .metrics import metrics_report
from .phantom import pad_to_prime, shepp_logan
from .radon import Sinogram, slice_points
from .recon import (
    CsBaselineConfig,
    HSchedule,
    KSpace,
    NlmParams,
    ReconConfig,
    ReconResult,
    ScheduleKind,
    Solver,
    cs_baseline,
    ffr,
    fsirt,
    rss_combine,
    zero_fill,
)
from .sampling import (
    Dims,
    PFracProvenance,
    SamplingMask,
    actual_reduction,
    cartesian_for_reduction,
    pfrac_for_reduction,
)

__all__ = [
    "NoiseModel",
    "undersample",
    "sinogram_from_kspace",
    "InputSpec",
    "MaskPlan",
    "ReconPlan",
    "ExperimentPlan",
    "parse_plan",
    "load_plan",
    "run_experiment",
    "CSV_COLUMNS",
]


@dataclass(frozen=True)
class NoiseModel:
    """Additive complex Gaussian noise, sigma = std of a complex sample."""

    sigma: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def undersample(data: np.ndarray, mask: SamplingMask, noise: NoiseModel = NoiseModel(), seed: int = 0) -> KSpace:
    """Mask (and optionally corrupt) one channel of measurements.

    Real input is an image and is sent through the unitary 2D DFT;
    complex input is already k-space.  Noise (seeded) is added before
    masking; unselected entries end exactly zero.
    """
    arr = np.asarray(data)
    n = mask.geometry.n
    if arr.shape != (n, n):
        raise ValueError(f"data shape {arr.shape} does not match mask N={n}")
    ksp = arr.astype(np.complex128) if np.iscomplexobj(arr) else np.fft.fft2(arr, norm="ortho")
    if noise.sigma > 0:
        rng = _rng.stream(seed, _rng.NOISE)
        scale = noise.sigma / np.sqrt(2.0)
        ksp = ksp + scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return KSpace(mask, np.where(mask.selected, ksp, 0.0))


def sinogram_from_kspace(y: KSpace) -> Sinogram:
    """Projections equivalent to the masked measurements.

    Requires a slice-union mask on its own (prime) grid: each chosen
    slope's k-space samples are one slice, whose inverse 1D DFT times N
    is the corresponding projection.
    """
    prov = y.mask.provenance
    if not isinstance(prov, PFracProvenance):
        raise ValueError("sinogram extraction requires a slice-union (pfrac) mask")
    geom = y.mask.geometry
    if prov.spec.build_geometry.n != geom.n:
        raise ValueError("mask slices live on a larger grid than the data (cropped mask)")
    if prov.spec.ctr > 0:
        raise ValueError("central-disk samples have no projection counterpart (ctr > 0)")
    n = geom.n
    rows = np.empty((len(prov.slopes), n), dtype=np.complex128)
    for i, sl in enumerate(prov.slopes):
        pts = slice_points(sl, geom)
        rows[i] = np.fft.ifft(y.data[pts[:, 0], pts[:, 1]] * n)
    return Sinogram(geom, prov.slopes, rows)


# ---------------------------------------------------------------------------
# plans

@dataclass(frozen=True)
class InputSpec:
    input_id: str
    kind: str  # "phantom" | "image" | "kspace"
    n: int = 0
    path: str = ""
    pad: bool = False


@dataclass(frozen=True)
class MaskPlan:
    kind: str  # "pfrac" | "cartesian1d" | "cartesian2d"
    mu: int = 16
    alpha: float = 0.0
    ctr: int = 0


@dataclass(frozen=True)
class ReconPlan:
    solver: Solver
    iterations: int = 100
    lambda_relax: float = 1.0
    denoise_every: int = 3
    schedule: HSchedule | None = None
    wavelet_weight: float = 2.0
    tv_weight: float = 6e-4
    step: float = 0.5


@dataclass(frozen=True)
class ExperimentPlan:
    inputs: tuple[InputSpec, ...]
    masks: tuple[MaskPlan, ...]
    recons: tuple[ReconPlan, ...]
    reductions: tuple[float, ...]
    seed: int = 0
    out_dir: str = "results"
    noise_sigma: float = 0.0
    record_timing: bool = False
    emit_images: str = "none"  # "none" | "pgm" | "png"
    threads: int = 1

    def __post_init__(self):
        if not (self.inputs and self.masks and self.recons and self.reductions):
            raise ValueError("plan needs at least one input, mask, reduction, and recon")
        if self.emit_images not in ("none", "pgm", "png"):
            raise ValueError(f"emit_images must be none/pgm/png, got {self.emit_images!r}")

    def cells(self):
        idx = 0
        for inp in self.inputs:
            for mp in self.masks:
                for target in self.reductions:
                    for rp in self.recons:
                        yield idx, inp, mp, target, rp
                        idx += 1


def _plan_sections(text: str) -> list[tuple[str, dict[str, str]]]:
    sections: list[tuple[str, dict[str, str]]] = []
    current: dict[str, str] | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = {}
            sections.append((line[1:-1].strip().lower(), current))
            continue
        if current is None:
            raise ValueError(f"key outside any section: {line!r}")
        key, eq, value = line.partition("=")
        if not eq:
            raise ValueError(f"expected key = value, got {line!r}")
        current[key.strip().lower()] = value.strip()
    return sections


_SOLVERS = {s.value: s for s in Solver}


def _parse_schedule(sec: dict[str, str]) -> HSchedule | None:
    kind = sec.get("schedule", "none").lower()
    if kind == "none":
        return None
    h0 = float(sec.get("h0", "6"))
    if kind == "staged":
        return HSchedule(ScheduleKind.Staged, h0)
    if kind == "power":
        return HSchedule(ScheduleKind.PowerCurve, h0, float(sec.get("exponent", "1")))
    raise ValueError(f"unknown schedule {kind!r}")


def parse_plan(text: str) -> ExperimentPlan:
    """Parse the key = value plan format (sections may repeat)."""
    inputs: list[InputSpec] = []
    masks: list[MaskPlan] = []
    recons: list[ReconPlan] = []
    exp: dict[str, str] = {}
    for name, sec in _plan_sections(text):
        if name == "experiment":
            exp.update(sec)
        elif name == "input":
            inputs.append(
                InputSpec(
                    input_id=sec.get("id", f"input{len(inputs)}"),
                    kind=sec.get("kind", "phantom").lower(),
                    n=int(sec.get("n", "0")),
                    path=sec.get("path", ""),
                    pad=sec.get("pad_to_prime", "false").lower() == "true",
                )
            )
        elif name == "mask":
            masks.append(
                MaskPlan(
                    kind=sec.get("kind", "pfrac").lower(),
                    mu=int(sec.get("mu", "16")),
                    alpha=float(sec.get("alpha", "0")),
                    ctr=int(sec.get("ctr", "0")),
                )
            )
        elif name == "recon":
            solver = _SOLVERS.get(sec.get("solver", "ffr").lower())
            if solver is None:
                raise ValueError(f"unknown solver {sec.get('solver')!r}")
            recons.append(
                ReconPlan(
                    solver=solver,
                    iterations=int(sec.get("iterations", "100")),
                    lambda_relax=float(sec.get("lambda", "1.0")),
                    denoise_every=int(sec.get("denoise_every", "3")),
                    schedule=_parse_schedule(sec),
                    wavelet_weight=float(sec.get("wavelet_weight", "2.0")),
                    tv_weight=float(sec.get("tv_weight", "6e-4")),
                    step=float(sec.get("step", "0.5")),
                )
            )
        else:
            raise ValueError(f"unknown section [{name}]")
    reductions = tuple(float(t) for t in exp.get("reductions", "4").split(",") if t.strip())
    return ExperimentPlan(
        inputs=tuple(inputs),
        masks=tuple(masks),
        recons=tuple(recons),
        reductions=reductions,
        seed=int(exp.get("seed", "0")),
        out_dir=exp.get("out_dir", "results"),
        noise_sigma=float(exp.get("noise_sigma", "0")),
        record_timing=exp.get("record_timing", "false").lower() == "true",
        emit_images=exp.get("emit_images", "none").lower(),
        threads=int(exp.get("threads", "1")),
    )


def load_plan(path: str | Path) -> ExperimentPlan:
    return parse_plan(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# execution

CSV_COLUMNS = (
    "input_id",
    "channel_count",
    "mask_kind",
    "N",
    "target_R",
    "actual_R",
    "ctr",
    "alpha_or_mu",
    "seed",
    "solver",
    "iterations",
    "psnr_db",
    "ssim",
    "rmse",
    "wall_ms",
    "status",
)

_MASK_KIND_NAMES = {"pfrac": "pfrac", "cartesian1d": "cartesian-1d", "cartesian2d": "cartesian-2d"}


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if x == float("inf"):
            return "inf"
        return f"{x:.6g}"
    return str(x)


def _sanitize(msg: str) -> str:
    return msg.replace(",", ";").replace("\n", " ").replace("\r", " ")


@dataclass
class _CellOutcome:
    row: dict
    images: dict[str, np.ndarray] = field(default_factory=dict)


def _load_input(spec: InputSpec) -> tuple[np.ndarray, np.ndarray | None, int]:
    """Returns (channels, pad-crop array or None, acquisition N).

    channels: complex (C, N, N) k-space when kind == kspace, else real
    (1, N, N) image-domain data.
    """
    if spec.kind == "phantom":
        img = shepp_logan(spec.n)
        return img[None], None, spec.n
    if spec.kind == "image":
        img = kio.read_image(spec.path)
        if spec.pad:
            padded = pad_to_prime(img)
            return padded.image[None], img, padded.image.shape[0]
        return img[None], None, img.shape[0]
    if spec.kind == "kspace":
        vol = kio.read_fcsk(spec.path)
        return vol, None, vol.shape[1]
    raise ValueError(f"unknown input kind {spec.kind!r}")


def _build_mask(mp: MaskPlan, geom: GridGeometry, target: float, seed: int) -> SamplingMask:
    if mp.kind == "pfrac":
        return pfrac_for_reduction(geom, target, mp.mu, mp.ctr, seed)
    if mp.kind == "cartesian1d":
        return cartesian_for_reduction(geom, target, mp.alpha, Dims.OneD, mp.ctr, seed)
    if mp.kind == "cartesian2d":
        return cartesian_for_reduction(geom, target, mp.alpha, Dims.TwoD, mp.ctr, seed)
    raise ValueError(f"unknown mask kind {mp.kind!r}")


def _reconstruct(y: KSpace, rp: ReconPlan, mask: SamplingMask) -> ReconResult:
    if rp.solver is Solver.ZeroFill:
        return ReconResult(zero_fill(y), (), Solver.ZeroFill)
    if rp.solver is Solver.FFR:
        cfg = ReconConfig(Solver.FFR, rp.iterations, rp.lambda_relax, rp.denoise_every, rp.schedule)
        return ffr(y, cfg, NlmParams())
    if rp.solver is Solver.FSIRT:
        cfg = ReconConfig(Solver.FSIRT, rp.iterations, rp.lambda_relax, rp.denoise_every, rp.schedule)
        return fsirt(sinogram_from_kspace(y), cfg, mask=mask, nlm=NlmParams())
    cfg = CsBaselineConfig(rp.wavelet_weight, rp.tv_weight, rp.iterations, rp.step)
    return cs_baseline(y, cfg)


def _run_cell(plan: ExperimentPlan, idx: int, inp: InputSpec, mp: MaskPlan, target: float, rp: ReconPlan) -> _CellOutcome:
    cell_seed = int(_rng.stream(plan.seed, _rng.CELLS, idx).integers(2**63))
    row = {
        "input_id": inp.input_id,
        "mask_kind": _MASK_KIND_NAMES.get(mp.kind, mp.kind),
        "target_R": target,
        "ctr": mp.ctr,
        "alpha_or_mu": mp.mu if mp.kind == "pfrac" else mp.alpha,
        "seed": cell_seed,
        "solver": rp.solver.value,
        "iterations": 0 if rp.solver is Solver.ZeroFill else rp.iterations,
        "status": "ok",
    }
    started = time.perf_counter()
    try:
        channels, crop_ref, n = _load_input(inp)
        row["channel_count"] = channels.shape[0]
        row["N"] = n
        geom = GridGeometry(n)
        mask = _build_mask(mp, geom, target, cell_seed)
        row["actual_R"] = actual_reduction(mask)

        chan_images = []
        zf_images = []
        for ch in range(channels.shape[0]):
            noise_seed = int(_rng.stream(plan.seed, _rng.NOISE, idx, ch).integers(2**63))
            y = undersample(channels[ch], mask, NoiseModel(plan.noise_sigma), noise_seed)
            zf_images.append(zero_fill(y))
            chan_images.append(_reconstruct(y, rp, mask).image)
        combined = rss_combine(chan_images)
        zf_combined = rss_combine(zf_images)

        if channels.shape[0] == 1 and not np.iscomplexobj(channels):
            ground = np.abs(channels[0])
        else:
            ground = rss_combine([np.fft.ifft2(c, norm="ortho") for c in channels])
        if crop_ref is not None:
            pad = pad_to_prime(crop_ref)
            combined = pad.crop(combined)
            zf_combined = pad.crop(zf_combined)
            ground = crop_ref

        # joint normalization to [0, 255] by the ground truth's peak
        peak = float(ground.max())
        scale = 255.0 / peak if peak > 0 else 1.0
        gn, rn, zn = ground * scale, combined * scale, zf_combined * scale
        rep = metrics_report(gn, rn, peak=255.0)
        row.update(psnr_db=rep.psnr, ssim=rep.ssim, rmse=rep.rmse)

        images = {}
        if plan.emit_images != "none":
            images = {"zf": zn, "recon": rn, "err": np.abs(gn - rn)}
    except Exception as exc:  # recorded, run continues
        row["status"] = _sanitize(f"error: {type(exc).__name__}: {exc}")
        images = {}
    if plan.record_timing:
        row["wall_ms"] = (time.perf_counter() - started) * 1000.0
    return _CellOutcome(row, images)


def run_experiment(plan: ExperimentPlan, out_dir: str | Path | None = None, threads: int | None = None) -> Path:
    """Execute every cell, write results.csv (stable order) and any
    requested images; returns the results path."""
    out = Path(out_dir if out_dir is not None else plan.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = list(plan.cells())
    workers = threads if threads is not None else plan.threads
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda c: _run_cell(plan, *c), cells))
    else:
        outcomes = [_run_cell(plan, *c) for c in cells]

    lines = [",".join(CSV_COLUMNS)]
    for (idx, inp, mp, target, rp), outcome in zip(cells, outcomes):
        row = outcome.row
        lines.append(",".join(_fmt(row.get(col)) for col in CSV_COLUMNS))
        if outcome.images:
            stem = f"{inp.input_id}_{row['mask_kind']}_R{_fmt(float(target))}_{rp.solver.value}_cell{idx}"
            for tag, img in outcome.images.items():
                if plan.emit_images == "pgm":
                    kio.write_pgm(out / f"{stem}_{tag}.pgm", img)
                else:
                    kio.write_png(out / f"{stem}_{tag}.png", img)
    results = out / "results.csv"
    results.write_text("\n".join(lines) + "\n", encoding="ascii")
    return results
