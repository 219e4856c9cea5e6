"""Reconstruction from under-sampled k-space.

Solvers
-------
* ``zero_fill`` — inverse DFT of the masked data.
* ``ffr`` — relaxed Fourier-domain iteration
  x_{t+1} = x_t + lambda * F^H(y - F_Omega x_t), with non-local-means
  denoising every few iterations at a scheduled strength h.
* ``fsirt`` — the same relaxed iteration expressed through the discrete
  Radon transform: forward-project the estimate on the chosen slopes,
  back-project the projection residual.  Because back-projection divides
  by slice multiplicity, its normal operator is the identical k-space
  projector, so fsirt and ffr produce matching iterates when the mask is
  a pure slice union (no central disk — a disk has no slice counterpart,
  which is why fsirt rejects ctr > 0).
* ``cs_baseline`` — proximal-gradient (iterative shrinkage) solver for
    argmin_x ||y - F_Omega x||^2 + w_wav ||Haar x||_1 + w_tv TV(x)
  with monotone backtracking on the true objective.

All k-space operators use the unitary DFT convention, making
F_Omega^H F_Omega an orthogonal projector; any relaxation in (0, 2)
converges and lambda = 1 is an exact projection onto data consistency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import uniform_filter

from .radon import Sinogram, back_project, drt_forward
from .sampling import PFracProvenance, SamplingMask
from . import metrics as _metrics

__all__ = [
    "KSpace",
    "ScheduleKind",
    "HSchedule",
    "NlmParams",
    "Solver",
    "ReconConfig",
    "CsBaselineConfig",
    "IterationRecord",
    "ReconResult",
    "DivergenceError",
    "h_schedule_eval",
    "nlm_denoise",
    "zero_fill",
    "ffr",
    "fsirt",
    "cs_baseline",
    "rss_combine",
]


@dataclass(frozen=True)
class KSpace:
    """Masked k-space measurements: complex N x N grid, zero off-mask."""

    mask: SamplingMask
    data: np.ndarray

    def __post_init__(self):
        n = self.mask.geometry.n
        if self.data.shape != (n, n):
            raise ValueError(f"data shape {self.data.shape} does not match N={n}")
        if not np.iscomplexobj(self.data):
            raise ValueError("k-space data must be complex")
        if np.any(self.data[~self.mask.selected] != 0):
            raise ValueError("unsampled k-space entries must be zero")


class ScheduleKind(Enum):
    Staged = "staged"
    PowerCurve = "power"


@dataclass(frozen=True)
class HSchedule:
    """Denoiser-strength schedule over the iteration count.

    Staged: h0 to halfway, h0/2 to 90%, h0/4 for the tail.
    PowerCurve: h0 * (1 - t/total)^exponent, decaying to zero.
    """

    kind: ScheduleKind
    h0: float
    exponent: float = 1.0

    def __post_init__(self):
        if self.h0 < 0:
            raise ValueError("h0 must be >= 0")
        if self.exponent < 0:
            raise ValueError("exponent must be >= 0")


def h_schedule_eval(schedule: HSchedule, t: int, total: int) -> float:
    if not 0 <= t <= total:
        raise ValueError(f"iteration {t} outside [0, {total}]")
    if schedule.kind is ScheduleKind.Staged:
        if t < total / 2:
            return schedule.h0
        if t < 0.9 * total:
            return schedule.h0 / 2
        return schedule.h0 / 4
    return schedule.h0 * (1.0 - t / total) ** schedule.exponent


@dataclass(frozen=True)
class NlmParams:
    h: float = 0.0
    patch_radius: int = 1
    search_radius: int = 5

    def __post_init__(self):
        if self.h < 0:
            raise ValueError("h must be >= 0")
        if self.patch_radius < 1 or self.search_radius < 1:
            raise ValueError("radii must be >= 1")
        if self.search_radius < self.patch_radius:
            raise ValueError("search_radius must be >= patch_radius")


class Solver(Enum):
    FFR = "ffr"
    FSIRT = "fsirt"
    CsBaseline = "cs-baseline"
    ZeroFill = "zero-fill"


@dataclass(frozen=True)
class ReconConfig:
    solver: Solver
    iterations: int = 100
    lambda_relax: float = 1.0
    denoise_every: int = 3
    schedule: HSchedule | None = None

    def __post_init__(self):
        if not 0.0 < self.lambda_relax < 2.0:
            raise ValueError("lambda_relax must lie in (0, 2)")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.denoise_every < 1:
            raise ValueError("denoise_every must be >= 1")


@dataclass(frozen=True)
class CsBaselineConfig:
    wavelet_weight: float = 2.0
    tv_weight: float = 6e-4
    iterations: int = 160
    step: float = 0.5

    def __post_init__(self):
        if self.wavelet_weight < 0 or self.tv_weight < 0:
            raise ValueError("weights must be >= 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.step <= 0:
            raise ValueError("step must be > 0")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    residual_l2: float
    h_applied: float | None
    psnr_vs_ground: float | None


@dataclass(frozen=True)
class ReconResult:
    image: np.ndarray
    log: tuple[IterationRecord, ...]
    solver: Solver
    converged: bool = True
    objectives: tuple[float, ...] = field(default=())

    def log_csv(self) -> str:
        lines = ["iter,residual_l2,h_applied,psnr_vs_ground"]
        for rec in self.log:
            h = "" if rec.h_applied is None else f"{rec.h_applied:.6g}"
            p = "" if rec.psnr_vs_ground is None else f"{rec.psnr_vs_ground:.6g}"
            lines.append(f"{rec.iteration},{rec.residual_l2:.9g},{h},{p}")
        return "\n".join(lines) + "\n"


class DivergenceError(RuntimeError):
    """Raised when the iteration residual blows past the divergence guard."""


def zero_fill(y: KSpace) -> np.ndarray:
    """Inverse unitary DFT of the masked k-space."""
    return np.fft.ifft2(y.data, norm="ortho")


def nlm_denoise(image: np.ndarray, params: NlmParams) -> np.ndarray:
    """Non-local means with periodic boundaries.

    Every pixel within the search window contributes its shifted value,
    weighted by exp(-d2/h^2) where d2 is the mean squared difference over
    the aligned patches; weights are normalized per pixel.  Complex input
    is denoised as independent real and imaginary channels.
    """
    img = np.asarray(image)
    if params.h == 0:
        return img.copy()
    if np.iscomplexobj(img):
        return nlm_denoise(img.real, params) + 1j * nlm_denoise(img.imag, params)
    img = img.astype(np.float64)
    win = 2 * params.patch_radius + 1
    inv_h2 = 1.0 / params.h**2
    acc = np.zeros_like(img)
    weight_sum = np.zeros_like(img)
    span = range(-params.search_radius, params.search_radius + 1)
    for dx in span:
        for dy in span:
            shifted = np.roll(img, (dx, dy), axis=(0, 1))
            d2 = uniform_filter((img - shifted) ** 2, size=win, mode="wrap")
            w = np.exp(-d2 * inv_h2)
            acc += w * shifted
            weight_sum += w
    return acc / weight_sum


def _relaxed_iterations(
    x0: np.ndarray,
    residual_of: Callable[[np.ndarray], tuple[np.ndarray, float]],
    correction_of: Callable[[np.ndarray], np.ndarray],
    config: ReconConfig,
    nlm: NlmParams,
    guard_scale: float,
    ground: np.ndarray | None,
    peak: float,
) -> tuple[np.ndarray, list[IterationRecord]]:
    """Shared driver: optional denoise, then x += lambda * correction(residual).

    Each record logs the residual that drove that iteration's update
    (evaluated after any denoise) and the quality of the updated iterate.
    The divergence guard compares residuals against ten times the larger
    of the initial residual and the data norm: the canonical zero-fill
    start has zero initial residual, so the data norm supplies the
    meaningful scale while exponential growth still trips the guard.
    """
    x = x0
    _, r0 = residual_of(x)
    guard = 10.0 * max(r0, guard_scale)
    log: list[IterationRecord] = []
    for t in range(config.iterations):
        h: float | None = None
        if config.schedule is not None and t > 0 and t % config.denoise_every == 0:
            h = h_schedule_eval(config.schedule, t, config.iterations)
            x = nlm_denoise(x, NlmParams(h, nlm.patch_radius, nlm.search_radius))
        resid, rnorm = residual_of(x)
        if not math.isfinite(rnorm) or rnorm > guard:
            raise DivergenceError(
                f"residual {rnorm:.3e} exceeded guard {guard:.3e} at iteration {t + 1}"
            )
        x = x + config.lambda_relax * correction_of(resid)
        q = None
        if ground is not None:
            q = _metrics.psnr(np.abs(ground), np.abs(x), peak)
        log.append(IterationRecord(t + 1, rnorm, h, q))
    return x, log


def ffr(
    y: KSpace,
    config: ReconConfig,
    nlm: NlmParams = NlmParams(),
    ground: np.ndarray | None = None,
    peak: float = 255.0,
) -> ReconResult:
    """Relaxed data-consistency iteration in k-space with scheduled NLM.

    Starts from the zero-fill image and ends on a data-consistency
    update, so with lambda = 1 the output's k-space matches y exactly on
    the sampled set.
    """
    if config.solver is not Solver.FFR:
        raise ValueError(f"config.solver is {config.solver}, expected FFR")
    sel = y.mask.selected

    def residual_of(x):
        resid = np.where(sel, y.data - np.fft.fft2(x, norm="ortho"), 0.0)
        return resid, float(np.linalg.norm(resid))

    def correction_of(resid):
        return np.fft.ifft2(resid, norm="ortho")

    x, log = _relaxed_iterations(
        zero_fill(y), residual_of, correction_of, config, nlm,
        float(np.linalg.norm(y.data)), ground, peak,
    )
    return ReconResult(x, tuple(log), Solver.FFR)


def fsirt(
    g: Sinogram,
    config: ReconConfig,
    mask: SamplingMask | None = None,
    nlm: NlmParams = NlmParams(),
    ground: np.ndarray | None = None,
    peak: float = 255.0,
) -> ReconResult:
    """Relaxed iteration through the discrete Radon transform.

    ``g`` holds the measured projections, one row per chosen slope.  When
    the originating mask is supplied it must be a slice union with ctr=0
    and slopes matching the sinogram: a central disk has no projection
    counterpart, so such masks are rejected rather than silently ignored.
    """
    if config.solver is not Solver.FSIRT:
        raise ValueError(f"config.solver is {config.solver}, expected FSIRT")
    if mask is not None:
        prov = mask.provenance
        if not isinstance(prov, PFracProvenance):
            raise ValueError("fsirt requires a slice-union (pfrac) mask")
        if prov.spec.ctr > 0:
            raise ValueError("fsirt cannot represent a central-disk region (ctr > 0)")
        if set(prov.slopes) != set(g.slopes):
            raise ValueError("mask slopes do not match sinogram slopes")
        if prov.spec.build_geometry.n != g.geometry.n:
            raise ValueError("mask was built on a different grid than the sinogram")
    geom = g.geometry
    slopes = g.slopes

    def residual_of(x):
        fwd = drt_forward(x, slopes)
        resid = g.data - fwd.data
        return resid, float(np.linalg.norm(resid))

    def correction_of(resid):
        return back_project(Sinogram(geom, slopes, resid))

    x, log = _relaxed_iterations(
        back_project(g), residual_of, correction_of, config, nlm,
        float(np.linalg.norm(g.data)), ground, peak,
    )
    return ReconResult(x, tuple(log), Solver.FSIRT)


# ---------------------------------------------------------------------------
# wavelet + TV proximal baseline

def _haar2(x: np.ndarray) -> np.ndarray:
    """Single-level orthonormal Haar along both axes.

    Odd lengths leave the unpaired trailing sample untouched, keeping the
    transform orthonormal on any N.
    """
    out = x
    for axis in (0, 1):
        out = np.moveaxis(out, axis, 0)
        n = out.shape[0]
        half = n // 2
        a = out[0 : 2 * half : 2]
        b = out[1 : 2 * half : 2]
        packed = np.concatenate(
            [(a + b) / np.sqrt(2.0), (a - b) / np.sqrt(2.0), out[2 * half :]], axis=0
        )
        out = np.moveaxis(packed, 0, axis)
    return out


def _ihaar2(c: np.ndarray) -> np.ndarray:
    out = c
    for axis in (0, 1):
        out = np.moveaxis(out, axis, 0)
        n = out.shape[0]
        half = n // 2
        s = out[0:half]
        d = out[half : 2 * half]
        rebuilt = np.empty_like(out)
        rebuilt[0 : 2 * half : 2] = (s + d) / np.sqrt(2.0)
        rebuilt[1 : 2 * half : 2] = (s - d) / np.sqrt(2.0)
        rebuilt[2 * half :] = out[2 * half :]
        out = np.moveaxis(rebuilt, 0, axis)
    return out


def _soft(z: np.ndarray, t: float) -> np.ndarray:
    mag = np.abs(z)
    scale = np.maximum(1.0 - t / np.where(mag > 0, mag, 1.0), 0.0)
    return z * scale


def _grad2(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.roll(x, -1, axis=0) - x, np.roll(x, -1, axis=1) - x


def _grad2_adjoint(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    return (np.roll(p1, 1, axis=0) - p1) + (np.roll(p2, 1, axis=1) - p2)


def _tv_value(x: np.ndarray) -> float:
    g1, g2 = _grad2(x)
    return float(np.abs(g1).sum() + np.abs(g2).sum())


def _tv_prox(v: np.ndarray, gamma: float, iters: int = 20) -> np.ndarray:
    """Anisotropic-TV proximal map by projected gradient on the dual.

    Dual variables are clamped per component to |p| <= gamma; the step
    1/8 is the inverse of the periodic difference operator's norm bound.
    """
    if gamma == 0:
        return v
    p1 = np.zeros_like(v)
    p2 = np.zeros_like(v)
    tau = 0.125
    for _ in range(iters):
        x = v - _grad2_adjoint(p1, p2)
        g1, g2 = _grad2(x)
        p1 = _clamp(p1 + tau * g1, gamma)
        p2 = _clamp(p2 + tau * g2, gamma)
    return v - _grad2_adjoint(p1, p2)


def _clamp(p: np.ndarray, gamma: float) -> np.ndarray:
    mag = np.abs(p)
    return p * np.minimum(1.0, gamma / np.where(mag > 0, mag, 1.0))


def cs_baseline(
    y: KSpace,
    config: CsBaselineConfig = CsBaselineConfig(),
    ground: np.ndarray | None = None,
    peak: float = 255.0,
) -> ReconResult:
    """Proximal-gradient solver for the l1-regularized inverse problem
    ||y - F_Omega x||^2 + w_wav ||Haar x||_1 + w_tv TV(x).

    Each iteration takes a gradient step on the data term, then applies
    the Haar soft-threshold and TV proximal maps in sequence; a candidate
    is accepted only if the true objective does not increase (1e-8
    slack), otherwise the step is halved and the update retried.  If no
    acceptable step remains the iterate is kept and the result is flagged
    non-converged.  Zero weights reduce the iteration to gradient descent
    on the projector data term, whose fixed point from the zero-fill
    start is the zero-fill image itself.
    """
    sel = y.mask.selected

    def data_resid(x):
        return np.where(sel, np.fft.fft2(x, norm="ortho") - y.data, 0.0)

    def objective(x, resid=None):
        r = data_resid(x) if resid is None else resid
        val = float(np.vdot(r, r).real)
        if config.wavelet_weight > 0:
            val += config.wavelet_weight * float(np.abs(_haar2(x)).sum())
        if config.tv_weight > 0:
            val += config.tv_weight * _tv_value(x)
        return val

    x = zero_fill(y)
    obj = objective(x)
    objectives = [obj]
    log: list[IterationRecord] = []
    converged = True
    for t in range(config.iterations):
        resid = data_resid(x)
        grad = 2.0 * np.fft.ifft2(resid, norm="ortho")
        step = config.step
        accepted = False
        for _ in range(30):
            v = x - step * grad
            if config.wavelet_weight > 0:
                v = _ihaar2(_soft(_haar2(v), step * config.wavelet_weight))
            if config.tv_weight > 0:
                v = _tv_prox(v, step * config.tv_weight)
            cand_obj = objective(v)
            if cand_obj <= obj + 1e-8:
                x, obj, accepted = v, cand_obj, True
                break
            step /= 2.0
        if not accepted:
            converged = False
        objectives.append(obj)
        rnorm = float(np.linalg.norm(data_resid(x)))
        q = _metrics.psnr(np.abs(ground), np.abs(x), peak) if ground is not None else None
        log.append(IterationRecord(t + 1, rnorm, None, q))
    return ReconResult(x, tuple(log), Solver.CsBaseline, converged, tuple(objectives))


def rss_combine(channel_images: Sequence[np.ndarray]) -> np.ndarray:
    """Root-sum-of-squares magnitude across channels."""
    if len(channel_images) == 0:
        raise ValueError("need at least one channel")
    shape = np.asarray(channel_images[0]).shape
    for ch in channel_images:
        if np.asarray(ch).shape != shape:
            raise ValueError("channel shapes differ")
    stack = np.stack([np.abs(np.asarray(ch)) ** 2 for ch in channel_images])
    return np.sqrt(stack.sum(axis=0))
