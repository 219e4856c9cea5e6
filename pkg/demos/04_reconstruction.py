"""Reconstructing an undersampled phantom four ways.

Takes 4x-undersampled k-space of a 257^2 phantom through zero-fill, the
iterative projector with a staged non-local-means schedule (FFR), its
Radon-domain twin (fSIRT, bit-for-bit the same iterates), and the
wavelet+TV proximal-gradient baseline.  Prints a PSNR/SSIM table and
writes PNGs of each result.
"""

import time
from pathlib import Path

import numpy as np

from finrad import (
    GridGeometry,
    HSchedule,
    ReconConfig,
    ScheduleKind,
    Solver,
    cs_baseline,
    ffr,
    fsirt,
    metrics_report,
    pfrac_for_reduction,
    shepp_logan,
    sinogram_from_kspace,
    undersample,
    zero_fill,
    write_png,
)

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

n = 257
img = shepp_logan(n)
mask = pfrac_for_reduction(GridGeometry(n), 4.0, mu=16, ctr=n // 12, seed=7)
y = undersample(img, mask)
print(f"phantom {n}^2, fractal mask: {mask.selected.sum()} of {n * n} samples "
      f"(R = {n * n / mask.selected.sum():.2f})")

results = {"zero-fill": zero_fill(y)}

t0 = time.perf_counter()
cfg = ReconConfig(Solver.FFR, iterations=60, lambda_relax=1.0, denoise_every=3,
                  schedule=HSchedule(ScheduleKind.Staged, 10.0))
results["ffr+nlm"] = ffr(y, cfg, ground=img).image
print(f"FFR: 60 iterations, denoise every 3, staged h from 10.0 "
      f"({time.perf_counter() - t0:.1f}s)")

# the Radon-domain route consumes projections, not k-space, yet produces
# the same iterates; run it briefly just to show the agreement
pure = pfrac_for_reduction(GridGeometry(n), 4.0, mu=16, ctr=0, seed=7)
y0 = undersample(img, pure)
a = ffr(y0, ReconConfig(Solver.FFR, iterations=10, lambda_relax=0.7)).image
b = fsirt(sinogram_from_kspace(y0), ReconConfig(Solver.FSIRT, iterations=10, lambda_relax=0.7),
          mask=pure).image
print(f"fSIRT vs FFR after 10 iterations (ctr=0 mask): max gap {np.abs(a - b).max():.2e}")

t0 = time.perf_counter()
results["wavelet+tv"] = cs_baseline(y, ground=img).image
print(f"baseline: 160 proximal-gradient iterations ({time.perf_counter() - t0:.1f}s)")

print(f"\n{'method':11s} {'PSNR dB':>8s} {'SSIM':>7s} {'RMSE':>7s}")
for name, rec in results.items():
    rep = metrics_report(img, np.abs(rec))
    print(f"{name:11s} {rep.psnr:8.2f} {rep.ssim:7.4f} {rep.rmse:7.3f}")
    write_png(out / f"recon_{name.replace('+', '_')}.png", np.abs(rec))

write_png(out / "recon_ground.png", img)
print(f"\nimages in {out}/")
