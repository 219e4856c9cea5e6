"""Point-spread incoherence of sampling families, in one small table.

The PSF of a mask is the inverse DFT of its indicator: sampling then
zero-fill-inverting convolves the image with it.  The sidelobe-to-peak
ratio (SPR) of that kernel measures how noise-like the aliasing is —
lower is better for sparse recovery.  Fractal line masks sit near 2D
random sampling, far below 1D row sampling, across reduction factors.
"""

from pathlib import Path

import numpy as np

from finrad import (
    Dims,
    GridGeometry,
    cartesian_for_reduction,
    pfrac_for_reduction,
    psf,
    report_csv_header,
    report_csv_row,
    spr_exact,
    spr_monte_carlo,
    write_png,
)

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
g = GridGeometry(256)

# a single mask: exact SPR from one inverse FFT, and its PSF rendered
mask = pfrac_for_reduction(g, 4.0, mu=16, ctr=0, seed=1)
kernel = np.abs(np.fft.fftshift(psf(mask)))
write_png(out / "psf_pfrac_R4.png", 255 * (kernel / kernel.max()) ** 0.3)
print(f"single fractal mask at R=4: exact SPR {spr_exact(mask).spr:.4f}")

# family means over fresh seeded masks (light protocol: 100 masks each)
families = {
    "pfrac": lambda r: (lambda s: pfrac_for_reduction(g, r, mu=16, ctr=0, seed=s)),
    "cart-1d": lambda r: (lambda s: cartesian_for_reduction(g, r, alpha=0.0, dims=Dims.OneD, ctr=0, seed=s)),
    "cart-2d": lambda r: (lambda s: cartesian_for_reduction(g, r, alpha=0.0, dims=Dims.TwoD, ctr=0, seed=s)),
}
lines = [report_csv_header()]
print(f"\n{'family':8s} {'R':>3s} {'mean SPR':>9s} {'min':>7s} {'max':>7s}")
for name, make in families.items():
    for r in (2.0, 4.0, 8.0):
        rep = spr_monte_carlo(make(r), samples=100, bases_per_sample=10, seed=7)
        lines.append(report_csv_row(rep, target_r=r))
        print(f"{name:8s} {r:3.0f} {rep.spr_mean:9.4f} {rep.spr_min:7.4f} {rep.spr_max:7.4f}")

(out / "spr_table.csv").write_text("\n".join(lines) + "\n")
print(f"\nwrote {out / 'spr_table.csv'} and psf_pfrac_R4.png")
