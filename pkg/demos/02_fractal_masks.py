"""Building pseudo-random fractal k-space masks, stage by stage.

A fractal mask is a union of discrete-line slices: mu deterministic slopes
chosen to tile the centre of k-space most densely, nu seeded-random extras,
and a fully sampled central disk of radius ctr on top.  For non-prime N the
union is assembled on the next prime grid and centre-cropped, which is what
keeps the sidelobes at 2D-random levels instead of stacking coherently.

Writes PNG renders of each stage plus a portable PBM + sidecar copy.
"""

from pathlib import Path

import numpy as np

from finrad import (
    FractalSpec,
    GridGeometry,
    actual_reduction,
    build_pfrac,
    load_mask,
    save_mask,
    write_png,
)

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

n = 257
geom = GridGeometry(n)

stages = {
    "deterministic": FractalSpec(geom, 42 / n, mu=42, ctr=0, seed=3),
    "plus_random": FractalSpec(geom, 42 / n, mu=16, ctr=0, seed=3),
    "plus_ctr_disk": FractalSpec(geom, 42 / n, mu=16, ctr=n // 12, seed=3),
}
for name, spec in stages.items():
    mask = build_pfrac(spec)
    # centre DC for display only; the mask itself indexes DC at [0,0]
    shown = np.fft.fftshift(mask.selected).astype(float) * 255
    write_png(out / f"mask_{name}.png", shown)
    print(f"{name:14s} lines={spec.line_count:3d} (mu={spec.mu}) ctr={spec.ctr:2d} "
          f"-> {mask.selected.sum():5d} samples, reduction {actual_reduction(mask):.2f}x")

# non-prime sizes borrow a prime parent grid
crop = build_pfrac(FractalSpec(GridGeometry(256), 64 / 256, mu=16, ctr=0, seed=3))
parent = crop.provenance.spec.build_geometry
print(f"N=256 mask assembled on the prime parent N={parent.n}, then centre-cropped: "
      f"{crop.selected.sum()} samples, reduction {actual_reduction(crop):.2f}x")

path = out / "mask_257.pbm"
save_mask(build_pfrac(stages["plus_ctr_disk"]), path)
again = load_mask(path)
print(f"saved {path.name} + {path.name}.meta; reload matches bit-exactly: "
      f"{np.array_equal(again.selected, build_pfrac(stages['plus_ctr_disk']).selected)}")
print(f"outputs in {out}/")
