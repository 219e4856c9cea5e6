"""k-space sampling mask construction.

Two families:

* pseudo-random fractal (``build_pfrac``): a union of discrete Radon
  slices — a deterministic stage of the mu slopes whose first slice
  sample lies closest to the k-space origin, then nu extra slopes drawn
  uniformly from the remainder — optionally topped up with a fully
  sampled central disk (CTR).

* variable-density Cartesian (``build_cartesian``): full phase-encode
  rows (OneD) or individual points (TwoD) drawn without replacement with
  weight (1 - 2|k_c|/N)^alpha in centred coordinates.

Masks are boolean N x N grids in natural DFT ordering with DC always
selected.  Construction is a pure function of the parameter dataclass
(the seed is a field, not ambient state).

For non-prime grid sizes the native slice union is badly coherent: slopes
congruent mod p stack in phase at displacement multiples of N/p, so the
sidelobe-to-peak ratio is an order of magnitude above the prime case at
the same reduction.  ``build_pfrac`` therefore builds the slice union on
the next prime P >= N and keeps the centred N x N window, which preserves
the fractal geometry and its incoherence.  Prime N uses its own slices
directly, and the recorded slopes then index the mask's own grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import _rng
from .geometry import M, GridGeometry, Slope, centre_wrap, next_prime
from .radon import slice_points

__all__ = [
    "Dims",
    "FractalSpec",
    "CartesianSpec",
    "PFracProvenance",
    "CartesianProvenance",
    "SamplingMask",
    "deterministic_slopes",
    "random_slopes",
    "build_pfrac",
    "build_cartesian",
    "actual_reduction",
    "pfrac_for_reduction",
    "cartesian_for_reduction",
    "save_mask",
    "load_mask",
]


class Dims(Enum):
    OneD = "1d"
    TwoD = "2d"


@dataclass(frozen=True)
class FractalSpec:
    """Parameters of a pseudo-random fractal mask.

    ``r`` is the target fraction of slopes: floor(r*N) slopes are used,
    mu of them deterministic and nu = floor(r*N) - mu random.  As the
    exception that makes r=1 mean "everything", r >= 1 selects the full
    slope set (N + N/p slopes, which exceeds N = floor(1*N)).
    """

    geometry: GridGeometry
    r: float
    mu: int
    ctr: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError(f"r must be in (0, 1], got {self.r}")
        if not 0 <= self.ctr <= self.geometry.n // 2:
            raise ValueError(f"ctr must be in [0, {self.geometry.n // 2}]")
        n = self.line_count
        if not 0 <= self.mu <= n:
            raise ValueError(f"mu={self.mu} outside [0, {n}] for r={self.r}")
        if n > self.build_geometry.slope_count:
            raise ValueError(f"{n} lines exceed the {self.build_geometry.slope_count} available slopes")

    @property
    def build_geometry(self) -> GridGeometry:
        """Grid whose slices the mask is assembled from (prime)."""
        n = self.geometry.n
        return self.geometry if self.geometry.is_prime else GridGeometry(next_prime(n))

    @property
    def line_count(self) -> int:
        if self.r >= 1.0:
            return self.build_geometry.slope_count
        return int(self.r * self.geometry.n)


@dataclass(frozen=True)
class CartesianSpec:
    """Parameters of a variable-density Cartesian mask."""

    geometry: GridGeometry
    r: float
    alpha: float
    dims: Dims = Dims.OneD
    ctr: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError(f"r must be in (0, 1], got {self.r}")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0 <= self.ctr <= self.geometry.n // 2:
            raise ValueError(f"ctr must be in [0, {self.geometry.n // 2}]")
        if self.count < 1:
            raise ValueError(f"r={self.r} selects zero {'rows' if self.dims is Dims.OneD else 'points'}")

    @property
    def count(self) -> int:
        n = self.geometry.n
        return int(self.r * n) if self.dims is Dims.OneD else int(self.r * n * n)


@dataclass(frozen=True)
class PFracProvenance:
    spec: FractalSpec
    slopes: tuple[Slope, ...]  # indexing spec.build_geometry's grid


@dataclass(frozen=True)
class CartesianProvenance:
    spec: CartesianSpec
    rows: tuple[int, ...] = ()  # chosen phase-encode rows (OneD only)


@dataclass(frozen=True)
class SamplingMask:
    geometry: GridGeometry
    selected: np.ndarray
    provenance: PFracProvenance | CartesianProvenance

    def __post_init__(self):
        n = self.geometry.n
        if self.selected.shape != (n, n) or self.selected.dtype != np.bool_:
            raise ValueError("selected must be an N x N boolean grid")
        if not self.selected[0, 0]:
            raise ValueError("DC must be selected")

    @property
    def point_count(self) -> int:
        return int(self.selected.sum())


def deterministic_slopes(geometry: GridGeometry, mu: int) -> tuple[Slope, ...]:
    """The mu slopes whose k=1 slice sample lies closest to the origin.

    Distance is Euclidean on centred coordinates; ties break M before S,
    then ascending slope value, so the result is a total order prefix.
    """
    if not 0 <= mu <= geometry.slope_count:
        raise ValueError(f"mu={mu} outside [0, {geometry.slope_count}]")
    n = geometry.n
    ranked = []
    for sl in geometry.all_slopes():
        u, v = slice_points(sl, geometry)[1]
        d2 = int(centre_wrap(u, n)) ** 2 + int(centre_wrap(v, n)) ** 2
        ranked.append((d2, 0 if sl.kind == M else 1, sl.value, sl))
    ranked.sort(key=lambda t: t[:3])
    return tuple(sl for *_, sl in ranked[:mu])


def random_slopes(
    geometry: GridGeometry, nu: int, seed: int, exclude: tuple[Slope, ...] = ()
) -> tuple[Slope, ...]:
    """nu distinct slopes uniform over those not excluded.

    Ordered by draw; same seed, same result.
    """
    pool = [sl for sl in geometry.all_slopes() if sl not in set(exclude)]
    if not 0 <= nu <= len(pool):
        raise ValueError(f"nu={nu} outside [0, {len(pool)}]")
    rng = _rng.stream(seed, _rng.SLOPES)
    idx = rng.choice(len(pool), size=nu, replace=False)
    return tuple(pool[i] for i in idx)


def _ctr_disk(n: int, ctr: int) -> np.ndarray:
    kc = centre_wrap(np.arange(n), n)
    u, v = np.meshgrid(kc, kc, indexing="ij")
    return u * u + v * v <= ctr * ctr


def _slice_union(geometry: GridGeometry, slopes: tuple[Slope, ...]) -> np.ndarray:
    mask = np.zeros((geometry.n, geometry.n), dtype=bool)
    for sl in slopes:
        pts = slice_points(sl, geometry)
        mask[pts[:, 0], pts[:, 1]] = True
    return mask


def _centre_crop(mask: np.ndarray, n: int) -> np.ndarray:
    # keep centred coordinates [-N/2, N/2) of the larger grid
    big = mask.shape[0]
    lo = big // 2 - n // 2
    shifted = np.fft.fftshift(mask)
    return np.ascontiguousarray(np.fft.ifftshift(shifted[lo : lo + n, lo : lo + n]))


def build_pfrac(spec: FractalSpec) -> SamplingMask:
    """Assemble a pseudo-random fractal mask from its spec."""
    bg = spec.build_geometry
    if spec.r >= 1.0:
        chosen = bg.all_slopes()
    else:
        det = deterministic_slopes(bg, spec.mu)
        rnd = random_slopes(bg, spec.line_count - spec.mu, spec.seed, exclude=det)
        chosen = det + rnd
    mask = _slice_union(bg, chosen)
    if spec.ctr > 0:
        mask |= _ctr_disk(bg.n, spec.ctr)
    if bg.n != spec.geometry.n:
        mask = _centre_crop(mask, spec.geometry.n)
    mask[0, 0] = True
    return SamplingMask(spec.geometry, mask, PFracProvenance(spec, chosen))


def _race_select(weights: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of a weighted draw without replacement (index 0 forced).

    Exponential race: index i finishes at time Exp(1)/w_i, and the count
    earliest finishers are a without-replacement sample under the
    sequential-draw law for weights w.  Zero-weight entries never finish
    (key = inf) and are taken only when count requires them.
    """
    keys = np.where(weights > 0, -np.log(rng.random(weights.size)) / np.where(weights > 0, weights, 1.0), np.inf)
    keys[0] = -np.inf
    order = np.argsort(keys, kind="stable")
    return order[:count]


def build_cartesian(spec: CartesianSpec) -> SamplingMask:
    """Assemble a variable-density Cartesian mask from its spec."""
    n = spec.geometry.n
    kc = centre_wrap(np.arange(n), n)
    w1 = np.maximum(1.0 - 2.0 * np.abs(kc) / n, 0.0) ** spec.alpha
    rng = _rng.stream(spec.seed, _rng.CARTESIAN)
    mask = np.zeros((n, n), dtype=bool)
    rows: tuple[int, ...] = ()
    if spec.dims is Dims.OneD:
        sel = _race_select(w1, spec.count, rng)
        mask[sel, :] = True
        rows = tuple(int(i) for i in np.sort(sel))
    else:
        sel = _race_select(np.outer(w1, w1).ravel(), spec.count, rng)
        flat = mask.ravel()
        flat[sel] = True
    if spec.ctr > 0:
        mask |= _ctr_disk(n, spec.ctr)
    mask[0, 0] = True
    return SamplingMask(spec.geometry, mask, CartesianProvenance(spec, rows))


def actual_reduction(mask: SamplingMask) -> float:
    """N^2 / number of selected points."""
    count = mask.point_count
    if count == 0:
        raise ValueError("empty mask")
    return mask.geometry.n ** 2 / count


def pfrac_for_reduction(
    geometry: GridGeometry, target_r: float, mu: int, ctr: int = 0, seed: int = 0
) -> SamplingMask:
    """Largest-line-count fractal mask whose reduction is >= target.

    Searches line count downward/upward from N/target ("closest factor
    above"); the point count grows with the line count, so the achieved
    reduction is monotone and the maximal satisfying count is unique.
    Target 1.0 short-circuits to the fully sampled mask.
    """
    if target_r < 1.0:
        raise ValueError("target reduction must be >= 1")
    if target_r == 1.0:
        return build_pfrac(FractalSpec(geometry, 1.0, mu, ctr, seed))
    n = geometry.n

    def mask_for(lines: int) -> SamplingMask:
        # r chosen so floor(r*N) == lines exactly
        return build_pfrac(FractalSpec(geometry, (lines + 0.5) / n, mu, ctr, seed))

    lines = max(int(n / target_r), mu, 1)
    best = mask_for(lines)
    if actual_reduction(best) >= target_r:
        while lines + 1 <= n - 1:
            nxt = mask_for(lines + 1)
            if actual_reduction(nxt) < target_r:
                break
            lines, best = lines + 1, nxt
    else:
        while lines - 1 >= max(mu, 1):
            lines, best = lines - 1, mask_for(lines - 1)
            if actual_reduction(best) >= target_r:
                break
        else:
            raise ValueError(f"cannot reach reduction {target_r} with mu={mu}, ctr={ctr}")
        if actual_reduction(best) < target_r:
            raise ValueError(f"cannot reach reduction {target_r} with mu={mu}, ctr={ctr}")
    return best


def cartesian_for_reduction(
    geometry: GridGeometry,
    target_r: float,
    alpha: float,
    dims: Dims = Dims.OneD,
    ctr: int = 0,
    seed: int = 0,
) -> SamplingMask:
    """Largest-count Cartesian mask whose reduction is >= target;
    target 1.0 short-circuits to the fully sampled mask."""
    if target_r < 1.0:
        raise ValueError("target reduction must be >= 1")
    if target_r == 1.0:
        return build_cartesian(CartesianSpec(geometry, 1.0, alpha, dims, ctr, seed))
    n = geometry.n
    total = n if dims is Dims.OneD else n * n

    def mask_for(count: int) -> SamplingMask:
        r = min((count + 0.5) / total, 1.0)
        return build_cartesian(CartesianSpec(geometry, r, alpha, dims, ctr, seed))

    count = max(int(total / target_r), 1)
    best = mask_for(count)
    if actual_reduction(best) >= target_r:
        while count + 1 <= total:
            nxt = mask_for(count + 1)
            if actual_reduction(nxt) < target_r:
                break
            count, best = count + 1, nxt
    else:
        while count - 1 >= 1:
            count, best = count - 1, mask_for(count - 1)
            if actual_reduction(best) >= target_r:
                break
        else:
            raise ValueError(f"cannot reach reduction {target_r} with ctr={ctr}")
        if actual_reduction(best) < target_r:
            raise ValueError(f"cannot reach reduction {target_r} with ctr={ctr}")
    return best


# ---------------------------------------------------------------------------
# mask files: P4 PBM grid + key = value sidecar (<path>.meta)

def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".meta")


def save_mask(mask: SamplingMask, path: str | Path) -> None:
    """Write the boolean grid as binary PBM and provenance as a sidecar.

    The PBM stores mask rows in natural DFT order, bits MSB-first, rows
    byte-padded (the standard P4 raster).  Round trip is bit-exact.
    """
    path = Path(path)
    n = mask.geometry.n
    raster = np.packbits(mask.selected.astype(np.uint8), axis=1)
    with open(path, "wb") as fh:
        fh.write(f"P4\n{n} {n}\n".encode("ascii"))
        fh.write(raster.tobytes())

    prov = mask.provenance
    lines = []
    if isinstance(prov, PFracProvenance):
        s = prov.spec
        lines += [
            "kind = pfrac",
            f"N = {n}",
            f"r = {s.r!r}",
            f"mu = {s.mu}",
            f"ctr = {s.ctr}",
            f"seed = {s.seed}",
            "slopes = " + ",".join(sl.token() for sl in prov.slopes),
        ]
    else:
        s = prov.spec
        lines += [
            "kind = cartesian",
            f"N = {n}",
            f"r = {s.r!r}",
            f"alpha = {s.alpha!r}",
            f"dims = {s.dims.value}",
            f"ctr = {s.ctr}",
            f"seed = {s.seed}",
            "rows = " + ",".join(str(i) for i in prov.rows),
        ]
    lines.append(f"actual_reduction = {actual_reduction(mask)!r}")
    _sidecar(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _parse_sidecar(path: Path) -> dict[str, str]:
    fields = {}
    for line in path.read_text(encoding="ascii").splitlines():
        line = line.strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    return fields


def load_mask(path: str | Path) -> SamplingMask:
    """Read a mask written by :func:`save_mask`, provenance included."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P4":
            raise ValueError(f"{path}: not a binary PBM")
        dims = fh.readline().split()
        width, height = int(dims[0]), int(dims[1])
        if width != height:
            raise ValueError(f"{path}: mask must be square, got {width} x {height}")
        n = width
        row_bytes = (n + 7) // 8
        raster = np.frombuffer(fh.read(row_bytes * n), dtype=np.uint8).reshape(n, row_bytes)
    selected = np.unpackbits(raster, axis=1)[:, :n].astype(bool)

    fields = _parse_sidecar(_sidecar(path))
    if int(fields["N"]) != n:
        raise ValueError(f"{path}: sidecar N={fields['N']} does not match PBM size {n}")
    geom = GridGeometry(n)
    if fields["kind"] == "pfrac":
        spec = FractalSpec(geom, float(fields["r"]), int(fields["mu"]), int(fields["ctr"]), int(fields["seed"]))
        slopes = tuple(Slope.from_token(t) for t in fields["slopes"].split(",") if t)
        prov: PFracProvenance | CartesianProvenance = PFracProvenance(spec, slopes)
    elif fields["kind"] == "cartesian":
        spec = CartesianSpec(
            geom,
            float(fields["r"]),
            float(fields["alpha"]),
            Dims(fields["dims"]),
            int(fields["ctr"]),
            int(fields["seed"]),
        )
        rows = tuple(int(t) for t in fields["rows"].split(",") if t)
        prov = CartesianProvenance(spec, rows)
    else:
        raise ValueError(f"{path}: unknown mask kind {fields['kind']!r}")
    return SamplingMask(geom, selected, prov)
