"""Exact discrete Radon transform over prime-power grids and its Fourier
slice inverse.

The forward transform sums an N x N image over the discrete periodic lines

    y = m*x + t (mod N)        for M-slopes m in [0, N)
    x = p*s*y + t (mod N)      for S-slopes s in [0, N/p)

giving N + N/p projections of N translates each.  The 1D DFT of each
projection equals samples of the image's 2D DFT along a discrete line
through DC, so the transform inverts exactly with FFTs: transform each
projection, place the resulting slices into the frequency grid, divide
multiply-covered points by their contribution count, and apply the inverse
2D FFT.

All DFTs use the unitary convention (1/sqrt(N) per dimension, negative
exponent forward).  Under that convention the 1D DFT of a projection
equals sqrt(N) times the 2D DFT on the slice; :func:`slice_samples` folds
that single constant in so the slice identity reads as plain equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import M, S, GridGeometry, Slope

__all__ = [
    "Sinogram",
    "drt_forward",
    "drt_project",
    "drt_inverse",
    "back_project",
    "slice_points",
    "multiplicity_map",
    "dfst_slice",
    "slice_samples",
]


@dataclass(frozen=True)
class Sinogram:
    """Ordered set of discrete projections.

    Attributes
    ----------
    geometry : GridGeometry
        The grid the projections were taken on.
    slopes : tuple of Slope
        One slope per row of ``data``.
    data : ndarray, shape (len(slopes), N)
        Projection vectors indexed by translate t.
    """

    geometry: GridGeometry
    slopes: tuple[Slope, ...]
    data: np.ndarray

    def __post_init__(self):
        n = self.geometry.n
        if self.data.shape != (len(self.slopes), n):
            raise ValueError(
                f"sinogram data shape {self.data.shape} does not match "
                f"{len(self.slopes)} slopes on an N={n} grid"
            )
        for sl in self.slopes:
            self.geometry.validate_slope(sl)
        if len(set(self.slopes)) != len(self.slopes):
            raise ValueError("duplicate slopes in sinogram")

    @property
    def is_complete(self) -> bool:
        return set(self.slopes) == set(self.geometry.all_slopes())

    def row(self, slope: Slope) -> np.ndarray:
        try:
            return self.data[self.slopes.index(slope)]
        except ValueError:
            raise KeyError(f"sinogram has no row for slope {slope.token()}") from None


def _as_image(image: np.ndarray) -> tuple[np.ndarray, GridGeometry]:
    arr = np.asarray(image)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"image must be square 2D, got shape {arr.shape}")
    return arr, GridGeometry(arr.shape[0])


def drt_project(image: np.ndarray, slope: Slope) -> np.ndarray:
    """Project an image along the discrete lines of a single slope.

    Returns the length-N vector of line sums indexed by translate t.
    """
    arr, geom = _as_image(image)
    geom.validate_slope(slope)
    n = geom.n
    idx = np.arange(n)
    t = idx[None, :]
    if slope.kind == M:
        # row x contributes I[x, (m*x + t) mod N] to bin t
        cols = (slope.value * idx[:, None] + t) % n
        return arr[idx[:, None], cols].sum(axis=0)
    rows = (geom.p * slope.value * idx[:, None] + t) % n
    return arr[rows, idx[:, None]].sum(axis=0)


def drt_forward(image: np.ndarray, slopes: tuple[Slope, ...] | None = None) -> Sinogram:
    """Discrete Radon transform of a square image.

    Parameters
    ----------
    image : ndarray, shape (N, N)
        Real or complex pixel grid; N must be a prime power.
    slopes : tuple of Slope, optional
        Subset of slopes to project onto.  Defaults to the complete set
        (all M-slopes ascending, then all S-slopes ascending).

    Returns
    -------
    Sinogram
    """
    arr, geom = _as_image(image)
    if slopes is None:
        slopes = geom.all_slopes()
    data = np.empty((len(slopes), geom.n), dtype=np.complex128 if np.iscomplexobj(arr) else np.float64)
    for i, sl in enumerate(slopes):
        data[i] = drt_project(arr, sl)
    return Sinogram(geom, tuple(slopes), data)


def slice_points(slope: Slope, geometry: GridGeometry) -> np.ndarray:
    """Frequency-grid coordinates of the slice for a slope.

    Returns
    -------
    ndarray of int, shape (N, 2)
        Coordinates (u, v) in natural DFT ordering, indexed by slice
        frequency k = 0..N-1; row k=0 is DC at (0, 0).

    Notes
    -----
    Substituting the line equations into the 2D DFT gives, for M-slope m,
    the points {((-k*m) mod N, k)} and, for S-slope s, {(k, (-k*p*s) mod N)}.
    The orientation is pinned by the slice identity test, which compares
    :func:`slice_samples` of a projection against the image's 2D DFT.
    """
    geometry.validate_slope(slope)
    n = geometry.n
    k = np.arange(n)
    pts = np.empty((n, 2), dtype=np.int64)
    if slope.kind == M:
        pts[:, 0] = (-k * slope.value) % n
        pts[:, 1] = k
    else:
        pts[:, 0] = k
        pts[:, 1] = (-k * geometry.p * slope.value) % n
    return pts


@lru_cache(maxsize=32)
def _slice_index_cache(n: int) -> dict[Slope, tuple[np.ndarray, np.ndarray]]:
    geom = GridGeometry(n)
    out = {}
    for sl in geom.all_slopes():
        pts = slice_points(sl, geom)
        out[sl] = (pts[:, 0].copy(), pts[:, 1].copy())
    return out


def multiplicity_map(geometry: GridGeometry) -> np.ndarray:
    """Count, per frequency point, of slices covering it over all slopes.

    For prime N the full slope set tiles frequency space exactly once
    apart from DC, which every slice shares: the map is N+1 at (0,0) and
    1 elsewhere.  For prime powers some points are covered several times
    and the map records the division needed by the inverse.
    """
    return _multiplicity(geometry.n).copy()


@lru_cache(maxsize=32)
def _multiplicity(n: int) -> np.ndarray:
    geom = GridGeometry(n)
    counts = np.zeros((n, n), dtype=np.int64)
    cache = _slice_index_cache(n)
    for sl in geom.all_slopes():
        u, v = cache[sl]
        np.add.at(counts, (u, v), 1)
    return counts


def dfst_slice(projection: np.ndarray) -> np.ndarray:
    """Unitary 1D DFT of a projection vector."""
    proj = np.asarray(projection)
    if proj.ndim != 1:
        raise ValueError("projection must be a 1D vector")
    return np.fft.fft(proj, norm="ortho")


def slice_samples(projection: np.ndarray) -> np.ndarray:
    """1D DFT of a projection scaled to equal the image's unitary 2D DFT
    on the slice.

    Equals ``dfst_slice(projection) / sqrt(N)``; the single sqrt(N) is the
    global constant relating the two unitary transforms.
    """
    proj = np.asarray(projection)
    if proj.ndim != 1:
        raise ValueError("projection must be a 1D vector")
    return np.fft.fft(proj) / proj.shape[0]


def back_project(sinogram: Sinogram) -> np.ndarray:
    """Image-space back-projection of a (possibly partial) sinogram.

    Places each projection's frequency slice on its line, divides
    multiply-covered points by the number of contributing slices in the
    given slope subset, and applies the inverse unitary 2D DFT.  Points
    covered by no slice stay zero, so a partial sinogram back-projects
    to the zero-filled solution of its frequency samples.
    """
    geom = sinogram.geometry
    n = geom.n
    cache = _slice_index_cache(n)
    ks = np.zeros((n, n), dtype=np.complex128)
    counts = np.zeros((n, n), dtype=np.int64)
    for sl, proj in zip(sinogram.slopes, sinogram.data):
        u, v = cache[sl]
        np.add.at(ks, (u, v), slice_samples(proj))
        np.add.at(counts, (u, v), 1)
    covered = counts > 0
    ks[covered] /= counts[covered]
    return np.fft.ifft2(ks, norm="ortho")


def drt_inverse(sinogram: Sinogram) -> np.ndarray:
    """Invert a complete discrete Radon transform exactly.

    Raises
    ------
    ValueError
        If the sinogram does not contain every slope of its geometry.
    """
    if not sinogram.is_complete:
        raise ValueError("inverse requires the complete slope set")
    return back_project(sinogram)
