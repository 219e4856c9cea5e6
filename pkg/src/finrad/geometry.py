"""Grid geometry for periodic N x N image spaces with N a prime power.

The discrete projective transforms in :mod:`finrad.radon` are exact only
when the side length N factors as p^n for a single prime p.  This module
holds the validated geometry value plus the slope enumeration shared by
the transform, sampling, and reconstruction code.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "GridGeometry",
    "Slope",
    "M",
    "S",
    "is_prime",
    "next_prime",
    "centre_wrap",
]

# slope kinds: M covers lines y = mx + t, S the perpendicular x = psy + t
M = "m"
S = "s"


def smallest_prime_factor(n: int) -> int:
    if n < 2:
        raise ValueError(f"no prime factor for {n}")
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


def is_prime(n: int) -> bool:
    return n >= 2 and smallest_prime_factor(n) == n


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    c = max(n, 2)
    while not is_prime(c):
        c += 1
    return c


def centre_wrap(values, n: int):
    """Map DFT indices in [0, n) to centred coordinates in [-n/2, n/2)."""
    v = np.asarray(values)
    half = (n + 1) // 2
    return np.where(v >= half, v - n, v)


@dataclass(frozen=True, order=True)
class Slope:
    """A discrete line gradient: kind M (value m) or kind S (value s)."""

    kind: str
    value: int

    def __post_init__(self):
        if self.kind not in (M, S):
            raise ValueError(f"slope kind must be {M!r} or {S!r}, got {self.kind!r}")
        if self.value < 0:
            raise ValueError("slope value must be non-negative")

    def token(self) -> str:
        return f"{self.kind}:{self.value}"

    @staticmethod
    def from_token(tok: str) -> "Slope":
        kind, _, value = tok.partition(":")
        return Slope(kind.strip(), int(value))


@dataclass(frozen=True)
class GridGeometry:
    """Validated side length of a periodic square grid.

    Parameters
    ----------
    n : int
        Side length; must be >= 2 and a prime power p^k.  Composite sizes
        with more than one prime factor are rejected because the discrete
        line set no longer covers frequency space.
    """

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"grid side must be >= 2, got {self.n}")
        p = smallest_prime_factor(self.n)
        m = self.n
        while m % p == 0:
            m //= p
        if m != 1:
            raise ValueError(
                f"grid side {self.n} is not a prime power; "
                "only N = p^k grids support exact discrete projections"
            )

    @property
    def p(self) -> int:
        """Prime base of the grid size."""
        return smallest_prime_factor(self.n)

    @property
    def exponent(self) -> int:
        k, m = 0, self.n
        while m > 1:
            m //= self.p
            k += 1
        return k

    @property
    def is_prime(self) -> bool:
        return self.p == self.n

    @property
    def m_slope_count(self) -> int:
        return self.n

    @property
    def s_slope_count(self) -> int:
        return self.n // self.p

    @property
    def slope_count(self) -> int:
        return self.m_slope_count + self.s_slope_count

    def all_slopes(self) -> tuple[Slope, ...]:
        """Every distinct slope: M values ascending, then S values ascending."""
        return _all_slopes(self.n)

    def validate_slope(self, slope: Slope) -> None:
        limit = self.m_slope_count if slope.kind == M else self.s_slope_count
        if not 0 <= slope.value < limit:
            raise ValueError(f"slope {slope.token()} out of range for N={self.n}")


@lru_cache(maxsize=None)
def _all_slopes(n: int) -> tuple[Slope, ...]:
    g = GridGeometry(n)
    ms = tuple(Slope(M, m) for m in range(g.m_slope_count))
    ss = tuple(Slope(S, s) for s in range(g.s_slope_count))
    return ms + ss
