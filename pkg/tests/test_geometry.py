"""Grid geometry: prime-power validation, slope enumeration, wrapping."""

import numpy as np
import pytest

from finrad import GridGeometry, Slope, centre_wrap, is_prime, next_prime, smallest_prime_factor
from finrad.geometry import M, S


def _is_prime_loop(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, n))


@pytest.mark.parametrize("n", range(2, 200))
def test_is_prime_matches_trial_division(n):
    assert is_prime(n) == _is_prime_loop(n)


def test_smallest_prime_factor():
    for n in range(2, 300):
        spf = smallest_prime_factor(n)
        assert n % spf == 0 and _is_prime_loop(spf)
        assert all(n % d for d in range(2, spf))


def test_next_prime():
    assert next_prime(16) == 17
    assert next_prime(17) == 17
    assert next_prime(256) == 257
    for n in (2, 9, 100, 255):
        p = next_prime(n)
        assert p >= n and _is_prime_loop(p)
        assert all(not _is_prime_loop(q) for q in range(n, p))


def test_centre_wrap():
    # N=5: 0,1,2 stay; 3,4 wrap to -2,-1
    assert list(centre_wrap(np.arange(5), 5)) == [0, 1, 2, -2, -1]
    # N=4: 0,1 stay; 2,3 wrap to -2,-1
    assert list(centre_wrap(np.arange(4), 4)) == [0, 1, -2, -1]
    for n in (3, 8, 17):
        wrapped = centre_wrap(np.arange(n), n)
        assert ((wrapped % n) == np.arange(n)).all()
        assert wrapped.max() <= n // 2 and wrapped.min() >= -(n // 2)


@pytest.mark.parametrize("n,p,exponent", [(5, 5, 1), (17, 17, 1), (64, 2, 6), (81, 3, 4), (257, 257, 1), (4, 2, 2)])
def test_prime_power_grids_accepted(n, p, exponent):
    g = GridGeometry(n)
    assert g.p == p
    assert g.exponent == exponent
    assert g.is_prime == (exponent == 1)


@pytest.mark.parametrize("n", [1, 6, 12, 45, 96, 100, 256 + 2])
def test_composite_grids_rejected(n):
    with pytest.raises(ValueError):
        GridGeometry(n)


@pytest.mark.parametrize("n", [5, 17, 9, 64])
def test_slope_counts(n):
    g = GridGeometry(n)
    assert g.m_slope_count == n
    assert g.s_slope_count == n // g.p
    assert g.slope_count == n + n // g.p
    if g.is_prime:
        assert g.slope_count == n + 1


def test_all_slopes_enumeration():
    g = GridGeometry(9)
    slopes = g.all_slopes()
    assert len(slopes) == len(set(slopes)) == 12
    ms = [s for s in slopes if s.kind == M]
    ss = [s for s in slopes if s.kind == S]
    assert [s.value for s in ms] == list(range(9))
    assert [s.value for s in ss] == list(range(3))
    # M block precedes S block
    assert slopes[:9] == tuple(ms) and slopes[9:] == tuple(ss)


def test_slope_token_round_trip():
    for slope in GridGeometry(17).all_slopes():
        assert Slope.from_token(slope.token()) == slope
    assert Slope.from_token("m:3") == Slope(M, 3)
    assert Slope.from_token("s:0") == Slope(S, 0)
    with pytest.raises(ValueError):
        Slope.from_token("q:1")


def test_validate_slope():
    g = GridGeometry(9)
    g.validate_slope(Slope(M, 8))
    g.validate_slope(Slope(S, 2))
    with pytest.raises(ValueError):
        g.validate_slope(Slope(M, 9))
    with pytest.raises(ValueError):
        g.validate_slope(Slope(S, 3))


def test_slope_ordering_is_stable():
    assert Slope(M, 1) < Slope(M, 2) < Slope(S, 0) < Slope(S, 1)
