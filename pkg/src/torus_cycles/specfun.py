"""Special functions used by the cycle-probability series.

sinc, gamma at integer and half-integer points, Bessel functions of the first
kind at orders d/2, and lattice counts psi_d(k) = #{x in Z^d : |x|^2 = k}.

Everything here works in double precision. The Bessel routines are
vectorised over the argument because the series sums evaluate them on whole
arrays of lattice shells at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Orders nu = twice_nu / 2 are supported for 1 <= twice_nu <= MAX_TWICE_NU.
MAX_TWICE_NU = 32

SERIES_SWITCH = 2.0
HANKEL_SWITCH = 25.0
_SERIES_TERMS = 80


def sinc(x):
    """Unnormalised sinc, sin(x)/x, with sinc(0) = 1.

    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    if out.ndim == 0:
        return float(out)
    return out


def gamma_half(twice_a: int) -> float:
    """Gamma(twice_a / 2) for a positive integer twice_a."""
    if twice_a < 1:
        raise ValueError(f"gamma_half needs twice_a >= 1, got {twice_a}")
    if twice_a % 2 == 0:
        return float(math.factorial(twice_a // 2 - 1))
    m = twice_a // 2
    # Gamma(m + 1/2) = (2m)! sqrt(pi) / (4^m m!)
    return math.factorial(2 * m) / (4**m * math.factorial(m)) * math.sqrt(math.pi)


@dataclass(frozen=True)
class HalfIntOrder:
    twice_nu: int

    def __post_init__(self):
        if not 1 <= self.twice_nu <= MAX_TWICE_NU:
            raise ValueError(
                f"unsupported Bessel order {self.twice_nu}/2; "
                f"need 1 <= twice_nu <= {MAX_TWICE_NU}"
            )

    @property
    def nu(self) -> float:
        return self.twice_nu / 2


def _order(order) -> HalfIntOrder:
    if isinstance(order, HalfIntOrder):
        return order
    return HalfIntOrder(int(order))


def _series(nu: float, x: np.ndarray) -> np.ndarray:
    # ascending series, sum_m (-1)^m (x/2)^(2m+nu) / (m! Gamma(m+nu+1))
    h = 0.5 * x
    term = h**nu / math.gamma(nu + 1.0)
    total = term.copy()
    mh2 = -h * h
    for m in range(1, _SERIES_TERMS):
        term = term * mh2 / (m * (m + nu))
        total += term
        if np.all(np.abs(term) <= 1e-18 * np.abs(total)):
            break
    return total


def _hankel(nu: float, x: np.ndarray) -> np.ndarray:
    # Hankel asymptotic expansion; terminates exactly for half-integer nu.
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    qq = np.zeros_like(x)
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    for k in range(1, 200):
        factor = (mu - (2 * k - 1) ** 2) / (k * 8.0)
        if factor == 0.0:
            break
        term = term * factor / x
        mag = np.abs(term)
        if np.all(mag > prev) or np.all(mag < 1e-17):
            break
        # terms stop shrinking at different k for different x; freeze those
        live = mag <= prev
        term = np.where(live, term, 0.0)
        prev = np.where(live, mag, 0.0)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p += sign * term
        else:
            qq += sign * term
    phase = (0.5 * nu + 0.25) * math.pi
    c = np.cos(x) * math.cos(phase) + np.sin(x) * math.sin(phase)
    s = np.sin(x) * math.cos(phase) - np.cos(x) * math.sin(phase)
    return np.sqrt(2.0 / (math.pi * x)) * (p * c - qq * s)


def _upward_half(twice_nu: int, x: np.ndarray) -> np.ndarray:
    # J_{-1/2}, J_{1/2} closed forms, then upward recurrence (stable for nu < x).
    amp = np.sqrt(2.0 / (math.pi * x))
    jm = amp * np.cos(x)
    j = amp * np.sin(x)
    nu = 0.5
    while 2 * nu < twice_nu:
        jm, j = j, (2.0 * nu / x) * j - jm
        nu += 1.0
    return j


def _miller_int(n: int, x: np.ndarray) -> np.ndarray:
    # Downward recurrence normalised by J_0 + 2 sum_k J_{2k} = 1.
    xmax = float(np.max(x))
    start = int(max(n, xmax) + 20 + math.sqrt(60.0 * max(n, xmax)))
    start += start % 2
    jp = np.zeros_like(x)
    j = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    result = np.zeros_like(x)
    for k in range(start, 0, -1):
        jm = (2.0 * k / x) * j - jp
        jp, j = j, jm
        # j now holds the unnormalised J_{k-1}
        if k - 1 == n:
            result = j.copy()
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j
        big = np.abs(j) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            j *= scale
            jp *= scale
            norm *= scale
            result *= scale
    norm += j
    return result / norm


def bessel_j_array(order, x) -> np.ndarray:
    """J_nu(x) for nu = order/2 (an int twice_nu or a HalfIntOrder), x >= 0."""
    o = _order(order)
    nu = o.nu
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("bessel_j needs finite x >= 0")
    flat = x.ravel()
    out = np.zeros_like(flat)
    zero = flat == 0.0
    switch = max(SERIES_SWITCH, nu) if o.twice_nu % 2 == 1 else SERIES_SWITCH
    low = (flat > 0.0) & (flat <= switch)
    if np.any(low):
        out[low] = _series(nu, flat[low])
    high = flat > switch
    if o.twice_nu % 2 == 1:
        if np.any(high):
            out[high] = _upward_half(o.twice_nu, flat[high])
    else:
        n = o.twice_nu // 2
        cut = max(HANKEL_SWITCH, nu * nu + HANKEL_SWITCH)
        mid = high & (flat < cut)
        far = flat >= cut
        if np.any(mid):
            out[mid] = _miller_int(n, flat[mid])
        if np.any(far):
            out[far] = _hankel(nu, flat[far])
    out[zero] = 0.0
    return out.reshape(x.shape)


def bessel_j(order, x: float) -> float:
    """Scalar J_nu(x), nu = order/2."""
    return float(bessel_j_array(order, np.array([x], dtype=float))[0])


@dataclass(frozen=True)
class LatticeCountTable:
    d: int
    counts: tuple

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if not self.counts or self.counts[0] != 1:
            raise ValueError("counts[0] must be 1")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative")

    @property
    def k_max(self) -> int:
        return len(self.counts) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float)


def _count_dtype(d: int, k_max: int):
    side = 2 * math.isqrt(k_max) + 1
    return np.int64 if side**d < 2**62 else object


@lru_cache(maxsize=32)
def _psi_array(d: int, k_max: int) -> np.ndarray:
    dtype = _count_dtype(d, k_max)
    base = np.zeros(k_max + 1, dtype=dtype)
    base[0] = 1
    root = math.isqrt(k_max)
    for m in range(1, root + 1):
        base[m * m] = 2
    if d == 1:
        return base
    prev = _psi_array(d - 1, k_max)
    cur = prev.copy()
    for m in range(1, root + 1):
        s = m * m
        cur[s:] += 2 * prev[: k_max + 1 - s]
    return cur


def psi_counts(d: int, k_max: int) -> LatticeCountTable:
    """Representation counts of k as an ordered sum of d signed squares."""
    if d < 1 or k_max < 0:
        raise ValueError("psi_counts needs d >= 1 and k_max >= 0")
    arr = _psi_array(d, k_max)
    return LatticeCountTable(d, tuple(int(v) for v in arr))


def psi_array(d: int, k_max: int) -> np.ndarray:
    """psi_counts as a read-only array (no tuple conversion, for big tables)."""
    if d < 1 or k_max < 0:
        raise ValueError("psi_counts needs d >= 1 and k_max >= 0")
    # tables are built for power-of-two sizes so nearby k_max share a cache entry
    size = max(1024, 1 << (k_max.bit_length()))
    arr = _psi_array(d, size)[: k_max + 1].view()
    arr.flags.writeable = False
    return arr
