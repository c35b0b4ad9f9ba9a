"""Probability that one particular labeled q-cycle is present.

ER graphs: edges are independent, so the answer is p (q = 2) or p^q.

Geometric graphs on the torus: Poisson summation over the lattice of
frequencies 2 pi m gives

    Theta(q) = sum_{m in Z^d} FT(2 pi m)^q,       q >= 3,

where FT is the Fourier transform of the ball indicator. For the sup-norm
the sum factorises over coordinates into a sinc series; for the Euclidean
norm it collapses onto shells |m|^2 = k weighted by lattice counts psi_d(k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import NumericalFailure
from .geometry import INF, BallSpec, ball_ft, ball_volume, parse_sigma
from .specfun import bessel_j_array, gamma_half, psi_array, sinc

DEFAULT_TOL = 1e-12
DEFAULT_KMAX_INF = 10**6
DEFAULT_KMAX_2 = 10**5

# floating-point slack allowed on top of the truncation bound when clamping
_FP_SLACK = 1e-14
# terms in the first pass that estimates the value for relative tolerances
_FIRST_PASS = 4096


@dataclass(frozen=True)
class ER:
    p: Union[float, Fraction]

    def __post_init__(self):
        if not (0 <= self.p <= 1):
            raise ValueError(f"edge probability must lie in [0, 1], got {self.p}")

    @property
    def edge_probability(self):
        return self.p


@dataclass(frozen=True)
class GR:
    spec: BallSpec

    @classmethod
    def make(cls, d: int, sigma, r: float) -> "GR":
        return cls(BallSpec(d, parse_sigma(sigma), r))

    @property
    def edge_probability(self) -> float:
        return ball_volume(self.spec)


GraphModel = Union[ER, GR]


@dataclass(frozen=True)
class SeriesValue:
    value: Union[float, Fraction]
    truncation_bound: float = 0.0
    terms_used: int = 0
    converged: bool = True


def _check_q(q: int) -> None:
    if int(q) != q or q < 2:
        raise ValueError(f"cycle length must be an integer >= 2, got {q}")


def theta_er(p, q: int):
    """p for q = 2, p^q otherwise. Keeps exact types (Fraction in, Fraction out)."""
    _check_q(q)
    if not (0 <= p <= 1):
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    return p if q == 2 else p**q


def _clamp(value: float, bound: float, q: int) -> float:
    slack = bound + _FP_SLACK
    if value > 1.0:
        if value - 1.0 > slack:
            raise NumericalFailure(f"cycle probability {value!r} exceeds 1 (q={q})", q=q)
        return 1.0
    if value < 0.0:
        if -value > slack:
            raise NumericalFailure(f"cycle probability {value!r} is negative (q={q})", q=q)
        return 0.0
    return value


def _sinc_terms_needed(r: float, q: int, tol_1d: float) -> float:
    if tol_1d <= 0:
        return math.inf
    # tail of 2 sum_{k>K} (2 pi k r)^-q, scaled by (2r)^q, bounded by an integral
    c = 2.0 * (2.0 * r) ** q * (2.0 * math.pi * r) ** (-q) / (q - 1)
    return (c / tol_1d) ** (1.0 / (q - 1))


def _sinc_tail(r: float, q: int, K: int) -> float:
    return 2.0 * (2.0 * r) ** q * (2.0 * math.pi * r) ** (-q) * K ** (1 - q) / (q - 1)


def _sinc_one_dim(r: float, q: int, K: int) -> float:
    k = np.arange(1, K + 1, dtype=float)
    return (2.0 * r) ** q * (1.0 + 2.0 * float(np.sum(sinc(2.0 * math.pi * r * k) ** q)))


def _power_bound(t: float, b: float, d: int) -> float:
    # |x^d - t^d| <= d b (|t| + b)^(d-1) whenever |x - t| <= b; no cancellation
    return d * b * (abs(t) + b) ** (d - 1)


@lru_cache(maxsize=4096)
def theta_gr_inf(d: int, r: float, q: int, tol: float = DEFAULT_TOL,
                 k_max: int = DEFAULT_KMAX_INF, relative: bool = False) -> SeriesValue:
    """Sup-norm torus graph: ((2r)^q (1 + 2 sum_k sinc(2 pi k r)^q))^d.

    `tol` bounds the absolute error of the returned value, or the error
    relative to the value itself when `relative` is set (a short first pass
    supplies the estimate). The bound uses |sinc(x)| <= 1/|x| and is rigorous.
    """
    _check_q(q)
    spec = BallSpec(d, INF, r)
    if q == 2:
        return SeriesValue(ball_volume(spec), 0.0, 0, True)
    if relative:
        first = _sinc_one_dim(r, q, min(k_max, _FIRST_PASS))
        tol = tol * abs(first) ** d
    # ask the 1-d tail for tol / (d t^(d-1)), t an estimate of the 1-d value;
    # a second attempt uses the computed 1-d sum, a third goes to the cap
    t_est = (2.0 * r) ** q if not relative else abs(first)
    for attempt in range(3):
        if attempt == 2:
            K = k_max
        else:
            tol_1d = tol / (d * max(t_est, 1e-300) ** (d - 1)) if d > 1 else tol
            need = _sinc_terms_needed(r, q, tol_1d)
            K = k_max if need >= k_max else max(8, math.ceil(need))
        one_dim = _sinc_one_dim(r, q, K)
        tail = _sinc_tail(r, q, K)
        bound = _power_bound(one_dim, tail, d)
        if bound <= tol or K >= k_max:
            break
        t_est = abs(one_dim) + tail
    value = one_dim**d
    converged = bound <= tol
    return SeriesValue(_clamp(value, bound, q), bound, K, converged)


def _shell_envelope(d: int, r: float, q: int) -> tuple[float, float]:
    """(C, a) with |shell term k| ~ C k^a on average.

    Average lattice count per shell is pi^(d/2) k^(d/2-1) / Gamma(d/2) and
    |J_nu(x)| <~ sqrt(2/(pi x)) for large x.
    """
    c_psi = math.pi ** (d / 2) / gamma_half(d)
    c = c_psi * r ** (d * q / 2) * (1.0 / (math.pi**2 * r)) ** (q / 2)
    a = d / 2 - 1 - d * q / 4 - q / 4
    return c, a


def _shell_tail(d: int, r: float, q: int, K: int) -> float:
    c, a = _shell_envelope(d, r, q)
    return c * K ** (a + 1) / -(a + 1)


@lru_cache(maxsize=4096)
def theta_gr_2(d: int, r: float, q: int, tol: float = DEFAULT_TOL,
               k_max: int = DEFAULT_KMAX_2, relative: bool = False) -> SeriesValue:
    """Euclidean torus graph: V^q + sum_k psi_d(k) ((r/sqrt k)^(d/2) J_{d/2}(2 pi r sqrt k))^q.

    The tail estimate is heuristic (lattice counts fluctuate around their
    mean); `converged` is False when k_max shells were not enough for `tol`.
    """
    _check_q(q)
    if d < 2:
        raise ValueError("theta_gr_2 needs d >= 2; route d = 1 through the sup-norm series")
    spec = BallSpec(d, 2.0, r)
    vol = ball_volume(spec)
    if q == 2:
        return SeriesValue(vol, 0.0, 0, True)
    c, a = _shell_envelope(d, r, q)
    nu = d / 2
    # envelope only meaningful once 2 pi r sqrt(k) is past the Bessel turning point
    k_floor = max(64, math.ceil(((nu * nu + 2.0) / (2.0 * math.pi * r)) ** 2))
    if relative:
        first = _shell_sum(d, r, q, vol, min(k_max, max(k_floor, _FIRST_PASS)))
        tol = tol * abs(first)
    need = (c / (tol * -(a + 1))) ** (1.0 / -(a + 1)) if tol > 0 else math.inf
    K = k_max if need >= k_max else min(k_max, max(k_floor, math.ceil(need)))
    total = _shell_sum(d, r, q, vol, K)
    bound = _shell_tail(d, r, q, K)
    converged = bound <= tol
    return SeriesValue(_clamp(total, bound, q), bound, K, converged)


def _shell_sum(d: int, r: float, q: int, vol: float, K: int) -> float:
    psi = psi_array(d, K)[1:]
    k = np.nonzero(psi)[0] + 1
    weights = psi[k - 1].astype(float)
    sk = np.sqrt(k.astype(float))
    ft = (r / sk) ** (d / 2) * bessel_j_array(d, 2.0 * math.pi * r * sk)
    return vol**q + float(np.sum(weights * ft**q))


def theta(model: GraphModel, q: int, tol: float = DEFAULT_TOL, k_max: int | None = None,
          relative: bool = False) -> SeriesValue:
    """Labeled q-cycle probability for either model.

    See theta_gr_inf / theta_gr_2 for the meaning of `tol` and `relative`;
    tol = 0 sums exactly k_max terms.
    """
    _check_q(q)
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    if isinstance(model, ER):
        return SeriesValue(theta_er(model.p, q))
    spec = model.spec
    if spec.sigma == INF or spec.d == 1:
        # in one dimension the L2 and sup-norm balls coincide
        return theta_gr_inf(spec.d, spec.r, q, tol, k_max or DEFAULT_KMAX_INF, relative)
    return theta_gr_2(spec.d, spec.r, q, tol, k_max or DEFAULT_KMAX_2, relative)


def lattice_sum_direct(spec: BallSpec, q: int, m_max: int) -> float:
    """Theta as the raw lattice sum over m in [-m_max, m_max]^d.

    Slow, unaccelerated form of the same Fourier sum; only for cross-checks.
    """
    _check_q(q)
    rng = np.arange(-m_max, m_max + 1, dtype=float)
    grids = np.meshgrid(*([rng] * spec.d), indexing="ij")
    m = np.stack([g.ravel() for g in grids], axis=-1)
    if spec.sigma == INF:
        vals = np.prod(ball_ft(BallSpec(1, INF, spec.r), 2.0 * math.pi * np.abs(m)), axis=-1)
    else:
        vals = ball_ft(spec, 2.0 * math.pi * np.sqrt(np.sum(m * m, axis=-1)))
    return float(np.sum(vals**q))
