"""L_sigma balls on R^d and the flat unit torus."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import OutOfRange
from .specfun import bessel_j_array, gamma_half, sinc

INF = math.inf


def parse_sigma(sigma) -> float:
    if isinstance(sigma, str):
        s = sigma.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return INF
        sigma = float(s)
    if sigma == 2:
        return 2.0
    if sigma == INF:
        return INF
    raise ValueError(f"sigma must be 2 or inf, got {sigma!r}")


def sigma_label(sigma: float) -> str:
    return "inf" if sigma == INF else "2"


@dataclass(frozen=True)
class BallSpec:
    d: int
    sigma: float
    r: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        object.__setattr__(self, "sigma", parse_sigma(self.sigma))
        if not (0.0 < self.r <= 0.5):
            raise OutOfRange(f"r must lie in (0, 0.5], got {self.r}")


def ball_volume(spec: BallSpec) -> float:
    """Volume of the closed L_sigma ball of radius r in R^d.

    For r <= 1/2 this is also the edge probability of the torus graph.
    """
    d, r = spec.d, spec.r
    if spec.sigma == INF:
        return (2.0 * r) ** d
    return math.pi ** (d / 2) * r**d / gamma_half(d + 2)


def ball_ft(spec: BallSpec, omega_norm):
    """Fourier transform of the ball indicator at frequency magnitude omega.

    sigma=2: the radial form (2 pi r / w)^(d/2) J_{d/2}(r w), equal to the
    volume at w = 0. sigma=inf: the one-dimensional factor 2 r sinc(w r);
    the d-dimensional transform is the product of these over coordinates.
    Vectorised over omega_norm.
    """
    w = np.asarray(omega_norm, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega_norm must be nonnegative")
    r = spec.r
    if spec.sigma == INF:
        out = 2.0 * r * np.asarray(sinc(w * r))
    else:
        d = spec.d
        safe = np.where(w > 0, w, 1.0)
        vals = (2.0 * math.pi * r / safe) ** (d / 2) * bessel_j_array(d, r * safe)
        out = np.where(w > 0, vals, ball_volume(spec))
    if out.ndim == 0:
        return float(out)
    return out


def torus_delta(x, y) -> np.ndarray:
    """Per-coordinate wraparound distance min(|x-y|, 1-|x-y|); broadcasts."""
    diff = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    diff = np.mod(diff, 1.0)
    return np.minimum(diff, 1.0 - diff)


def lp_norm(delta: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == INF:
        return np.max(delta, axis=-1)
    return np.sqrt(np.sum(delta * delta, axis=-1))


def torus_distance(x: Sequence[float], y: Sequence[float], sigma) -> float:
    sigma = parse_sigma(sigma)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(lp_norm(torus_delta(x, y), sigma))


def r_from_p(d: int, sigma, p: float) -> float:
    """Radius whose ball volume equals the edge probability p."""
    sigma = parse_sigma(sigma)
    if not (0.0 < p <= 1.0):
        raise ValueError(f"edge probability must lie in (0, 1], got {p}")
    if sigma == INF:
        r = p ** (1.0 / d) / 2.0
    else:
        r = (p * gamma_half(d + 2) / math.pi ** (d / 2)) ** (1.0 / d)
    # absorb rounding at the boundary r = 1/2
    if 0.5 < r <= 0.5 * (1 + 1e-13):
        r = 0.5
    if r > 0.5:
        raise OutOfRange(
            f"edge probability {p} needs r = {r:.6g} > 0.5 for d={d}, sigma={sigma_label(sigma)}"
        )
    return r


def max_edge_probability(d: int, sigma) -> float:
    """Largest edge probability representable with r <= 1/2."""
    return ball_volume(BallSpec(d, parse_sigma(sigma), 0.5))
