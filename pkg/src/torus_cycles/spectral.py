"""Expected determinant / permanent polynomials of xI + A.

With Theta(1) = x, expanding det and per over the cycle decomposition of
permutations and fixing the cycle through vertex 1 gives

    L_n(x) = x L_{n-1}(x) + sum_{q=2}^n s_q (n-1)!/(n-q)! Theta(q) L_{n-q}(x),

with s_q = (-1)^(q-1) for the determinant and s_q = 1 for the permanent,
L_0 = 1. Arithmetic is either exact (Fraction, ER models with rational p)
or mpmath floating point at a chosen precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import mpmath

from .cycleprob import ER, GR, GraphModel, theta
from .errors import NoThreshold, NumericalFailure, OutOfRange
from .geometry import BallSpec, max_edge_probability, parse_sigma, r_from_p, sigma_label

DEFAULT_PRECISION = 128
# relative tolerance on Theta used by the recurrences; the Euclidean tail
# estimate is conservative, so realised errors are far smaller
THETA_RTOL = 1e-6
# shell cap for Euclidean series inside the recurrences (d = 2, q = 3 is slow)
SPECTRAL_KMAX_2 = 10**6

LAMBDA = "lambda"
GAMMA = "gamma"


@dataclass(frozen=True)
class ExpectedPolynomial:
    n: int
    coeffs: tuple  # coeffs[k] multiplies x^k
    kind: str

    def __call__(self, x):
        acc = self.coeffs[-1] * 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    @property
    def constant(self):
        return self.coeffs[0]


@dataclass(frozen=True)
class EsfTable:
    n: int
    values: tuple  # values[k] = expected e_k of the eigenvalues


@dataclass(frozen=True)
class ThresholdResult:
    n: int
    quantity: str
    edge_probability: float
    bracket_width: float


def falling(n: int, k: int) -> int:
    """n (n-1) ... (n-k+1), exact."""
    out = 1
    for i in range(k):
        out *= n - i
    return out


class _Arith:
    """Number factory: exact Fractions or an isolated mpmath context."""

    def __init__(self, precision_bits: int | None):
        self.exact = precision_bits is None
        if not self.exact:
            if precision_bits < 16:
                raise ValueError("precision_bits must be >= 16")
            self.ctx = mpmath.MPContext()
            self.ctx.prec = precision_bits

    def num(self, v):
        if self.exact:
            if isinstance(v, float):
                raise TypeError("exact arithmetic needs rational inputs, got a float")
            return Fraction(v)
        return self.ctx.mpf(v)


def cycle_thetas(model: GraphModel, n: int, tol: float = THETA_RTOL,
                 k_max: int | None = None) -> dict[int, object]:
    """Theta(q) for q = 2..n as plain numbers; raises if a series stalls.

    For GR models `tol` is relative to the value of each series.
    """
    return {q: _theta_checked(model, q, tol, k_max) for q in range(2, n + 1)}


def _theta_checked(model: GraphModel, q: int, tol: float, k_max: int | None = None):
    if isinstance(model, ER):
        return theta(model, q).value
    if k_max is None and model.spec.sigma == 2.0 and model.spec.d > 1:
        k_max = SPECTRAL_KMAX_2
    sv = theta(model, q, tol, k_max, relative=True)
    if not sv.converged:
        raise NumericalFailure(
            f"cycle-probability series for q={q} did not reach tolerance "
            f"(bound {sv.truncation_bound:.3g} after {sv.terms_used} terms)",
            q=q,
        )
    return sv.value


def _model_thetas(arith: _Arith, model: GraphModel, n: int, tol: float,
                  thetas: Mapping[int, object] | None) -> dict[int, object]:
    if thetas is None:
        if arith.exact and not isinstance(model, ER):
            raise ValueError("exact arithmetic is only available for ER models")
        if isinstance(model, ER) and not arith.exact:
            # p^q formed in the working precision, not in double
            p = arith.num(model.p)
            return {q: (p if q == 2 else p**q) for q in range(2, n + 1)}
        thetas = cycle_thetas(model, n, tol)
    return {q: arith.num(thetas[q]) for q in range(2, n + 1)}


def _recurrence(th: Mapping[int, object], n: int, kind: str, one, zero) -> list[list]:
    """All polynomials L_0..L_n as coefficient lists (index = power of x)."""
    polys = [[one]]
    for m in range(1, n + 1):
        cur = [zero] + list(polys[m - 1])
        for q in range(2, m + 1):
            w = falling(m - 1, q - 1) * th[q]
            if kind == LAMBDA and q % 2 == 0:
                w = -w
            for k, c in enumerate(polys[m - q]):
                cur[k] += w * c
        polys.append(cur)
    return polys


def _scalar_recurrence(th: Mapping[int, object], n: int, kind: str, x, one) -> object:
    vals = [one]
    for m in range(1, n + 1):
        acc = x * vals[m - 1]
        for q in range(2, m + 1):
            w = falling(m - 1, q - 1) * th[q] * vals[m - q]
            acc = acc - w if (kind == LAMBDA and q % 2 == 0) else acc + w
        vals.append(acc)
    return vals[n]


def _check_n(n: int) -> None:
    if int(n) != n or n < 0:
        raise ValueError(f"vertex count must be a nonnegative integer, got {n}")


def _poly(kind: str, model: GraphModel, n: int, precision_bits: int | None,
          tol: float, thetas) -> ExpectedPolynomial:
    _check_n(n)
    arith = _Arith(precision_bits)
    th = _model_thetas(arith, model, n, tol, thetas)
    one, zero = arith.num(1), arith.num(0)
    coeffs = _recurrence(th, n, kind, one, zero)[n]
    return ExpectedPolynomial(n, tuple(coeffs), kind)


def lambda_poly(model: GraphModel, n: int, precision_bits: int | None = DEFAULT_PRECISION,
                tol: float = THETA_RTOL, thetas: Mapping[int, object] | None = None
                ) -> ExpectedPolynomial:
    """E det(xI + A). precision_bits=None means exact rational arithmetic.

    `thetas` overrides the model's cycle probabilities (keys 2..n).
    """
    return _poly(LAMBDA, model, n, precision_bits, tol, thetas)


def gamma_poly(model: GraphModel, n: int, precision_bits: int | None = DEFAULT_PRECISION,
               tol: float = THETA_RTOL, thetas: Mapping[int, object] | None = None
               ) -> ExpectedPolynomial:
    """E per(xI + A); same conventions as lambda_poly."""
    return _poly(GAMMA, model, n, precision_bits, tol, thetas)


def esf_table(model: GraphModel, n: int, precision_bits: int | None = DEFAULT_PRECISION,
              tol: float = THETA_RTOL, thetas: Mapping[int, object] | None = None) -> EsfTable:
    """Expected elementary symmetric functions of the eigenvalues of A.

    det(xI + A) = sum_k e_k(lambda) x^(n-k), so e_k is read off coefficient n-k.
    """
    poly = lambda_poly(model, n, precision_bits, tol, thetas)
    return EsfTable(n, tuple(reversed(poly.coeffs)))


def expected_value_at(model: GraphModel, n: int, kind: str, x=0,
                      precision_bits: int | None = DEFAULT_PRECISION,
                      tol: float = THETA_RTOL, thetas: Mapping[int, object] | None = None):
    """L_n(x) without building coefficient lists; x=0 gives E det or E per."""
    _check_n(n)
    if kind not in (LAMBDA, GAMMA):
        raise ValueError(f"kind must be {LAMBDA!r} or {GAMMA!r}")
    arith = _Arith(precision_bits)
    th = _model_thetas(arith, model, n, tol, thetas)
    return _scalar_recurrence(th, n, kind, arith.num(x), arith.num(1))


def expected_det(model: GraphModel, n: int, **kw):
    return expected_value_at(model, n, LAMBDA, 0, **kw)


def expected_per(model: GraphModel, n: int, **kw):
    return expected_value_at(model, n, GAMMA, 0, **kw)


def hamilton_expectation(model: GraphModel, n: int, precision_bits: int | None = DEFAULT_PRECISION,
                         tol: float = THETA_RTOL):
    """Expected number of Hamilton cycles, Theta(n) (n-1)!/2."""
    if int(n) != n or n < 3:
        raise ValueError(f"Hamilton cycles need n >= 3, got {n}")
    arith = _Arith(precision_bits)
    if isinstance(model, ER):
        value = arith.num(model.p) ** n
    else:
        value = arith.num(_theta_checked(model, n, tol))
    return value * (math.factorial(n - 1) // 2)


# ---------------------------------------------------------------- thresholds

@dataclass(frozen=True)
class ERFamily:
    def model(self, p: float) -> ER:
        return ER(p)

    @property
    def p_max(self) -> float:
        return 1.0

    @property
    def label(self) -> str:
        return "ER"


@dataclass(frozen=True)
class GRFamily:
    d: int
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "sigma", parse_sigma(self.sigma))

    def model(self, p: float) -> GR:
        return GR(BallSpec(self.d, self.sigma, r_from_p(self.d, self.sigma, p)))

    @property
    def p_max(self) -> float:
        return max_edge_probability(self.d, self.sigma)

    @property
    def label(self) -> str:
        return f"GR d={self.d} sigma={sigma_label(self.sigma)}"


HAMILTON = "hamilton"
PERMANENT = "permanent"


def target_function(family, n: int, quantity: str, precision_bits: int = DEFAULT_PRECISION,
                    tol: float = THETA_RTOL) -> Callable[[float], float]:
    """Edge probability -> expected Hamilton count or expected permanent."""
    if quantity == HAMILTON:
        def f(p):
            return float(hamilton_expectation(family.model(p), n, precision_bits, tol))
    elif quantity == PERMANENT:
        def f(p):
            return float(expected_per(family.model(p), n, precision_bits=precision_bits, tol=tol))
    else:
        raise ValueError(f"quantity must be {HAMILTON!r} or {PERMANENT!r}")
    return f


def threshold(family, n: int, quantity: str, width: float = 1e-6,
              precision_bits: int = DEFAULT_PRECISION, tol: float = THETA_RTOL,
              monotone_samples: int = 16) -> ThresholdResult:
    """Smallest edge probability with target expectation >= 1, by bisection."""
    if int(n) != n or n < 3:
        raise ValueError(f"thresholds need n >= 3, got {n}")
    f = target_function(family, n, quantity, precision_bits, tol)
    hi = family.p_max
    f_hi = f(hi)
    if f_hi < 1.0:
        raise NoThreshold(
            f"{quantity} expectation is {f_hi:.6g} < 1 at the largest edge probability {hi:.6g}"
        )
    grid = [hi * (i + 1) / monotone_samples for i in range(monotone_samples)]
    vals = [f(p) for p in grid]
    for a, b, p in zip(vals, vals[1:], grid[1:]):
        if b < a - 1e-9 * max(abs(a), abs(b)):
            raise NumericalFailure(f"{quantity} expectation is not monotone in p near p={p:.4g}")
    lo = 0.0
    for p, v in zip(grid, vals):
        if v >= 1.0:
            hi = p
            break
        lo = p
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 1.0:
            hi = mid
        else:
            lo = mid
    return ThresholdResult(n, quantity, hi, hi - lo)


def sweep_values(family, n: int, ps: Sequence[float], kind: str,
                 precision_bits: int = DEFAULT_PRECISION, tol: float = THETA_RTOL) -> list:
    """E det or E per along a grid of edge probabilities (p = 0 gives 0)."""
    out = []
    for p in ps:
        if p <= 0:
            out.append(mpmath.mpf(0) if n > 0 else mpmath.mpf(1))
            continue
        try:
            model = family.model(p)
        except OutOfRange:
            out.append(None)
            continue
        out.append(expected_value_at(model, n, kind, 0, precision_bits, tol))
    return out
