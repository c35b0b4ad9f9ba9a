"""Independent ground truth for the series and recurrences.

Monte Carlo on the torus, exact enumeration over small ER graphs, exact
integer determinants and permanents, derangement counts and brute-force
lattice counts. None of this calls into cycleprob or spectral.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import CapacityError
from .geometry import BallSpec, lp_norm, torus_delta

CHUNK = 1 << 16
MAX_PERMANENT_N = 24
MAX_EXACT_ER_N = 5
SEED_ENV = "TORUS_CYCLES_SEED"


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0")) & (2**64 - 1)


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Stream `index` of a counter-based generator keyed by `seed`."""
    bitgen = np.random.Philox(key=seed & (2**64 - 1))
    if index:
        bitgen = bitgen.jumped(index)
    return np.random.Generator(bitgen)


def _chunks(samples: int) -> list[tuple[int, int]]:
    return [(i, min(CHUNK, samples - i * CHUNK)) for i in range(math.ceil(samples / CHUNK))]


def _run_chunks(work: Callable[[int, int], tuple], samples: int, workers: int) -> list[tuple]:
    # chunk i always uses stream i, so results do not depend on `workers`
    jobs = _chunks(samples)
    if workers <= 1 or len(jobs) == 1:
        return [work(i, m) for i, m in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: work(*job), jobs))


def _estimate(parts: Sequence[tuple[int, int, int]], seed: int) -> McEstimate:
    # parts hold exact integer (count, sum, sum of squares)
    n = sum(p[0] for p in parts)
    s = sum(p[1] for p in parts)
    ss = sum(p[2] for p in parts)
    mean = Fraction(s, n)
    if n > 1:
        var = Fraction(ss * n - s * s, n * (n - 1))
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    return McEstimate(float(mean), stderr, n, seed)


# ---------------------------------------------------------------- sampling

def check_adjacency(m: np.ndarray) -> None:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("adjacency matrix must be square")
    if not np.array_equal(m, m.T):
        raise ValueError("adjacency matrix must be symmetric")
    if np.any(np.diag(m) != 0):
        raise ValueError("adjacency matrix must have zero diagonal")
    if not np.all((m == 0) | (m == 1)):
        raise ValueError("adjacency matrix entries must be 0 or 1")


def _gr_adjacency(points: np.ndarray, spec: BallSpec) -> np.ndarray:
    delta = torus_delta(points[:, None, :], points[None, :, :])
    adj = (lp_norm(delta, spec.sigma) <= spec.r).astype(np.uint8)
    np.fill_diagonal(adj, 0)
    return adj


def sample_gr(spec: BallSpec, n: int, seed: int | None = None, rng: np.random.Generator | None = None
              ) -> np.ndarray:
    """Adjacency matrix of one geometric graph on n uniform torus points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if rng is None:
        rng = chunk_rng(default_seed() if seed is None else seed, 0)
    return _gr_adjacency(rng.random((n, spec.d)), spec)


def sample_er(p: float, n: int, rng: np.random.Generator) -> np.ndarray:
    upper = np.triu(rng.random((n, n)) < float(p), 1)
    return (upper | upper.T).astype(np.uint8)


def mc_cycle_prob(spec: BallSpec, q: int, samples: int = 10**6, seed: int | None = None,
                  workers: int = 1) -> McEstimate:
    """Fraction of trials in which points 1..q close the labeled cycle 1-2-...-q-1."""
    if q < 2:
        raise ValueError("cycle length must be >= 2")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    seed = default_seed() if seed is None else seed
    pairs = [(0, 1)] if q == 2 else [(i, (i + 1) % q) for i in range(q)]

    def work(index: int, m: int) -> tuple[int, int, int]:
        x = chunk_rng(seed, index).random((m, q, spec.d))
        ok = np.ones(m, dtype=bool)
        for i, j in pairs:
            ok &= lp_norm(torus_delta(x[:, i], x[:, j]), spec.sigma) <= spec.r
        hits = int(np.count_nonzero(ok))
        return m, hits, hits

    return _estimate(_run_chunks(work, samples, workers), seed)


def mc_matrix_expectations(model, n: int, samples: int = 10**4, seed: int | None = None,
                           workers: int = 1) -> tuple[McEstimate, McEstimate]:
    """Sample means of the exact determinant and permanent of A.

    `model` is any object with either a `p` attribute (ER) or a `spec`
    attribute (geometric); this keeps the oracle independent of cycleprob.
    """
    if n > MAX_PERMANENT_N:
        raise CapacityError(f"permanent sampling is capped at n={MAX_PERMANENT_N}, got {n}")
    if n < 1 or samples < 1:
        raise ValueError("need n >= 1 and samples >= 1")
    seed = default_seed() if seed is None else seed
    spec = getattr(model, "spec", None)
    p = getattr(model, "p", None)

    def work(index: int, m: int):
        rng = chunk_rng(seed, index)
        det_acc = [m, 0, 0]
        per_acc = [m, 0, 0]
        for _ in range(m):
            a = sample_er(p, n, rng) if spec is None else _gr_adjacency(rng.random((n, spec.d)), spec)
            dv, pv = exact_det(a), exact_per(a)
            det_acc[1] += dv
            det_acc[2] += dv * dv
            per_acc[1] += pv
            per_acc[2] += pv * pv
        return tuple(det_acc), tuple(per_acc)

    parts = _run_chunks(work, samples, workers)
    return (_estimate([pt[0] for pt in parts], seed), _estimate([pt[1] for pt in parts], seed))


def mc_max_abs_det(model, n: int, samples: int, seed: int | None = None) -> tuple[int, np.ndarray]:
    """Largest |det| seen over sampled graphs, with the matrix attaining it."""
    seed = default_seed() if seed is None else seed
    spec = getattr(model, "spec", None)
    p = getattr(model, "p", None)
    best, best_m = -1, None
    for index, m in _chunks(samples):
        rng = chunk_rng(seed, index)
        for _ in range(m):
            a = sample_er(p, n, rng) if spec is None else _gr_adjacency(rng.random((n, spec.d)), spec)
            v = abs(exact_det(a))
            if v > best:
                best, best_m = v, a
    return best, best_m


# ---------------------------------------------------------------- exact matrix functions

def exact_det(m) -> int:
    """Integer determinant by fraction-free (Bareiss) elimination."""
    a = [[int(v) for v in row] for row in np.asarray(m)]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def exact_per(m) -> int:
    """Integer permanent by Ryser's formula with Gray-code column updates."""
    a = np.asarray(m, dtype=np.int64)
    n = a.shape[0]
    if n == 0:
        return 1
    if n > MAX_PERMANENT_N:
        raise CapacityError(f"permanent is capped at n={MAX_PERMANENT_N}, got {n}")
    cols = [list(map(int, a[:, j])) for j in range(n)]
    row_sums = [0] * n
    total = 0
    prev_gray = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        j = (gray ^ prev_gray).bit_length() - 1
        col = cols[j]
        if gray & (1 << j):
            for i in range(n):
                row_sums[i] += col[i]
        else:
            for i in range(n):
                row_sums[i] -= col[i]
        prev_gray = gray
        prod = 1
        for v in row_sums:
            if v == 0:
                prod = 0
                break
            prod *= v
        if prod:
            # subsets of size s carry sign (-1)^(n - s)
            total += -prod if (n - bin(gray).count("1")) % 2 else prod
    return total


def permutation_sum(m, signed: bool) -> int:
    """Det (signed) or permanent straight from the sum over S_n."""
    a = [[int(v) for v in row] for row in np.asarray(m)]
    n = len(a)
    total = 0
    for perm in itertools.permutations(range(n)):
        prod = 1
        for i in range(n):
            prod *= a[i][perm[i]]
            if not prod:
                break
        if prod:
            total += _perm_sign(perm) * prod if signed else prod
    return total


def _perm_sign(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------- exact ER expectations

@dataclass(frozen=True)
class ErExpectations:
    e_det: Fraction
    e_per: Fraction
    lambda_coeffs: tuple  # E det(xI + A), index = power of x
    gamma_coeffs: tuple   # E per(xI + A)


def exact_er_expectations(n: int, p) -> ErExpectations:
    """Expectations over all 2^(n choose 2) labeled graphs, in exact rationals.

    Coefficient of x^k in det(xI + A) is the sum of principal minors of A of
    order n - k (likewise for per), so each graph contributes its principal
    minors weighted by p^e (1-p)^(E-e).
    """
    if n > MAX_EXACT_ER_N:
        raise CapacityError(f"exact enumeration is capped at n={MAX_EXACT_ER_N}, got {n}")
    if n < 0:
        raise ValueError("n must be >= 0")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    edges = list(itertools.combinations(range(n), 2))
    subsets = [s for size in range(n + 1) for s in itertools.combinations(range(n), size)]
    lam = [Fraction(0)] * (n + 1)
    gam = [Fraction(0)] * (n + 1)
    for mask in range(1 << len(edges)):
        e = bin(mask).count("1")
        w = p**e * (1 - p) ** (len(edges) - e)
        if w == 0:
            continue
        a = np.zeros((n, n), dtype=np.int64)
        for bit, (i, j) in enumerate(edges):
            if mask >> bit & 1:
                a[i, j] = a[j, i] = 1
        for s in subsets:
            k = n - len(s)
            sub = a[np.ix_(s, s)]
            lam[k] += w * exact_det(sub)
            gam[k] += w * exact_per(sub)
    return ErExpectations(lam[0], gam[0], tuple(lam), tuple(gam))


# ---------------------------------------------------------------- counting

def derangements(n: int, method: str = "subset_dp") -> int:
    """Permutations of n elements without fixed points.

    methods: "filter" (scan all of S_n, n <= 9), "inclusion_exclusion",
    "subset_dp" (place images row by row over subsets of used columns).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > 12:
        raise CapacityError(f"derangements are capped at n=12, got {n}")
    if method == "filter":
        if n > 9:
            raise CapacityError("permutation filtering is capped at n=9")
        return sum(1 for perm in itertools.permutations(range(n))
                   if all(perm[i] != i for i in range(n)))
    if method == "inclusion_exclusion":
        return sum((-1) ** k * math.comb(n, k) * math.factorial(n - k) for k in range(n + 1))
    if method == "subset_dp":
        ways = [0] * (1 << n)
        ways[0] = 1
        for used in range(1 << n):
            if not ways[used]:
                continue
            row = bin(used).count("1")
            if row == n:
                continue
            for col in range(n):
                if col != row and not used >> col & 1:
                    ways[used | 1 << col] += ways[used]
        return ways[(1 << n) - 1]
    raise ValueError(f"unknown method {method!r}")


def psi_bruteforce_table(d: int, k_max: int) -> list[int]:
    """#{x in Z^d : |x|^2 = k} for k = 0..k_max by scanning the integer box."""
    if not (1 <= d <= 4) or not (0 <= k_max <= 400):
        raise CapacityError("brute-force lattice counts need 1 <= d <= 4 and 0 <= k <= 400")
    side = math.isqrt(k_max) + 1
    axis = np.arange(-side, side + 1) ** 2
    norms = axis
    for _ in range(d - 1):
        norms = (norms[..., None] + axis).reshape(-1)
    norms = norms[norms <= k_max]
    return [int(c) for c in np.bincount(norms, minlength=k_max + 1)]


def psi_bruteforce(d: int, k: int) -> int:
    return psi_bruteforce_table(d, k)[k]


# ---------------------------------------------------------------- quadrature

def triangle_prob_quadrature(d: int, r: float) -> float:
    """Euclidean 3-cycle probability for r <= 1/3 by lens-volume quadrature.

    No wraparound image matters when r <= 1/3, so the probability is
    int_{|u| <= r} vol(B(0, r) & B(u, r)) du.
    """
    if not 0 < r <= 1.0 / 3.0:
        raise ValueError("quadrature route needs 0 < r <= 1/3")
    if d == 1:
        return 3.0 * r * r
    unit_ball = math.pi ** ((d - 1) / 2) / math.gamma((d - 1) / 2 + 1)
    sphere = 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)

    def lens(rho: float) -> float:
        cap, _ = integrate.quad(lambda t: (r * r - t * t) ** ((d - 1) / 2), rho / 2, r,
                                epsabs=0, epsrel=1e-13, limit=200)
        return 2.0 * unit_ball * cap

    val, _ = integrate.quad(lambda rho: sphere * rho ** (d - 1) * lens(rho), 0, r,
                            epsabs=0, epsrel=1e-13, limit=200)
    return val


def sup_norm_cycle_1d(r: float, q: int) -> float:
    """Closed form for the one-dimensional sup-norm 3-cycle: 3 r^2 (r <= 1/3)."""
    if q != 3 or not 0 < r <= 1.0 / 3.0:
        raise ValueError("closed form covers q = 3, 0 < r <= 1/3")
    return 3.0 * r * r
