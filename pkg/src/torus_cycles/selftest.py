"""Quick oracle cross-checks behind `torus-cycles selftest`."""

from __future__ import annotations

import math
from fractions import Fraction

from . import oracle
from .cycleprob import ER, GR, theta, theta_gr_inf
from .geometry import BallSpec
from .specfun import psi_counts
from .spectral import ERFamily, gamma_poly, lambda_poly, threshold


def _checks(seed: int, samples: int):
    yield "psi recurrence == brute force (d<=4, k<=100)", all(
        list(psi_counts(d, 100).counts) == oracle.psi_bruteforce_table(d, 100) for d in range(1, 5)
    )
    ok = True
    for n in range(2, 5):
        for p in (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1)):
            ref = oracle.exact_er_expectations(n, p)
            ok &= lambda_poly(ER(p), n, None).coeffs == ref.lambda_coeffs
            ok &= gamma_poly(ER(p), n, None).coeffs == ref.gamma_coeffs
    yield "recurrences == exact ER enumeration (n<=4)", ok
    yield "complete graph det == (-1)^(n-1)(n-1), n<=20", all(
        lambda_poly(ER(Fraction(1)), n, None).constant == (-1) ** (n - 1) * (n - 1) for n in range(2, 21)
    )
    yield "complete graph per == derangements, n<=10", all(
        gamma_poly(ER(Fraction(1)), n, None).constant == oracle.derangements(n) for n in range(11)
    )
    yield "1-d sup-norm triangle == 3r^2", all(
        abs(theta_gr_inf(1, r, 3).value - 3 * r * r) <= 1e-10 for r in (0.05, 0.1, 0.2, 0.25)
    )
    spec = BallSpec(2, math.inf, 0.15)
    est = oracle.mc_cycle_prob(spec, 4, samples, seed)
    yield "sup-norm series vs Monte Carlo (d=2, q=4)", abs(
        theta(GR(spec), 4).value - est.mean) <= 4 * est.stderr
    expected = (2 / math.factorial(19)) ** (1 / 20)
    yield "ER n=20 Hamilton threshold", abs(
        threshold(ERFamily(), 20, "hamilton").edge_probability - expected) <= 1e-6


def run_selftest(seed: int = 0, samples: int = 200_000) -> bool:
    all_ok = True
    for name, ok in _checks(seed, samples):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        all_ok &= bool(ok)
    return all_ok
