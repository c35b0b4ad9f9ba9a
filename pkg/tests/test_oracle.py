import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from torus_cycles.cycleprob import ER, GR
from torus_cycles.errors import CapacityError
from torus_cycles.geometry import INF, BallSpec, ball_volume
from torus_cycles.oracle import (
    chunk_rng,
    check_adjacency,
    derangements,
    exact_det,
    exact_er_expectations,
    exact_per,
    mc_cycle_prob,
    mc_matrix_expectations,
    mc_max_abs_det,
    permutation_sum,
    psi_bruteforce,
    psi_bruteforce_table,
    sample_gr,
    triangle_prob_quadrature,
)


def complete(n):
    return np.ones((n, n), dtype=int) - np.eye(n, dtype=int)


def all_graphs(n):
    edges = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(edges)):
        a = np.zeros((n, n), dtype=int)
        for bit, (i, j) in enumerate(edges):
            if mask >> bit & 1:
                a[i, j] = a[j, i] = 1
        yield a


def random_graph(n, rng):
    upper = np.triu(rng.random((n, n)) < 0.5, 1)
    return (upper | upper.T).astype(int)


@pytest.mark.parametrize("m,det,per", [
    (complete(2), -1, 1),
    (complete(4), -3, 9),
    (np.zeros((3, 3), dtype=int), 0, 0),
    (np.zeros((0, 0), dtype=int), 1, 1),
])
def test_det_per_examples(m, det, per):
    assert exact_det(m) == det
    assert exact_per(m) == per


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_det_per_exhaustive_small(n):
    for a in all_graphs(n):
        assert exact_det(a) == permutation_sum(a, signed=True)
        assert exact_per(a) == permutation_sum(a, signed=False)


@pytest.mark.parametrize("n", [5, 6])
def test_det_per_random_graphs(n):
    rng = np.random.default_rng(n)
    for _ in range(1000):
        a = random_graph(n, rng)
        assert exact_det(a) == permutation_sum(a, signed=True)
        assert exact_per(a) == permutation_sum(a, signed=False)


def test_det_matches_floating_point_on_larger_matrices():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = random_graph(14, rng)
        assert exact_det(a) == round(np.linalg.det(a))


def test_permanent_capacity():
    with pytest.raises(CapacityError):
        exact_per(complete(25))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_exact_er_at_p1(n):
    ref = exact_er_expectations(n, 1)
    assert ref.e_det == (-1) ** (n - 1) * (n - 1)
    assert ref.e_per == derangements(n)


def test_exact_er_symbolic_small():
    p = Fraction(3, 7)
    two = exact_er_expectations(2, p)
    assert (two.e_det, two.e_per) == (-p, p)
    three = exact_er_expectations(3, p)
    assert (three.e_det, three.e_per) == (2 * p**3, 2 * p**3)
    assert exact_er_expectations(3, 1).e_det == 2


def test_exact_er_capacity():
    with pytest.raises(CapacityError):
        exact_er_expectations(6, Fraction(1, 2))


@pytest.mark.parametrize("n,expected", [(0, 1), (1, 0), (2, 1), (4, 9), (5, 44), (12, 176214841)])
def test_derangements(n, expected):
    assert derangements(n) == expected


def test_derangement_methods_agree():
    for n in range(10):
        a = derangements(n, "filter")
        assert a == derangements(n, "inclusion_exclusion") == derangements(n, "subset_dp")
    assert derangements(12, "inclusion_exclusion") == derangements(12, "subset_dp")
    with pytest.raises(CapacityError):
        derangements(13)
    with pytest.raises(CapacityError):
        derangements(10, "filter")


def test_psi_bruteforce():
    assert psi_bruteforce(3, 1) == 6
    assert psi_bruteforce(2, 25) == 12
    assert psi_bruteforce_table(4, 4)[:5] == [1, 8, 24, 32, 24]
    with pytest.raises(CapacityError):
        psi_bruteforce(5, 10)


def test_sample_gr_complete_at_half():
    for d in (1, 2, 4):
        a = sample_gr(BallSpec(d, INF, 0.5), 5, seed=d)
        assert np.array_equal(a, complete(5))


def test_sample_gr_deterministic_and_valid():
    spec = BallSpec(2, 2, 0.3)
    a = sample_gr(spec, 12, seed=42)
    b = sample_gr(spec, 12, seed=42)
    assert np.array_equal(a, b)
    check_adjacency(a)
    assert not np.array_equal(a, sample_gr(spec, 12, seed=43))


def test_check_adjacency_rejects_bad_matrices():
    with pytest.raises(ValueError):
        check_adjacency(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        check_adjacency(np.eye(3, dtype=int))
    with pytest.raises(ValueError):
        check_adjacency(np.array([[0, 2], [2, 0]]))


def test_edge_density_matches_volume():
    spec = BallSpec(2, 2, 0.2)
    est = mc_cycle_prob(spec, 2, 100_000, seed=9)
    assert abs(est.mean - ball_volume(spec)) <= 4 * est.stderr
    assert ball_volume(spec) == pytest.approx(0.12566, abs=1e-5)


def test_mc_cycle_examples():
    est = mc_cycle_prob(BallSpec(1, INF, 0.1), 3, 10**6, seed=1)
    assert abs(est.mean - 0.03) <= 4 * est.stderr
    full = mc_cycle_prob(BallSpec(1, INF, 0.5), 4, 1000, seed=1)
    assert full.mean == 1.0 and full.stderr == 0.0


def test_mc_stderr_definition():
    est = mc_cycle_prob(BallSpec(2, INF, 0.2), 3, 50_000, seed=4)
    k = round(est.mean * est.samples)
    n = est.samples
    sd = math.sqrt((k - k * k / n) / (n - 1))
    assert est.stderr == pytest.approx(sd / math.sqrt(n), rel=1e-12)
    assert est.seed == 4


def test_mc_reproducible_and_worker_independent():
    spec = BallSpec(3, 2, 0.3)
    one = mc_cycle_prob(spec, 4, 300_000, seed=123, workers=1)
    four = mc_cycle_prob(spec, 4, 300_000, seed=123, workers=4)
    assert one == four
    assert mc_cycle_prob(spec, 4, 300_000, seed=124) != one


def test_chunk_streams_differ():
    a = chunk_rng(5, 0).random(4)
    b = chunk_rng(5, 1).random(4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, chunk_rng(5, 0).random(4))


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("TORUS_CYCLES_SEED", "77")
    spec = BallSpec(1, INF, 0.2)
    assert mc_cycle_prob(spec, 3, 1000) == mc_cycle_prob(spec, 3, 1000, seed=77)


@pytest.mark.slow
def test_statistical_gate():
    # 3r^2 lands within 4 stderr for at least 99 of 100 seeds
    spec = BallSpec(1, INF, 0.1)
    hits = 0
    for seed in range(100):
        est = mc_cycle_prob(spec, 3, 20_000, seed=seed)
        hits += abs(est.mean - 0.03) <= 4 * est.stderr
    assert hits >= 99


def test_matrix_expectations_complete_and_empty():
    det, per = mc_matrix_expectations(ER(1), 5, 50, seed=0)
    assert (det.mean, per.mean, det.stderr, per.stderr) == (4.0, 44.0, 0.0, 0.0)
    det, per = mc_matrix_expectations(ER(0), 5, 50, seed=0)
    assert (det.mean, per.mean) == (0.0, 0.0)


def test_matrix_expectations_against_exact():
    det, per = mc_matrix_expectations(ER(0.5), 4, 100_000, seed=8)
    ref = exact_er_expectations(4, Fraction(1, 2))
    assert abs(det.mean - float(ref.e_det)) <= 4 * det.stderr
    assert abs(per.mean - float(ref.e_per)) <= 4 * per.stderr


def test_matrix_expectations_geometric_and_capacity():
    det, per = mc_matrix_expectations(GR.make(2, INF, 0.5), 4, 10, seed=1)
    assert (det.mean, per.mean) == (-3.0, 9.0)
    with pytest.raises(CapacityError):
        mc_matrix_expectations(ER(0.5), 25, 1)


def test_max_abs_det():
    best, m = mc_max_abs_det(ER(0.5), 6, 2000, seed=2)
    assert best == abs(exact_det(m))
    # any 0/1 matrix of order n has |det| <= (n+1)^((n+1)/2) / 2^n
    assert 1 <= best <= 7**3.5 / 2**6


@pytest.mark.parametrize("d", [2, 3])
def test_triangle_quadrature_against_monte_carlo(d):
    spec = BallSpec(d, 2, 0.25)
    est = mc_cycle_prob(spec, 3, 400_000, seed=d)
    assert abs(triangle_prob_quadrature(d, 0.25) - est.mean) <= 4 * est.stderr
