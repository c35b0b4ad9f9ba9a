"""Labeled-cycle probabilities, expected determinants and permanents for
geometric random graphs on the unit torus, with Monte Carlo and exact
enumeration oracles."""

from .cycleprob import ER, GR, SeriesValue, theta, theta_er, theta_gr_2, theta_gr_inf
from .errors import CapacityError, NoThreshold, NumericalFailure, OutOfRange
from .geometry import BallSpec, ball_ft, ball_volume, r_from_p, torus_distance
from .specfun import bessel_j, gamma_half, psi_counts, sinc
from .spectral import (
    ERFamily,
    GRFamily,
    esf_table,
    expected_det,
    expected_per,
    gamma_poly,
    hamilton_expectation,
    lambda_poly,
    threshold,
)

__version__ = "0.1.0"
