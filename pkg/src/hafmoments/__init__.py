"""Moments of squared hafnians of Gaussian matrices and the anticoncentration
of Gaussian Boson Sampling."""

__version__ = "0.1.0"

from .anticoncentration import M2Report, m2, m2_limit, paley_zygmund_bound, transition_scan, translation_bound
from .combinatorics import HalfInteger, binom_half, count_components, double_factorial, enumerate_matchings
from .errors import CapExceededError
from .gbs import GbsConfig, gbs_probability, sample_haar_unitary, sector_probability
from .hafnian import hafnian, hafnian_sym_product
from .moments_exact import (
    MomentPolynomial,
    first_moment_closed,
    first_moment_poly,
    second_moment_coeffs,
    second_moment_eval,
)
from .moments_mc import MCEstimate, estimate_moment
