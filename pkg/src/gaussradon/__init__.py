"""Gaussian Radon transform on finite-dimensional Gaussian spaces.

Flats and the Gaussian measures they carry, the transform itself, its
disintegration and conditional-expectation identities, the Segal-Bargmann
transform on Hermite series, and inversion from finitely many profiles.
"""

from .bargmann import HolomorphicSeries, sb_forward, sb_inverse, sb_norm, sb_quadrature
from .disintegration import cond_exp_check, disintegration_check, lr_transfer_check, projection_map
from .flats import (
    Flat,
    SubspaceGaussian,
    char_functional,
    hyperplane,
    make_flat,
    pw_mean_var,
    sample,
    whole_space,
)
from .hermite import HermiteSeries, PointFunction, expect_under, gaussian_moment, point_function
from .inversion import DirectionDesign, make_design, profile_to_coeffs, reconstruct, solve_degree
from .radon import RadonProfile, gauss_radon, node_grid, radon_profile
from .wiener import KLModel, functional_radon, sample_path

__version__ = "0.1.0"
