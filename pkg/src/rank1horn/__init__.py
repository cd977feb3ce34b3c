"""Eigenvalue laws of rank-one randomised Horn problems.

Two independent samplers (secular equations over Dirichlet weights, and
brute-force random matrices) plus closed-form densities and the checks
that tie them together.
"""
from .errors import *  # noqa: F401,F403
from .spectra import AngularSpectrum, EigenSample, SpectrumSpec, WeightVector, validate_spectrum
from .randsrc import RngState, dirichlet, haar_unitary, unit_gaussian_vector
from .secular import (SecularProblem, additive_roots, multiplicative_roots, projection_roots,
                      solve_additive, solve_multiplicative, solve_projection)
from .sampling import draw_samples

__version__ = "0.1.0"
