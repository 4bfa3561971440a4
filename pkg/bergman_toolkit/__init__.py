"""
Bergman Toolkit
Exact and numerical checks of the essential-normality estimates for polynomial submodules
of the Bergman space on the unit ball
"""

from bergman_toolkit.config import config, configure_logging
from bergman_toolkit.exceptions import (
    BergmanToolkitError,
    DimensionMismatchError,
    InvalidCoordinateError,
    NonFiniteMatrixError,
    PolynomialParseError,
    SubmoduleDegeneracyError,
)
from bergman_toolkit.polycore import ExactComplex, HoloPoly, MixedPoly, MultiIndex, parse_polynomial
from bergman_toolkit.moments import FULL_BALL, PiMultiple, Region, moment, weighted_L2_sq
from bergman_toolkit.operators import BasisSpec, OperatorMatrix, SubmodulePlan, compressed_commutator
from bergman_toolkit.spectra import SingularSpectrum, schatten_norm, singular_values
from bergman_toolkit.reports import VerificationReport
from bergman_toolkit.sampling import RandomPolyModel, generate_polynomial
from bergman_toolkit.covering import CarlesonBox, CoverConfig, greedy_cover
from bergman_toolkit.experiment_controller import ExperimentConfig, ExperimentRunner, run

__version__ = "0.1.0"
