"""nilflow: skew-shift dynamics, Birkhoff sums, cohomology and drift experiments."""
__version__ = "0.1.0"

from .arith import ContinuedFraction, ExtendedReal, cf_expand, circle_dist, is_bounded_type, \
    reduce_quadratic_phase
from .errors import DomainError, NilflowError
from .observables import FourierObservable, HmnComponent
from .torus import SkewShiftParams, TorusPoint, iterate, step

__all__ = ["__version__", "ContinuedFraction", "ExtendedReal", "cf_expand", "circle_dist",
           "is_bounded_type", "reduce_quadratic_phase", "DomainError", "NilflowError",
           "FourierObservable", "HmnComponent", "SkewShiftParams", "TorusPoint", "iterate",
           "step"]
