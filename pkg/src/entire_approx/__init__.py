"""Numerical checks of direct and inverse approximation estimates for the
translation group on periodic and weighted-line function spaces."""
from .approx import ModulusSpec, best_approximation, inverse_rhs, omega_integral_transform
from .bandlimit import BandlimitedFunction, MultiplierSpec, analyze, estimate_type, project, synthesize
from .errors import (
    ConfigError,
    ConvergenceWarning,
    DivergenceError,
    ParameterError,
    RangeError,
    ResolutionError,
)
from .experiments import (
    ExperimentReport,
    run_bernstein,
    run_bernstein_delta,
    run_inverse,
    run_jackson,
    run_weights_check,
)
from .function_space import Domain, GridFunction, modulus_of_continuity, norm, shift
from .weights import WeightSpec, check_admissibility

__version__ = "0.1.0"
