"""Free additive convolution of probability measures on the real line."""

from .convolution import ConvolveConfig, ConvolutionResult, convolve, convolve_atoms
from .measure import Measure, load_measure, parse_measure
from .subordination import denjoy_wolff, subordinate, sweep
from .twoatom import TwoAtomMeasure, omega1_quadratic
from .voiculescu import check_additivity, phi

__version__ = "0.1.0"

__all__ = [
    "ConvolveConfig",
    "ConvolutionResult",
    "Measure",
    "TwoAtomMeasure",
    "check_additivity",
    "convolve",
    "convolve_atoms",
    "denjoy_wolff",
    "load_measure",
    "omega1_quadratic",
    "parse_measure",
    "phi",
    "subordinate",
    "sweep",
]
