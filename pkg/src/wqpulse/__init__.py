"""Two-photon pulse scattering from periodic atom arrays in a waveguide.

The field transmitted after a delta-pulse drive is assembled from the complex
resonances of the collective single- and double-excitation sectors; every
closed-form route has a quadrature cross-check in `wqpulse.oracle`.
"""
from .config import ArrayConfig
from .double import diagonalize_double
from .observables import duration_sweep, duration_untruncated, pulse_duration
from .pulse import ModeMask, cut_field, superradiant_mask, two_photon_field
from .single import diagonalize_single

__version__ = "0.1.0"

__all__ = [
    "ArrayConfig",
    "ModeMask",
    "cut_field",
    "diagonalize_double",
    "diagonalize_single",
    "duration_sweep",
    "duration_untruncated",
    "pulse_duration",
    "superradiant_mask",
    "two_photon_field",
    "__version__",
]
