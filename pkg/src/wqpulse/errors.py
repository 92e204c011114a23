"""Exception types shared across the package.

All numerical routines raise these instead of returning NaN-laden arrays, so
callers can distinguish "you asked for an undefined quantity" from "the
computation failed to converge".
"""


class WqpulseError(Exception):
    """Base class for all package-specific errors."""


class SingularFrequency(WqpulseError):
    """A probe frequency (or pair energy) sits too close to a resonance pole.

    Raised when the distance from the evaluation point to the nearest
    eigenvalue falls below the guard radius; the resolvent entries would be
    dominated by roundoff there.
    """


class ExceptionalPoint(WqpulseError):
    """Bilinear eigenvector normalization broke down.

    The effective Hamiltonians are complex symmetric, so eigenvectors are
    normalized by sum(v**2) = 1 without conjugation.  At an exceptional point
    sum(v**2) -> 0 and the spectral decomposition ceases to exist; detuning
    the spacing phase by a tiny amount removes the degeneracy.
    """


class EmptySector(WqpulseError):
    """The requested excitation sector contains no basis states (N = 1 pairs)."""


class DegenerateField(WqpulseError):
    """The smooth two-photon field vanishes identically, so moments of it
    are undefined (single atom: the coherent and incoherent parts cancel
    exactly)."""


class QuadratureNotConverged(WqpulseError):
    """An adaptive quadrature failed to reach its error target.

    Attributes
    ----------
    achieved : float
        Error estimate at the point the iteration gave up.
    target : float
        Error the caller requested.
    """

    def __init__(self, message, achieved=None, target=None):
        super().__init__(message)
        self.achieved = achieved
        self.target = target


class GridTooCoarse(UserWarning):
    """Time grid step exceeds the superradiant resolution limit 0.1/(N*gamma)."""
