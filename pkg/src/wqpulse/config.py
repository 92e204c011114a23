"""Array configuration and global numerical guard constants.

Internal units: the radiative rate into the guided mode is gamma_1D = 1 and
the atomic transition frequency is omega_0 = 0.  Every frequency-like
quantity in the package (detunings, eigenvalues, pair energies) is therefore
dimensionless, and times are in units of 1/gamma_1D.
"""

from dataclasses import dataclass

import numpy as np

# Guard radius around resonance poles for resolvent evaluation.
EPS_POLE = 1e-8
# Bilinear norm below this means an exceptional point.
EPS_EXCEPTIONAL = 1e-8
# Smallest spacing phase accepted by the pulse pipeline.  phi = 0 collapses
# the subradiant manifold onto the real axis, which the time-domain
# reconstruction cannot represent; spectra alone remain computable there.
PHI_MIN = 1e-3
# Separation below which kernel evaluations switch to their confluent
# (removable-singularity) branches.
DELTA_CONFLUENT = 1e-6
# Smooth-field norm below this is treated as identically zero.
EPS_FIELD = 1e-12


@dataclass(frozen=True)
class ArrayConfig:
    """Periodic array of two-level atoms coupled to a single-mode waveguide.

    Parameters
    ----------
    n_atoms : int
        Number of atoms, >= 1.
    phi : float
        Phase omega_0 * d / c accumulated by a guided photon between
        neighbouring atoms.  Meaningful range is [0, pi]; the spectrum for
        phi and pi - phi is mirror-symmetric.
    """

    n_atoms: int
    phi: float

    def __post_init__(self):
        if not isinstance(self.n_atoms, (int, np.integer)) or self.n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {self.n_atoms!r}")
        if not np.isfinite(self.phi):
            raise ValueError(f"phi must be finite, got {self.phi!r}")
        if self.phi < 0.0 or self.phi > np.pi:
            raise ValueError(f"phi must lie in [0, pi], got {self.phi!r}")

    @property
    def n_pairs(self):
        """Dimension of the two-excitation (hard-core) sector."""
        return self.n_atoms * (self.n_atoms - 1) // 2

    def require_pulse_capable(self):
        """Validate that the time-domain pipeline is applicable.

        Raises
        ------
        ValueError
            If phi is below PHI_MIN (quasi-degenerate dark manifold).
        """
        if self.phi < PHI_MIN:
            raise ValueError(
                f"phi = {self.phi:g} is below the pulse-pipeline minimum {PHI_MIN:g}; "
                "spectra are still available"
            )
