"""Two-excitation sector with hard-core (two-level) constraint.

Two photons stored in the array occupy a symmetric two-atom wavefunction
psi_mn with psi_mm = 0: the on-site repulsion of two-level atoms is infinite,
which is imposed exactly by restricting the basis to ordered pairs m < n
(dimension P = N(N-1)/2) rather than by a finite penalty term.

In that reduced basis the pair Hamiltonian

    A_{(mn),(m'n')} = H_mm' d_nn' + d_mm' H_nn' + H_mn' d_nm' + d_mn' H_nm'

is complex symmetric, and its eigenproblem A y = 2*eps y gives the pair
energies eps_kappa (two-photon energy 2*eps_kappa).  The symmetric-tensor
amplitudes are normalized over all ordered index pairs,
sum_{mn} psi_mn**2 = 1, i.e. psi_mn = y_(mn) / sqrt(2) with sum y**2 = 1.

Two frequency-domain matrices tie this sector to photon scattering:

* sigma_matrix: the pair self-energy
      Sigma_mn(eps) = 1j * sum_{nu mu} v^nu_m v^nu_n v^mu_m v^mu_n
                      / (w_nu + w_mu - 2*eps),
  the frequency integral of G_mn(w) G_mn(2*eps - w) evaluated by residues
  (elementwise in mn, not a matrix product).

* q_matrix: its exact inverse.  Eliminating the doubly-excited on-site
  states from the symmetric two-excitation problem gives the Schur form

      Q(eps) = 2*(1j*eps - 1)*I - 2j * B (2*eps - A)^(-1) B^T,

  where B maps ordered pairs to on-site double occupation,
  B[m, (ij)] = H_m,partner for m in (i, j).  Partial fractions over the
  pair spectrum turn this into the resonance expansion

      Q_mn(eps) = 2*(1j*eps - 1) d_mn
                  + sum_kappa 2j * d^kappa_m d^kappa_n / (eps_kappa - eps),

  with emission coefficients d^kappa_m = sum_{n != m} H_mn psi^kappa_mn.
  The Schur form needs only a linear solve and stays exact where the pair
  Hamiltonian is defective (e.g. N = 4 at phi = pi/2 carries a Jordan block
  at 2*eps = -2j), so it is what `q_matrix` evaluates; the resonance form
  is exposed on the spectrum object for cross-validation.

Q(eps) @ Sigma(eps) = I is the master identity pinning every normalization
convention in this module; the acceptance suite enforces it with Sigma from
both the residue form above and from direct quadrature.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import EPS_POLE, ArrayConfig
from .errors import EmptySector, SingularFrequency
from .single import (
    SingleExcitationSpectrum,
    _c2pairs,
    _normalize_modes,
    build_single_hamiltonian,
)

__all__ = [
    "pair_basis",
    "build_pair_hamiltonian",
    "pair_emission_map",
    "diagonalize_double",
    "DoubleExcitationSpectrum",
    "sigma_matrix",
    "q_matrix",
]


def pair_basis(cfg: ArrayConfig) -> list:
    """Ordered-pair basis [(m, n) with m < n], lexicographic.

    Raises
    ------
    EmptySector
        For N = 1 (no two-excitation states).
    """
    if cfg.n_atoms < 2:
        raise EmptySector("two-excitation sector is empty for a single atom")
    n = cfg.n_atoms
    return [(m, k) for m in range(n) for k in range(m + 1, n)]


def build_pair_hamiltonian(cfg: ArrayConfig) -> np.ndarray:
    """P x P complex-symmetric pair Hamiltonian in the ordered-pair basis."""
    pairs = pair_basis(cfg)
    h = build_single_hamiltonian(cfg)
    p = len(pairs)
    a = np.zeros((p, p), dtype=complex)
    for i, (m, n) in enumerate(pairs):
        for j, (mp, np_) in enumerate(pairs):
            a[i, j] = (
                h[m, mp] * (n == np_)
                + (m == mp) * h[n, np_]
                + h[m, np_] * (n == mp)
                + (m == np_) * h[n, mp]
            )
    return a


def pair_emission_map(cfg: ArrayConfig) -> np.ndarray:
    """N x P map from pair amplitudes to on-site double occupation.

    Column (i, j) has H_ij at row i and H_ji at row j; the emission
    coefficients are d^kappa = B y^kappa / sqrt(2).
    """
    pairs = pair_basis(cfg)
    h = build_single_hamiltonian(cfg)
    b = np.zeros((cfg.n_atoms, len(pairs)), dtype=complex)
    for idx, (i, j) in enumerate(pairs):
        b[i, idx] = h[i, j]
        b[j, idx] = h[j, i]
    return b


@lru_cache(maxsize=256)
def _pair_eigenvalues(cfg: ArrayConfig) -> np.ndarray:
    return np.linalg.eigvals(build_pair_hamiltonian(cfg))


@dataclass(frozen=True)
class DoubleExcitationSpectrum:
    """Eigen-decomposition of the hard-core two-excitation sector.

    Attributes
    ----------
    config : ArrayConfig
    pairs : tuple of (m, n)
        Ordered-pair basis, fixed ordering shared by all arrays below.
    epsilon : (P,) complex ndarray
        Pair energies (two-photon eigenvalue = 2*epsilon), sorted by (Re, Im).
    pair_modes : (P, P) complex ndarray
        pair_modes[kappa] = y^kappa, bilinear-normalized (sum y**2 = 1).
    psi : (P, N, N) complex ndarray
        Symmetric zero-diagonal amplitudes, psi[kappa, m, n] = y_(mn)/sqrt(2).
    d : (P, N) complex ndarray
        Emission coefficients d^kappa_m = sum_n H_mn psi^kappa_mn.
    """

    config: ArrayConfig
    pairs: tuple
    epsilon: np.ndarray
    pair_modes: np.ndarray
    psi: np.ndarray
    d: np.ndarray

    def q_resonance(self, eps) -> np.ndarray:
        """Q(eps) summed over pair resonances (needs a diagonalizable sector)."""
        e = complex(eps)
        denom = self.epsilon - e
        if np.abs(denom).min() < EPS_POLE:
            raise SingularFrequency(
                f"eps within {np.abs(denom).min():.2e} of a pair energy"
            )
        n = self.config.n_atoms
        q = 2.0 * (1j * e - 1.0) * np.eye(n, dtype=complex)
        q += 2j * np.einsum("km,kn,k->mn", self.d, self.d, 1.0 / denom)
        return q

    def to_json_dict(self) -> dict:
        """Schema used by the `spectrum` CLI output (complex -> [re, im])."""
        return {
            "epsilon": _c2pairs(self.epsilon),
            "pair_basis": [list(p) for p in self.pairs],
            "psi": _c2pairs(self.pair_modes / np.sqrt(2.0)),
            "d": _c2pairs(self.d),
        }


def diagonalize_double(cfg: ArrayConfig) -> DoubleExcitationSpectrum:
    """Diagonalize the pair Hamiltonian; attach amplitudes and emission.

    Raises
    ------
    EmptySector
        For N = 1.
    ExceptionalPoint
        Where the pair sector is defective (bilinear normalization fails).
    """
    pairs = pair_basis(cfg)
    a = build_pair_hamiltonian(cfg)
    h = build_single_hamiltonian(cfg)
    eigenvalues, vectors = np.linalg.eig(a)
    two_eps, y = _normalize_modes(eigenvalues, vectors)
    pair_modes = y.T  # pair_modes[kappa] = y^kappa

    p = len(pairs)
    n = cfg.n_atoms
    psi = np.zeros((p, n, n), dtype=complex)
    for i, (m, k) in enumerate(pairs):
        psi[:, m, k] = pair_modes[:, i] / np.sqrt(2.0)
        psi[:, k, m] = psi[:, m, k]
    d = np.einsum("mn,kmn->km", h, psi)

    return DoubleExcitationSpectrum(
        config=cfg,
        pairs=tuple(pairs),
        epsilon=two_eps / 2.0,
        pair_modes=pair_modes,
        psi=psi,
        d=d,
    )


def sigma_matrix(single: SingleExcitationSpectrum, eps) -> np.ndarray:
    """Pair self-energy Sigma(eps) from the single-excitation residues.

    Parameters
    ----------
    single : SingleExcitationSpectrum
    eps : complex scalar
        Half the total two-photon energy.

    Returns
    -------
    (N, N) complex ndarray

    Raises
    ------
    SingularFrequency
        If 2*eps lies within EPS_POLE of a pair-sum w_nu + w_mu.
    """
    w = single.omega
    denom = w[:, None] + w[None, :] - 2.0 * complex(eps)
    if np.abs(denom).min() < EPS_POLE:
        raise SingularFrequency(
            f"2*eps within {np.abs(denom).min():.2e} of a pair-sum pole"
        )
    # b[nu, m, n] = v^nu_m v^nu_n
    b = np.einsum("vm,vn->vmn", single.modes, single.modes)
    return 1j * np.einsum("vmn,umn,vu->mn", b, b, 1.0 / denom)


def q_matrix(cfg: ArrayConfig, eps) -> np.ndarray:
    """Inverse pair propagator Q(eps) = Sigma(eps)^(-1), Schur resolvent form.

    Valid for every N >= 1 (the pair term is absent for N = 1) and at
    exceptional points of the pair sector.

    Raises
    ------
    SingularFrequency
        If eps lies within EPS_POLE of a pair energy eps_kappa.
    """
    e = complex(eps)
    n = cfg.n_atoms
    q = 2.0 * (1j * e - 1.0) * np.eye(n, dtype=complex)
    if n == 1:
        return q
    two_eps = _pair_eigenvalues(cfg)
    if np.abs(two_eps - 2.0 * e).min() < 2.0 * EPS_POLE:
        raise SingularFrequency(
            f"eps within {np.abs(two_eps / 2.0 - e).min():.2e} of a pair energy"
        )
    a = build_pair_hamiltonian(cfg)
    b = pair_emission_map(cfg)
    resolv = np.linalg.solve(2.0 * e * np.eye(len(two_eps)) - a, b.T)
    return q - 2j * (b @ resolv)
