"""Single-excitation sector: effective Hamiltonian, resolvent, couplings.

Conventions
-----------
The photon-mediated coupling between atoms m and n (atom coordinates are
z_n = n*d with n = 0..N-1) gives the non-Hermitian effective Hamiltonian

    H_mn = -1j * exp(1j * phi * |m - n|),        phi = omega_0 d / c,

in units gamma_1D = 1, omega_0 = 0.  H is complex symmetric, not Hermitian:
left and right eigenvectors coincide and the spectral decomposition uses the
bilinear normalization sum_m v_m**2 = 1 (no conjugation).  With that choice
the resolvent G(w) = (w*I - H)^(-1) expands as

    G_mn(w) = sum_nu v_m^nu v_n^nu / (w - w_nu),

and the directional couplings and transmission pick up simple-pole
expansions with the residue conventions

    s_m^pm(w) = sum_nu s_m^{pm,nu} / (w_nu - w),
    t(w)      = 1 + sum_nu t_nu / (w - w_nu).

Note the opposite denominator orientation between the two: both are stated
explicitly because downstream frequency integrals rely on them.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import EPS_EXCEPTIONAL, EPS_POLE, ArrayConfig
from .errors import ExceptionalPoint, SingularFrequency

__all__ = [
    "build_single_hamiltonian",
    "green_function",
    "coupling_amplitude",
    "transmission",
    "reflection",
    "diagonalize_single",
    "SingleExcitationSpectrum",
]


def build_single_hamiltonian(cfg: ArrayConfig) -> np.ndarray:
    """Return the N x N complex-symmetric effective Hamiltonian."""
    n = np.arange(cfg.n_atoms)
    dist = np.abs(n[:, None] - n[None, :])
    return -1j * np.exp(1j * cfg.phi * dist)


def _phase_vector(cfg: ArrayConfig, sign: int) -> np.ndarray:
    """exp(sign * 1j * phi * n) over atom coordinates n = 0..N-1."""
    return np.exp(sign * 1j * cfg.phi * np.arange(cfg.n_atoms))


@lru_cache(maxsize=256)
def _eigenvalues(cfg: ArrayConfig) -> np.ndarray:
    return np.linalg.eigvals(build_single_hamiltonian(cfg))


def _check_regular(omega, eigenvalues, label="omega"):
    """Reject evaluation points within EPS_POLE of a resonance pole."""
    w = np.atleast_1d(np.asarray(omega, dtype=complex))
    dist = np.abs(w[:, None] - eigenvalues[None, :]).min()
    if dist < EPS_POLE:
        raise SingularFrequency(
            f"{label} within {dist:.2e} of a resonance pole (guard {EPS_POLE:g})"
        )


def green_function(cfg: ArrayConfig, omega) -> np.ndarray:
    """Resolvent G(omega) = (omega*I - H)^(-1).

    Parameters
    ----------
    cfg : ArrayConfig
    omega : complex scalar or (K,) array_like
        Probe frequency (units of gamma_1D, relative to omega_0).

    Returns
    -------
    (N, N) or (K, N, N) complex ndarray

    Raises
    ------
    SingularFrequency
        If any requested frequency lies within EPS_POLE of an eigenvalue.
    """
    _check_regular(omega, _eigenvalues(cfg))
    h = build_single_hamiltonian(cfg)
    w = np.asarray(omega, dtype=complex)
    eye = np.eye(cfg.n_atoms, dtype=complex)
    a = w[..., None, None] * eye - h
    rhs = np.broadcast_to(eye, a.shape)
    return np.linalg.solve(a, rhs)


def coupling_amplitude(cfg: ArrayConfig, omega):
    """Directional couplings s_m^+(w), s_m^-(w) = sum_n G_mn(w) e^{+-i phi n}.

    Returns
    -------
    (s_plus, s_minus) : pair of (N,) (or (K, N)) complex ndarrays
    """
    g = green_function(cfg, omega)
    return (
        g @ _phase_vector(cfg, +1),
        g @ _phase_vector(cfg, -1),
    )


def transmission(cfg: ArrayConfig, omega):
    """Single-photon transmission t(w) = 1 - 1j * sum_mn e^{-i phi m} G_mn e^{+i phi n}."""
    g = green_function(cfg, omega)
    e_plus = _phase_vector(cfg, +1)
    e_minus = _phase_vector(cfg, -1)
    return 1.0 - 1j * np.einsum("m,...mn,n->...", e_minus, g, e_plus)


def reflection(cfg: ArrayConfig, omega):
    """Single-photon reflection r(w) = -1j * sum_mn e^{+i phi m} G_mn e^{+i phi n}.

    Together with `transmission` it satisfies |t|**2 + |r|**2 = 1 for real w:
    the single-excitation sector is lossless because the waveguide is the
    only decay channel.
    """
    g = green_function(cfg, omega)
    e_plus = _phase_vector(cfg, +1)
    return -1j * np.einsum("m,...mn,n->...", e_plus, g, e_plus)


def _bilinear_orthonormalize(vecs: np.ndarray) -> np.ndarray:
    """Gram-Schmidt under the bilinear (conjugation-free) inner product.

    `vecs` holds column vectors spanning one degenerate eigenspace.  Complex
    symmetry guarantees eigenvectors of distinct eigenvalues are already
    bilinear-orthogonal; inside a degenerate cluster numpy gives no such
    guarantee, so the cluster is re-orthogonalized explicitly.
    """
    out = vecs.astype(complex).copy()
    for k in range(out.shape[1]):
        for j in range(k):
            out[:, k] -= (out[:, j] @ out[:, k]) * out[:, j]
        norm2 = out[:, k] @ out[:, k]
        if abs(norm2) < EPS_EXCEPTIONAL:
            raise ExceptionalPoint(
                f"bilinear norm |sum v^2| = {abs(norm2):.2e} below "
                f"{EPS_EXCEPTIONAL:g}; spacing phase sits at an exceptional point"
            )
        out[:, k] /= np.sqrt(norm2)
    return out


def _normalize_modes(eigenvalues, vectors):
    """Bilinear-normalize eigenvectors, clustering degenerate eigenvalues."""
    n = eigenvalues.size
    scale = max(np.abs(eigenvalues).max(), 1.0)
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    ew = eigenvalues[order]
    ev = vectors[:, order]
    done = np.zeros(n, dtype=bool)
    for k in range(n):
        if done[k]:
            continue
        cluster = np.abs(ew - ew[k]) < 1e-9 * scale
        ev[:, cluster] = _bilinear_orthonormalize(ev[:, cluster])
        done |= cluster
    return ew, ev


@dataclass(frozen=True)
class SingleExcitationSpectrum:
    """Eigen-decomposition of the single-excitation sector with residues.

    Attributes
    ----------
    config : ArrayConfig
    omega : (N,) complex ndarray
        Eigenvalues, sorted by (Re, Im).  Im(omega) < 0 for every mode.
    modes : (N, N) complex ndarray
        modes[nu] is the bilinear-normalized eigenvector v^nu.
    s_plus_res, s_minus_res : (N, N) complex ndarray
        Residues of the directional couplings, indexed [nu, atom]:
        s_m^pm(w) = sum_nu s_pm_res[nu, m] / (omega[nu] - w).
    t_res : (N,) complex ndarray
        Transmission residues: t(w) = 1 + sum_nu t_res[nu] / (w - omega[nu]).
    """

    config: ArrayConfig
    omega: np.ndarray
    modes: np.ndarray
    s_plus_res: np.ndarray
    s_minus_res: np.ndarray
    t_res: np.ndarray

    def coupling_from_residues(self, omega):
        """Evaluate s^+, s^- by summing the pole expansion (regularity-checked)."""
        _check_regular(omega, self.omega)
        w = np.asarray(omega, dtype=complex)
        denom = self.omega - w[..., None]  # [..., nu]
        s_plus = np.einsum("...v,vm->...m", 1.0 / denom, self.s_plus_res)
        s_minus = np.einsum("...v,vm->...m", 1.0 / denom, self.s_minus_res)
        return s_plus, s_minus

    def transmission_from_residues(self, omega):
        """Evaluate t(w) from its pole expansion 1 + sum_nu t_nu/(w - w_nu)."""
        _check_regular(omega, self.omega)
        w = np.asarray(omega, dtype=complex)
        return 1.0 + np.sum(self.t_res / (w[..., None] - self.omega), axis=-1)

    def superradiant_index(self) -> int:
        """Index of the fastest-decaying (largest |Im omega|) mode."""
        return int(np.argmax(-self.omega.imag))

    def to_json_dict(self) -> dict:
        """Schema used by the `spectrum` CLI output (complex -> [re, im])."""
        return {
            "omega": _c2pairs(self.omega),
            "modes": _c2pairs(self.modes),
            "s_plus": _c2pairs(self.s_plus_res),
            "s_minus": _c2pairs(self.s_minus_res),
            "t_res": _c2pairs(self.t_res),
        }


def _c2pairs(a: np.ndarray):
    """Nested lists of [re, im] pairs, innermost axis length 2."""
    stacked = np.stack([np.asarray(a).real, np.asarray(a).imag], axis=-1)
    return stacked.tolist()


def diagonalize_single(cfg: ArrayConfig) -> SingleExcitationSpectrum:
    """Diagonalize the single-excitation Hamiltonian and attach residues.

    The coupling residues follow from inserting the spectral form of G into
    the definitions of s^pm and t:

        s_m^{pm,nu} = -v_m^nu * sum_n v_n^nu e^{+-i phi n},
        t_nu        = -1j * (sum_m v_m^nu e^{-i phi m}) (sum_n v_n^nu e^{+i phi n}).

    Raises
    ------
    ExceptionalPoint
        If the bilinear normalization fails (coalescing eigenvectors).
    """
    h = build_single_hamiltonian(cfg)
    eigenvalues, vectors = np.linalg.eig(h)
    omega, ev = _normalize_modes(eigenvalues, vectors)
    modes = ev.T  # modes[nu] = v^nu

    proj_plus = modes @ _phase_vector(cfg, +1)  # sum_n v_n^nu e^{+i phi n}
    proj_minus = modes @ _phase_vector(cfg, -1)
    s_plus_res = -modes * proj_plus[:, None]
    s_minus_res = -modes * proj_minus[:, None]
    t_res = -1j * proj_minus * proj_plus

    return SingleExcitationSpectrum(
        config=cfg,
        omega=omega,
        modes=modes,
        s_plus_res=s_plus_res,
        s_minus_res=s_minus_res,
        t_res=t_res,
    )
