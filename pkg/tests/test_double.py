"""Two-excitation sector: pair spectra, the inverse-propagator identity
between its two computation routes, and the exceptional-point guard."""

import numpy as np
import pytest

from wqpulse.config import ArrayConfig
from wqpulse.double import (
    build_pair_hamiltonian,
    diagonalize_double,
    pair_basis,
    pair_emission_map,
    q_matrix,
    sigma_matrix,
)
from wqpulse.errors import ExceptionalPoint
from wqpulse.single import diagonalize_single

RNG = np.random.default_rng(11)


def test_pair_basis_ordering():
    cfg = ArrayConfig(n_atoms=4, phi=0.5)
    pb = pair_basis(cfg)
    assert pb == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_trace_identity():
    # sum of pair decay rates is fixed by the diagonal alone
    for n in range(2, 9):
        p = n * (n - 1) // 2
        for phi in RNG.uniform(0.0, np.pi, 20):
            h = build_pair_hamiltonian(ArrayConfig(n_atoms=n, phi=phi))
            # h carries the total pair frequency 2*eps
            assert abs(np.linalg.eigvals(h).imag.sum() / 2 + p) < 1e-10


def test_eigenvalues_match_raw_hamiltonian():
    cfg = ArrayConfig(n_atoms=5, phi=1.1)
    dd = diagonalize_double(cfg)
    raw = np.linalg.eigvals(build_pair_hamiltonian(cfg)) / 2
    a = np.sort_complex(np.round(raw, 10))
    b = np.sort_complex(np.round(dd.epsilon, 10))
    assert np.abs(a - b).max() < 1e-9


def test_onsite_wavefunctions():
    dd = diagonalize_double(ArrayConfig(n_atoms=4, phi=0.7))
    n = 4
    # hard-core: no double occupation, and bosonic symmetry in (m, n)
    assert np.abs(dd.psi[:, np.arange(n), np.arange(n)]).max() == 0.0
    assert np.abs(dd.psi - dd.psi.transpose(0, 2, 1)).max() == 0.0
    gram = dd.pair_modes.T @ dd.pair_modes
    assert np.abs(gram - np.eye(dd.epsilon.size)).max() < 1e-10


def test_inverse_propagator_two_routes():
    """Schur-resolvent Q and the resonance expansion over pair modes are
    independent computations of the same matrix."""
    for n, phi in ((2, 0.4), (3, 0.7), (4, 1.9)):
        cfg = ArrayConfig(n_atoms=n, phi=phi)
        dd = diagonalize_double(cfg)
        for _ in range(5):
            eps = RNG.uniform(-3, 3) + 1j * RNG.uniform(-2, 2)
            a = q_matrix(cfg, eps)
            b = dd.q_resonance(eps)
            assert np.abs(a - b).max() < 1e-9 * max(1.0, np.abs(a).max())


def test_q_inverts_sigma_spot():
    cfg = ArrayConfig(n_atoms=3, phi=0.5)
    sp = diagonalize_single(cfg)
    for eps in (1.3 + 0.4j, -0.7 + 1.1j, 0.2 - 0.9j):
        q = q_matrix(cfg, eps)
        s = sigma_matrix(sp, eps)
        assert np.abs(q @ s - np.eye(q.shape[0])).max() < 1e-10


def test_emission_map_shape():
    cfg = ArrayConfig(n_atoms=5, phi=0.9)
    em = pair_emission_map(cfg)
    assert em.shape == (5, 10)


def test_exceptional_point_quarter_wavelength():
    # four atoms at quarter-wavelength spacing collapse two pair modes;
    # the bilinear normalization cannot be formed there
    with pytest.raises(ExceptionalPoint):
        diagonalize_double(ArrayConfig(n_atoms=4, phi=np.pi / 2))


def test_pair_spectrum_mirror_symmetry():
    for n in (2, 3, 5):
        a = diagonalize_double(ArrayConfig(n_atoms=n, phi=0.6)).epsilon
        b = diagonalize_double(ArrayConfig(n_atoms=n, phi=np.pi - 0.6)).epsilon
        key = lambda z: (np.round(z.real, 9), np.round(z.imag, 9))
        sa = sorted(-np.conj(a), key=key)
        sb = sorted(b, key=key)
        assert np.abs(np.array(sa) - np.array(sb)).max() < 1e-9


def test_json_payload_keys():
    dd = diagonalize_double(ArrayConfig(n_atoms=3, phi=0.5))
    d = dd.to_json_dict()
    assert set(d) == {"epsilon", "pair_basis", "psi", "d"}
    assert len(d["epsilon"]) == 3
