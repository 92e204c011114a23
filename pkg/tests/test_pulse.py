"""Two-photon field reconstruction: fast prefolded engine against the
naive reference loops, grid/cut containers, masks, and their file forms."""

import io
import json

import numpy as np
import pytest

from wqpulse.config import ArrayConfig
from wqpulse.errors import GridTooCoarse
from wqpulse.pulse import (
    ModeMask,
    cut_field,
    incoherent_wavefunction,
    incoherent_wavefunction_reference,
    smooth_transmitted_field,
    superradiant_mask,
    two_photon_field,
)
from wqpulse.single import diagonalize_single

RNG = np.random.default_rng(31)


def _random_points(k):
    return RNG.uniform(0.15, 6.0, (k, 2))


def test_fast_engine_matches_reference():
    """The divided-difference prefolding must agree with literal kernel
    sums over every mode pair, masked or not."""
    cases = [
        (2, 0.5, None),
        (3, 0.1, None),
        (4, 0.3, None),
        (3, 2.6, None),
        (4, 0.3, ModeMask(included_single=(1, 3), included_double=None)),
        (3, 0.7, ModeMask(included_single=None, included_double=(0, 2))),
    ]
    for n, phi, mask in cases:
        cfg = ArrayConfig(n_atoms=n, phi=phi)
        for t1, t2 in _random_points(4):
            a = incoherent_wavefunction(cfg, t1, t2, mask=mask)
            b = incoherent_wavefunction_reference(cfg, t1, t2, mask=mask)
            assert abs(a - b) < 1e-11 * max(1.0, abs(b))


def test_single_atom_closed_form():
    # one atom stores one photon: the correlated part is forced to cancel
    # the product term and takes the pure two-decay exponential form
    cfg = ArrayConfig(n_atoms=1, phi=0.4)
    for t1, t2 in _random_points(6):
        psi = incoherent_wavefunction(cfg, t1, t2)
        assert abs(psi + np.exp(-(t1 + t2))) < 1e-13


def test_field_exchange_symmetry():
    for n, phi in ((2, 0.9), (4, 0.15)):
        cfg = ArrayConfig(n_atoms=n, phi=phi)
        for t1, t2 in _random_points(4):
            a = incoherent_wavefunction(cfg, t1, t2)
            b = incoherent_wavefunction(cfg, t2, t1)
            assert abs(a - b) < 1e-12 * max(1.0, abs(a))


def test_transmitted_single_field_pole_form():
    # y(t) is the -i-weighted sum of transmission residues; one atom
    # reduces to a bare decaying exponential
    cfg1 = ArrayConfig(n_atoms=1, phi=0.2)
    t = np.linspace(0.1, 5.0, 23)
    y1 = smooth_transmitted_field(diagonalize_single(cfg1), t)
    assert np.abs(y1 + np.exp(-t)).max() < 1e-13
    sp = diagonalize_single(ArrayConfig(n_atoms=3, phi=0.7))
    y = smooth_transmitted_field(sp, t)
    yp = -1j * np.sum(sp.t_res[None, :]
                      * np.exp(-1j * sp.omega[None, :] * t[:, None]), axis=1)
    assert np.abs(y - yp).max() < 1e-12


def test_grid_container_consistency():
    cfg = ArrayConfig(n_atoms=2, phi=0.8)
    f = two_photon_field(cfg, t_max=4.0, n_points=100)
    assert f.times[0] == pytest.approx(0.04)
    assert f.times[-1] == pytest.approx(4.0)
    y = smooth_transmitted_field(diagonalize_single(cfg), f.times)
    assert np.abs(f.psi_coherent - y[:, None] * y[None, :]).max() == 0.0
    i, j = 7, 61
    direct = incoherent_wavefunction(cfg, f.times[i], f.times[j])
    assert abs(f.psi_incoherent[i, j] - direct) < 1e-14


def test_grid_warns_when_step_misses_bright_mode():
    cfg = ArrayConfig(n_atoms=4, phi=0.1)
    with pytest.warns(GridTooCoarse):
        two_photon_field(cfg, t_max=10.0, n_points=50)


def test_explicit_times_path():
    cfg = ArrayConfig(n_atoms=2, phi=0.8)
    t = np.geomspace(0.05, 6.0, 40)
    with pytest.warns(GridTooCoarse):  # widest geometric gap is ~0.7
        f = two_photon_field(cfg, times=t)
    assert np.array_equal(f.times, t)
    direct = incoherent_wavefunction(cfg, t[5], t[20])
    assert abs(f.psi_incoherent[5, 20] - direct) < 1e-14
    with pytest.raises(ValueError):
        two_photon_field(cfg, times=t[::-1])
    with pytest.raises(ValueError):
        two_photon_field(cfg, times=np.array([0.0, 1.0]))


def test_mask_validation():
    cfg = ArrayConfig(n_atoms=3, phi=0.7)
    with pytest.raises(ValueError):
        incoherent_wavefunction(cfg, 1.0, 1.0,
                                mask=ModeMask(included_single=(7,),
                                              included_double=None))
    with pytest.raises(ValueError):
        incoherent_wavefunction(cfg, 1.0, 1.0,
                                mask=ModeMask(included_single=None,
                                              included_double=()))


def test_trivial_mask_equals_no_mask():
    cfg = ArrayConfig(n_atoms=3, phi=0.7)
    full = ModeMask(included_single=(0, 1, 2), included_double=(0, 1, 2))
    a = incoherent_wavefunction(cfg, 1.3, 0.6)
    b = incoherent_wavefunction(cfg, 1.3, 0.6, mask=full)
    assert abs(a - b) < 1e-14


def test_superradiant_mask_picks_fastest():
    sp = diagonalize_single(ArrayConfig(n_atoms=4, phi=0.1))
    m = superradiant_mask(sp)
    assert m.included_single == (int((-sp.omega.imag).argmax()),)
    assert m.included_double is None


def test_grid_csv_layout():
    cfg = ArrayConfig(n_atoms=2, phi=0.8)
    f = two_photon_field(cfg, t_max=1.0, n_points=25)
    buf = io.StringIO()
    f.write_csv(buf)
    lines = buf.getvalue().splitlines()
    meta = json.loads(lines[0][2:])
    assert meta["n_atoms"] == 2 and meta["n_points"] == 25
    assert lines[1] == "t1,t2,re_coh,im_coh,re_incoh,im_incoh"
    assert len(lines) == 2 + 625
    row = lines[2].split(",")
    assert len(row) == 6
    assert float(row[0]) == pytest.approx(0.04)


def test_cut_geometries():
    cfg = ArrayConfig(n_atoms=3, phi=0.4)
    diag = cut_field(cfg, "diagonal", 0.0, 5.0, 50)
    assert np.allclose(diag.t1, diag.t2)
    assert diag.abscissa[0] > 0.0 and diag.abscissa[-1] == pytest.approx(5.0)

    anti = cut_field(cfg, "antidiagonal", 3.0, 4.0, 81)
    # points with either time nonpositive are dropped, not clamped
    assert (anti.t1 > 0).all() and (anti.t2 > 0).all()
    assert np.abs(anti.t1 + anti.t2 - 3.0).max() < 1e-12

    edge = cut_field(cfg, "edge", 0.5, 6.0, 30)
    assert np.allclose(edge.t2, 0.5)
    k = 11
    direct = incoherent_wavefunction(cfg, edge.t1[k], 0.5)
    assert abs(edge.psi_incoherent[k] - direct) < 1e-13

    with pytest.raises(ValueError):
        cut_field(cfg, "ridge", 1.0, 2.0, 10)


def test_cut_csv_layout():
    cfg = ArrayConfig(n_atoms=2, phi=1.1)
    cut = cut_field(cfg, "diagonal", 0.0, 3.0, 12)
    buf = io.StringIO()
    cut.write_csv(buf, {"kind": "diagonal"})
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# ")
    assert lines[1] == "s,t1,t2,re_coh,im_coh,re_incoh,im_incoh"
    assert len(lines) == 2 + 12
