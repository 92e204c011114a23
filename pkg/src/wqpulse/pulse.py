"""Transmitted two-photon field after an instantaneous two-photon kick.

The outgoing amplitude splits into an un-scattered instantaneous spike
(tracked symbolically, never on a grid), a coherent smooth part that is a
product of one-photon fields, and an incoherent part carrying all photon-
photon correlation:

    psi(t1, t2) = [delta terms] + y(t1) y(t2) + psi_incoherent(t1, t2).

The one-photon smooth field is a sum over collective single-excitation
modes, y(t) = -i theta(t) sum_mu t_mu e^{-i omega_mu t}, with t_mu the
transmission residues.  The incoherent part is assembled from the same
mode data plus the two-excitation resonances:

    psi_inc = sum_{i, nu, mu} s_i^{-,nu} s_i^{-,mu} *
              [ sum_r U_i^r K1(nu, mu, r) + sum_{r,k} V_i^{rk} K2(nu, mu, r, k) ]

where r runs over half-sums of incoming mode pairs, k over two-excitation
eigenstates, and K1/K2 are the closed-form kernels from `kernels`.  U and
V encode the frequency response u_i(eps) = sum_j Q_ij(eps) f_j(2 eps) as
residues, which is also evaluable directly for cross-checks.

For grids the bosonic symmetry reduces work to the wedge t1 >= t2, where
psi = sum_nu e^{-i omega_nu (t1 - t2)} F_nu(t2); the F rows contract all
kernel sums at fixed t2 with every t2-phase folded in, so each row decays
on its own and the representation stays finite at arbitrarily late times
(subradiant half-sum poles outlive single modes by orders of magnitude,
and the naive split into pure mode phases overflows there).

A `ModeMask` restricts every mode sum at once: excluded single modes drop
out of the outgoing pairs, the incoming half-sums and the coherent field;
excluded double modes drop their resonance terms.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .config import ArrayConfig
from .errors import GridTooCoarse
from .kernels import (kernel_double_pole, kernel_single_pole,
                      window_factor_damped, window_factor_diff_damped)
from .single import SingleExcitationSpectrum, diagonalize_single
from .double import diagonalize_double

__all__ = [
    "ModeMask",
    "superradiant_mask",
    "IncoherentCouplings",
    "incoherent_couplings",
    "smooth_transmitted_field",
    "incoherent_wavefunction",
    "incoherent_wavefunction_reference",
    "two_photon_field",
    "TwoPhotonField",
    "CutResult",
    "cut_field",
]

# separation below which paired half-sum poles switch to the confluent
# kernel; well above DELTA_CONFLUENT so the split stays consistent
_NEAR_PAIR_TOL = 1e-4


@dataclass(frozen=True)
class ModeMask:
    """Selection of collective modes entering the reconstruction.

    ``None`` keeps the full sector; otherwise indices refer to the sorted
    mode order of the spectra.  Excluded single modes are removed from the
    outgoing pair sums, from the incoming half-sum pairs and from the
    coherent field alike, so a mask is a genuine truncation of the mode
    expansion rather than a plot filter.
    """

    included_single: tuple = None
    included_double: tuple = None

    def resolve(self, n_modes: int, n_pairs: int):
        """Index arrays (single, double) after validation."""
        def pick(sel, count, label):
            if sel is None:
                return np.arange(count)
            idx = np.asarray(sorted(set(int(i) for i in sel)), dtype=int)
            if idx.size == 0:
                raise ValueError(f"mask removes every {label} mode")
            if idx.min() < 0 or (count and idx.max() >= count):
                raise ValueError(
                    f"{label} mode index out of range 0..{count - 1}")
            return idx

        return (pick(self.included_single, n_modes, "single-excitation"),
                pick(self.included_double, n_pairs, "two-excitation")
                if n_pairs else np.arange(0))

    def describe(self) -> dict:
        return {
            "included_single": (None if self.included_single is None
                                else list(self.included_single)),
            "included_double": (None if self.included_double is None
                                else list(self.included_double)),
        }


def superradiant_mask(spectrum: SingleExcitationSpectrum) -> ModeMask:
    """Mask keeping only the fastest-decaying single mode (all doubles)."""
    return ModeMask(included_single=(spectrum.superradiant_index(),),
                    included_double=None)


class IncoherentCouplings:
    """Residue data of the pair response u_i(eps) entering the incoherent
    sums, with optional mode masking applied at construction.

    u_i(eps) = sum_r U_i^r (i eps - 1)/(eps_r - eps)
             + sum_{r,k} V_i^{rk} / ((eps_r - eps)(eps_k - eps))

    where eps_r runs over half-sums of incoming single-mode pairs (each
    unordered pair once, multiplicity folded into U and V) and eps_k over
    the two-excitation energies.  Evaluation uses a partial-fraction
    rearrangement unless some eps_r collides with some eps_k, in which
    case the slower but collision-proof double sum takes over.
    """

    def __init__(self, cfg: ArrayConfig, mask: ModeMask = None):
        self.config = cfg
        self.mask = mask or ModeMask()
        self.single = diagonalize_single(cfg)
        self.double = diagonalize_double(cfg) if cfg.n_atoms > 1 else None
        n_pairs = 0 if self.double is None else self.double.epsilon.size
        inc_s, inc_d = self.mask.resolve(self.single.omega.size, n_pairs)
        self.single_indices = inc_s
        self.double_indices = inc_d

        s_plus = self.single.s_plus_res[inc_s]
        omega = self.single.omega[inc_s]
        v = inc_s.size
        ia, ib = np.triu_indices(v)
        self.eps_r = 0.5 * (omega[ia] + omega[ib])
        weight = np.where(ia == ib, 1.0, 2.0)
        pair_prod = weight[:, None] * s_plus[ia] * s_plus[ib]  # (R, N)
        self.u_first = 1j * pair_prod

        if self.double is not None and inc_d.size:
            d = self.double.d[inc_d]  # (P, N)
            self.eps_kappa = self.double.epsilon[inc_d]
            # V[r, k, i] = -d_i^k * sum_j d_j^k pair_prod[r, j]
            overlap = pair_prod @ d.T  # (R, P)
            self.u_second = -np.einsum("rk,ki->rki", overlap, d)
        else:
            self.eps_kappa = np.zeros(0, dtype=complex)
            self.u_second = np.zeros(
                (self.eps_r.size, 0, cfg.n_atoms), dtype=complex)

        sep = self.eps_r[:, None] - self.eps_kappa[None, :]
        self._partial_ok = (sep.size == 0
                            or float(np.abs(sep).min()) > 1e-9)
        if self._partial_ok and self.eps_kappa.size:
            inv = 1.0 / sep  # (R, P)
            # 1/((e_r - e)(e_k - e)) = (1/(e_r - e) - 1/(e_k - e))/(e_k - e_r)
            self._res_r = -np.einsum("rki,rk->ri", self.u_second, inv)
            self._res_k = np.einsum("rki,rk->ki", self.u_second, inv)
        else:
            self._res_r = np.zeros_like(self.u_first)
            self._res_k = np.zeros((self.eps_kappa.size, cfg.n_atoms),
                                   dtype=complex)

    @property
    def u_poles(self):
        """All pole locations of u on the half-sum axis."""
        return np.concatenate([self.eps_r, self.eps_kappa])

    @property
    def u_limit(self):
        """Large-|eps| limit of u; equals e^{2 i phi i} for the full mask."""
        return -1j * self.u_first.sum(axis=0)

    def u_amplitude(self, eps):
        """u_i at an array of (possibly complex) half-sum energies, (K, N)."""
        eps = np.asarray(eps, dtype=complex).ravel()
        inv_r = 1.0 / (self.eps_r[None, :] - eps[:, None])  # (K, R)
        lead = (1j * eps - 1.0)[:, None] * (inv_r @ self.u_first)
        if not self.eps_kappa.size:
            return lead
        if self._partial_ok:
            inv_k = 1.0 / (self.eps_kappa[None, :] - eps[:, None])
            return lead + inv_r @ self._res_r + inv_k @ self._res_k
        inv_k = 1.0 / (self.eps_kappa[None, :] - eps[:, None])
        second = np.einsum("kr,rpi,kp->ki", inv_r, self.u_second, inv_k)
        return lead + second


def incoherent_couplings(cfg: ArrayConfig,
                         mask: ModeMask = None) -> IncoherentCouplings:
    """Residue form of the pair response for a configuration and mask."""
    return IncoherentCouplings(cfg, mask)


def smooth_transmitted_field(spectrum: SingleExcitationSpectrum, t,
                             mask: ModeMask = None):
    """Smooth one-photon transmitted field y(t) after an instantaneous kick.

    y(t) = -i sum_mu t_mu e^{-i omega_mu t} for t >= 0, zero before; the
    un-scattered instantaneous spike is not part of this function.  A mask
    restricts the mode sum.
    """
    t = np.asarray(t, dtype=float)
    idx = np.arange(spectrum.omega.size)
    if mask is not None:
        idx, _ = mask.resolve(spectrum.omega.size, 0)
    phases = np.exp(-1j * np.outer(np.asarray(t), spectrum.omega[idx]))
    y = -1j * phases @ spectrum.t_res[idx]
    return np.where(t >= 0.0, y, 0.0)


class _PulseEngine:
    """Precontracted kernel tensors for one configuration and mask.

    Everything independent of time is folded at construction: the outgoing
    residue products against U give the single-pole tensor, against V the
    double-pole one; the latter is split into two single-argument window
    sums via the identity K2 = (g_r - g_k)/(e_r - e_k) wherever the pole
    separation allows, leaving only near-coincident pairs on the explicit
    confluent path.
    """

    def __init__(self, cfg: ArrayConfig, mask: ModeMask = None):
        self.config = cfg
        self.couplings = cpl = incoherent_couplings(cfg, mask)
        spectrum = cpl.single
        inc = cpl.single_indices
        self.omega_out = spectrum.omega[inc]
        s_minus = spectrum.s_minus_res[inc]  # (V, N)
        self.t_res_out = spectrum.t_res[inc]

        # (V, V, R) and (V, V, R, P) kernel weights
        self.c_single = np.einsum("vi,ui,ri->vur", s_minus, s_minus,
                                  cpl.u_first)
        self.c_double = np.einsum("vi,ui,rki->vurk", s_minus, s_minus,
                                  cpl.u_second)
        self.eps_r = cpl.eps_r
        self.eps_k = cpl.eps_kappa
        self.half = 0.5 * (self.omega_out[:, None] + self.omega_out[None, :])
        self.delta_r = self.eps_r[None, None, :] - self.half[:, :, None]
        self.delta_k = self.eps_k[None, None, :] - self.half[:, :, None]

        self.c_single_sum = self.c_single.sum(axis=2)
        self.c_single_w = self.c_single * (1j * self.eps_r - 1.0)[None, None, :]

        sep = self.eps_r[:, None] - self.eps_k[None, :]  # (R, P)
        far = np.abs(sep) > _NEAR_PAIR_TOL
        inv = np.divide(1.0, np.where(far, sep, 1.0)) * far
        self.d_first = np.einsum("vurk,rk->vur", self.c_double, inv)
        self.d_second = np.einsum("vurk,rk->vuk", self.c_double, inv)
        self.near_pairs = [tuple(p) for p in np.argwhere(~far)] \
            if self.eps_k.size else []

    def wedge_rows(self, t2, include_coherent=False):
        """F_nu(t2) with psi(t1 >= t2) = sum_nu e^{-i omega_nu (t1-t2)} F_nu.

        Vectorized over a 1d array of t2 >= 0; optionally folds in the
        coherent product so the rows describe the full smooth field.  With
        all t2-phases folded in, each row decays and never overflows.
        """
        t2 = np.asarray(t2, dtype=float)
        v = self.omega_out.size
        damp = -1j * (self.omega_out[:, None] + self.omega_out[None, :])
        coh_w = -np.outer(self.t_res_out, self.t_res_out)
        out = np.empty((v, t2.size), dtype=complex)
        chunk = max(1, 2_000_000 // max(1, v * v * (self.eps_r.size + 1)))
        for k0 in range(0, t2.size, chunk):
            tt = t2[k0:k0 + chunk]
            w_r = window_factor_damped(
                self.delta_r[..., None], damp[:, :, None, None], tt)
            pair_phase = np.exp(damp[:, :, None] * tt)  # (V,V,T)
            core = 1j * self.c_single_sum[:, :, None] * pair_phase
            core -= np.einsum("vur,vurt->vut", self.c_single_w, w_r)
            if self.eps_k.size:
                w_k = window_factor_damped(
                    self.delta_k[..., None], damp[:, :, None, None], tt)
                core += np.einsum("vur,vurt->vut", self.d_first, w_r)
                core -= np.einsum("vuk,vukt->vut", self.d_second, w_k)
                for r, k in self.near_pairs:
                    core += self.c_double[:, :, r, k, None] * \
                        window_factor_diff_damped(
                            self.delta_r[:, :, r, None],
                            self.delta_k[:, :, k, None],
                            damp[:, :, None], tt)
            if include_coherent:
                core += coh_w[:, :, None] * pair_phase
            out[:, k0:k0 + chunk] = core.sum(axis=1)
        return out

    def points(self, t1, t2, include_coherent=False):
        """Smooth-field values at arbitrary positive time points."""
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        lo = np.minimum(t1, t2)
        hi = np.maximum(t1, t2)
        rows = self.wedge_rows(lo, include_coherent=include_coherent)
        phases = np.exp(-1j * np.outer(self.omega_out, hi - lo))
        return np.einsum("vk,vk->k", phases, rows)


def incoherent_wavefunction(cfg: ArrayConfig, t1, t2, mask: ModeMask = None):
    """Correlated part of the smooth two-photon field at given points."""
    shape = np.broadcast(np.asarray(t1), np.asarray(t2)).shape
    t1b = np.broadcast_to(np.asarray(t1, dtype=float), shape).ravel()
    t2b = np.broadcast_to(np.asarray(t2, dtype=float), shape).ravel()
    vals = _PulseEngine(cfg, mask).points(t1b, t2b)
    return vals.reshape(shape) if shape else vals[0]


def incoherent_wavefunction_reference(cfg: ArrayConfig, t1, t2,
                                      mask: ModeMask = None):
    """Same quantity by direct kernel loops, no tensor prefolding.

    Kept deliberately naive as an in-package cross-check of the fast
    engine's divided-difference splitting.
    """
    cpl = incoherent_couplings(cfg, mask)
    spectrum = cpl.single
    inc = cpl.single_indices
    omega = spectrum.omega[inc]
    s_minus = spectrum.s_minus_res[inc]
    total = 0.0 + 0.0j
    for a, w_nu in enumerate(omega):
        for b, w_mu in enumerate(omega):
            weight_out = s_minus[a] * s_minus[b]  # (N,)
            for r, e_r in enumerate(cpl.eps_r):
                c1 = np.dot(weight_out, cpl.u_first[r])
                total += c1 * kernel_single_pole(w_nu, w_mu, e_r, t1, t2)
                for k, e_k in enumerate(cpl.eps_kappa):
                    c2 = np.dot(weight_out, cpl.u_second[r, k])
                    total += c2 * kernel_double_pole(
                        w_nu, w_mu, e_r, e_k, t1, t2)
    return total


@dataclass
class TwoPhotonField:
    """Smooth two-photon field sampled on a square time grid.

    The instantaneous spike components are not representable on a grid and
    are excluded throughout; `psi_coherent` holds the product part
    y(t1) y(t2) and `psi_incoherent` the correlated remainder.
    """

    config: ArrayConfig
    times: np.ndarray
    psi_coherent: np.ndarray
    psi_incoherent: np.ndarray
    mask: ModeMask = field(default_factory=ModeMask)

    @property
    def psi_smooth(self):
        return self.psi_coherent + self.psi_incoherent

    def metadata(self) -> dict:
        return {
            "n_atoms": self.config.n_atoms,
            "phi": self.config.phi,
            "t_max": float(self.times[-1]),
            "n_points": int(self.times.size),
            "mask": self.mask.describe(),
        }

    def write_csv(self, stream):
        """Flat CSV (t1, t2, coherent, incoherent), metadata as a comment."""
        stream.write("# " + json.dumps(self.metadata(), sort_keys=True) + "\n")
        stream.write("t1,t2,re_coh,im_coh,re_incoh,im_incoh\n")
        t = self.times
        for i in range(t.size):
            for j in range(t.size):
                c = self.psi_coherent[i, j]
                s = self.psi_incoherent[i, j]
                stream.write("%.16e,%.16e,%.16e,%.16e,%.16e,%.16e\n"
                             % (t[i], t[j], c.real, c.imag, s.real, s.imag))


def two_photon_field(cfg: ArrayConfig, t_max: float = None,
                     n_points: int = None, mask: ModeMask = None,
                     times=None) -> TwoPhotonField:
    """Sample the smooth field on an n x n grid over (0, t_max]^2.

    The uniform grid starts one step after zero: the spike terms live on
    the t = 0 edges and the smooth parts are one-sided limits there
    anyway.  Passing `times` instead uses an arbitrary increasing grid
    (e.g. geometric, for maps spanning the subradiant decades).  Warns
    `GridTooCoarse` when a step exceeds 0.1/N, the superradiant scale.
    """
    cfg.require_pulse_capable()
    if times is None:
        if n_points is None or t_max is None:
            raise ValueError("give either t_max and n_points, or times")
        if n_points < 2:
            raise ValueError("n_points must be at least 2")
        times = np.linspace(t_max / n_points, t_max, n_points)
    else:
        times = np.asarray(times, dtype=float)
        if times.size < 2 or np.any(np.diff(times) <= 0) or times[0] <= 0:
            raise ValueError("times must be increasing and positive")
        n_points = times.size
    step = float(np.diff(times).max())
    engine = _PulseEngine(cfg, mask)
    if step > 0.1 / cfg.n_atoms:
        import warnings
        warnings.warn(
            f"grid step {step:.3g} exceeds the superradiant resolution "
            f"scale {0.1 / cfg.n_atoms:.3g}; refine n_points",
            GridTooCoarse)

    rows = engine.wedge_rows(times)
    psi_inc = np.empty((n_points, n_points), dtype=complex)
    block = 512
    for i0 in range(0, n_points, block):
        # wedge phases only; the t_i < t_j side is filled by mirroring
        diff = np.maximum(times[i0:i0 + block, None] - times[None, :], 0.0)
        acc = np.zeros_like(diff, dtype=complex)
        for k, w in enumerate(engine.omega_out):
            acc += np.exp(-1j * w * diff) * rows[k][None, :]
        psi_inc[i0:i0 + block] = acc
    ii, jj = np.meshgrid(np.arange(n_points), np.arange(n_points),
                         indexing="ij")
    psi_inc = np.where(ii >= jj, psi_inc, psi_inc.T)

    y = smooth_transmitted_field(engine.couplings.single, times, mask)
    psi_coh = np.outer(y, y)
    return TwoPhotonField(cfg, times, psi_coh, psi_inc, mask or ModeMask())


@dataclass
class CutResult:
    """One-dimensional section through the smooth two-photon field."""

    kind: str
    parameter: float
    abscissa: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    psi_coherent: np.ndarray
    psi_incoherent: np.ndarray

    @property
    def psi_smooth(self):
        return self.psi_coherent + self.psi_incoherent

    def write_csv(self, stream, meta: dict):
        stream.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        stream.write("s,t1,t2,re_coh,im_coh,re_incoh,im_incoh\n")
        for k in range(self.abscissa.size):
            c = self.psi_coherent[k]
            s = self.psi_incoherent[k]
            stream.write("%.16e,%.16e,%.16e,%.16e,%.16e,%.16e,%.16e\n"
                         % (self.abscissa[k], self.t1[k], self.t2[k],
                            c.real, c.imag, s.real, s.imag))


def cut_field(cfg: ArrayConfig, kind: str, parameter: float, extent: float,
              n_points: int, mask: ModeMask = None) -> CutResult:
    """Section of the smooth field along a standard line.

    kinds: "diagonal" (t1 = t2 = s over (0, extent]), "antidiagonal"
    (t1 + t2 = parameter, s = t1 - t2 over [-extent, extent]) and "edge"
    (t2 = parameter fixed, t1 = s over (0, extent]).  Points where either
    time would be non-positive are dropped.
    """
    cfg.require_pulse_capable()
    if kind == "diagonal":
        s = np.linspace(extent / n_points, extent, n_points)
        t1 = t2 = s
    elif kind == "antidiagonal":
        s = np.linspace(-extent, extent, n_points)
        t1 = 0.5 * (parameter + s)
        t2 = 0.5 * (parameter - s)
        keep = (t1 > 0.0) & (t2 > 0.0)
        s, t1, t2 = s[keep], t1[keep], t2[keep]
    elif kind == "edge":
        if parameter <= 0.0:
            raise ValueError("edge cut needs a positive fixed time")
        s = np.linspace(extent / n_points, extent, n_points)
        t1 = s
        t2 = np.full_like(s, parameter)
    else:
        raise ValueError(f"unknown cut kind {kind!r}")
    if s.size == 0:
        raise ValueError("cut line misses the positive-time quadrant")

    engine = _PulseEngine(cfg, mask)
    psi_inc = engine.points(t1, t2)
    y = smooth_transmitted_field(engine.couplings.single, np.concatenate(
        [t1, t2]), mask)
    psi_coh = y[:t1.size] * y[t1.size:]
    return CutResult(kind, float(parameter), s, t1, t2, psi_coh, psi_inc)
