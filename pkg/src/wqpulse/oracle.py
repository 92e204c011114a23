"""Quadrature oracles for the analytic pole-expansion machinery.

Everything here evaluates defining frequency integrals numerically, sharing
only the Hamiltonian builders and dense linear solves with the analytic
modules, so that residue algebra, kernel closed forms and the two-photon
reconstruction can be validated against an independent route.

Building blocks
---------------
* Composite Gauss-Legendre panels with dyadic refinement around every pole
  projection onto the real axis; the local panel scale is |Im| of the pole,
  the global cap is set by the fastest oscillation e^{-i w t} to resolve.
* Algebraic tails |w| > W of non-oscillatory ~1/w^2 integrands handled
  exactly by the substitution u = 1/w (smooth through u = 0).
* Oscillatory tails handled by fitting the integrand to sum_k c_k / w^k just
  outside the window and integrating each power against the phase factor
  analytically: int_W^inf w^-k e^{-iwt} dw = W^(1-k) E_k(iWt).

Every operation returns (value, error_estimate); estimates combine the
order-8 vs order-16 Gauss difference with tail-fit residuals.
"""

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import exp1

from .config import ArrayConfig
from .errors import QuadratureNotConverged
from .single import _phase_vector, build_single_hamiltonian

__all__ = [
    "sigma_numeric",
    "coupling_pair_integral_numeric",
    "s_tilde_numeric",
    "kernel_integral_numeric",
    "PsiIncoherentOracle",
    "psi_incoherent_numeric",
]

_GL_CACHE = {}


def _gl(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = leggauss(order)
    return _GL_CACHE[order]


def _panel_nodes(edges, order):
    """Gauss-Legendre nodes and weights on consecutive panels of `edges`."""
    x, w = _gl(order)
    lo = edges[:-1]
    half = 0.5 * (edges[1:] - lo)
    nodes = (lo + half)[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def _refined_edges(lo, hi, centers, widths, max_width):
    """Panel edges on [lo, hi]: uniform cover at max_width plus dyadic
    refinement around each center at scales width * (1, 2, 4, 8)."""
    n_base = max(2, int(np.ceil((hi - lo) / max_width)))
    edges = list(np.linspace(lo, hi, n_base + 1))
    min_w = max_width
    for c, h in zip(centers, widths):
        h = max(float(h), 1e-12)
        min_w = min(min_w, h)
        if lo < c < hi:
            edges.append(c)
        for scale in (1.0, 2.0, 4.0, 8.0):
            for s in (-1.0, 1.0):
                e = c + s * scale * h
                if lo < e < hi:
                    edges.append(e)
    edges = np.array(sorted(edges))
    keep = [lo]
    min_gap = max(min_w * 0.25, (hi - lo) * 1e-12)
    for e in edges[1:]:
        if e - keep[-1] > min_gap:
            keep.append(e)
    keep[-1] = hi
    return np.array(keep)


def _split_edges(edges):
    mid = 0.5 * (edges[:-1] + edges[1:])
    return np.sort(np.concatenate([edges, mid]))


def _integrate_vector(f, edges):
    """Integrate a vectorized integrand f(nodes)->(K, ...) over the panels.

    Returns (order-16 value, max-norm of the order-16 vs order-8 difference).
    """
    vals = []
    for order in (8, 16):
        nodes, weights = _panel_nodes(edges, order)
        vals.append(np.tensordot(weights, f(nodes), axes=(0, 0)))
    return vals[1], float(np.max(np.abs(vals[1] - vals[0])))


def _integrate_tails_algebraic(f, window):
    """Both |w| > window tails of a ~1/w^2 integrand via u = 1/w."""
    total = None
    err = 0.0

    def make(sign):
        def g(u):
            vals = f(sign / u)
            jac = 1.0 / u**2
            return vals * jac.reshape(jac.shape + (1,) * (vals.ndim - 1))
        return g

    edges = np.array([1e-14, 0.5 / window, 1.0 / window])
    for sign in (1.0, -1.0):
        val, e = _integrate_vector(make(sign), edges)
        total = val if total is None else total + val
        err += e
    return total, err


def _expn_vec(kmax, z):
    """E_k(z) for k = 1..kmax on a complex array; returns (kmax,) + z.shape.

    Upward recurrence E_{k+1} = (e^{-z} - z E_k)/k from scipy's E_1 at
    moderate |z|; the recurrence cancels catastrophically for large |z|, so
    there each order uses its asymptotic series (e^{-z}/z) sum_j (-1)^j
    (k)_j / z^j truncated well past machine precision.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty((kmax,) + z.shape, dtype=complex)
    zero = z == 0.0
    if zero.any():
        # E_1 diverges at 0; E_k(0) = 1/(k-1) for k >= 2
        out[0][zero] = np.inf
        for k in range(2, kmax + 1):
            out[k - 1][zero] = 1.0 / (k - 1)
        z = np.where(zero, 1.0, z)
    small = (np.abs(z) <= 35.0) & ~zero
    large = ~small & ~zero
    zs = z[small]
    e = exp1(zs)
    ez = np.exp(-zs)
    out[0][small] = e
    for k in range(1, kmax):
        e = (ez - zs * e) / k
        out[k][small] = e
    zl = z[large]
    if zl.size:
        ezl = np.exp(-zl) / zl
        for k in range(1, kmax + 1):
            s = np.ones_like(zl)
            term = np.ones_like(zl)
            for j in range(1, 25):
                term = term * (-(k + j - 1) / zl)
                s = s + term
            out[k - 1][large] = ezl * s
    return out


# Fixed sample layout for the power-law tail fits: with sample points
# x_j = W * f_j and f(x) ~ sum_k b_k (x/W)^-k, the design matrix depends
# only on the factors, so one pseudo-inverse serves every window size.
_TAIL_FACTORS = np.array([1.0, 1.25, 1.6, 2.0, 2.6])
_TAIL_ORDERS = (1, 2, 3)
_TAIL_DESIGN = np.stack(
    [_TAIL_FACTORS ** (-float(k)) for k in _TAIL_ORDERS], axis=1
)
_TAIL_PINV = np.linalg.pinv(_TAIL_DESIGN)


def _tail_fit(samples):
    """Coefficients b_k of f ~ sum_k b_k (x/W)^-k from samples at W*factors.

    The sample axis is last; returns (coeffs, max fit residual) with the
    coefficient axis last.
    """
    coef = samples @ _TAIL_PINV.T
    resid = samples - coef @ _TAIL_DESIGN.T
    return coef, float(np.max(np.abs(resid))) if resid.size else 0.0


def _tail_value(coef, window, t, side):
    """One oscillatory tail from fitted coefficients.

    Right side (+1): int_W^inf f(w) e^{-iwt} dw with f = sum_k b_k (w/W)^-k
    equals W sum_k b_k E_k(+iWt).  Left side (-1): substituting w -> -x and
    fitting f(-x) = sum_k b_k (x/W)^-k gives W sum_k b_k E_k(-iWt).
    """
    ek = _expn_vec(len(_TAIL_ORDERS), np.full(1, 1j * side * window * t,
                                              dtype=complex))[:, 0]
    return window * np.tensordot(coef, ek, axes=(coef.ndim - 1, 0))


def _solve_green(cfg, omega_flat):
    """G(w) on a flat frequency array via stacked dense solves."""
    h = build_single_hamiltonian(cfg)
    n = cfg.n_atoms
    eye = np.eye(n, dtype=complex)
    out = np.empty((omega_flat.size, n, n), dtype=complex)
    chunk = 200_000
    for k0 in range(0, omega_flat.size, chunk):
        w = omega_flat[k0:k0 + chunk]
        a = w[:, None, None] * eye - h
        out[k0:k0 + chunk] = np.linalg.solve(a, np.broadcast_to(eye, a.shape))
    return out


def _single_poles(cfg):
    from .single import _eigenvalues
    return _eigenvalues(cfg)


# ---------------------------------------------------------------------------
# frequency-domain oracles
# ---------------------------------------------------------------------------

def sigma_numeric(cfg: ArrayConfig, eps, *, window=None, target=1e-8,
                  max_refine=4):
    """Pair self-energy by direct quadrature of int dw/2pi G(w) o G(2eps - w)
    (elementwise product).

    The real-axis contour agrees with the analytic continuation used by the
    pole expansion only while the poles of the second factor stay strictly
    above the axis, i.e. Im(eps) > max_nu Im(omega_nu) / 2; violating that
    is a caller error, not a quadrature failure.

    Returns ((N, N) complex ndarray, float error estimate).
    """
    eps = complex(eps)
    poles = _single_poles(cfg)
    if 2.0 * eps.imag <= poles.imag.max():
        raise ValueError(
            "sigma_numeric requires Im(eps) > max Im(omega)/2; below that "
            "the real-axis integral is a different branch"
        )
    w_window = float(window) if window is not None else 50.0 * cfg.n_atoms
    mirrored = 2.0 * eps - poles
    centers = np.concatenate([poles.real, mirrored.real])
    widths = np.concatenate([np.abs(poles.imag), np.abs(mirrored.imag)])

    def integrand(w):
        g1 = _solve_green(cfg, w.astype(complex))
        g2 = _solve_green(cfg, 2.0 * eps - w)
        return g1 * g2 / (2.0 * np.pi)

    edges = _refined_edges(-w_window, w_window, centers, widths, w_window / 8.0)
    err = np.inf
    for _ in range(max_refine + 1):
        val, err = _integrate_vector(integrand, edges)
        tail, terr = _integrate_tails_algebraic(integrand, w_window)
        if err + terr < target:
            return val + tail, err + terr
        edges = _split_edges(edges)
    raise QuadratureNotConverged(
        f"sigma_numeric stalled at {err + terr:.2e} (target {target:g})",
        achieved=err + terr, target=target,
    )


def coupling_pair_integral_numeric(cfg: ArrayConfig, e_total, *, window=None,
                                   target=1e-7, max_refine=4):
    """Inner frequency integral int dw/2pi s_j^+(w) s_j^+(E - w) per atom j.

    Same contour precondition as `sigma_numeric` with eps = E/2.
    Returns ((N,) complex ndarray, float error estimate).
    """
    e_total = complex(e_total)
    poles = _single_poles(cfg)
    if e_total.imag <= poles.imag.max():
        raise ValueError(
            "coupling_pair_integral_numeric: Im(E) too negative for the "
            "real-axis contour"
        )
    w_window = float(window) if window is not None else 50.0 * cfg.n_atoms
    mirrored = e_total - poles
    centers = np.concatenate([poles.real, mirrored.real])
    widths = np.concatenate([np.abs(poles.imag), np.abs(mirrored.imag)])
    phase = _phase_vector(cfg, +1)

    def integrand(w):
        s1 = _solve_green(cfg, w.astype(complex)) @ phase
        s2 = _solve_green(cfg, e_total - w) @ phase
        return s1 * s2 / (2.0 * np.pi)

    edges = _refined_edges(-w_window, w_window, centers, widths, w_window / 8.0)
    err = np.inf
    for _ in range(max_refine + 1):
        val, err = _integrate_vector(integrand, edges)
        tail, terr = _integrate_tails_algebraic(integrand, w_window)
        if err + terr < target:
            return val + tail, err + terr
        edges = _split_edges(edges)
    raise QuadratureNotConverged(
        f"coupling_pair_integral_numeric stalled at {err + terr:.2e}",
        achieved=err + terr, target=target,
    )


def s_tilde_numeric(cfg: ArrayConfig, w1, w2, *, q_source="schur",
                    target=1e-6):
    """Frequency-domain two-photon amplitude with a numeric inner integral:

        S(w1, w2) = 2 t(w1) t(w2)
                    + 2 sum_ij s_i^-(w1) s_i^-(w2) Q_ij(eps) f_j(w1 + w2),

    eps = (w1 + w2)/2.  `q_source` picks Q from the two-excitation module
    ("schur") or from inverting the quadrature self-energy ("quadrature")
    for a fully independent route.  Returns (value, error estimate).
    """
    from .double import q_matrix
    from .single import coupling_amplitude, transmission

    w1 = float(w1)
    w2 = float(w2)
    eps = 0.5 * (w1 + w2)
    f_val, f_err = coupling_pair_integral_numeric(
        cfg, w1 + w2, target=max(target * 1e-2, 1e-9))
    if q_source == "schur":
        q = q_matrix(cfg, eps)
        q_err = 0.0
    elif q_source == "quadrature":
        sig, sig_err = sigma_numeric(cfg, eps, target=max(target * 1e-2, 1e-9))
        q = np.linalg.inv(sig)
        q_err = sig_err * np.linalg.norm(q, 2) ** 2
    else:
        raise ValueError(f"unknown q_source {q_source!r}")
    _, s1m = coupling_amplitude(cfg, w1)
    _, s2m = coupling_amplitude(cfg, w2)
    t1 = transmission(cfg, w1)
    t2 = transmission(cfg, w2)
    value = 2.0 * t1 * t2 + 2.0 * np.einsum("i,j,ij,j->", s1m, s2m, q, f_val)
    scale = float(np.abs(s1m).max() * np.abs(s2m).max())
    err = 2.0 * scale * (np.abs(q).sum() * f_err + q_err * np.abs(f_val).max())
    return complex(value), float(err)


# ---------------------------------------------------------------------------
# nested double Fourier transform
# ---------------------------------------------------------------------------

# Irregular spacing keeps the outer tail-fit columns e^{i w t2} w^-k and
# w^-k linearly independent for every t2 (regular spacing aliases whenever
# the step times t2 hits a multiple of 2 pi).
_OUT_FACTORS = np.array(
    [1.0, 1.033, 1.109, 1.236, 1.422, 1.681, 2.027, 2.484])


class _Transform1D:
    """Cached one-axis transform int dw f_c(w) e^{-iwt} for t >= ~t_min.

    Real-axis panels refined around the pole projections plus exact
    vertical legs into the lower half-plane at both window edges; the legs
    need f at complex arguments.
    """

    def __init__(self, fn, poles, window, t_max, t_min):
        w = float(window)
        cap = 10.0 * np.pi / max(float(t_max), 1.0)
        poles = np.atleast_1d(np.asarray(poles, dtype=complex))
        edges = _refined_edges(-w, w, poles.real, np.abs(poles.imag), cap)
        depth = 40.0 / float(t_min)
        leg_edges = [0.0, 0.5]
        while leg_edges[-1] < depth:
            leg_edges.append(min(leg_edges[-1] * 2.0, depth))
        leg_edges = np.array(leg_edges)
        self._cache = []
        for order in (8, 16):
            nodes, wts = _panel_nodes(edges, order)
            s_nodes, s_wts = _panel_nodes(leg_edges, order)
            all_nodes = np.concatenate(
                [nodes.astype(complex), w - 1j * s_nodes, -w - 1j * s_nodes])
            all_wts = np.concatenate(
                [wts.astype(complex), -1j * s_wts, 1j * s_wts])
            self._cache.append((all_nodes, fn(all_nodes) * all_wts[:, None]))

    def __call__(self, t):
        """Returns ((C,) transform values, (C,) order-8 vs 16 differences)."""
        vals = [np.exp(-1j * t * nodes).dot(v)
                for nodes, v in self._cache]
        return vals[1], np.abs(vals[1] - vals[0])


class _Fourier2D:
    """Cached transform (2pi)^-2 iint dw1 dw2 e^{-i w1 t1 - i w2 t2} *
    sum_c A_c(w1) B_c(w2) C_c((w1 + w2)/2) for t1, t2 > 0.

    The constant limit C_inf of each C component is split off exactly,

        C = C_inf + C~,

    and its contribution evaluated as a product of two cached one-axis
    transforms; only the decaying remainder C~ goes through the nested 2D
    machinery.  That keeps the outer integrand O(1/w1^2) so its tail fit
    needs no 1/w1 term.

    The w2 integral is innermost.  Its window is widened per outer node so
    the half-sum argument of C~ always sweeps through the full pole region
    before the tail treatment takes over.  Everything t-independent
    (integrand values times quadrature weights, grids, leg values) is
    cached at construction; one time point costs two phase contractions
    plus a handful of exponential integrals.

    Inner tails are exact in the default ``tail_mode="legs"``: beyond the
    window the w2 contour turns down vertical legs w2 = edge - i s, where
    e^{-i w2 t2} decays like e^{-s t2} and the widened windows guarantee a
    pole-free quarter-plane.  Legs need the factors at complex arguments;
    ``tail_mode="fit"`` falls back to power-law extrapolation for factors
    defined only on the real axis.

    The outer tail (|w1| > W) cannot use legs: continuing the inner
    integral to complex w1 drags C~ poles across the real w2 axis.  It is
    instead fitted per evaluation from sixteen dedicated sample rows with
    a two-family model c_k w1^-k + e^{i w1 t2} d_k w1^-k; the oscillatory
    family captures the ridge the C~ poles leave along w1 + w2 = const,
    whose phase rate is known to be t2 exactly.
    """

    def __init__(self, a_fn, b_fn, c_fn, a_poles, b_poles, c_poles,
                 window, t_max, tail_mode="legs", t_min=0.15, c_inf=None):
        self.window = w = float(window)
        self.tail_mode = tail_mode
        self.t_min = float(t_min)
        # vertical legs truncated where e^{-s t} is negligible for t >= t_min
        self._leg_depth = 40.0 / self.t_min
        osc_cap = 10.0 * np.pi / max(float(t_max), 1.0)
        a_poles = np.atleast_1d(np.asarray(a_poles, dtype=complex))
        b_poles = np.atleast_1d(np.asarray(b_poles, dtype=complex))
        c_poles = np.atleast_1d(np.asarray(c_poles, dtype=complex))
        self._b_poles = b_poles
        self._c_poles = c_poles
        self._osc_cap = osc_cap

        if c_inf is not None:
            c_inf = np.atleast_1d(np.asarray(c_inf, dtype=complex))
            base_c = c_fn
            def c_fn(e, _f=base_c, _ci=c_inf):
                return _f(e) - _ci[None, :]
            self._prod_a = _Transform1D(a_fn, a_poles, w, t_max, t_min)
            self._prod_b = _Transform1D(b_fn, b_poles, w, t_max, t_min)
        self._c_inf = c_inf

        # reach of the C~ structure on the half-sum axis
        self._c_span = float(
            np.max(np.abs(c_poles.real) + 8.0 * np.abs(c_poles.imag)) + 10.0
        )

        images = (2.0 * c_poles[:, None] - b_poles[None, :]).ravel()
        centers = np.concatenate([a_poles.real, images.real])
        widths = np.concatenate(
            [np.abs(a_poles.imag), np.abs(images.imag) + 1e-3])
        outer_edges = _refined_edges(-w, w, centers, widths, osc_cap)

        self._o8, self._ow8 = _panel_nodes(outer_edges, 8)
        self._o16, self._ow16 = _panel_nodes(outer_edges, 16)
        self._osamp = np.concatenate([w * _OUT_FACTORS, -w * _OUT_FACTORS])

        self._rows8 = self._build_rows(self._o8, 8, a_fn, b_fn, c_fn)
        self._rows16 = self._build_rows(self._o16, 16, a_fn, b_fn, c_fn)
        self._rows_samp = self._build_rows(self._osamp, 16, a_fn, b_fn, c_fn)

    # -- construction -------------------------------------------------------

    def _row_edges(self, w1):
        w = self.window
        lo = min(-w, -2.0 * self._c_span - w1)
        hi = max(w, 2.0 * self._c_span - w1)
        centers = np.concatenate(
            [self._b_poles.real, (2.0 * self._c_poles - w1).real])
        widths = np.concatenate(
            [np.abs(self._b_poles.imag), 2.0 * np.abs(self._c_poles.imag)])
        return _refined_edges(lo, hi, centers, widths, self._osc_cap), lo, hi

    def _leg_grid(self, order):
        """Depth nodes for one vertical leg, geometric panels from the real
        axis down to the truncation depth."""
        depth = self._leg_depth
        edges = [0.0, 0.5]
        while edges[-1] < depth:
            edges.append(min(edges[-1] * 2.0, depth))
        return _panel_nodes(np.array(edges), order)

    def _build_rows(self, w1_nodes, order, a_fn, b_fn, c_fn):
        """Cache inner grids, weighted integrand values and tail data for a
        group of outer rows; grids are padded rectangular for vector eval."""
        n_rows = w1_nodes.size
        a_vals = a_fn(w1_nodes)  # (rows, C)
        packed = [
            _panel_nodes(edges, order) + (lo, hi)
            for edges, lo, hi in (self._row_edges(w1) for w1 in w1_nodes)
        ]
        legs = self.tail_mode == "legs"
        s_nodes, s_wts = self._leg_grid(order) if legs else (None, None)
        n_leg = s_nodes.size if legs else 0
        width = max(p[0].size for p in packed) + 2 * n_leg
        nodes = np.zeros((n_rows, width), dtype=complex if legs else float)
        vals = np.zeros((n_rows, width), dtype=complex)
        lo_arr = np.array([p[2] for p in packed])
        hi_arr = np.array([p[3] for p in packed])
        n_tail = len(_TAIL_ORDERS)
        tail_r = np.zeros((n_rows, n_tail), dtype=complex)
        tail_l = np.zeros((n_rows, n_tail), dtype=complex)
        tail_resid = 0.0

        block = max(1, 200_000 // width)
        for k0 in range(0, n_rows, block):
            k1 = min(k0 + block, n_rows)
            sub_nodes = np.zeros((k1 - k0, width), dtype=nodes.dtype)
            sub_wts = np.zeros((k1 - k0, width), dtype=complex)
            for k in range(k0, k1):
                g_nodes, g_wts, lo, hi = packed[k]
                m = g_nodes.size
                sub_nodes[k - k0, :m] = g_nodes
                # padded positions sit at the window edge, far from poles
                sub_nodes[k - k0, m:] = hi
                sub_wts[k - k0, :m] = g_wts
                if legs:
                    # int_hi^inf -> -i int f(hi - is) ds,
                    # int_-inf^lo -> +i int f(lo - is) ds
                    sub_nodes[k - k0, m:m + n_leg] = hi - 1j * s_nodes
                    sub_wts[k - k0, m:m + n_leg] = -1j * s_wts
                    sub_nodes[k - k0, m + n_leg:m + 2 * n_leg] = (
                        lo - 1j * s_nodes)
                    sub_wts[k - k0, m + n_leg:m + 2 * n_leg] = 1j * s_wts
            w1_blk = w1_nodes[k0:k1, None]
            b_blk = b_fn(sub_nodes.ravel())
            ncomp = b_blk.shape[-1]
            b_blk = b_blk.reshape(k1 - k0, width, ncomp)
            c_blk = c_fn((0.5 * (w1_blk + sub_nodes)).ravel()).reshape(
                k1 - k0, width, ncomp)
            vals[k0:k1] = np.einsum(
                "rc,rwc,rwc,rw->rw", a_vals[k0:k1], b_blk, c_blk, sub_wts)
            nodes[k0:k1] = sub_nodes

            if not legs:
                # power-law tail fits just outside each row's inner window
                for side, store in ((1.0, tail_r), (-1.0, tail_l)):
                    edge = hi_arr[k0:k1] if side > 0 else -lo_arr[k0:k1]
                    x = side * edge[:, None] * _TAIL_FACTORS[None, :]
                    bs = b_fn(x.ravel()).reshape(
                        k1 - k0, _TAIL_FACTORS.size, ncomp)
                    cs = c_fn((0.5 * (w1_blk + x)).ravel()).reshape(
                        k1 - k0, _TAIL_FACTORS.size, ncomp)
                    h = np.einsum("rc,rsc,rsc->rs", a_vals[k0:k1], bs, cs)
                    coef, resid = _tail_fit(h)
                    store[k0:k1] = coef
                    tail_resid = max(tail_resid, resid)

        return {
            "w1": w1_nodes, "nodes": nodes, "vals": vals,
            "lo": -lo_arr, "hi": hi_arr,
            "tail_r": tail_r, "tail_l": tail_l, "tail_resid": tail_resid,
        }

    # -- evaluation ---------------------------------------------------------

    def _inner(self, rows, t2):
        """Complete inner integrals of one row group at time t2."""
        main = np.einsum(
            "rw,rw->r", rows["vals"], np.exp(-1j * t2 * rows["nodes"]))
        ek_r = _expn_vec(len(_TAIL_ORDERS), 1j * rows["hi"] * t2)
        ek_l = _expn_vec(len(_TAIL_ORDERS), -1j * rows["lo"] * t2)
        tails = (
            rows["hi"] * np.einsum("rk,kr->r", rows["tail_r"], ek_r)
            + rows["lo"] * np.einsum("rk,kr->r", rows["tail_l"], ek_l)
        )
        return main + tails

    def _outer_tail(self, isamp, t1, t2):
        """Fitted |w1| > W contribution at one time point.

        Per side, the sample-row inner integrals are fitted to
        c_k x^-k + e^{i side x t2} d_k x^-k (x = |w1|) and each basis
        function is transformed in closed form; the oscillatory family's
        phase cancels part of e^{-i w1 t1}, giving E_k(i side W (t1 - t2)).
        """
        w = self.window
        x = w * _OUT_FACTORS
        nf = _OUT_FACTORS.size
        tail = 0.0 + 0.0j
        res_fit = 0.0
        for side, block in ((1.0, isamp[:nf]), (-1.0, isamp[nf:])):
            osc = np.exp(1j * side * x * t2)
            design = np.stack(
                [x**-2.0, x**-3.0, x**-4.0, osc * x**-2.0, osc * x**-3.0],
                axis=1)
            coef, *_ = np.linalg.lstsq(design, block, rcond=None)
            res_fit = max(res_fit, float(np.max(np.abs(block - design @ coef))))
            ek_p = _expn_vec(4, np.full(1, 1j * side * w * t1))[:, 0]
            ek_o = _expn_vec(3, np.full(1, 1j * side * w * (t1 - t2)))[:, 0]
            tail += (coef[0] * ek_p[1] / w + coef[1] * ek_p[2] / w**2
                     + coef[2] * ek_p[3] / w**3
                     + coef[3] * ek_o[1] / w + coef[4] * ek_o[2] / w**2)
        return tail, res_fit

    def evaluate(self, t1, t2):
        """Transform value at one time point; returns (value, error est)."""
        t1 = float(t1)
        t2 = float(t2)
        if t1 <= 0.0 or t2 <= 0.0:
            raise ValueError("the cached transform is defined for t1, t2 > 0")
        w = self.window

        i16 = self._inner(self._rows16, t2)
        i8 = self._inner(self._rows8, t2)
        isamp = self._inner(self._rows_samp, t2)

        main16 = np.einsum(
            "r,r,r->", self._ow16, np.exp(-1j * t1 * self._o16), i16)
        main8 = np.einsum(
            "r,r,r->", self._ow8, np.exp(-1j * t1 * self._o8), i8)
        tail, res_fit = self._outer_tail(isamp, t1, t2)

        prod = 0.0 + 0.0j
        prod_err = 0.0
        if self._c_inf is not None:
            ta, da = self._prod_a(t1)
            tb, db = self._prod_b(t2)
            prod = np.sum(self._c_inf * ta * tb)
            prod_err = float(
                np.sum(np.abs(self._c_inf) * (da * np.abs(tb)
                                              + np.abs(ta) * db)))

        pref = 1.0 / (2.0 * np.pi) ** 2
        value = pref * (main16 + tail + prod)
        # the outer fit residual integrates against ~1/w^2 over the tails;
        # inner fit residuals (fit mode only) pass through the outer weights
        osc = float(np.abs(
            _expn_vec(1, np.full(1, 1j * w * min(t1, t2), dtype=complex))[0, 0]))
        resid_in = self._rows16["tail_resid"]
        err = pref * (
            abs(main16 - main8)
            + 6.0 * res_fit / w
            + 3.0 * w * osc * resid_in * (1.0 + float(np.abs(self._ow16).sum()))
            + prod_err
        )
        # vertical-leg truncation, felt only below the design t_min
        err += abs(value) * np.exp(-self._leg_depth * min(t1, t2))
        return complex(value), float(err)


# ---------------------------------------------------------------------------
# time-domain oracles
# ---------------------------------------------------------------------------

def kernel_integral_numeric(omega_nu, omega_mu, pole, t1, t2, *,
                            second_pole=None, window=40.0):
    """Direct quadrature of the defining integral behind the time kernels:

        (2pi)^-2 iint dw1 dw2 e^{-i w1 t1 - i w2 t2}
                 / ((omega_nu - w1)(omega_mu - w2)) * C((w1 + w2)/2)

    with C(e) = (i e - 1)/(pole - e) when `second_pole` is None and
    C(e) = 1/((pole - e)(second_pole - e)) otherwise.  All pole arguments
    must lie in the lower half-plane.  Returns (value, error estimate).
    """
    omega_nu = complex(omega_nu)
    omega_mu = complex(omega_mu)
    pole = complex(pole)
    if second_pole is None:
        c_poles = np.array([pole])
        c_inf = np.array([-1j])  # (ie - 1)/(pole - e) -> -i

        def c_fn(e):
            return ((1j * e - 1.0) / (pole - e))[:, None]
    else:
        second = complex(second_pole)
        c_poles = np.array([pole, second])
        c_inf = None

        def c_fn(e):
            return (1.0 / ((pole - e) * (second - e)))[:, None]

    def a_fn(w):
        return (1.0 / (omega_nu - w))[:, None]

    def b_fn(w):
        return (1.0 / (omega_mu - w))[:, None]

    engine = _Fourier2D(
        a_fn, b_fn, c_fn,
        a_poles=np.array([omega_nu]), b_poles=np.array([omega_mu]),
        c_poles=c_poles, window=window, t_max=max(t1, t2), c_inf=c_inf,
    )
    return engine.evaluate(t1, t2)


class _UQuadInterp:
    """Pair-response amplitude u_i(eps) on the real axis from quadrature
    alone, served through an interpolant.

    At each knot the inner pair integral and the self-energy are evaluated
    numerically and combined as u = Sigma^{-1} f(2 eps); a cubic spline then
    serves the millions of half-sum evaluations the transform engine needs.
    Knots follow the same pole-projected refinement as the quadrature
    panels, plus a logarithmic extension where u is slowly varying.  Built
    lazily to cover whatever range gets requested.
    """

    def __init__(self, cfg, c_poles, target=1e-8):
        self.cfg = cfg
        self.c_poles = np.asarray(c_poles, dtype=complex)
        self.target = target
        self._spline = None
        self._range = (np.inf, -np.inf)

    def _build(self, lo, hi):
        from scipy.interpolate import CubicSpline

        span = max(
            float(np.abs(self.c_poles.real).max()
                  + 8.0 * np.abs(self.c_poles.imag).max()) + 5.0,
            10.0,
        )
        core_lo, core_hi = max(lo, -span), min(hi, span)
        edges = _refined_edges(
            core_lo, core_hi, self.c_poles.real,
            np.abs(self.c_poles.imag), (core_hi - core_lo) / 24.0)
        knots = [np.linspace(a, b, 10, endpoint=False)
                 for a, b in zip(edges[:-1], edges[1:])]
        knots = np.concatenate(knots + [np.array([core_hi])])
        if hi > span:
            knots = np.concatenate([knots, np.geomspace(span * 1.02, hi, 48)])
        if lo < -span:
            knots = np.concatenate(
                [-np.geomspace(span * 1.02, -lo, 48)[::-1], knots])
        knots = np.unique(knots)
        vals = np.empty((knots.size, self.cfg.n_atoms), dtype=complex)
        # the integrand of f(2e) has a pole cluster near w = 2e; the
        # quadrature window must reach it for far-out knots
        far_window = 50.0 * self.cfg.n_atoms + \
            2.5 * float(np.abs(knots).max())
        for k, e in enumerate(knots):
            f, _ = coupling_pair_integral_numeric(
                self.cfg, 2.0 * e, window=far_window,
                target=self.target * 10.0)
            sig, _ = sigma_numeric(self.cfg, e, window=far_window,
                                   target=self.target)
            vals[k] = np.linalg.solve(sig, f)
        self._spline = CubicSpline(knots, vals, axis=0)
        self._range = (float(knots[0]), float(knots[-1]))

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=float)
        lo, hi = float(eps.min()), float(eps.max())
        if self._spline is None or lo < self._range[0] or hi > self._range[1]:
            pad = 0.1 * (hi - lo) + 1.0
            self._build(min(lo - pad, self._range[0]),
                        max(hi + pad, self._range[1]))
        return self._spline(eps)

    def limit(self):
        """Large-|eps| limit of u, averaged over both far ends."""
        far = 500.0
        vals = []
        for e in (far, -far):
            f, _ = coupling_pair_integral_numeric(
                self.cfg, 2.0 * e, window=4.0 * far, target=1e-6)
            sig, _ = sigma_numeric(
                self.cfg, e, window=4.0 * far, target=1e-6)
            vals.append(np.linalg.solve(sig, f))
        return 0.5 * (vals[0] + vals[1])


class PsiIncoherentOracle:
    """Incoherent two-photon wavefunction by nested frequency quadrature.

    Evaluates (2pi)^-2 iint dw1 dw2 e^{-i w1 t1 - i w2 t2}
    sum_i s_i^-(w1) s_i^-(w2) u_i((w1 + w2)/2) with the emission amplitudes
    from dense solves and u from a selectable source:

    * ``u_source="residue"`` (default): the pole-expansion amplitude from
      the pulse module.  The double transform, not u, is under test then;
      the residue u is validated separately against Sigma^{-1} quadrature.
    * ``u_source="quadrature"``: u = Sigma^{-1} f with both factors numeric
      (see `_UQuadInterp`), sharing nothing with the residue algebra.

    Construction caches all t-independent tensors; `evaluate` is then cheap
    enough to scan dozens of time points.
    """

    def __init__(self, cfg: ArrayConfig, *, u_source="residue", window=None,
                 t_max=6.0):
        from .pulse import incoherent_couplings

        self.cfg = cfg
        self.window = (float(window) if window is not None
                       else 30.0 * cfg.n_atoms)
        couplings = incoherent_couplings(cfg)
        c_poles = couplings.u_poles
        if u_source == "residue":
            c_fn = couplings.u_amplitude
            c_inf = couplings.u_limit
            tail_mode = "legs"
        elif u_source == "quadrature":
            # the spline only covers the real axis, so no vertical legs
            c_fn = _UQuadInterp(cfg, c_poles)
            c_inf = c_fn.limit()
            tail_mode = "fit"
        else:
            raise ValueError(f"unknown u_source {u_source!r}")

        phase_minus = _phase_vector(cfg, -1)

        def s_minus(w):
            return _solve_green(cfg, w.astype(complex)) @ phase_minus

        poles = _single_poles(cfg)
        self._engine = _Fourier2D(
            s_minus, s_minus, c_fn,
            a_poles=poles, b_poles=poles, c_poles=c_poles,
            window=self.window, t_max=t_max, tail_mode=tail_mode,
            c_inf=c_inf,
        )

    def evaluate(self, t1, t2):
        """psi_incoherent at one (t1, t2); returns (value, error estimate)."""
        return self._engine.evaluate(t1, t2)


def psi_incoherent_numeric(cfg: ArrayConfig, t1, t2, **kwargs):
    """One-shot wrapper around `PsiIncoherentOracle` for a single point."""
    t_max = max(float(t1), float(t2)) + 0.5
    return PsiIncoherentOracle(cfg, t_max=t_max, **kwargs).evaluate(t1, t2)
