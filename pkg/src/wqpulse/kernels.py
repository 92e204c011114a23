"""Closed-form time kernels of the two-photon frequency integrals.

Each kernel is the double Fourier transform, onto the quadrant t1, t2 > 0,
of a product of simple poles in w1, w2 and in the half-sum (w1 + w2)/2:

    kernel = (2pi)^-2 iint dw1 dw2 e^{-i w1 t1 - i w2 t2}
             / ((omega_nu - w1)(omega_mu - w2)) * C((w1 + w2)/2)

with C(e) = (i e - 1)/(eps - e) for the single-pole kernel and
C(e) = 1/((eps_r - e)(eps_s - e)) for the double-pole one.  Contour
integration gives, with E0 = e^{-i omega_nu t1 - i omega_mu t2},
tau = min(t1, t2) and detunings d = eps - (omega_nu + omega_mu)/2:

    single: E0 * (i - (i eps - 1) * g(d, tau))
    double: E0 * (g(d_r, tau) - g(d_s, tau)) / (d_r - d_s)

where g(d, tau) = (1 - e^{-2 i d tau}) / d.  The min() appears because the
half-sum pole only contributes while both photons are still inside the
light cone of the later emission.

All g evaluations route through phi1(z) = (e^z - 1)/z with z = -2 i d tau,
which is finite at d = 0; the double-pole kernel additionally needs the
confluent limit g'(d) when the two detunings collide.  Both confluent
branches switch on series evaluation well before cancellation can eat
into the effective precision.
"""

import numpy as np

from .config import DELTA_CONFLUENT

__all__ = [
    "window_factor",
    "window_factor_diff",
    "window_factor_damped",
    "window_factor_diff_damped",
    "kernel_single_pole",
    "kernel_double_pole",
]


def _phi1(z):
    """(e^z - 1)/z, series below |z| = 1e-4 where expm1 is real-only."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 0.0, z)
    with np.errstate(invalid="ignore"):
        direct = np.where(small, 1.0, (np.exp(zs) - 1.0) / np.where(
            small, 1.0, z))
    series = 1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0 * (1.0 + z / 5.0)))
    return np.where(small, series, direct)


def window_factor(delta, tau):
    """g(delta, tau) = (1 - e^{-2 i delta tau}) / delta, finite at 0.

    Equal to 2 i tau at delta = 0; evaluated as 2 i tau phi1(-2 i delta tau)
    which is uniformly stable in both arguments.
    """
    delta = np.asarray(delta, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    return 2j * tau * _phi1(-2j * delta * tau)


def _window_factor_prime(delta, tau):
    """d g / d delta = ((1 - z) e^z - 1) / delta^2 with z = -2 i delta tau.

    2 tau^2 at delta = 0; the direct form loses its leading orders to
    cancellation for small |z|, hence the series branch.
    """
    delta = np.asarray(delta, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    z = -2j * delta * tau
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    ds = np.where(small, 1.0, delta)
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = ((1.0 - zs) * np.exp(zs) - 1.0) / ds**2
    series = 4.0 * tau**2 * (
        0.5 + z * (1.0 / 3.0 + z * (0.125 + z * (1.0 / 30.0 + z / 144.0))))
    return np.where(small, series, direct)


def window_factor_diff(delta_r, delta_s, tau):
    """Divided difference (g(delta_r) - g(delta_s)) / (delta_r - delta_s).

    Below |delta_r - delta_s| = DELTA_CONFLUENT the quotient switches to
    g'((delta_r + delta_s)/2), exact at coincidence and accurate to the
    square of the separation nearby.
    """
    delta_r = np.asarray(delta_r, dtype=complex)
    delta_s = np.asarray(delta_s, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    sep = delta_r - delta_s
    close = np.abs(sep) < DELTA_CONFLUENT
    sep_safe = np.where(close, 1.0, sep)
    with np.errstate(invalid="ignore"):
        far = (window_factor(delta_r, tau)
               - window_factor(delta_s, tau)) / sep_safe
    mid = _window_factor_prime(0.5 * (delta_r + delta_s), tau)
    return np.where(close, mid, far)


def window_factor_damped(delta, damp, tau):
    """e^{damp tau} g(delta, tau) with the damping folded in before exp.

    The bare g grows like e^{2 Im(delta) tau} whenever the half-sum pole
    outlives the outgoing pair, which overflows long before the physical
    product with the pair phase e^{damp tau} (damp = -i(omega_nu +
    omega_mu)) stops being tiny.  Forming

        e^{damp tau} g = (e^{damp tau} - e^{damp tau + z}) / delta,
        z = -2 i delta tau,

    keeps every exponent at non-positive real part (the second one equals
    -2 i eps tau).  Requires Re(damp * tau) <= 0.
    """
    delta = np.asarray(delta, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    base = np.exp(np.asarray(damp, dtype=complex) * tau)
    z = -2j * delta * tau
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    ds = np.where(small, 1.0, delta)
    with np.errstate(invalid="ignore"):
        direct = (base - np.exp(np.asarray(damp, dtype=complex) * tau + zs)) \
            / ds
    series = base * 2j * tau * (
        1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0 * (1.0 + z / 5.0))))
    return np.where(small, series, direct)


def _window_factor_prime_damped(delta, damp, tau):
    """e^{damp tau} g'(delta, tau), same overflow-safe arrangement."""
    delta = np.asarray(delta, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    dt = np.asarray(damp, dtype=complex) * tau
    base = np.exp(dt)
    z = -2j * delta * tau
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    ds = np.where(small, 1.0, delta)
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = ((1.0 - zs) * np.exp(dt + zs) - base) / ds**2
    series = base * 4.0 * tau**2 * (
        0.5 + z * (1.0 / 3.0 + z * (0.125 + z * (1.0 / 30.0 + z / 144.0))))
    return np.where(small, series, direct)


def window_factor_diff_damped(delta_r, delta_s, damp, tau):
    """Damped divided difference, confluent below DELTA_CONFLUENT."""
    delta_r = np.asarray(delta_r, dtype=complex)
    delta_s = np.asarray(delta_s, dtype=complex)
    sep = delta_r - delta_s
    close = np.abs(sep) < DELTA_CONFLUENT
    sep_safe = np.where(close, 1.0, sep)
    with np.errstate(invalid="ignore"):
        far = (window_factor_damped(delta_r, damp, tau)
               - window_factor_damped(delta_s, damp, tau)) / sep_safe
    mid = _window_factor_prime_damped(
        0.5 * (delta_r + delta_s), damp, tau)
    return np.where(close, mid, far)


def kernel_single_pole(omega_nu, omega_mu, eps, t1, t2):
    """Time kernel of one half-sum pole with the (i e - 1) numerator.

    Broadcasts over all arguments; t1, t2 are assumed positive (the theta
    functions are the caller's business, as is the delta-ridge term split
    off with the instantaneous pulse component).
    """
    omega_nu = np.asarray(omega_nu, dtype=complex)
    omega_mu = np.asarray(omega_mu, dtype=complex)
    eps = np.asarray(eps, dtype=complex)
    tau = np.minimum(np.asarray(t1, dtype=float), np.asarray(t2, dtype=float))
    e0 = np.exp(-1j * omega_nu * t1 - 1j * omega_mu * t2)
    delta = eps - 0.5 * (omega_nu + omega_mu)
    return e0 * (1j - (1j * eps - 1.0) * window_factor(delta, tau))


def kernel_double_pole(omega_nu, omega_mu, eps_r, eps_s, t1, t2):
    """Time kernel of two half-sum poles, stable at their confluence."""
    omega_nu = np.asarray(omega_nu, dtype=complex)
    omega_mu = np.asarray(omega_mu, dtype=complex)
    tau = np.minimum(np.asarray(t1, dtype=float), np.asarray(t2, dtype=float))
    e0 = np.exp(-1j * omega_nu * t1 - 1j * omega_mu * t2)
    half = 0.5 * (omega_nu + omega_mu)
    return e0 * window_factor_diff(
        np.asarray(eps_r, dtype=complex) - half,
        np.asarray(eps_s, dtype=complex) - half,
        tau,
    )
