"""Large-frequency tails of spectra of pulses that switch on at t = 0.

A pulse ``g`` vanishing for ``t < 0`` with one-sided derivatives
``d_k = g^(k)(0+)`` has the asymptotic spectrum (repeated integration by parts
of ``(2 pi)^-1/2 int_0^inf g(t) exp(i w t) dt``)::

    G(w) ~ (2 pi)^-1/2 sum_k (-1)^(k+1) d_k (i w)^-(k+1)

valid for both signs of ``w``.  Beyond the edge of a finite frequency grid the
spectrum is replaced by this series, which turns every tail integral the
library needs into closed form:

* quadratic moments ``int_a^inf u*(w) v(w) dw`` of two series,
* one-sided field integrals ``int_a^inf sqrt(w) u(w) exp(-i w t) dw``,
  which reduce to upper incomplete gamma functions on the imaginary axis.
"""

import math

import numpy as np
from scipy.special import gamma as gamma_fn

MAX_TERMS = 16
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def gaussian_jet(omega0, sigma, tau, normalization, n_terms=MAX_TERMS):
    """Derivatives at 0+ of ``exp(-(t - tau)^2 / 2 sigma^2 - i omega0 t) / normalization``.

    With ``g = exp(a t^2 + b t + c)`` one has ``g' = (2 a t + b) g`` and hence
    ``g^(k+1)(0) = b g^(k)(0) + 2 a k g^(k-1)(0)``.
    """
    a = -0.5 / sigma**2
    b = tau / sigma**2 - 1j * omega0
    jet = np.zeros(n_terms, dtype=complex)
    jet[0] = math.exp(-0.5 * (tau / sigma) ** 2) / normalization
    if n_terms > 1:
        jet[1] = b * jet[0]
    for k in range(1, n_terms - 1):
        jet[k + 1] = b * jet[k] + 2.0 * a * k * jet[k - 1]
    return jet


def truncate_jet(jet, omega_edge):
    """Cut the jet just after the smallest asymptotic term at ``omega_edge``.

    The series is asymptotic, not convergent; optimal truncation keeps the
    terms while their magnitudes decrease.
    """
    jet = np.asarray(jet, dtype=complex)
    if jet.size == 0 or not np.any(jet):
        return np.zeros(0, dtype=complex)
    mags = np.abs(jet) / omega_edge ** (np.arange(jet.size) + 1.0)
    lead = mags[0] if mags[0] > 0 else mags.max()
    keep = 1
    for k in range(1, jet.size):
        if mags[k] == 0 or mags[k] < 1e-18 * lead:
            break
        if mags[k] > mags[k - 1]:
            break
        keep = k + 1
    return jet[:keep].copy()


def tail_coefficients(jet, side):
    """Coefficients ``A_k`` with ``G(side * u) ~ sum_k A_k u^-(k+1)`` for ``u > 0``."""
    jet = np.asarray(jet, dtype=complex)
    k = np.arange(jet.size)
    plus = (-1.0) ** (k + 1) * jet * (1j) ** (-(k + 1)) / _SQRT_2PI
    if side > 0:
        return plus
    return (-1.0) ** (k + 1) * plus


def tail_moment(u, v, omega_edge, conjugate=True):
    """``int_edge^inf u(w)^* v(w) dw`` (or without the conjugate) for two tail series."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.size == 0 or v.size == 0:
        return 0.0 + 0.0j
    if conjugate:
        u = u.conj()
    j = np.arange(u.size)[:, None]
    k = np.arange(v.size)[None, :]
    p = j + k + 1.0
    return complex(np.sum(u[:, None] * v[None, :] * omega_edge ** (-p) / p))


def _upper_gamma_series(s, z):
    # Gamma(s, z) = Gamma(s) - z^s sum_n (-z)^n / (n! (s + n)); fine for |z| < 2
    term = np.ones_like(z)
    total = term / s
    for n in range(1, 60):
        term = term * (-z) / n
        total = total + term / (s + n)
    return gamma_fn(s) - np.exp(s * np.log(z)) * total


def _upper_gamma_cf(s, z, maxiter=2000, eps=4e-16):
    # modified Lentz evaluation of the Legendre continued fraction
    tiny = 1e-300
    b = z + 1.0 - s
    c = np.full_like(z, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, maxiter):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < eps):
            break
    return np.exp(-z + s * np.log(z)) * h


def upper_gamma_imag(s, x):
    """Upper incomplete gamma ``Gamma(s, i x)`` for real non-zero ``x``, principal branch."""
    x = np.asarray(x, dtype=float)
    z = 1j * x
    out = np.empty(x.shape, dtype=complex)
    small = np.abs(x) < 2.0
    if np.any(small):
        out[small] = _upper_gamma_series(s, z[small])
    if np.any(~small):
        out[~small] = _upper_gamma_cf(s, z[~small])
    return out


def oscillatory_tail(coeffs, omega_edge, times):
    """``int_edge^inf sqrt(w) sum_k c_k w^-(k+1) exp(-i w t) dw`` per time sample.

    Each term is ``(i t)^-s Gamma(s, i t edge)`` with ``s = 1/2 - k``.  At
    ``t = 0`` the k = 0 term diverges (a field switched on with a jump is
    singular there); it is dropped at that sample.
    """
    times = np.asarray(times, dtype=float)
    out = np.zeros(times.shape, dtype=complex)
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.size == 0 or not np.any(coeffs):
        return out
    nz = times != 0.0
    t = times[nz]
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        s = 0.5 - k
        if t.size:
            it = 1j * t
            out[nz] += c * np.exp(-s * np.log(it)) * upper_gamma_imag(s, t * omega_edge)
        if k >= 1 and not np.all(nz):
            out[~nz] += c * omega_edge ** (0.5 - k) / (k - 0.5)
    return out
