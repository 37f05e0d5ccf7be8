"""Causal pulse envelopes and their spectra.

Fourier convention::

    G(w) = (2 pi)^-1/2 int g(t) exp(+i w t) dt
    g(t) = (2 pi)^-1/2 int G(w) exp(-i w t) dw

so that ``||g|| = ||G||`` and a pulse vanishing for ``t < 0`` has a spectrum
analytic in the upper half-plane.

A :class:`Spectrum` stores ``G`` on a symmetric uniform grid together with the
pulse's one-sided derivatives at ``t = 0+`` (its *jet*).  The jet fixes the
``1/w`` tails beyond the grid, and every integral in the library is the
trapezoid sum over the grid plus the closed-form tail integral.  Since both
pieces are bilinear in (grid values, jet), reflections and linear
combinations of spectra stay exactly consistent with each other.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erfc, roots_legendre, wofz

from . import _asymptotics as asym
from ._validation import check_nonnegative, check_positive
from .exceptions import (
    AccuracyError,
    DegenerateInputError,
    ParameterError,
    UnsupportedMethodError,
)

DEFAULT_N_POINTS = 2**16 + 1
DEFAULT_BANDWIDTH = 12.0
PARSEVAL_GATE = 1e-4


@dataclass(frozen=True)
class TruncatedGaussianParams:
    """Carrier ``omega0``, duration ``sigma`` and delay ``tau`` of a truncated Gaussian."""

    omega0: float
    sigma: float
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "omega0", check_positive("omega0", self.omega0))
        object.__setattr__(self, "sigma", check_positive("sigma", self.sigma))
        object.__setattr__(self, "tau", check_nonnegative("tau", self.tau))

    @classmethod
    def from_dimensionless(cls, omega0_sigma, tau_over_sigma, sigma=1.0):
        sigma = check_positive("sigma", sigma)
        return cls(omega0=omega0_sigma / sigma, sigma=sigma, tau=tau_over_sigma * sigma)

    @property
    def omega0_sigma(self):
        return self.omega0 * self.sigma

    @property
    def tau_over_sigma(self):
        return self.tau / self.sigma

    @property
    def normalization(self):
        # int_0^inf exp(-(t - tau)^2 / sigma^2) dt
        return math.sqrt(0.5 * self.sigma * math.sqrt(math.pi) * (1.0 + math.erf(self.tau / self.sigma)))


@dataclass(frozen=True)
class TemporalPulse:
    """Normalized envelope ``g(t)``, identically zero for ``t < 0``.

    ``envelope`` only needs to be valid on ``[0, support_end]``; calling the
    pulse applies the Heaviside truncation.  ``jet`` holds ``g^(k)(0+)``.
    """

    envelope: Callable[[np.ndarray], np.ndarray]
    support_end: float
    jet: np.ndarray
    time_scale: float
    normalization: float = 1.0
    params: Optional[TruncatedGaussianParams] = None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0) & (t <= self.support_end)
        out = np.zeros(t.shape, dtype=complex)
        if np.any(inside):
            out[inside] = self.envelope(t[inside])
        return out

    def norm2(self, nodes_per_panel=32):
        """``int_0^inf |g|^2 dt`` by composite Gauss-Legendre quadrature."""
        t, w = _gauss_legendre_nodes(self.support_end, self._panels(0.0), nodes_per_panel)
        return float(np.sum(w * np.abs(self(t)) ** 2))

    def _panels(self, omega_span):
        by_scale = math.ceil(2.0 * self.support_end / self.time_scale)
        by_phase = math.ceil(self.support_end * omega_span / 16.0)
        return max(16, by_scale, by_phase)

    @classmethod
    def from_samples(cls, times, values):
        """Build a pulse from samples of ``g`` on ``[0, T]`` (cubic-spline interpolated, then normalized)."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=complex)
        if times.ndim != 1 or times.size < 4 or times.shape != values.shape:
            raise ParameterError("need at least four matching (time, value) samples")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise ParameterError("sample times must start at 0 and increase")
        spline = CubicSpline(times, values)
        raw = cls(envelope=spline, support_end=float(times[-1]),
                  jet=np.array([spline(0.0, nu) for nu in range(4)], dtype=complex),
                  time_scale=float(np.min(np.diff(times))) * 4)
        norm = math.sqrt(raw.norm2())
        if norm == 0:
            raise DegenerateInputError("sampled pulse has zero norm")
        return cls(envelope=lambda t: spline(t) / norm, support_end=raw.support_end,
                   jet=raw.jet / norm, time_scale=raw.time_scale, normalization=norm)


def make_truncated_gaussian(params):
    """``u(t) exp(-(t - tau)^2 / 2 sigma^2) exp(-i omega0 t) / N`` with unit norm on ``t >= 0``."""
    if not isinstance(params, TruncatedGaussianParams):
        raise ParameterError("expected TruncatedGaussianParams")
    omega0, sigma, tau = params.omega0, params.sigma, params.tau
    norm = params.normalization

    def envelope(t):
        return np.exp(-0.5 * ((t - tau) / sigma) ** 2 - 1j * omega0 * t) / norm

    return TemporalPulse(
        envelope=envelope,
        support_end=tau + DEFAULT_BANDWIDTH * sigma,
        jet=asym.gaussian_jet(omega0, sigma, tau, norm),
        time_scale=sigma,
        normalization=norm,
        params=params,
    )


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid on ``[-omega_max, omega_max]`` with an odd number of samples (so w = 0 is one)."""

    omega_max: float
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self):
        object.__setattr__(self, "omega_max", check_positive("omega_max", self.omega_max))
        n = int(self.n_points)
        if n != self.n_points or n < 3 or n % 2 == 0:
            raise ParameterError(f"n_points must be an odd integer >= 3, got {self.n_points!r}")
        object.__setattr__(self, "n_points", n)

    @classmethod
    def default_for(cls, params, n_points=DEFAULT_N_POINTS):
        return cls(params.omega0 + DEFAULT_BANDWIDTH / params.sigma, n_points)

    @property
    def omega(self):
        return np.linspace(-self.omega_max, self.omega_max, self.n_points)

    @property
    def spacing(self):
        return 2.0 * self.omega_max / (self.n_points - 1)

    @property
    def center(self):
        return self.n_points // 2

    @property
    def trapezoid_weights(self):
        """Plain trapezoid weights on ``[0, omega_max]`` (the half-grid including w = 0)."""
        w = np.full(self.center + 1, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w

    @property
    def half_weights(self):
        """Endpoint-corrected trapezoid weights on ``[0, omega_max]``.

        Adds ``h^2/12 (f'(0) - f'(omega_max))`` with one-sided three-point
        derivatives, so half-line integrals of smooth integrands are
        ``O(h^4)``; splitting at w = 0 otherwise costs ``O(h^2)``.
        """
        w = self.trapezoid_weights
        if w.size >= 6:
            h = self.spacing
            w[:3] += h / 24.0 * np.array([-3.0, 4.0, -1.0])
            w[-3:] += h / 24.0 * np.array([-1.0, 4.0, -3.0])
        return w

    def refine(self):
        """Same range, half the spacing."""
        return FrequencyGrid(self.omega_max, 2 * self.n_points - 1)


@dataclass(frozen=True)
class Spectrum:
    """Spectral amplitude on a symmetric grid plus the pulse jet that fixes its tails.

    ``expected_norm2`` is the time-domain squared norm when the spectrum was
    computed from a pulse (used by the Parseval accuracy gate); ``reflected``
    records a ``G(w) -> G*(-w)`` canonicalization.
    """

    grid: FrequencyGrid
    values: np.ndarray
    jet: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    expected_norm2: Optional[float] = None
    reflected: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise ParameterError("spectrum values do not match the grid")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "jet", np.asarray(self.jet, dtype=complex))
        w = self.grid.half_weights
        pos, neg = self.positive, self.negative
        tp, tn = self.tail_plus, self.tail_minus
        edge = self.grid.omega_max
        norm_pos = float(np.sum(w * np.abs(pos) ** 2)) + asym.tail_moment(tp, tp, edge).real
        norm_neg = float(np.sum(w * np.abs(neg) ** 2)) + asym.tail_moment(tn, tn, edge).real
        cross = complex(np.sum(w * pos * neg)) + asym.tail_moment(tp, tn, edge, conjugate=False)
        object.__setattr__(self, "norm2_plus", norm_pos)
        object.__setattr__(self, "norm2_minus", norm_neg)
        object.__setattr__(self, "cross", cross)

    @property
    def omega(self):
        return self.grid.omega

    @property
    def positive(self):
        """``G(w)`` for ``w >= 0``."""
        return self.values[self.grid.center:]

    @property
    def negative(self):
        """``G(-u)`` for ``u >= 0``."""
        return self.values[self.grid.center::-1]

    @property
    def tail_plus(self):
        return asym.tail_coefficients(self.jet, +1)

    @property
    def tail_minus(self):
        return asym.tail_coefficients(self.jet, -1)

    @property
    def norm2(self):
        return self.norm2_plus + self.norm2_minus

    @property
    def tail_mass(self):
        edge = self.grid.omega_max
        return (asym.tail_moment(self.tail_plus, self.tail_plus, edge).real
                + asym.tail_moment(self.tail_minus, self.tail_minus, edge).real)

    @property
    def eta(self):
        return eta_of(self)

    @property
    def overlap_I(self):
        return overlap_I(self)

    def reflect(self):
        """``G(w) -> G*(-w)``, the spectrum of ``g*(t)``."""
        return Spectrum(self.grid, self.values[::-1].conj(), self.jet.conj(),
                        self.expected_norm2, not self.reflected)

    def add_reflection(self, coefficient):
        """``G(w) + c G*(-w)``, the spectrum of ``g(t) + c g*(t)`` (still causal)."""
        values = self.values + coefficient * self.values[::-1].conj()
        jet = self.jet + coefficient * self.jet.conj()
        return Spectrum(self.grid, values, jet, None, self.reflected)

    def scaled(self, factor):
        factor = complex(factor)
        expected = None if self.expected_norm2 is None else self.expected_norm2 * abs(factor) ** 2
        return Spectrum(self.grid, self.values * factor, self.jet * factor, expected, self.reflected)

    def parseval_error(self):
        if self.expected_norm2 is None:
            return None
        return abs(self.norm2 - self.expected_norm2)


def require_parseval(spectrum, tol=PARSEVAL_GATE):
    """Accuracy gate for consumers of a spectrum."""
    err = spectrum.parseval_error()
    if err is not None and err > tol * max(spectrum.expected_norm2, 1e-300):
        raise AccuracyError(
            f"Parseval violated: ||G||^2 = {spectrum.norm2:.12g} vs {spectrum.expected_norm2:.12g}; "
            "the frequency grid is too narrow or too coarse")


def _gauss_legendre_nodes(t_end, n_panels, nodes_per_panel):
    x, w = roots_legendre(nodes_per_panel)
    edges = np.linspace(0.0, t_end, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return t, weights


def truncated_gaussian_spectrum(params, omega):
    """Closed form of the truncated-Gaussian spectrum through the Faddeeva function.

    With ``W = w - omega0`` and ``z = (-W sigma^2 + i tau) / (sigma sqrt 2)``::

        G = sigma / (2 N) [2 exp(-W^2 sigma^2 / 2 + i W tau) - exp(-tau^2 / 2 sigma^2) w(z)]

    which is the usual ``erfc`` expression rewritten so that ``Im z >= 0``.
    """
    sigma, tau = params.sigma, params.tau
    detuning = np.asarray(omega, dtype=float) - params.omega0
    z = (-detuning * sigma**2 + 1j * tau) / (sigma * math.sqrt(2.0))
    gauss = 2.0 * np.exp(-0.5 * (detuning * sigma) ** 2 + 1j * detuning * tau)
    edge = math.exp(-0.5 * (tau / sigma) ** 2) * wofz(z)
    return sigma / (2.0 * params.normalization) * (gauss - edge)


def _quadrature_spectrum(pulse, grid, nodes_per_panel=32, chunk=2048):
    t, w = _gauss_legendre_nodes(pulse.support_end, pulse._panels(2.0 * grid.omega_max), nodes_per_panel)
    weighted = w * pulse(t) / math.sqrt(2.0 * math.pi)
    # uniform grid: exp(i (w_start + j dw) t) = exp(i j dw t) exp(i w_start t)
    offsets = grid.spacing * np.arange(chunk)
    kernel = np.exp(1j * np.outer(offsets, t))
    omega = grid.omega
    out = np.empty(grid.n_points, dtype=complex)
    for start in range(0, grid.n_points, chunk):
        stop = min(start + chunk, grid.n_points)
        phase = np.exp(1j * omega[start] * t)
        out[start:stop] = kernel[: stop - start] @ (phase * weighted)
    return out


def spectrum_of(source, grid=None, method="closed_form", parseval_tol=PARSEVAL_GATE):
    """Spectrum of a pulse (or truncated-Gaussian parameters) on ``grid``.

    ``method='closed_form'`` is available for truncated Gaussians only;
    ``method='quadrature'`` integrates ``g`` numerically over its support.
    """
    if isinstance(source, TruncatedGaussianParams):
        pulse = make_truncated_gaussian(source)
    elif isinstance(source, TemporalPulse):
        pulse = source
    else:
        raise ParameterError("source must be a TemporalPulse or TruncatedGaussianParams")
    if grid is None:
        if pulse.params is None:
            raise ParameterError("a frequency grid is required for general pulses")
        grid = FrequencyGrid.default_for(pulse.params)
    omega = grid.omega
    if method == "closed_form":
        if pulse.params is None:
            raise UnsupportedMethodError("closed_form spectra exist only for truncated Gaussians")
        values = truncated_gaussian_spectrum(pulse.params, omega)
    elif method == "quadrature":
        values = _quadrature_spectrum(pulse, grid)
    else:
        raise UnsupportedMethodError(f"unknown method {method!r}")
    jet = asym.truncate_jet(pulse.jet, grid.omega_max)
    expected = 1.0 if pulse.params is not None else pulse.norm2()
    spectrum = Spectrum(grid, values, jet, expected)
    require_parseval(spectrum, parseval_tol)
    return spectrum


def eta_of(spectrum):
    """Fraction of ``||G||^2`` at negative frequencies, tail included."""
    total = spectrum.norm2
    if not total > 0:
        raise DegenerateInputError("spectrum has zero norm")
    return spectrum.norm2_minus / total


def overlap_I(spectrum):
    """``I = ||G||^-2 int_0^inf G(w) G(-w) dw``."""
    total = spectrum.norm2
    if not total > 0:
        raise DegenerateInputError("spectrum has zero norm")
    return spectrum.cross / total


def eta_infinite_delay(omega0_sigma):
    """Negative-frequency fraction of an untruncated Gaussian: ``(1 - erf(omega0 sigma)) / 2``."""
    x = float(omega0_sigma)
    if math.isnan(x) or x < 0:
        raise ParameterError(f"omega0_sigma must be >= 0, got {omega0_sigma!r}")
    return 0.5 * float(erfc(x))


def overlap_infinite_delay(omega0_sigma):
    """``|I|`` for an untruncated Gaussian: ``exp(-(omega0 sigma)^2) / 2``."""
    x = float(omega0_sigma)
    if math.isnan(x) or x < 0:
        raise ParameterError(f"omega0_sigma must be >= 0, got {omega0_sigma!r}")
    return 0.5 * math.exp(-x * x)


def write_spectrum_csv(spectrum, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["omega", "re_G", "im_G"])
        for w, g in zip(spectrum.omega, spectrum.values):
            writer.writerow([_fmt(w), _fmt(g.real), _fmt(g.imag)])


def _fmt(x):
    return format(float(x), ".16e")

