"""Orthogonalized pulse-mode pairs and their time-domain fields.

A causal spectrum ``G`` is split into a positive-frequency part (mode 1) and
the mirrored negative-frequency part (mode 2).  The two parts are orthogonal
only after the modification ``G -> G - beta G*(-w)``, which keeps the pulse
causal because ``G*(-w)`` is the spectrum of ``g*(t)``.

Field profiles use the kernel ``E(w) = sqrt(w) exp(-i pi/4)`` (unit constant)::

    E_n(t) = int_0^inf E(w) xi_n(w) exp(-i w t) dw
"""

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from . import _asymptotics as asym
from ._validation import check_time_grid
from .exceptions import (
    AccuracyError,
    DegenerateInputError,
    DomainError,
    ExactSinglePhotonError,
    ParameterError,
)
from .spectral import FrequencyGrid, Spectrum, _fmt, require_parseval

KERNEL_PHASE = np.exp(-0.25j * math.pi)
DEGENERATE_TOL = 1e-12
EXACT_PHOTON_TOL = 1e-14
MODE_EDGE_GATE = 1e-6


@dataclass(frozen=True)
class ModeFunction:
    """A function on ``w >= 0``: grid samples plus its ``1/w`` tail series beyond the grid."""

    grid: FrequencyGrid
    values: np.ndarray
    tail: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    label: str = ""
    eta_tilde: Optional[float] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.center + 1,):
            raise ParameterError("mode values must cover the non-negative half of the grid")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "tail", np.asarray(self.tail, dtype=complex))

    @property
    def omega(self):
        return self.grid.omega[self.grid.center:]

    def inner(self, other):
        """``<self|other> = int_0^inf self* other dw``."""
        if other.grid != self.grid:
            raise ParameterError("modes live on different grids")
        w = self.grid.half_weights
        return (complex(np.sum(w * self.values.conj() * other.values))
                + asym.tail_moment(self.tail, other.tail, self.grid.omega_max))

    @property
    def norm2(self):
        return self.inner(self).real

    @property
    def tail_mass(self):
        return asym.tail_moment(self.tail, self.tail, self.grid.omega_max).real

    def scaled(self, factor):
        return replace(self, values=self.values * factor, tail=self.tail * factor)

    def __add__(self, other):
        if other.grid != self.grid:
            raise ParameterError("modes live on different grids")
        n = max(self.tail.size, other.tail.size)
        tail = np.zeros(n, dtype=complex)
        tail[: self.tail.size] += self.tail
        tail[: other.tail.size] += other.tail
        return replace(self, values=self.values + other.values, tail=tail)


@dataclass(frozen=True)
class ModifiedSpectrum:
    """Result of the orthogonalizing modification ``G~ = G - beta G*(-w)``."""

    base: Spectrum
    beta: complex
    J: float
    spectrum: Spectrum
    eta: float
    I: complex
    eta_tilde: float
    eta_tilde_closed_form: float
    orthogonality: float
    quadratic_residual: float
    branch: str = "minus"

    @property
    def values(self):
        return self.spectrum.values


@dataclass(frozen=True)
class PulseModePair:
    """Orthonormal modes ``xi1``, ``xi2`` on ``w >= 0`` with compensation constant ``C = 1 / tanh(gamma)``."""

    xi1: ModeFunction
    xi2: ModeFunction
    C: float
    gamma: float
    eta_tilde: float
    eta: Optional[float] = None
    beta: complex = 0.0
    J: float = 1.0


@dataclass(frozen=True)
class FieldProfile:
    """Complex mode field sampled on a time grid (kernel constant 1)."""

    times: np.ndarray
    values: np.ndarray
    label: str = ""
    eta_tilde: Optional[float] = None

    @property
    def abs2(self):
        return np.abs(self.values) ** 2

    def scaled(self, factor):
        return replace(self, values=self.values * factor)


def canonicalize(spectrum):
    """Reflect ``G(w) -> G*(-w)`` when ``eta > 1/2``; ``spectrum.reflected`` toggles accordingly."""
    eta = spectrum.eta
    if abs(eta - 0.5) <= DEGENERATE_TOL:
        raise DegenerateInputError("eta = 1/2 is an excluded limiting case; no mode split exists")
    if eta < 0.5:
        return spectrum
    return spectrum.reflect()


def closed_form_eta_tilde(eta, J):
    """``eta - (1 - J)(1 - 2 eta) / (2 J)``."""
    return eta - (1.0 - J) * (1.0 - 2.0 * eta) / (2.0 * J)


def closed_form_inner_product(eta, J):
    """Squared overlap of the normalized positive-frequency parts of ``G`` and ``G~``."""
    return (1.0 + J - 2.0 * eta) * (1.0 + J) / (4.0 * J * (1.0 - eta))


def solve_beta(I, branch="minus"):
    """Root of ``beta^2 I* - beta + I = 0``; ``branch='minus'`` is the one vanishing with ``I``."""
    I = complex(I)
    J = math.sqrt(max(0.0, 1.0 - 4.0 * abs(I) ** 2))
    if branch == "minus":
        # (1 - J) / (2 I*) without the cancellation in 1 - J at small |I|
        return 2.0 * I / (1.0 + J), J
    if branch == "plus":
        if I == 0:
            raise DegenerateInputError("the plus root diverges at I = 0")
        return (1.0 + J) / (2.0 * I.conjugate()), -J
    raise ParameterError(f"unknown branch {branch!r}")


def orthogonalize(spectrum, branch="minus", check=True):
    """Modify ``G`` so that its positive- and mirrored negative-frequency parts are orthogonal.

    Parameters
    ----------
    spectrum : Spectrum
        Canonical spectrum (``eta < 1/2``).
    branch : {'minus', 'plus'}
        Root of the quadratic for ``beta``.  Only ``'minus'`` is correct; the
        other exists to exercise the self-checks.
    check : bool
        Raise :class:`AccuracyError` when a self-check fails.

    Returns
    -------
    ModifiedSpectrum
    """
    require_parseval(spectrum)
    eta = spectrum.eta
    if eta > 0.5 + DEGENERATE_TOL:
        raise DomainError(f"spectrum is not canonical (eta = {eta:.6g}); canonicalize it first")
    I = spectrum.overlap_I
    if abs(I) >= 0.5 - DEGENERATE_TOL:
        raise DegenerateInputError(f"|I| = {abs(I):.15g} reaches 1/2; beta diverges")
    beta, J_signed = solve_beta(I, branch)
    residual = abs(beta**2 * I.conjugate() - beta + I)
    modified = spectrum.add_reflection(-beta)
    norm2 = modified.norm2
    orth = abs(modified.cross) / norm2
    eta_t = modified.eta
    eta_cf = closed_form_eta_tilde(eta, J_signed)
    result = ModifiedSpectrum(
        base=spectrum, beta=beta, J=abs(J_signed), spectrum=modified, eta=eta, I=I,
        eta_tilde=eta_t, eta_tilde_closed_form=eta_cf, orthogonality=orth,
        quadratic_residual=residual, branch=branch)
    if check:
        problems = check_modification(result)
        if problems:
            raise AccuracyError("; ".join(problems))
    return result


def check_modification(modified, tol=1e-8):
    """List the self-checks a modification fails (empty when all pass)."""
    problems = []
    if modified.quadratic_residual > 1e-12:
        problems.append(f"beta quadratic residual {modified.quadratic_residual:.3g} > 1e-12")
    if modified.orthogonality > 1e-10:
        problems.append(f"orthogonality functional {modified.orthogonality:.3g} > 1e-10")
    if abs(modified.eta_tilde - modified.eta_tilde_closed_form) > tol:
        problems.append("eta_tilde quadrature and closed form disagree "
                        f"({modified.eta_tilde:.12g} vs {modified.eta_tilde_closed_form:.12g})")
    if modified.eta_tilde > modified.eta + 1e-12:
        problems.append(f"eta_tilde {modified.eta_tilde:.12g} exceeds eta {modified.eta:.12g}")
    return problems


def positive_inner_product(a, b):
    """``int_0^inf a*(w) b(w) dw`` for two spectra on the same grid."""
    w = a.grid.half_weights
    return (complex(np.sum(w * a.positive.conj() * b.positive))
            + asym.tail_moment(a.tail_plus, b.tail_plus, a.grid.omega_max))


def inner_product_squared(modified):
    """Quadrature value of the squared overlap of the normalized positive parts of ``G`` and ``G~``."""
    g, gt = modified.base, modified.spectrum
    return abs(positive_inner_product(g, gt)) ** 2 / (g.norm2_plus * gt.norm2_plus)


def compensation_constant(eta_tilde):
    """``(C, gamma)`` with ``C^2 = (1 - eta~) / eta~`` and ``tanh(gamma) = 1 / C``."""
    eta_tilde = float(eta_tilde)
    if not eta_tilde > EXACT_PHOTON_TOL:
        if eta_tilde >= -EXACT_PHOTON_TOL:
            raise ExactSinglePhotonError("eta_tilde vanishes: the target is an exact single photon")
        raise DomainError(f"eta_tilde must be in (0, 1/2), got {eta_tilde!r}")
    if eta_tilde >= 0.5:
        raise DomainError(f"eta_tilde must be below 1/2, got {eta_tilde!r}")
    C = math.sqrt((1.0 - eta_tilde) / eta_tilde)
    return C, math.atanh(1.0 / C)


def extract_modes(modified):
    """Split ``G~`` into the orthonormal pair ``xi1 = G~(w) / n``, ``xi2 = C G~*(-w) / n``."""
    C, gamma = compensation_constant(modified.eta_tilde)
    spec = modified.spectrum
    n = math.sqrt(spec.norm2_plus)
    grid = spec.grid
    et = modified.eta_tilde
    xi1 = ModeFunction(grid, spec.positive / n, spec.tail_plus / n, "xi1", et)
    xi2 = ModeFunction(grid, C * spec.negative.conj() / n, C * spec.tail_minus.conj() / n, "xi2", et)
    return PulseModePair(xi1, xi2, C, gamma, modified.eta_tilde, modified.eta, modified.beta, modified.J)


def _check_mode_gate(mode):
    # the tail series must continue the grid samples at the edge
    edge = mode.grid.omega_max
    k = np.arange(mode.tail.size)
    series = complex(np.sum(mode.tail / edge ** (k + 1.0)))
    scale = max(float(np.max(np.abs(mode.values))), abs(series))
    if scale > 0 and abs(mode.values[-1] - series) > MODE_EDGE_GATE * scale:
        raise AccuracyError(
            f"mode at the grid edge ({abs(mode.values[-1]):.3g}) is not matched by its tail series "
            f"({abs(series):.3g}); widen the grid")


def _grid_field(mode, times, block=256):
    # trapezoid of sqrt(w) xi(w) exp(-i w t) over [0, omega_max]
    f = np.sqrt(mode.omega) * mode.values * mode.grid.trapezoid_weights
    n = f.size
    n_blocks = -(-n // block)
    padded = np.zeros(n_blocks * block, dtype=complex)
    padded[:n] = f
    dw = mode.grid.spacing
    kernel = np.exp(-1j * dw * np.outer(np.arange(block), times))
    partial = padded.reshape(n_blocks, block) @ kernel
    starts = dw * block * np.arange(n_blocks)
    values = np.einsum("bt,bt->t", np.exp(-1j * np.outer(starts, times)), partial)
    if n >= 3:
        # sqrt(w) endpoint: trapezoid error -zeta(-1/2) phi(0) h^1.5 - zeta(-3/2) phi'(0) h^2.5
        x = mode.values
        slope = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dw)
        values = values - (zeta(-0.5) * x[0] * dw**1.5
                           + zeta(-1.5) * (slope - 1j * times * x[0]) * dw**2.5)
    return values


def field_profile(mode, times, label=None):
    """Field ``E(t)`` of a mode, trapezoid on the grid plus the closed-form tail.

    At ``t = 0`` a pulse switched on with a jump has an integrable
    singularity; the divergent leading tail term is omitted at that sample.
    """
    times = check_time_grid(times)
    _check_mode_gate(mode)
    values = _grid_field(mode, times)
    if mode.tail.size:
        values = values + asym.oscillatory_tail(mode.tail, mode.grid.omega_max, times)
    return FieldProfile(times, KERNEL_PHASE * values, mode.label if label is None else label,
                        mode.eta_tilde)


def peak_abs_field(mode, t_max=None):
    """``max_t |E(t)|``: coarse scan by zero-padded FFT, then local refinement."""
    values = np.sqrt(mode.omega) * mode.values * mode.grid.trapezoid_weights
    if not np.any(values):
        return 0.0
    dw = mode.grid.spacing
    length = 1 << int(math.ceil(math.log2(4 * values.size)))
    # sum_j f_j exp(-i j dw t_m) with t_m = 2 pi m / (L dw)
    coarse = np.fft.fft(values, length)
    dt = 2.0 * math.pi / (length * dw)
    t_grid = dt * np.arange(length)
    t_grid[length // 2:] -= length * dt
    keep = np.ones(length, dtype=bool) if t_max is None else np.abs(t_grid) <= t_max
    # skip the t = 0 sample where the field of a switched-on pulse is singular
    keep &= t_grid != 0
    idx = np.flatnonzero(keep)[np.argmax(np.abs(coarse[keep]))]
    t0 = t_grid[idx]

    def objective(t):
        return -abs(field_profile(mode, [t]).values[0])

    lo, hi = t0 - dt, t0 + dt
    if lo < 0 < hi:
        lo, hi = (dt * 1e-3, hi) if t0 > 0 else (lo, -dt * 1e-3)
    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": dt * 1e-4})
    return max(-res.fun, abs(field_profile(mode, [t0]).values[0]))


def compensation_field(pair, times):
    """``E_2(t) + C E_1*(t)``, which vanishes for ``t < 0`` in the continuum."""
    e1 = field_profile(pair.xi1, times)
    e2 = field_profile(pair.xi2, times)
    return FieldProfile(e1.times, e2.values + pair.C * e1.values.conj(), "compensation")


def tail_residual(pair, negative_times):
    """Normalized violation ``max_{t<0} |E_2 + C E_1*| / max_t |C E_1*|`` of the compensation condition."""
    times = check_time_grid(negative_times, "negative_times")
    if np.any(times >= 0):
        raise ParameterError("negative_times must be strictly negative")
    peak = pair.C * peak_abs_field(pair.xi1)
    if peak == 0:
        raise DegenerateInputError("mode 1 has a vanishing field")
    return float(np.max(np.abs(compensation_field(pair, times).values)) / peak)


def write_modes_csv(pair, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["omega", "re_xi1", "im_xi1", "re_xi2", "im_xi2"])
        for w, a, b in zip(pair.xi1.omega, pair.xi1.values, pair.xi2.values):
            writer.writerow([_fmt(w), _fmt(a.real), _fmt(a.imag), _fmt(b.real), _fmt(b.imag)])


def write_profile_csv(profile, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "re_E", "im_E", "abs2_E"])
        for t, e in zip(profile.times, profile.values):
            writer.writerow([_fmt(t), _fmt(e.real), _fmt(e.imag), _fmt(abs(e) ** 2)])
