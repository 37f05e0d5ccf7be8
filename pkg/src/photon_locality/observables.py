"""Normal-ordered energy densities and a negative-time localization metric.

With ``E+(t) = sum_n E_n(t) a_n`` and ``E- = (E+)^dag`` the normal-ordered
square is ``:E^2: = E+^2 + E-^2 + 2 E- E+``.  Only modes 1 and 2 are
populated, so every expectation reduces to the 2x2 moment tables
``<a_m a_n>`` and ``<a_m^dag a_n>``.  Densities are in units of the squared
kernel constant.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_time_grid, check_window
from .exceptions import DegenerateInputError, ParameterError
from .fockspace import moments
from .modes import ModeFunction, field_profile
from .spectral import _fmt

DEFAULT_WINDOW = (-10.0, -0.1)


@dataclass(frozen=True)
class QuadratureTimeSeries:
    """Real density samples; ``imag_max`` is the largest discarded imaginary part."""

    times: np.ndarray
    values: np.ndarray
    provenance: str = ""
    imag_max: float = 0.0

    @property
    def peak(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True)
class CoherentParams:
    """Coherent amplitude ``alpha`` in ``mode``; ``localized`` marks the causal mode construction."""

    alpha: complex
    mode: ModeFunction
    localized: bool = False


def _series(times, values, provenance):
    values = np.asarray(values)
    imag = float(np.max(np.abs(values.imag))) if np.iscomplexobj(values) and values.size else 0.0
    return QuadratureTimeSeries(np.asarray(times, dtype=float), np.real(values).astype(float), provenance, imag)


def standard_times(sigma=1.0, tau=0.0, n_negative=400, n_positive=800, window=DEFAULT_WINDOW, after=6.0):
    """Negative-time window plus ``[0.1 sigma, tau + after sigma]``, in units of ``sigma``."""
    lo, hi = check_window(window)
    neg = sigma * np.linspace(lo, hi, n_negative)
    pos = np.linspace(0.1 * sigma, tau + after * sigma, n_positive)
    return np.concatenate([neg, pos])


def energy_density_single_photon(profile):
    """``<1|:E^2(t):|1> = 2 |E_1(t)|^2``."""
    return _series(profile.times, 2.0 * np.abs(profile.values) ** 2, "single photon")


def localized_coherent_mode(spectrum, alpha=1.0):
    """Mode whose coherent state has a causal field: ``exp(-i arg alpha) (G + G*(-w))`` on ``w > 0``.

    ``G + G*(-w)`` is the spectrum of ``g + g*``, which vanishes for
    ``t < 0``; pairing it with ``alpha`` makes the symmetric extension of
    ``alpha E xi`` equal to a real-time causal function times the kernel.
    """
    sym = spectrum.add_reflection(1.0)
    norm2 = sym.norm2_plus
    if not norm2 > 0:
        raise DegenerateInputError("g + g* vanishes; no localized coherent mode exists")
    alpha = complex(alpha)
    phase = 1.0 if alpha == 0 else (abs(alpha) / alpha)
    n = math.sqrt(norm2)
    mode = ModeFunction(sym.grid, phase * sym.positive / n, phase * sym.tail_plus / n, "localized coherent")
    return CoherentParams(alpha, mode, True)


def energy_density_coherent(params, times):
    """``(int F(w) exp(-i w t) dw)^2`` with ``F`` the symmetric extension of ``alpha E xi``."""
    times = check_time_grid(times)
    e = field_profile(params.mode, times).values
    half = params.alpha * e
    total = half + np.conj(half)
    kind = "localized coherent" if params.localized else "coherent"
    return _series(times, total**2, kind)


def _check_pair(state, E1, E2):
    if E1.times.shape != E2.times.shape or np.any(E1.times != E2.times):
        raise ParameterError("mode profiles are sampled on different time grids")
    et = getattr(state, "eta_tilde", None)
    for prof in (E1, E2):
        if et is not None and prof.eta_tilde is not None and abs(prof.eta_tilde - et) > 1e-12:
            raise ParameterError(
                f"state (eta_tilde = {et:.12g}) and profile '{prof.label}' "
                f"(eta_tilde = {prof.eta_tilde:.12g}) come from different mode pairs")


def energy_density_state(state, E1, E2):
    """``<:E^2(t):>`` of a two-mode state, summed over the populated modes 1 and 2."""
    _check_pair(state, E1, E2)
    aa, ada = moments(state)
    E = np.vstack([E1.values, E2.values])
    anomalous = np.einsum("mt,nt,mn->t", E, E, aa)
    normal = np.einsum("mt,nt,mn->t", E.conj(), E, ada)
    label = getattr(state, "label", "") or "localized state"
    return _series(E1.times, 2.0 * anomalous.real + 2.0 * normal, label)


def two_point_function(state, fields_t1, fields_t2):
    """``<:E(t1) E(t2):>`` for the mode profiles ``(E1, E2)`` sampled at ``t1`` and ``t2``.

    The four normal-ordered products are accumulated separately, so the
    coincidence limit is an independent check of :func:`energy_density_state`.
    """
    _check_pair(state, *fields_t1)
    _check_pair(state, *fields_t2)
    aa, ada = moments(state)
    A = np.vstack([f.values for f in fields_t1])
    B = np.vstack([f.values for f in fields_t2])
    plus_plus = np.einsum("mt,nt,mn->t", A, B, aa)
    # <a_m^dag a_n^dag> = conj(<a_n a_m>)
    minus_minus = np.einsum("mt,nt,mn->t", A.conj(), B.conj(), aa.T.conj())
    minus_plus = np.einsum("mt,nt,mn->t", A.conj(), B, ada)
    plus_minus = np.einsum("mt,nt,mn->t", B.conj(), A, ada)
    return plus_plus + minus_minus + minus_plus + plus_minus


def glauber_intensity(state, E1, E2):
    """NONLOCAL diagnostic ``<E-(t) E+(t)>``; does not vanish for ``t < 0`` even for localized states."""
    _check_pair(state, E1, E2)
    _, ada = moments(state)
    E = np.vstack([E1.values, E2.values])
    return _series(E1.times, np.einsum("mt,nt,mn->t", E.conj(), E, ada), "glauber intensity (nonlocal)")


def localization_metric(series, window=DEFAULT_WINDOW):
    """``sup_window |series| / sup |series|`` (0 for a vanishing series)."""
    lo, hi = check_window(window)
    inside = (series.times >= lo) & (series.times <= hi)
    if not inside.any():
        raise ParameterError(f"no samples inside the window [{lo}, {hi}]")
    peak = series.peak
    if peak == 0:
        return 0.0
    return float(np.max(np.abs(series.values[inside])) / peak)


def profiles_for(pair, times):
    """``(E1, E2)`` for a mode pair."""
    return field_profile(pair.xi1, times), field_profile(pair.xi2, times)


def write_series_csv(series, path, column="density"):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", column])
        for t, v in zip(series.times, series.values):
            writer.writerow([_fmt(t), _fmt(v)])


def write_intensity_csv(series, path):
    write_series_csv(series, path, "intensity_nonlocal")

