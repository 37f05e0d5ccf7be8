"""Fidelity bounds for on-demand single photons and the parameter sweep behind them.

For a desired causal pulse with negative-frequency fraction ``eta`` the best
achievable fidelity obeys ``F sqrt(1 - eta) <= F_max <= sqrt(1 - eta)``,
where ``F`` is the single-photon fidelity of the strictly localized state.
To first order ``F = 1 - (3 - 2 sqrt 2)/2 eta``.
"""

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .exceptions import DomainError, ParameterError, PhotonLocalityError
from .fockspace import FockTruncation, fidelity_single_photon, localized_state
from .modes import DEGENERATE_TOL, EXACT_PHOTON_TOL, canonicalize, closed_form_eta_tilde, orthogonalize
from .spectral import (
    DEFAULT_N_POINTS,
    FrequencyGrid,
    TruncatedGaussianParams,
    eta_infinite_delay,
    overlap_infinite_delay,
    spectrum_of,
)

FIRST_ORDER_COEFFICIENT = (3.0 - 2.0 * math.sqrt(2.0)) / 2.0
PERTURBATIVE_LIMIT = 0.09
CSV_HEADER = [
    "omega0_sigma",
    "tau_over_sigma",
    "eta",
    "one_minus_f_upper",
    "one_minus_f_lower_pert",
    "one_minus_f_lower_exact",
    "one_minus_f_coherent",
]


class FidelityBounds(NamedTuple):
    lower: float
    upper: float
    exact: bool
    perturbative_regime: bool


def _check_eta(eta):
    eta = float(eta)
    if not (0.0 <= eta < 0.5):
        raise DomainError(f"eta must be in [0, 1/2), got {eta!r}")
    return eta


def fmax_bounds(eta, f_exact=None):
    """Lower and upper bounds on the best achievable fidelity.

    Parameters
    ----------
    eta : float
        Negative-frequency fraction of the desired pulse.
    f_exact : float, optional
        Single-photon fidelity of the localized state.  Without it the
        first-order expression is used and ``perturbative_regime`` reports
        whether ``eta`` is small enough for it.
    """
    eta = _check_eta(eta)
    upper = math.sqrt(1.0 - eta)
    if f_exact is None:
        return FidelityBounds((1.0 - FIRST_ORDER_COEFFICIENT * eta) * upper, upper, False,
                              eta <= PERTURBATIVE_LIMIT)
    return FidelityBounds(float(f_exact) * upper, upper, True, eta <= PERTURBATIVE_LIMIT)


def coherent_fidelity(alpha, eta):
    """Overlap of the desired photon with a coherent state ``|alpha>`` in the matched mode."""
    eta = _check_eta(eta)
    a = abs(complex(alpha))
    return a * math.exp(-0.5 * a * a) * math.sqrt(1.0 - eta)


@dataclass(frozen=True)
class BoundsPoint:
    omega0_sigma: float
    tau_over_sigma: float
    eta: float = math.nan
    eta_tilde: float = math.nan
    f_upper: float = math.nan
    f_lower_pert: float = math.nan
    f_lower_exact: float = math.nan
    f_exact_state: float = math.nan
    f_coherent: float = math.nan
    perturbative_regime: bool = False
    error: Optional[str] = None

    @property
    def sort_key(self):
        return (self.tau_over_sigma, self.omega0_sigma)


def parse_range(text):
    """``'start:stop:step'`` (inclusive) or a single number, as a sorted tuple of floats."""
    parts = str(text).split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError as exc:
        raise ParameterError(f"malformed range {text!r}") from exc
    if len(nums) == 1:
        start = stop = nums[0]
        step = 1.0
    elif len(nums) == 3:
        start, stop, step = nums
    else:
        raise ParameterError(f"range must be 'start:stop:step', got {text!r}")
    if not all(math.isfinite(x) for x in (start, stop, step)):
        raise ParameterError(f"range {text!r} has non-finite entries")
    if start <= 0 or step <= 0 or stop < start:
        raise ParameterError(f"range {text!r} needs 0 < start <= stop and step > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + k * step, 12) for k in range(count))


def parse_tau_list(text):
    """Comma-separated delays in units of sigma; ``inf`` selects the untruncated limit."""
    out = []
    for item in str(text).split(","):
        item = item.strip().lower()
        if not item:
            continue
        try:
            value = math.inf if item in ("inf", "infinity") else float(item)
        except ValueError as exc:
            raise ParameterError(f"malformed delay {item!r}") from exc
        if math.isnan(value) or value < 0:
            raise ParameterError(f"delays must be >= 0, got {item!r}")
        out.append(value)
    if not out:
        raise ParameterError("no delays given")
    return tuple(sorted(set(out)))


@dataclass(frozen=True)
class SweepConfig:
    omega_sigma: Tuple[float, ...]
    tau_ratios: Tuple[float, ...] = (3.0,)
    alpha: complex = 1.0
    exact: bool = True
    n_points: int = DEFAULT_N_POINTS
    n_cut: Optional[int] = None
    threads: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.omega_sigma or any(not (x > 0) for x in self.omega_sigma):
            raise ParameterError("omega0*sigma values must be positive")
        if not self.tau_ratios or any(math.isnan(t) or t < 0 for t in self.tau_ratios):
            raise ParameterError("tau/sigma values must be >= 0")


def _exact_fidelity(eta_tilde, n_cut):
    if eta_tilde <= EXACT_PHOTON_TOL:
        return 1.0
    # in a sweep the cutoff is a starting value, raised where the squeezing needs it
    trunc = FockTruncation() if n_cut is None else FockTruncation(n_cut)
    return fidelity_single_photon(localized_state(eta_tilde, trunc))


def eta_and_eta_tilde(omega0_sigma, tau_over_sigma, n_points=DEFAULT_N_POINTS):
    """``(eta, eta_tilde)`` for a truncated Gaussian; ``tau_over_sigma = inf`` uses the analytic limit."""
    if math.isinf(tau_over_sigma):
        eta = eta_infinite_delay(omega0_sigma)
        if eta >= 0.5:
            raise DomainError("eta = 1/2 is an excluded limiting case")
        J = math.sqrt(max(0.0, 1.0 - 4.0 * overlap_infinite_delay(omega0_sigma) ** 2))
        if J <= DEGENERATE_TOL:
            raise DomainError("|I| = 1/2: the spectrum is degenerate at this omega0 sigma")
        return eta, closed_form_eta_tilde(eta, J)
    params = TruncatedGaussianParams.from_dimensionless(omega0_sigma, tau_over_sigma)
    spectrum = canonicalize(spectrum_of(params, FrequencyGrid.default_for(params, n_points)))
    modified = orthogonalize(spectrum)
    return modified.eta, modified.eta_tilde


def evaluate_point(omega0_sigma, tau_over_sigma, config):
    """One sweep row; failures are returned as a row carrying the error message."""
    try:
        eta, eta_tilde = eta_and_eta_tilde(omega0_sigma, tau_over_sigma, config.n_points)
        pert = fmax_bounds(eta)
        f_state = _exact_fidelity(eta_tilde, config.n_cut) if config.exact else math.nan
        lower_exact = fmax_bounds(eta, f_state).lower if config.exact else math.nan
        return BoundsPoint(
            omega0_sigma, tau_over_sigma, eta, eta_tilde, pert.upper, pert.lower, lower_exact,
            f_state, coherent_fidelity(config.alpha, eta), pert.perturbative_regime)
    except PhotonLocalityError as exc:
        return BoundsPoint(omega0_sigma, tau_over_sigma, error=f"{type(exc).__name__}: {exc}")


def thread_count(requested=None):
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("PHOTON_LOCALITY_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ParameterError(f"PHOTON_LOCALITY_THREADS must be an integer, got {env!r}") from exc
    return min(4, os.cpu_count() or 1)


def sweep(config):
    """Evaluate every ``(omega0 sigma, tau / sigma)`` pair; rows sorted by delay, then ``omega0 sigma``."""
    jobs = [(w, t) for t in config.tau_ratios for w in config.omega_sigma]
    workers = thread_count(config.threads)
    if workers == 1:
        rows = [evaluate_point(w, t, config) for w, t in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda job: evaluate_point(job[0], job[1], config), jobs))
    return sorted(rows, key=lambda r: r.sort_key)


def _fmt(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".15e")


def write_bounds_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([
                _fmt(r.omega0_sigma), _fmt(r.tau_over_sigma), _fmt(r.eta),
                _fmt(1.0 - r.f_upper), _fmt(1.0 - r.f_lower_pert),
                _fmt(1.0 - r.f_lower_exact), _fmt(1.0 - r.f_coherent),
            ])


def read_bounds_csv(path):
    """Parse a bounds CSV back into a dict of float arrays keyed by column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(x) for x in row] for row in reader]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}
