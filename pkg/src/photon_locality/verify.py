"""Self-verification suite: invariant checks at default parameters.

Each check returns ``(passed, detail)``.  ``FAULTS`` lists deliberate bugs
that can be injected to confirm the suite notices them.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .bounds import SweepConfig, coherent_fidelity, parse_range, sweep
from .fockspace import (
    FockTruncation,
    block_indices,
    fidelity_single_photon,
    localized_state,
    squeeze_operator,
    squeeze_transform_residual,
    two_mode_squeezed_vacuum,
)
from .modes import (
    check_modification,
    closed_form_inner_product,
    extract_modes,
    inner_product_squared,
    orthogonalize,
    tail_residual,
)
from .observables import (
    energy_density_single_photon,
    energy_density_state,
    localization_metric,
    profiles_for,
    standard_times,
    two_point_function,
)
from .spectral import (
    FrequencyGrid,
    TruncatedGaussianParams,
    eta_infinite_delay,
    spectrum_of,
)

FAULTS = ("beta-plus-branch",)


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    run: Callable


class Context:
    """Shared, lazily built pipeline for the default pulse (omega0 sigma = 1, tau / sigma = 3)."""

    def __init__(self, fault=None, omega0_sigma=1.0, tau_over_sigma=3.0):
        if fault is not None and fault not in FAULTS:
            raise ValueError(f"unknown fault {fault!r}")
        self.fault = fault
        self.params = TruncatedGaussianParams.from_dimensionless(omega0_sigma, tau_over_sigma)

    @property
    def branch(self):
        return "plus" if self.fault == "beta-plus-branch" else "minus"

    @cached_property
    def spectrum(self):
        return spectrum_of(self.params)

    @cached_property
    def modified(self):
        return orthogonalize(self.spectrum)

    @cached_property
    def pair(self):
        return extract_modes(self.modified)


def _spectral_parseval(ctx):
    err = ctx.spectrum.parseval_error()
    return err <= 1e-6, f"|‖G‖² - 1| = {err:.2e}"


def _spectral_reflection(ctx):
    s = ctx.spectrum
    err = abs(s.reflect().eta - (1.0 - s.eta))
    return err <= 1e-12, f"|eta(reflected) - (1 - eta)| = {err:.2e}"


def _spectral_cross_method(ctx):
    cf = ctx.spectrum.values
    quad = spectrum_of(ctx.params, method="quadrature").values
    err = float(np.max(np.abs(cf - quad)) / np.max(np.abs(cf)))
    return err <= 1e-8, f"max |G_cf - G_quad| / max |G| = {err:.2e}"


def _spectral_cauchy_schwarz(ctx):
    s = ctx.spectrum
    slack = abs(s.overlap_I) ** 2 - s.eta * (1.0 - s.eta)
    return slack <= 1e-12, f"|I|² - eta(1 - eta) = {slack:.3e}"


def _spectral_infinite_delay(ctx):
    worst = 0.0
    for x in (0.3, 0.5, 1.0, 1.5):
        eta = spectrum_of(TruncatedGaussianParams.from_dimensionless(x, 8.0)).eta
        worst = max(worst, abs(eta - eta_infinite_delay(x)))
    return worst <= 1e-4, f"max |eta(tau = 8 sigma) - erfc(x)/2| = {worst:.2e}"


def _modes_orthogonalization(ctx):
    modified = orthogonalize(ctx.spectrum, branch=ctx.branch, check=False)
    problems = check_modification(modified)
    if problems:
        return False, "; ".join(problems)
    return True, (f"beta residual {modified.quadratic_residual:.1e}, orthogonality "
                  f"{modified.orthogonality:.1e}, eta~ {modified.eta_tilde:.6f} <= eta {modified.eta:.6f}")


def _modes_inner_product(ctx):
    m = ctx.modified
    err = abs(inner_product_squared(m) - closed_form_inner_product(m.eta, m.J))
    return err <= 1e-8, f"closed form vs quadrature = {err:.2e}"


def _modes_orthonormal(ctx):
    p = ctx.pair
    errs = (abs(p.xi1.norm2 - 1), abs(p.xi2.norm2 - 1), abs(p.xi1.inner(p.xi2)),
            abs(p.C**2 - (1 - p.eta_tilde) / p.eta_tilde))
    ok = max(errs[:2]) <= 1e-10 and errs[2] <= 1e-8 and errs[3] <= 1e-10
    return ok, "norm, overlap, C² errors = " + ", ".join(f"{e:.1e}" for e in errs)


def _modes_compensation(ctx):
    times = np.linspace(-10.0, -0.1, 300) * ctx.params.sigma
    coarse = FrequencyGrid.default_for(ctx.params, 2**15 + 1)
    values = []
    for grid in (coarse, coarse.refine()):
        pair = extract_modes(orthogonalize(spectrum_of(ctx.params, grid)))
        values.append(tail_residual(pair, times))
    ok = values[1] <= 1e-3 and values[1] < values[0]
    return ok, f"residual {values[0]:.2e} -> {values[1]:.2e} under refinement"


def _fock_unitarity(ctx):
    S = squeeze_operator(0.6)
    idx = block_indices(S.n_cut, S.n_cut // 2)
    gram = S.matrix.conj().T @ S.matrix
    err = float(np.max(np.abs(gram[np.ix_(idx, idx)] - np.eye(idx.size))))
    return err <= 1e-10, f"gamma 0.6, n_cut {S.n_cut}: max |S†S - 1| on block = {err:.2e}"


def _fock_squeezed_vacuum(ctx):
    worst = 0.0
    for gamma in (0.1, 0.3, 0.6):
        S = squeeze_operator(gamma)
        worst = max(worst, float(np.max(np.abs(S.matrix[:, 0] - two_mode_squeezed_vacuum(gamma, S.n_cut)))))
    return worst <= 1e-10, f"max coefficient error = {worst:.2e}"


def _fock_transform(ctx):
    r = squeeze_transform_residual(0.2, FockTruncation(40), details=True)
    return r.block <= 1e-8, (f"block residual {r.block:.2e} (working cutoff {r.working_cut}; "
                             f"in place {r.in_place:.2e})")


def _fock_first_order(ctx):
    et = np.logspace(-4, -2, 9)
    y = np.array([1.0 - fidelity_single_photon(localized_state(e)) for e in et])
    slope = float(np.sum(et * y) / np.sum(et * et))
    target = (3.0 - 2.0 * math.sqrt(2.0)) / 2.0
    return abs(slope / target - 1.0) <= 0.02, f"slope {slope:.6f} vs {target:.6f}"


def _fock_truncation(ctx):
    a = localized_state(0.1)
    b = localized_state(0.1, FockTruncation(2 * a.n_cut))
    err = abs(fidelity_single_photon(a) - fidelity_single_photon(b))
    return err < 1e-10, f"|c1| change on doubling n_cut = {err:.2e}"


def _observables_two_point(ctx):
    times = standard_times(ctx.params.sigma, ctx.params.tau, 100, 200)
    state = localized_state(ctx.pair.eta_tilde)
    E1, E2 = profiles_for(ctx.pair, times)
    density = energy_density_state(state, E1, E2)
    two = two_point_function(state, (E1, E2), (E1, E2))
    err = float(np.max(np.abs(two - density.values)) / density.peak)
    return err <= 1e-10, f"coincidence limit vs density = {err:.2e}"


def _observables_localization(ctx):
    times = standard_times(ctx.params.sigma, ctx.params.tau)
    state = localized_state(ctx.pair.eta_tilde)
    E1, E2 = profiles_for(ctx.pair, times)
    window = (-10.0 * ctx.params.sigma, -0.1 * ctx.params.sigma)
    local = localization_metric(energy_density_state(state, E1, E2), window)
    single = localization_metric(energy_density_single_photon(E1), window)
    ok = local <= 1e-3 and single >= 10 * local
    return ok, f"localized {local:.2e} vs single photon {single:.2e}"


def _bounds_ordering(ctx):
    rows = sweep(SweepConfig(parse_range("0.2:3.0:0.2"), (3.0,)))
    bad = [r for r in rows if r.error or r.f_lower_exact > r.f_upper + 1e-12 or r.f_lower_pert > r.f_upper]
    coh = [r for r in rows if r.eta <= 0.3 and not r.f_coherent < r.f_lower_exact]
    e = coherent_fidelity(1.0, 0.0)
    ok = not bad and not coh and abs(e - math.exp(-0.5)) <= 1e-10
    return ok, f"{len(rows)} rows, {len(bad)} misordered, {len(coh)} coherent violations"


CHECKS = (
    Check("spectral.parseval", "Parseval on the default grid", _spectral_parseval),
    Check("spectral.reflection", "eta of the reflected spectrum is 1 - eta", _spectral_reflection),
    Check("spectral.cross_method", "closed form vs quadrature spectrum", _spectral_cross_method),
    Check("spectral.cauchy_schwarz", "|I|² <= eta(1 - eta)", _spectral_cauchy_schwarz),
    Check("spectral.infinite_delay", "long delay approaches the analytic limit", _spectral_infinite_delay),
    Check("modes.orthogonalization", "beta root, orthogonality, eta~ <= eta, closed form", _modes_orthogonalization),
    Check("modes.inner_product", "overlap of G and G~ positive parts", _modes_inner_product),
    Check("modes.orthonormal_pair", "xi1, xi2 orthonormal and C² = (1 - eta~)/eta~", _modes_orthonormal),
    Check("modes.compensation", "E2 + C E1* small for t < 0 and shrinking", _modes_compensation),
    Check("fockspace.unitarity", "S†S = 1 on the low block", _fock_unitarity),
    Check("fockspace.squeezed_vacuum", "S|0> vs closed form", _fock_squeezed_vacuum),
    Check("fockspace.transform_identity", "S(a1 - C a2†)S† = -sqrt(C² - 1) a2†", _fock_transform),
    Check("fockspace.first_order", "1 - F slope vs eta~", _fock_first_order),
    Check("fockspace.truncation", "c1 stable under doubling n_cut", _fock_truncation),
    Check("observables.two_point", "two-point coincidence limit equals density", _observables_two_point),
    Check("observables.localization", "negative-time density of the localized state", _observables_localization),
    Check("bounds.ordering", "bound ordering and coherent baseline", _bounds_ordering),
)


def run_checks(names=None, fault=None, report=print):
    """Run the selected checks; returns ``[(name, passed, detail)]``."""
    selected = CHECKS if not names else [c for c in CHECKS if c.name in set(names)]
    unknown = set(names or ()) - {c.name for c in CHECKS}
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(sorted(unknown))}")
    ctx = Context(fault)
    results = []
    for check in selected:
        try:
            passed, detail = check.run(ctx)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((check.name, bool(passed), detail))
        if report is not None:
            report(f"{'PASS' if passed else 'FAIL'} {check.name}: {detail}")
    return results
