"""scikit-learn style wrappers around the pulse -> modes -> state pipeline."""

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bounds import SweepConfig, evaluate_point
from .exceptions import ExactSinglePhotonError, ParameterError
from .fockspace import FockTruncation, basis_state, fidelity_single_photon, localized_state
from .modes import ModeFunction, canonicalize, extract_modes, field_profile, orthogonalize
from .observables import energy_density_single_photon, energy_density_state
from .spectral import DEFAULT_N_POINTS, FrequencyGrid, TruncatedGaussianParams, spectrum_of


class LocalizedPhotonState(TransformerMixin, BaseEstimator):
    """Strictly localized approximation to a truncated-Gaussian single photon.

    ``fit`` runs spectrum -> orthogonalization -> mode pair -> Fock state
    (times in units of ``sigma``); ``transform`` maps a column of times to the
    energy densities of the localized state and of the single photon in mode 1.

    Parameters
    ----------
    omega0_sigma, tau_over_sigma : float
        Pulse shape.
    n_points : int
        Frequency grid size.
    method : {'closed_form', 'quadrature'}
        Spectrum evaluation.
    n_cut : int, optional
        Fock cutoff; raised automatically when too small.
    """

    def __init__(self, omega0_sigma=1.0, tau_over_sigma=3.0, n_points=DEFAULT_N_POINTS,
                 method="closed_form", n_cut=None):
        self.omega0_sigma = omega0_sigma
        self.tau_over_sigma = tau_over_sigma
        self.n_points = n_points
        self.method = method
        self.n_cut = n_cut

    def fit(self, X=None, y=None):
        params = TruncatedGaussianParams.from_dimensionless(self.omega0_sigma, self.tau_over_sigma)
        spectrum = canonicalize(spectrum_of(params, FrequencyGrid.default_for(params, self.n_points),
                                            self.method))
        self.spectrum_ = spectrum
        self.modified_ = orthogonalize(spectrum)
        self.eta_ = self.modified_.eta
        self.eta_tilde_ = self.modified_.eta_tilde
        trunc = FockTruncation() if self.n_cut is None else FockTruncation(self.n_cut)
        try:
            self.pair_ = extract_modes(self.modified_)
        except ExactSinglePhotonError:
            spec = self.modified_.spectrum
            n = math.sqrt(spec.norm2_plus)
            self.pair_ = None
            self.xi1_ = ModeFunction(spec.grid, spec.positive / n, spec.tail_plus / n, "xi1")
            self.state_ = basis_state(1, 0, trunc.n_cut)
            self.C_, self.gamma_ = math.inf, 0.0
        else:
            self.xi1_ = self.pair_.xi1
            self.state_ = localized_state(self.eta_tilde_, trunc)
            self.C_, self.gamma_ = self.pair_.C, self.pair_.gamma
        self.fidelity_ = fidelity_single_photon(self.state_)
        self.exact_photon_ = self.pair_ is None
        return self

    def transform(self, X):
        """Columns: localized-state density, single-photon density."""
        check_is_fitted(self, "state_")
        times = check_array(X, ensure_2d=False, dtype=float).ravel()
        e1 = field_profile(self.xi1_, times)
        single = energy_density_single_photon(e1).values
        if self.exact_photon_:
            return np.column_stack([single, single])
        e2 = field_profile(self.pair_.xi2, times)
        local = energy_density_state(self.state_, e1, e2).values
        return np.column_stack([local, single])


class FidelityBoundsModel(BaseEstimator):
    """Fidelity bounds as a function of pulse shape.

    ``predict`` takes rows ``(omega0 sigma, tau / sigma)`` (``inf`` for the
    untruncated limit) and returns columns ``(lower, upper, coherent)``; the
    lower bound uses the exact Fock fidelity when ``exact`` is set.
    """

    def __init__(self, alpha=1.0, exact=True, n_points=DEFAULT_N_POINTS, n_cut=None):
        self.alpha = alpha
        self.exact = exact
        self.n_points = n_points
        self.n_cut = n_cut

    def _validate(self, X):
        X = check_array(X, dtype=float, ensure_all_finite=False)
        if X.shape[1] != 2:
            raise ParameterError("X must have two columns: omega0*sigma and tau/sigma")
        if np.any(~np.isfinite(X[:, 0])) or np.any(np.isnan(X[:, 1])) or np.any(X[:, 1] < 0):
            raise ParameterError("omega0*sigma must be finite and tau/sigma >= 0 (inf allowed)")
        return X

    def fit(self, X, y=None):
        X = self._validate(X)
        self.n_features_in_ = X.shape[1]
        self.config_ = SweepConfig(tuple(np.unique(X[:, 0])) or (1.0,), tuple(np.unique(X[:, 1])),
                                   self.alpha, self.exact, self.n_points, self.n_cut)
        return self

    def predict_rows(self, X):
        check_is_fitted(self, "config_")
        X = self._validate(X)
        return [evaluate_point(float(w), float(t), self.config_) for w, t in X]

    def predict(self, X):
        rows = self.predict_rows(X)
        lower = [r.f_lower_exact if self.exact else r.f_lower_pert for r in rows]
        return np.column_stack([lower, [r.f_upper for r in rows], [r.f_coherent for r in rows]])
