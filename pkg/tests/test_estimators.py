import math

import numpy as np
import pytest
from sklearn.base import clone

from photon_locality.bounds import evaluate_point, SweepConfig
from photon_locality.estimators import FidelityBoundsModel, LocalizedPhotonState
from photon_locality.exceptions import ParameterError
from photon_locality.fockspace import fidelity_single_photon, localized_state
from photon_locality.observables import localization_metric, QuadratureTimeSeries, standard_times


@pytest.fixture(scope="module")
def fitted():
    return LocalizedPhotonState().fit()


class TestLocalizedPhotonState:
    def test_fit(self, fitted, modified):
        assert fitted.eta_tilde_ == pytest.approx(modified.eta_tilde, abs=1e-14)
        assert fitted.fidelity_ == pytest.approx(fidelity_single_photon(localized_state(modified.eta_tilde)))
        assert 0.99 < fitted.fidelity_ < 1
        assert not fitted.exact_photon_

    def test_transform(self, fitted):
        t = standard_times(1.0, 3.0)
        out = fitted.transform(t.reshape(-1, 1))
        assert out.shape == (t.size, 2)
        local = localization_metric(QuadratureTimeSeries(t, out[:, 0]))
        single = localization_metric(QuadratureTimeSeries(t, out[:, 1]))
        assert local <= 1e-3 and single >= 10 * local

    def test_clone_and_params(self, fitted):
        c = clone(fitted)
        assert c.get_params() == fitted.get_params()
        assert not hasattr(c, "state_")
        c.set_params(omega0_sigma=0.5)
        assert c.fit().eta_ > fitted.eta_

    def test_unfitted(self):
        with pytest.raises(Exception, match="not fitted"):
            LocalizedPhotonState().transform([1.0])


class TestFidelityBoundsModel:
    X = np.array([[0.5, 3.0], [1.0, math.inf], [1.0, 3.0]])

    def test_predict_matches_sweep(self):
        model = FidelityBoundsModel().fit(self.X)
        pred = model.predict(self.X)
        assert pred.shape == (3, 3)
        for (w, t), row in zip(self.X, pred):
            ref = evaluate_point(w, t, SweepConfig((w,), (t,)))
            np.testing.assert_array_equal(row, [ref.f_lower_exact, ref.f_upper, ref.f_coherent])
        assert np.all(pred[:, 0] <= pred[:, 1])

    def test_perturbative(self):
        pred = FidelityBoundsModel(exact=False).fit(self.X).predict(self.X)
        assert np.all(pred[:, 0] < pred[:, 1])

    @pytest.mark.parametrize("bad", [[[1.0]], [[1.0, -3.0]], [[math.nan, 3.0]]])
    def test_bad_input(self, bad):
        with pytest.raises(ParameterError):
            FidelityBoundsModel().fit(bad)

    def test_clone(self):
        m = FidelityBoundsModel(alpha=0.5, n_cut=20)
        assert clone(m).get_params() == m.get_params()
