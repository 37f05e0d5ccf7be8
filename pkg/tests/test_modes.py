import csv
import math

import numpy as np
import pytest
from conftest import MPMATH_ETA, MPMATH_I, bump, orthonormal_pair, spectrum_with
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from photon_locality.exceptions import (
    AccuracyError,
    DegenerateInputError,
    DomainError,
    ExactSinglePhotonError,
    ParameterError,
)
from photon_locality.modes import (
    ModeFunction,
    PulseModePair,
    canonicalize,
    check_modification,
    closed_form_eta_tilde,
    closed_form_inner_product,
    compensation_constant,
    extract_modes,
    field_profile,
    inner_product_squared,
    orthogonalize,
    solve_beta,
    tail_residual,
    write_modes_csv,
    write_profile_csv,
)
from photon_locality.spectral import FrequencyGrid, Spectrum, TruncatedGaussianParams, spectrum_of, truncated_gaussian_spectrum

NEG_TIMES = np.linspace(-10.0, -0.1, 300)


@st.composite
def random_spectra(draw):
    """Smooth spectra vanishing at w = 0 built from a few random complex bumps per side."""
    grid = FrequencyGrid(20.0, 2049)
    u = grid.omega[grid.center:]
    sides = []
    for _ in range(2):
        k = draw(st.integers(1, 3))
        total = np.zeros_like(u, dtype=complex)
        for _ in range(k):
            c = draw(st.floats(0.1, 1.0)) * np.exp(1j * draw(st.floats(0, 2 * math.pi)))
            center = draw(st.floats(0.5, 8.0))
            width = draw(st.floats(0.4, 2.0))
            total += c * bump(u, center, width)
        sides.append(total)
    scale = draw(st.floats(0.05, 1.0))
    pos, neg = sides[0], scale * sides[1]
    return Spectrum(grid, np.concatenate([neg[:0:-1], pos]))


class TestCanonicalize:
    def test_small_eta_unchanged(self):
        s = spectrum_with(0.1, 0.05)
        out = canonicalize(s)
        assert out is s and not out.reflected

    def test_large_eta_reflected(self):
        s = spectrum_with(0.1, 0.05).reflect()
        assert s.eta == pytest.approx(0.9)
        out = canonicalize(s)
        assert out.eta == pytest.approx(0.1, abs=1e-14)
        assert out.reflected is False  # reflecting twice restores the flag

    def test_flag_set_on_reflection(self):
        s = spectrum_with(0.1, 0.05)
        flipped = Spectrum(s.grid, s.values[::-1].conj())
        assert canonicalize(flipped).reflected

    def test_half_is_degenerate(self):
        grid = FrequencyGrid(10.0, 1001)
        with pytest.raises(DegenerateInputError, match="1/2"):
            canonicalize(Spectrum(grid, np.exp(-grid.omega**2)))


class TestOrthogonalize:
    def test_zero_overlap_is_identity(self):
        s = spectrum_with(0.1, 0.0)
        m = orthogonalize(s)
        assert abs(m.beta) < 1e-15 and m.J == pytest.approx(1, abs=1e-15)
        assert m.eta_tilde == pytest.approx(s.eta, abs=1e-15)
        np.testing.assert_allclose(m.values, s.values, atol=1e-15)

    def test_synthetic_eta_tilde(self):
        # eta = 0.1, |I|^2 = 0.05: 0.1 - (1 - sqrt 0.8) 0.8 / (2 sqrt 0.8)
        m = orthogonalize(spectrum_with(0.1, math.sqrt(0.05)))
        expected = 0.1 - (1 - math.sqrt(0.8)) * 0.8 / (2 * math.sqrt(0.8))
        assert expected == pytest.approx(0.05279, abs=1e-5)
        assert m.eta_tilde == pytest.approx(expected, abs=1e-12)
        assert m.eta_tilde_closed_form == pytest.approx(expected, abs=1e-15)

    def test_real_overlap_beta(self):
        beta, J = solve_beta(0.1)
        # numpy.roots on 0.1 b^2 - b + 0.1, smaller root
        assert beta == pytest.approx(min(np.roots([0.1, -1.0, 0.1]).real), abs=1e-15)
        assert beta.real == pytest.approx(0.101021, abs=1e-6)
        assert orthogonalize(spectrum_with(0.1, 0.1)).beta == pytest.approx(beta, abs=1e-14)

    @pytest.mark.parametrize("I", [0.3, 0.2j, 0.1 - 0.25j, -0.49])
    def test_both_roots_solve_quadratic(self, I):
        for branch in ("minus", "plus"):
            b, _ = solve_beta(I, branch)
            assert abs(b**2 * np.conj(I) - b + I) < 1e-14

    def test_plus_root_caught_by_self_checks(self):
        s = spectrum_with(0.1, 0.2)
        m = orthogonalize(s, branch="plus", check=False)
        assert m.quadratic_residual < 1e-12
        assert any("exceeds eta" in p for p in check_modification(m))
        with pytest.raises(AccuracyError):
            orthogonalize(s, branch="plus")

    def test_plus_root_diverges_at_zero(self):
        with pytest.raises(DegenerateInputError):
            solve_beta(0.0, "plus")

    def test_not_canonical(self):
        with pytest.raises(DomainError):
            orthogonalize(spectrum_with(0.1, 0.05).reflect())

    def test_maximal_overlap_is_degenerate(self):
        grid = FrequencyGrid(10.0, 1001)
        with pytest.raises(DegenerateInputError):
            orthogonalize(Spectrum(grid, np.abs(grid.omega) * np.exp(-grid.omega**2)))

    def test_parseval_gate(self, params):
        s = spectrum_of(params)
        broken = Spectrum(s.grid, 1.01 * s.values, s.jet, 1.0)
        with pytest.raises(AccuracyError, match="Parseval"):
            orthogonalize(broken)

    def test_truncated_gaussian(self, modified):
        assert modified.quadratic_residual <= 1e-12
        assert modified.orthogonality <= 1e-12
        assert modified.eta_tilde == pytest.approx(modified.eta_tilde_closed_form, abs=1e-12)
        # closed form evaluated on the mpmath oracle values of eta and I
        eta, I = MPMATH_ETA[(1.0, 3.0)], MPMATH_I[(1.0, 3.0)]
        J = math.sqrt(1 - 4 * abs(I) ** 2)
        assert modified.eta_tilde == pytest.approx(eta - (1 - J) * (1 - 2 * eta) / (2 * J), abs=1e-12)

    def test_modified_pulse_is_causal(self, params, modified):
        # inverse transform of G~ at t < 0 by adaptive quadrature on the closed form
        b = modified.beta

        def gt(w):
            g = truncated_gaussian_spectrum(params, np.array([w, -w]))
            return g[0] - b * np.conj(g[1])

        for t in (-2.0, -0.7):
            re = quad(lambda w: (gt(w) * np.exp(-1j * w * t)).real, -60, 60, limit=400)[0]
            im = quad(lambda w: (gt(w) * np.exp(-1j * w * t)).imag, -60, 60, limit=400)[0]
            assert abs(complex(re, im)) / math.sqrt(2 * math.pi) < 1e-4


class TestRandomSpectra:
    @settings(max_examples=100, deadline=None)
    @given(random_spectra())
    def test_algebra(self, s):
        assume(abs(s.eta - 0.5) > 1e-6)
        s = canonicalize(s)
        m = orthogonalize(s, check=False)
        assert m.quadratic_residual <= 1e-12
        assert m.orthogonality <= 1e-10
        assert m.eta_tilde <= m.eta + 1e-12
        assert abs(m.eta_tilde - m.eta_tilde_closed_form) <= 1e-8
        assert abs(inner_product_squared(m) - closed_form_inner_product(m.eta, m.J)) <= 1e-8
        if m.eta <= 0.1:
            assert inner_product_squared(m) >= 1 - m.eta**2 - 1e-6

    @settings(max_examples=30, deadline=None)
    @given(random_spectra())
    def test_orthonormal_pair(self, s):
        assume(abs(s.eta - 0.5) > 1e-6)
        m = orthogonalize(canonicalize(s))
        if m.eta_tilde < 1e-6:
            return
        p = extract_modes(m)
        assert p.xi1.norm2 == pytest.approx(1, abs=1e-12)
        assert p.xi2.norm2 == pytest.approx(1, abs=1e-10)
        assert abs(p.xi1.inner(p.xi2)) <= 1e-8
        assert p.C**2 == pytest.approx((1 - p.eta_tilde) / p.eta_tilde, rel=1e-12)

    @given(st.floats(0.0, 0.49), st.floats(0.0, 1.0))
    def test_closed_forms(self, eta, frac):
        I = frac * math.sqrt(eta * (1 - eta))
        J = math.sqrt(1 - 4 * I * I)
        et = closed_form_eta_tilde(eta, J)
        assert et <= eta + 1e-15
        assert closed_form_inner_product(eta, J) <= 1 + 1e-12


class TestCompensationConstant:
    def test_values(self):
        C, gamma = compensation_constant(0.2)
        assert C == pytest.approx(2.0, abs=1e-15)
        assert gamma == pytest.approx(0.549306144334055, abs=1e-12)
        assert math.sqrt(C**2 - 1) == pytest.approx(math.sqrt(3))

    def test_exact_photon(self):
        with pytest.raises(ExactSinglePhotonError):
            compensation_constant(0.0)

    @pytest.mark.parametrize("bad", [0.5, 0.7, -0.1])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            compensation_constant(bad)

    @given(st.floats(1e-10, 0.499))
    def test_tanh_inverse(self, et):
        C, gamma = compensation_constant(et)
        assert math.tanh(gamma) * C == pytest.approx(1.0, rel=1e-12)


class TestFields:
    # scipy QAWF Fourier quadrature of sqrt(w) xi1(w) on [0, inf) from the closed-form spectrum
    QAWF = {
        -2.0: 0.02026773651265678 - 0.028993323841307567j,
        -0.5: 0.05376454517676652 - 0.04368350817279468j,
        1.0: 0.2934485930785846 - 0.425624729297144j,
        3.0: -1.435087324059107 + 1.0771308166577018j,
    }

    @pytest.mark.parametrize("t", sorted(QAWF))
    def test_against_fourier_quadrature(self, pair, t):
        assert abs(field_profile(pair.xi1, [t]).values[0] - self.QAWF[t]) < 1e-9

    def test_zero_mode(self, pair):
        zero = pair.xi1.scaled(0.0)
        assert not np.any(field_profile(zero, NEG_TIMES).values)

    def test_homogeneous(self, pair):
        t = np.linspace(-3, 6, 50)
        np.testing.assert_allclose(field_profile(pair.xi1.scaled(2.0), t).values,
                                   2 * field_profile(pair.xi1, t).values, rtol=1e-13, atol=1e-16)

    def test_additive(self, pair):
        t = np.linspace(-3, 6, 50)
        total = field_profile(pair.xi1 + pair.xi2, t).values
        parts = field_profile(pair.xi1, t).values + field_profile(pair.xi2, t).values
        np.testing.assert_allclose(total, parts, rtol=1e-12, atol=1e-15)

    def test_single_mode_has_negative_time_field(self, pair):
        t = np.linspace(-5, -0.01, 200)
        assert np.max(np.abs(field_profile(pair.xi1, t).values)) > 0.01

    def test_mode_tail_gate(self):
        grid = FrequencyGrid(1.0, 101)
        mode = ModeFunction(grid, np.zeros(51), np.array([1.0]))
        with pytest.raises(AccuracyError):
            field_profile(mode, [1.0])

    def test_unsorted_times_rejected(self, pair):
        with pytest.raises(ParameterError):
            field_profile(pair.xi1, [np.nan])


class TestTailResidual:
    def test_small(self, pair):
        assert tail_residual(pair, NEG_TIMES) <= 1e-3

    def test_decreases_under_refinement(self, params):
        coarse = FrequencyGrid.default_for(params, 2**14 + 1)
        values = [tail_residual(extract_modes(orthogonalize(spectrum_of(params, g))), NEG_TIMES)
                  for g in (coarse, coarse.refine(), coarse.refine().refine())]
        assert values[0] > values[1] > values[2]

    def test_uncompensated_control(self, pair):
        grid = pair.xi1.grid
        _, h = orthonormal_pair(grid)
        mode = ModeFunction(grid, h.astype(complex))
        mode = mode + pair.xi1.scaled(-pair.xi1.inner(mode))
        mode = mode.scaled(1 / math.sqrt(mode.norm2))
        control = PulseModePair(pair.xi1, mode, pair.C, pair.gamma, pair.eta_tilde)
        assert abs(pair.xi1.inner(mode)) < 1e-12
        assert tail_residual(control, NEG_TIMES) >= 10 * tail_residual(pair, NEG_TIMES)

    def test_rejects_nonnegative_times(self, pair):
        with pytest.raises(ParameterError):
            tail_residual(pair, [-1.0, 0.0])


def test_csv_outputs(tmp_path, pair):
    write_modes_csv(pair, tmp_path / "m.csv")
    write_profile_csv(field_profile(pair.xi1, [-1.0, 1.0]), tmp_path / "e.csv")
    with open(tmp_path / "m.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["omega", "re_xi1", "im_xi1", "re_xi2", "im_xi2"]
    assert len(rows) == pair.xi1.values.size + 1
    with open(tmp_path / "e.csv") as fh:
        assert len(list(csv.reader(fh))) == 3
