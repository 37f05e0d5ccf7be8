import numpy as np
import pytest
from hypothesis import settings

from photon_locality.modes import extract_modes, orthogonalize
from photon_locality.spectral import FrequencyGrid, Spectrum, TruncatedGaussianParams, spectrum_of

# mpmath.quad (25 digits) of |G|^2 and G(u) G(-u) over [0, 1e6] with the
# erfc closed form, plus the leading analytic tail beyond 1e6.
MPMATH_ETA = {
    (1.0, 3.0): 0.078725439699244434,
    (1.0, 8.0): 0.078649603525142617,
    (0.3, 8.0): 0.33568662027043635,
    (0.5, 8.0): 0.23975006109347667,
    (1.5, 8.0): 0.016947426762344621,
    (1.0, 1.5): 0.10444992368693034,
}
MPMATH_I = {
    (1.0, 3.0): 0.17661033708757545 + 0.05139462762781099j,
    (1.0, 1.5): -0.19213032924341886 - 0.030030115820953884j,
}


settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def params():
    return TruncatedGaussianParams.from_dimensionless(1.0, 3.0)


@pytest.fixture(scope="session")
def spectrum(params):
    return spectrum_of(params)


@pytest.fixture(scope="session")
def modified(spectrum):
    return orthogonalize(spectrum)


@pytest.fixture(scope="session")
def pair(modified):
    return extract_modes(modified)


def bump(u, center, width):
    """Smooth function on u >= 0 vanishing at u = 0."""
    return u * np.exp(-0.5 * ((u - center) / width) ** 2)


def synthetic_spectrum(positive, negative, omega_max=20.0, n_points=4097):
    """Spectrum with prescribed G(w) on w >= 0 and G(-u) on u >= 0 (no tails)."""
    grid = FrequencyGrid(omega_max, n_points)
    u = grid.omega[grid.center:]
    pos = np.asarray(positive(u), dtype=complex)
    neg = np.asarray(negative(u), dtype=complex)
    values = np.concatenate([neg[:0:-1], pos])
    return Spectrum(grid, values)


def orthonormal_pair(grid):
    """Two real functions on w >= 0, orthonormal under the grid's half-line weights."""
    u = grid.omega[grid.center:]
    w = grid.half_weights
    f = bump(u, 3.0, 1.0)
    h = bump(u, 5.0, 1.0)
    f = f / np.sqrt(np.sum(w * f * f))
    h = h - np.sum(w * f * h) * f
    h = h / np.sqrt(np.sum(w * h * h))
    return f, h


def spectrum_with(eta, I_abs, phase=0.0, omega_max=20.0, n_points=4097):
    """Unit-norm spectrum whose negative fraction is ``eta`` and ``|I| = I_abs``."""
    grid = FrequencyGrid(omega_max, n_points)
    f, h = orthonormal_pair(grid)
    a = np.sqrt(1.0 - eta)
    c1 = I_abs / a
    c2 = np.sqrt(eta - c1**2)
    pos = a * f
    neg = np.exp(1j * phase) * (c1 * f + c2 * h)
    # G(-u) must meet G(0) continuously; both vanish at u = 0
    values = np.concatenate([neg[:0:-1], pos])
    return Spectrum(grid, values)
