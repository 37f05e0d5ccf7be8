"""Strictly localized approximations to single-photon pulses.

Pipeline: a causal pulse ``g(t)`` (:mod:`.spectral`) is turned into an
orthonormal mode pair with compensation constant ``C`` (:mod:`.modes`), which
fixes a two-mode squeezed construction in Fock space (:mod:`.fockspace`).
:mod:`.observables` checks that its energy density vanishes before the pulse
and :mod:`.bounds` turns the negative-frequency fraction into fidelity bounds.
"""

__version__ = "0.1.0"

from .bounds import BoundsPoint, SweepConfig, coherent_fidelity, fmax_bounds, sweep
from .exceptions import (
    AccuracyError,
    DegenerateInputError,
    DomainError,
    ExactSinglePhotonError,
    ParameterError,
    PhotonLocalityError,
    TruncationError,
    UnsupportedMethodError,
)
from .fockspace import (
    FockTruncation,
    LocalizedStateVector,
    fidelity_single_photon,
    localized_state,
    photon_statistics,
    squeeze_operator,
    squeeze_transform_residual,
)
from .modes import (
    FieldProfile,
    ModifiedSpectrum,
    PulseModePair,
    canonicalize,
    extract_modes,
    field_profile,
    orthogonalize,
    tail_residual,
)
from .observables import (
    energy_density_coherent,
    energy_density_single_photon,
    energy_density_state,
    localization_metric,
)
from .spectral import (
    FrequencyGrid,
    Spectrum,
    TemporalPulse,
    TruncatedGaussianParams,
    eta_infinite_delay,
    eta_of,
    make_truncated_gaussian,
    overlap_I,
    spectrum_of,
)
