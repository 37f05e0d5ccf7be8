"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`PhotonLocalityError`; the concrete classes also inherit from the
closest builtin so callers can keep catching ``ValueError`` and friends.
"""


class PhotonLocalityError(Exception):
    """Base class for all library errors."""


class ParameterError(PhotonLocalityError, ValueError):
    """A parameter is outside its admissible set (negative width, empty grid, ...)."""


class DomainError(PhotonLocalityError, ValueError):
    """A derived quantity (eta, eta_tilde) is outside the range an operation accepts."""


class DegenerateInputError(PhotonLocalityError, ValueError):
    """The input sits on an excluded limiting case (zero norm, eta = 1/2, |I| = 1/2)."""


class ExactSinglePhotonError(DegenerateInputError):
    """eta_tilde vanishes: the compensation constant is infinite.

    Callers should treat the target as an exact single photon ``|1, 0>``.
    """


class AccuracyError(PhotonLocalityError, ArithmeticError):
    """A numerical self-check (Parseval, orthogonality, closed form) failed."""


class UnsupportedMethodError(PhotonLocalityError, ValueError):
    """The requested evaluation method is not available for this input."""


class TruncationError(PhotonLocalityError, ArithmeticError):
    """The Fock-space cutoff is too small for the requested squeezing."""
