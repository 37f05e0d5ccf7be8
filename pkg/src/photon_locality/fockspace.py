"""Truncated two-mode Fock space: squeezing, the shifted squeezed state, fidelities.

Basis ordering is row-major with mode 1 outer: ``|n1, n2>`` has index
``n1 * (n_cut + 1) + n2``.

The squeeze generator ``gamma (a1 a2 - a1^dag a2^dag)`` conserves
``n1 - n2``, so besides the dense operator every routine can work one
sector at a time.  Within a truncation both routes give identical numbers;
the sector route is what makes large cutoffs cheap.
"""

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm

from .exceptions import DomainError, ParameterError, TruncationError

DEFAULT_N_CUT = 30
TAIL_BOUND = 1e-12


@dataclass(frozen=True)
class FockTruncation:
    """Photon-number cutoff per mode.

    With ``auto=True`` the cutoff is raised until ``tanh(gamma)^n_cut`` drops
    below the tail bound; with ``auto=False`` a too-small cutoff is an error.
    """

    n_cut: int = DEFAULT_N_CUT
    auto: bool = True

    def __post_init__(self):
        n = int(self.n_cut)
        if n != self.n_cut or n < 2:
            raise ParameterError(f"n_cut must be an integer >= 2, got {self.n_cut!r}")
        object.__setattr__(self, "n_cut", n)

    @property
    def dim(self):
        return (self.n_cut + 1) ** 2

    def resolve(self, gamma):
        """Return a truncation adequate for ``gamma`` (raised or validated)."""
        need = required_n_cut(gamma)
        if self.n_cut >= need:
            return self
        if self.auto:
            return FockTruncation(need, self.auto)
        raise TruncationError(
            f"n_cut = {self.n_cut} leaves a squeezed-vacuum tail tanh(gamma)^n_cut = "
            f"{math.tanh(gamma) ** self.n_cut:.3g} >= {TAIL_BOUND:g}; need n_cut >= {need}")


def required_n_cut(gamma, bound=TAIL_BOUND):
    """Smallest cutoff with ``tanh(gamma)^n_cut < bound``."""
    t = math.tanh(gamma)
    if t == 0:
        return 2
    return max(2, int(math.floor(math.log(bound) / math.log(t))) + 1)


def _resolve(trunc, gamma):
    if trunc is None:
        trunc = FockTruncation()
    elif isinstance(trunc, int):
        trunc = FockTruncation(trunc, auto=False)
    return trunc.resolve(gamma)


def annihilation(n_cut):
    """Single-mode ``a`` on ``|0>, ..., |n_cut>``."""
    return np.diag(np.sqrt(np.arange(1, n_cut + 1, dtype=float)), 1)


def two_mode_ladders(n_cut):
    """``(a1, a2)`` as dense matrices on the two-mode space."""
    a = annihilation(n_cut)
    eye = np.eye(n_cut + 1)
    return np.kron(a, eye), np.kron(eye, a)


def index(n1, n2, n_cut):
    return n1 * (n_cut + 1) + n2


def block_indices(n_cut, m):
    """Indices of ``|n1, n2>`` with ``n1, n2 <= m``."""
    n1, n2 = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
    return index(n1, n2, n_cut).ravel()


@dataclass(frozen=True)
class TwoModeOperator:
    matrix: np.ndarray
    n_cut: int

    def restrict(self, m):
        idx = block_indices(self.n_cut, m)
        return self.matrix[np.ix_(idx, idx)]


def check_gamma(gamma):
    gamma = float(gamma)
    if not math.isfinite(gamma) or gamma < 0:
        raise ParameterError(f"gamma must be finite and >= 0, got {gamma!r}")
    return gamma


def squeeze_operator(gamma, trunc=None):
    """Dense ``exp(gamma (a1 a2 - a1^dag a2^dag))`` on the truncated space."""
    gamma = check_gamma(gamma)
    trunc = _resolve(trunc, gamma)
    a1, a2 = two_mode_ladders(trunc.n_cut)
    pair = a1 @ a2
    return TwoModeOperator(expm(gamma * (pair - pair.T)), trunc.n_cut)


def two_mode_squeezed_vacuum(gamma, n_cut):
    """Closed form ``sech(gamma) sum_n (-tanh gamma)^n |n, n>``."""
    gamma = check_gamma(gamma)
    vec = np.zeros((n_cut + 1) ** 2, dtype=complex)
    n = np.arange(n_cut + 1)
    vec[index(n, n, n_cut)] = (-math.tanh(gamma)) ** n / math.cosh(gamma)
    return vec


def _sector_basis(delta, n_cut):
    # k = min(n1, n2) runs over 0 .. n_cut - |delta|
    k = np.arange(n_cut - abs(delta) + 1)
    return k + max(delta, 0), k + max(-delta, 0)


def sector_squeeze(gamma, delta, n_cut):
    """Squeeze operator restricted to the sector ``n1 - n2 = delta`` (basis ordered by ``min(n1, n2)``)."""
    n1, n2 = _sector_basis(delta, n_cut)
    lower = np.zeros((n1.size, n1.size))
    off = np.sqrt(n1[1:] * n2[1:].astype(float))
    lower[np.arange(n1.size - 1), np.arange(1, n1.size)] = off  # a1 a2
    return expm(gamma * (lower - lower.T))


def eta_tilde_to_gamma(eta_tilde):
    """``gamma = atanh(sqrt(eta~ / (1 - eta~)))``, i.e. ``tanh(gamma) = 1 / C``."""
    eta_tilde = float(eta_tilde)
    if not (0.0 <= eta_tilde < 0.5):
        raise DomainError(f"eta_tilde must be in [0, 1/2), got {eta_tilde!r}")
    return math.atanh(math.sqrt(eta_tilde / (1.0 - eta_tilde)))


@dataclass(frozen=True)
class TwoModeState:
    """A generic two-mode state vector (used for vacuum, number states and test states)."""

    vector: np.ndarray
    n_cut: int
    eta_tilde: Optional[float] = None
    label: str = ""


def basis_state(n1, n2, n_cut):
    vec = np.zeros((n_cut + 1) ** 2, dtype=complex)
    vec[index(n1, n2, n_cut)] = 1.0
    return TwoModeState(vec, n_cut, None, f"|{n1},{n2}>")


@dataclass(frozen=True)
class LocalizedStateVector:
    """The state ``S^dag A1^dag S |0>`` with its ladder coefficients on ``|n+1, n>``.

    ``ladder[n]`` multiplies ``|n+1, n>``; the global phase makes
    ``ladder[0]`` real and positive.  ``tail_mass`` is the norm lost to the
    cutoff before normalization.
    """

    vector: np.ndarray
    ladder: np.ndarray
    gamma: float
    eta_tilde: float
    n_cut: int
    tail_mass: float

    @property
    def c1(self):
        return self.ladder[0]

    @property
    def off_ladder_mass(self):
        n = np.arange(self.ladder.size)
        on = np.sum(np.abs(self.vector[index(n + 1, n, self.n_cut)]) ** 2)
        return float(max(0.0, np.sum(np.abs(self.vector) ** 2) - on))


def _ladder_state(ladder, gamma, eta_tilde, n_cut, tail_mass):
    vec = np.zeros((n_cut + 1) ** 2, dtype=complex)
    n = np.arange(ladder.size)
    vec[index(n + 1, n, n_cut)] = ladder
    return LocalizedStateVector(vec, ladder, gamma, eta_tilde, n_cut, tail_mass)


def localized_state(eta_tilde, trunc=None, method="block"):
    """Build ``|eta_12> = S^dag A1^dag S |0>`` for squeezing fixed by ``eta_tilde``.

    Parameters
    ----------
    eta_tilde : float
        Negative-frequency fraction of the modified pulse, in ``[0, 1/2)``.
    trunc : FockTruncation or int, optional
        Cutoff; an ``int`` is taken literally (no automatic raise).
    method : {'block', 'dense'}
        Sector-wise or full-space matrix exponentials.
    """
    gamma = eta_tilde_to_gamma(eta_tilde)
    n_cut = _resolve(trunc, gamma).n_cut
    if method == "block":
        vac = np.zeros(n_cut + 1)
        vac[0] = 1.0
        squeezed = sector_squeeze(gamma, 0, n_cut) @ vac          # on |n, n>
        shifted = squeezed[:n_cut]                                # A1^dag: |n, n> -> |n+1, n>
        ladder = sector_squeeze(gamma, 1, n_cut).T @ shifted      # S^dag on |n+1, n>
        ladder = ladder.astype(complex)
    elif method == "dense":
        S = squeeze_operator(gamma, FockTruncation(n_cut, auto=False)).matrix
        vac = np.zeros((n_cut + 1) ** 2)
        vac[0] = 1.0
        squeezed = S @ vac
        shift = np.kron(np.diag(np.ones(n_cut), -1), np.eye(n_cut + 1))
        full = S.conj().T @ (shift @ squeezed)
        n = np.arange(n_cut)
        ladder = full[index(n + 1, n, n_cut)].astype(complex)
    else:
        raise ParameterError(f"unknown method {method!r}")
    norm2 = float(np.sum(np.abs(ladder) ** 2))
    tail_mass = max(0.0, 1.0 - norm2)
    if tail_mass > TAIL_BOUND:
        raise TruncationError(f"truncation tail mass {tail_mass:.3g} exceeds {TAIL_BOUND:g}")
    phase = ladder[0] / abs(ladder[0])
    ladder = ladder / (phase * math.sqrt(norm2))
    return _ladder_state(ladder, gamma, float(eta_tilde), n_cut, tail_mass)


def fidelity_single_photon(state):
    """``|<1, 0 | state>|``."""
    return float(abs(state.vector[index(1, 0, state.n_cut)]))


def fidelity_series(eta_tilde, terms=None):
    """Closed-form fidelity ``(1 - t^2)^(3/2) sum_n sqrt(n+1) t^(2n)``, ``t = tanh(gamma)``."""
    t2 = float(eta_tilde) / (1.0 - float(eta_tilde))
    if terms is None:
        terms = required_n_cut(math.atanh(math.sqrt(t2)), 1e-17) + 1
    n = np.arange(terms)
    return float((1.0 - t2) ** 1.5 * np.sum(np.sqrt(n + 1.0) * t2**n))


class TransformResidual(NamedTuple):
    block: float
    in_place: float
    full: float
    working_cut: int
    settled: bool


def _sector_transform(gamma, C, delta, cut, squeeze):
    """``S (a1 - C a2^dag) S^dag + sqrt(C^2 - 1) a2^dag`` from sector ``delta`` to ``delta - 1``."""
    n1, n2 = _sector_basis(delta, cut)
    m1, m2 = _sector_basis(delta - 1, cut)
    # sector bases are ordered by k = min(n1, n2)
    a1 = np.zeros((m1.size, n1.size))
    a2d = np.zeros((m1.size, n1.size))
    for j, (a, b) in enumerate(zip(n1, n2)):
        if a > 0:
            a1[min(a - 1, b), j] = math.sqrt(a)
        if b < cut:
            a2d[min(a, b + 1), j] = math.sqrt(b + 1)
    op = squeeze(delta - 1) @ (a1 - C * a2d) @ squeeze(delta).T + math.sqrt(C * C - 1.0) * a2d
    return op, (n1, n2), (m1, m2)


def _transform_norm(gamma, C, cut, m):
    """Operator norm over all sectors, keeping only ``n1, n2 <= m`` on both sides."""
    cache = {}

    def squeeze(delta):
        if delta not in cache:
            cache[delta] = sector_squeeze(gamma, delta, cut)
        return cache[delta]

    worst = 0.0
    for delta in range(max(-cut + 1, -m), min(cut, m) + 1):
        op, (n1, n2), (m1, m2) = _sector_transform(gamma, C, delta, cut, squeeze)
        rows = (m1 <= m) & (m2 <= m)
        cols = (n1 <= m) & (n2 <= m)
        if rows.any() and cols.any():
            worst = max(worst, float(np.linalg.norm(op[np.ix_(rows, cols)], 2)))
    return worst


def squeeze_transform_residual(eta_tilde, trunc=None, headroom=True, details=False, max_factor=8):
    """Norm of ``S (a1 - C a2^dag) S^dag + sqrt(C^2 - 1) a2^dag`` on the block ``n1, n2 <= n_cut / 2``.

    The identity is exact on the infinite space.  A cutoff corrupts it from
    the top levels down, and within a single truncation the damage reaches
    deep into the block.  With ``headroom=True`` the operators are built on a
    larger working cutoff, grown by factors of 1.5 (at most ``max_factor``
    times ``n_cut``) until the block value settles, and then restricted.

    With ``details=True`` a :class:`TransformResidual` is returned with the
    block value, the value computed in place at ``n_cut``, the full-space norm
    at ``n_cut``, the working cutoff and whether the value settled.
    """
    gamma = eta_tilde_to_gamma(eta_tilde)
    if gamma == 0:
        raise DomainError("eta_tilde = 0 gives an infinite compensation constant")
    n_cut = _resolve(trunc, gamma).n_cut
    C = 1.0 / math.tanh(gamma)
    m = n_cut // 2
    in_place = _transform_norm(gamma, C, n_cut, m)
    block, cut, settled = in_place, n_cut, not headroom
    if headroom:
        while cut < max_factor * n_cut:
            nxt_cut = min(int(math.ceil(1.5 * cut)), max_factor * n_cut)
            nxt = _transform_norm(gamma, C, nxt_cut, m)
            settled = abs(nxt - block) <= 1e-12 + 1e-3 * nxt
            cut, block = nxt_cut, nxt
            if settled:
                break
    if not details:
        return block
    full = _transform_norm(gamma, C, n_cut, n_cut)
    return TransformResidual(block, in_place, full, cut, settled)


def photon_statistics(state):
    """Total photon-number distribution ``p_N``, ``N = 0 .. 2 n_cut``."""
    n_cut = state.n_cut
    probs = np.abs(np.asarray(state.vector).reshape(n_cut + 1, n_cut + 1)) ** 2
    out = np.zeros(2 * n_cut + 1)
    n1, n2 = np.meshgrid(np.arange(n_cut + 1), np.arange(n_cut + 1), indexing="ij")
    np.add.at(out, (n1 + n2).ravel(), probs.ravel())
    return out


def moments(state):
    """``(<a_m a_n>, <a_m^dag a_n>)`` for ``m, n`` in {1, 2} as 2x2 arrays."""
    n_cut = state.n_cut
    psi = np.asarray(state.vector, dtype=complex).reshape(n_cut + 1, n_cut + 1)
    sq = np.sqrt(np.arange(n_cut + 1, dtype=float))

    def lower(x, mode):
        out = np.zeros_like(x)
        if mode == 0:
            out[:-1, :] = sq[1:, None] * x[1:, :]
        else:
            out[:, :-1] = sq[None, 1:] * x[:, 1:]
        return out

    single = [lower(psi, 0), lower(psi, 1)]
    aa = np.empty((2, 2), dtype=complex)
    ada = np.empty((2, 2), dtype=complex)
    for m in range(2):
        for n in range(2):
            aa[m, n] = np.vdot(psi, lower(single[n], m))
            ada[m, n] = np.vdot(single[m], single[n])
    return aa, ada


def state_to_dict(state):
    ladder = [{"n": int(n + 1), "re": float(c.real), "im": float(c.imag)} for n, c in enumerate(state.ladder)]
    probs = photon_statistics(state)
    return {
        "eta_tilde": float(state.eta_tilde),
        "gamma": float(state.gamma),
        "n_cut": int(state.n_cut),
        "ladder": ladder,
        "photon_number_probs": [float(p) for p in probs],
    }


def state_from_dict(data):
    """Rebuild a :class:`LocalizedStateVector` from :func:`state_to_dict` output."""
    try:
        n_cut = int(data["n_cut"])
        entries = sorted(data["ladder"], key=lambda e: int(e["n"]))
        ladder = np.array([complex(float(e["re"]), float(e["im"])) for e in entries])
        gamma = float(data["gamma"])
        eta_tilde = float(data["eta_tilde"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed state record: {exc}") from exc
    if ladder.size > n_cut:
        raise ParameterError("ladder longer than the cutoff allows")
    norm2 = float(np.sum(np.abs(ladder) ** 2))
    return _ladder_state(ladder, gamma, eta_tilde, n_cut, max(0.0, 1.0 - norm2))


def write_state_json(state, path, extra=None):
    """Write the state record; ``extra`` keys (eta, C, fidelity, ...) are merged in."""
    record = state_to_dict(state)
    if extra:
        record.update(extra)
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_state_json(path):
    with open(path) as fh:
        return state_from_dict(json.load(fh))
