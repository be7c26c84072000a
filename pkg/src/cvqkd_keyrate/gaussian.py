"""Covariance-matrix calculus for zero-mean Gaussian states.

Conventions, fixed for the whole package:

* shot-noise units: the vacuum has covariance ``I`` (``x = a + a^dag``);
* quadrature ordering ``(x1, p1, x2, p2, ...)``;
* symplectic form ``Omega = diag([[0, 1], [-1, 0]], ...)``.

Modes are addressed by zero-based index.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import InvalidParameter, NumericalFailure, UnphysicalParameter, UnphysicalState

#: Quadrature ordering used for every matrix in this package.
QUADRATURE_ORDER = "xpxp"

SYMMETRY_TOL = 1e-12
SYMPLECTIC_TOL = 1e-10
PHYSICALITY_TOL = 1e-9
# symplectic eigenvalues in [1 - ENTROPY_CLAMP, 1) are treated as exactly 1
ENTROPY_CLAMP = 1e-6

_QUADRATURE_INDEX = {"x": 0, "p": 1}


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form for ``n_modes`` modes in xpxp ordering."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def quadrature_index(quadrature: str) -> int:
    try:
        return _QUADRATURE_INDEX[quadrature]
    except KeyError:
        raise InvalidParameter(f"quadrature must be 'x' or 'p', got {quadrature!r}") from None


class CovarianceMatrix:
    """Real symmetric ``2n x 2n`` covariance matrix in shot-noise units.

    Symmetry is checked on construction (relative to the largest entry) and the
    stored matrix is exactly symmetrized. Physicality is *not* checked here; use
    :func:`validate_physicality`.
    """

    __slots__ = ("_matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0 or m.shape[0] % 2:
            raise InvalidParameter(f"covariance matrix must be square with even dimension, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidParameter("covariance matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
            raise InvalidParameter("covariance matrix is not symmetric")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        self._matrix = m

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def n_modes(self) -> int:
        return self._matrix.shape[0] // 2

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 block between modes ``i`` and ``j``."""
        return self._matrix[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    def __array__(self, dtype=None, copy=None):
        return self._matrix if dtype is None else self._matrix.astype(dtype)

    def __repr__(self):
        return f"CovarianceMatrix(n_modes={self.n_modes})"

    def __eq__(self, other):
        if not isinstance(other, CovarianceMatrix):
            return NotImplemented
        return np.array_equal(self._matrix, other._matrix)

    __hash__ = None

    @classmethod
    def vacuum(cls, n_modes: int) -> "CovarianceMatrix":
        return cls(np.eye(2 * n_modes))

    @classmethod
    def thermal(cls, V: float) -> "CovarianceMatrix":
        """Single-mode thermal state of variance ``V``."""
        if V < 1:
            raise UnphysicalParameter(f"thermal variance must be >= 1, got {V}")
        return cls(V * np.eye(2))


class SymplecticTransform:
    """Real ``2n x 2n`` matrix ``S`` with ``S Omega S^T = Omega``."""

    __slots__ = ("_matrix",)

    def __init__(self, matrix):
        s = np.array(matrix, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2 or s.shape[0] == 0:
            raise InvalidParameter(f"symplectic matrix must be square with even dimension, got shape {s.shape}")
        w = omega(s.shape[0] // 2)
        if np.max(np.abs(s @ w @ s.T - w)) >= SYMPLECTIC_TOL:
            raise InvalidParameter("matrix does not preserve the symplectic form")
        s.setflags(write=False)
        self._matrix = s

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def n_modes(self) -> int:
        return self._matrix.shape[0] // 2

    def __matmul__(self, other: "SymplecticTransform") -> "SymplecticTransform":
        return SymplecticTransform(self._matrix @ other._matrix)

    def __array__(self, dtype=None, copy=None):
        return self._matrix if dtype is None else self._matrix.astype(dtype)

    def __repr__(self):
        return f"SymplecticTransform(n_modes={self.n_modes})"


def _as_cov(gamma) -> CovarianceMatrix:
    return gamma if isinstance(gamma, CovarianceMatrix) else CovarianceMatrix(gamma)


def _check_modes(modes: Sequence[int], n_modes: int) -> list[int]:
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise InvalidParameter(f"duplicate mode indices in {modes}")
    for m in modes:
        if not 0 <= m < n_modes:
            raise InvalidParameter(f"mode index {m} out of range for {n_modes}-mode state")
    return modes


def _quad_indices(modes: Sequence[int]) -> np.ndarray:
    return np.array([2 * m + q for m in modes for q in (0, 1)], dtype=int)


# --- states and transforms -------------------------------------------------


def epr_state(V: float) -> CovarianceMatrix:
    """Two-mode squeezed vacuum with marginal variance ``V``.

    The correlation block is ``sqrt(V**2 - 1) * diag(1, -1)``.
    """
    if not V >= 1:
        raise UnphysicalParameter(f"EPR variance must be >= 1, got {V}")
    c = math.sqrt(V * V - 1.0)
    z = np.diag([1.0, -1.0])
    i2 = np.eye(2)
    return CovarianceMatrix(np.block([[V * i2, c * z], [c * z, V * i2]]))


def squeezer(s: float) -> SymplecticTransform:
    """Single-mode squeezer ``diag(e^-s, e^s)``.

    Scales the x variance by ``e^(-2s)`` and the p variance by ``e^(2s)``.
    """
    return SymplecticTransform(np.diag([math.exp(-s), math.exp(s)]))


def beamsplitter(T: float) -> SymplecticTransform:
    """Two-mode coupler with transmittance ``T``.

    ``[[sqrt(T) I, sqrt(1-T) I], [sqrt(1-T) I, -sqrt(T) I]]``
    """
    if not 0.0 <= T <= 1.0:
        raise InvalidParameter(f"transmittance must lie in [0, 1], got {T}")
    t, r = math.sqrt(T), math.sqrt(1.0 - T)
    i2 = np.eye(2)
    return SymplecticTransform(np.block([[t * i2, r * i2], [r * i2, -t * i2]]))


def direct_sum(*states) -> CovarianceMatrix:
    """Block-diagonal product state."""
    mats = [np.asarray(_as_cov(g)) for g in states]
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n))
    k = 0
    for m in mats:
        d = m.shape[0]
        out[k:k + d, k:k + d] = m
        k += d
    return CovarianceMatrix(out)


def embed(S: SymplecticTransform, modes: Sequence[int], n_modes: int) -> np.ndarray:
    """Full ``2n x 2n`` matrix acting as ``S`` on ``modes`` and as identity elsewhere."""
    if len(modes) != S.n_modes:
        raise InvalidParameter(f"transform acts on {S.n_modes} modes but {len(modes)} were given")
    modes = _check_modes(modes, n_modes)
    idx = _quad_indices(modes)
    full = np.eye(2 * n_modes)
    full[np.ix_(idx, idx)] = S.matrix
    return full


def apply(S: SymplecticTransform, gamma, modes: Sequence[int]) -> CovarianceMatrix:
    """Congruence ``S gamma S^T`` with ``S`` acting on the listed modes."""
    gamma = _as_cov(gamma)
    full = embed(S, modes, gamma.n_modes)
    return CovarianceMatrix(full @ gamma.matrix @ full.T)


def partial_trace(gamma, keep: Sequence[int]) -> CovarianceMatrix:
    """Reduced state on ``keep`` (in the given order)."""
    gamma = _as_cov(gamma)
    if len(keep) == 0:
        raise InvalidParameter("partial_trace needs at least one mode to keep")
    idx = _quad_indices(_check_modes(keep, gamma.n_modes))
    return CovarianceMatrix(gamma.matrix[np.ix_(idx, idx)])


def reorder(gamma, order: Sequence[int]) -> CovarianceMatrix:
    """Permute modes so that output mode ``k`` is input mode ``order[k]``."""
    gamma = _as_cov(gamma)
    if len(order) != gamma.n_modes:
        raise InvalidParameter("reorder needs a full permutation of the modes")
    return partial_trace(gamma, order)


# --- spectra and entropies -------------------------------------------------


def symplectic_eigenvalues(gamma) -> np.ndarray:
    """Symplectic spectrum, descending.

    Computed as the positive half of the spectrum of the Hermitian matrix
    ``i sqrt(gamma) Omega sqrt(gamma)``, which is similar to ``i Omega gamma``
    and keeps the ``+-nu`` pairing exact.
    """
    g = _as_cov(gamma)
    n = g.n_modes
    d, u = np.linalg.eigh(g.matrix)
    if d[0] <= 0:
        raise NumericalFailure(f"covariance matrix is not positive definite (min eigenvalue {d[0]:.3g})")
    root = (u * np.sqrt(d)) @ u.T
    herm = 1j * (root @ omega(n) @ root)
    ev = np.linalg.eigvalsh(herm)
    return ev[::-1][:n].copy()


def validate_physicality(gamma, tol: float = PHYSICALITY_TOL) -> np.ndarray:
    """Raise :class:`UnphysicalState` unless every symplectic eigenvalue is ``>= 1 - tol``."""
    try:
        nu = symplectic_eigenvalues(gamma)
    except NumericalFailure as exc:
        raise UnphysicalState(str(exc)) from exc
    if nu[-1] < 1.0 - tol:
        raise UnphysicalState(f"uncertainty relation violated: smallest symplectic eigenvalue {nu[-1]:.12g}")
    return nu


def _log(x, base):
    return np.log(x) if base == math.e else np.log(x) / math.log(base)


def entropy_function(nu, base: float = 2.0):
    """Entropy ``g(nu)`` of a thermal mode with symplectic eigenvalue ``nu``.

    ``g(1) = 0``. Values in ``[1 - 1e-6, 1)`` are clamped to 1; anything
    lower raises :class:`UnphysicalState`.
    """
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if np.any(nu < 1.0 - ENTROPY_CLAMP):
        raise UnphysicalState(f"symplectic eigenvalue below 1: {nu.min():.12g}")
    nu = np.maximum(nu, 1.0)
    plus = (nu + 1.0) / 2.0
    minus = (nu - 1.0) / 2.0
    out = plus * _log(plus, base)
    mask = minus > 0
    out[mask] -= minus[mask] * _log(minus[mask], base)
    return out


def von_neumann_entropy(gamma, base: float = 2.0) -> float:
    """Von Neumann entropy of a Gaussian state, in bits by default (``base=math.e`` for nats)."""
    if not (base == math.e or (base > 0 and base != 1)):
        raise InvalidParameter(f"invalid logarithm base {base}")
    return float(np.sum(entropy_function(symplectic_eigenvalues(gamma), base)))


# --- conditioning ----------------------------------------------------------


def _split(gamma: CovarianceMatrix, mode: int):
    _check_modes([mode], gamma.n_modes)
    rest = [m for m in range(gamma.n_modes) if m != mode]
    if not rest:
        raise InvalidParameter("cannot condition a single-mode state on its only mode")
    ri = _quad_indices(rest)
    mi = _quad_indices([mode])
    m = gamma.matrix
    return m[np.ix_(ri, ri)], m[np.ix_(ri, mi)], m[np.ix_(mi, mi)]


def condition_on_homodyne(gamma, mode: int, quadrature: str = "x") -> CovarianceMatrix:
    """State of the remaining modes after homodyning ``quadrature`` of ``mode``.

    ``gamma_rest - sigma (Pi gamma_m Pi)^MP sigma^T``; the pseudoinverse
    only inverts the measured diagonal element.
    """
    gamma = _as_cov(gamma)
    q = quadrature_index(quadrature)
    a, sigma, b = _split(gamma, mode)
    var = b[q, q]
    if not var > 0:
        raise NumericalFailure(f"measured quadrature variance is not positive ({var})")
    col = sigma[:, q]
    return CovarianceMatrix(a - np.outer(col, col) / var)


def condition_on_heterodyne(gamma, mode: int) -> CovarianceMatrix:
    """State of the remaining modes after ideal heterodyne of ``mode``: ``gamma_rest - sigma (gamma_m + I)^-1 sigma^T``."""
    gamma = _as_cov(gamma)
    a, sigma, b = _split(gamma, mode)
    try:
        inv = np.linalg.inv(b + np.eye(2))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("singular heterodyne block") from exc
    return CovarianceMatrix(a - sigma @ inv @ sigma.T)
