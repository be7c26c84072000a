"""Equivalent entanglement-based two-mode state from prepare-and-measure statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .gaussian import CovarianceMatrix

RATIO_RTOL = 1e-10


@dataclass(frozen=True)
class MeasuredPreparationStats:
    """Per-quadrature statistics of Alice's modulation and the signal entering the channel.

    V_M_x, V_M_p : modulation data variance (> 0)
    V_B_x, V_B_p : signal variance before the channel (>= 1)
    C_MB_x, C_MB_p : covariance between modulation data and signal (any sign)
    """

    V_M_x: float
    V_M_p: float
    V_B_x: float
    V_B_p: float
    C_MB_x: float
    C_MB_p: float

    def __post_init__(self):
        for name in ("V_M_x", "V_M_p", "V_B_x", "V_B_p", "C_MB_x", "C_MB_p"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameter(f"{name} must be finite, got {value}")
        for q in "xp":
            V_M = getattr(self, f"V_M_{q}")
            V_B = getattr(self, f"V_B_{q}")
            C = getattr(self, f"C_MB_{q}")
            if V_M <= 0:
                raise InvalidParameter(f"V_M_{q} must be positive, got {V_M}")
            if V_B < 1:
                raise InvalidParameter(f"V_B_{q} must be >= 1 (coherent-state protocol), got {V_B}")
            if C * C > V_M * V_B:
                raise InvalidParameter(f"C_MB_{q}^2 exceeds V_M_{q} * V_B_{q} (Cauchy-Schwarz)")

    def quadrature(self, q: str) -> tuple[float, float, float]:
        """``(V_M, V_B, C_MB)`` for quadrature ``'x'`` or ``'p'``."""
        return getattr(self, f"V_M_{q}"), getattr(self, f"V_B_{q}"), getattr(self, f"C_MB_{q}")

    @classmethod
    def symmetric(cls, V_M: float, V_B: float, C_MB: float) -> "MeasuredPreparationStats":
        """Phase-symmetric statistics with correlation ``+C_MB`` in x and ``-C_MB`` in p."""
        return cls(V_M, V_M, V_B, V_B, C_MB, -C_MB)


@dataclass(frozen=True)
class TwoModeState:
    """Two-mode state (A, B) in x/p block-diagonal form with ``V_A = V_B`` per quadrature."""

    gamma: CovarianceMatrix

    def __post_init__(self):
        m = self.gamma.matrix
        if m.shape != (4, 4):
            raise InvalidParameter("TwoModeState needs a 2-mode covariance matrix")
        x, p = [0, 2], [1, 3]
        if np.any(m[np.ix_(x, p)] != 0.0):
            raise InvalidParameter("x-p cross entries of a TwoModeState must vanish")

    @property
    def V_A_x(self) -> float:
        return float(self.gamma.matrix[0, 0])

    @property
    def V_A_p(self) -> float:
        return float(self.gamma.matrix[1, 1])

    @property
    def V_B_x(self) -> float:
        return float(self.gamma.matrix[2, 2])

    @property
    def V_B_p(self) -> float:
        return float(self.gamma.matrix[3, 3])

    @property
    def C_AB_x(self) -> float:
        return float(self.gamma.matrix[0, 2])

    @property
    def C_AB_p(self) -> float:
        return float(self.gamma.matrix[1, 3])

    @classmethod
    def from_entries(cls, V_x, V_p, C_x, C_p, V_A_x=None, V_A_p=None) -> "TwoModeState":
        V_A_x = V_x if V_A_x is None else V_A_x
        V_A_p = V_p if V_A_p is None else V_A_p
        m = np.array([
            [V_A_x, 0.0, C_x, 0.0],
            [0.0, V_A_p, 0.0, C_p],
            [C_x, 0.0, V_x, 0.0],
            [0.0, C_p, 0.0, V_p],
        ])
        return cls(CovarianceMatrix(m))


def build_equivalent_state(stats: MeasuredPreparationStats) -> TwoModeState:
    """Symmetrized (``V_A = V_B``) two-mode state reproducing the measured statistics.

    Per quadrature ``C_AB = C_MB * sqrt((1 + V_B) / V_M)``, which keeps the
    ratio ``C_MB^2 / V_M = C_AB^2 / (V_A + 1)`` and hence the conditional
    states seen after Alice's heterodyne.
    """
    C_AB = {}
    for q in "xp":
        V_M, V_B, C_MB = stats.quadrature(q)
        if V_M <= 0:
            raise InvalidParameter(f"V_M_{q} must be positive, got {V_M}")
        C_AB[q] = C_MB * math.sqrt((1.0 + V_B) / V_M)
    return TwoModeState.from_entries(stats.V_B_x, stats.V_B_p, C_AB["x"], C_AB["p"])


def check_equivalence_ratio(stats: MeasuredPreparationStats, state: TwoModeState, rtol: float = RATIO_RTOL) -> bool:
    """True iff ``C_MB^2 / V_M == C_AB^2 / (V_A + 1)`` in both quadratures (relative ``rtol``)."""
    for q in "xp":
        V_M, _, C_MB = stats.quadrature(q)
        lhs = C_MB * C_MB / V_M
        rhs = getattr(state, f"C_AB_{q}") ** 2 / (getattr(state, f"V_A_{q}") + 1.0)
        if not math.isclose(lhs, rhs, rel_tol=rtol, abs_tol=0.0):
            return False
    return True
