"""Four-mode purification of the equivalent two-mode state.

Network (T1 = 1, so the first coupler is the identity)::

    EPR(V1) on (m1, C) --- SQZ(s1) on m1 --\
                                            BS(T2 = 1/2) on (m2, m1) -> (A, B)
    EPR(V2) on (m2, D) --- SQZ(s2) on m2 --/

After the squeezers mode m1 has variances ``V_B - C_AB`` and mode m2 has
``V_B + C_AB`` in each quadrature; the balanced coupler then produces
``V_A = V_B = (w1 + w2) / 2`` and ``C_AB = (w2 - w1) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ReconstructionMismatch, UnphysicalState
from .gaussian import (
    CovarianceMatrix,
    apply,
    beamsplitter,
    direct_sum,
    epr_state,
    partial_trace,
    reorder,
    squeezer,
    symplectic_eigenvalues,
)
from .state import MeasuredPreparationStats, TwoModeState, build_equivalent_state

ANCILLA_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-9
PURITY_TOL = 1e-7

MODE_A, MODE_B, MODE_C, MODE_D = range(4)


@dataclass(frozen=True)
class PurificationParams:
    V1: float
    V2: float
    s1: float
    s2: float
    T1: float = 1.0
    T2: float = 0.5

    def __post_init__(self):
        for name in ("V1", "V2"):
            if getattr(self, name) < 1.0 - ANCILLA_TOL:
                raise UnphysicalState(f"{name} = {getattr(self, name)!r} < 1")
        if self.T1 != 1.0 or self.T2 != 0.5:
            raise UnphysicalState("only the T1 = 1, T2 = 1/2 network is supported")


@dataclass(frozen=True)
class PurifiedState:
    gamma_ABCD: CovarianceMatrix
    params: PurificationParams

    def purity_residual(self) -> float:
        """``max |nu - 1|`` over the symplectic spectrum."""
        return float(np.max(np.abs(symplectic_eigenvalues(self.gamma_ABCD) - 1.0)))


def _ancilla_variance(product: float, name: str) -> float:
    V = math.sqrt(product)
    if V < 1.0 - ANCILLA_TOL:
        raise UnphysicalState(
            f"{name} = {V:.12g} < 1: the two-mode state violates the uncertainty relation"
        )
    return max(V, 1.0)


def solve_purification(state: TwoModeState) -> PurificationParams:
    """Closed-form network parameters for ``state``.

    Raises :class:`UnphysicalState` when one of the products
    ``(V_x -+ C_x)(V_p -+ C_p)`` is not positive (no realization exists) or
    when an EPR source would need variance below 1.
    """
    Vx, Vp = state.V_B_x, state.V_B_p
    Cx, Cp = state.C_AB_x, state.C_AB_p
    minus_x, minus_p = Vx - Cx, Vp - Cp
    plus_x, plus_p = Vx + Cx, Vp + Cp
    if not (minus_x > 0 and minus_p > 0):
        raise UnphysicalState(
            "no purification network exists: (V_B_x - C_AB_x)(V_B_p - C_AB_p) needs both factors positive, "
            f"got {minus_x:.12g} and {minus_p:.12g}"
        )
    if not (plus_x > 0 and plus_p > 0):
        raise UnphysicalState(
            "no purification network exists: (V_B_x + C_AB_x)(V_B_p + C_AB_p) needs both factors positive, "
            f"got {plus_x:.12g} and {plus_p:.12g}"
        )
    V1 = _ancilla_variance(minus_x * minus_p, "V1 = sqrt((V_B_x - C_AB_x)(V_B_p - C_AB_p))")
    V2 = _ancilla_variance(plus_x * plus_p, "V2 = sqrt((V_B_x + C_AB_x)(V_B_p + C_AB_p))")
    s1 = 0.25 * math.log(minus_p / minus_x)
    s2 = 0.25 * math.log(plus_p / plus_x)
    return PurificationParams(V1=V1, V2=V2, s1=s1, s2=s2)


def synthesize_network(params: PurificationParams) -> CovarianceMatrix:
    """Explicit 8x8 covariance matrix of the network output, modes ordered (A, B, C, D)."""
    # working order: m1, C, m2, D
    gamma = direct_sum(epr_state(params.V1), epr_state(params.V2))
    gamma = apply(squeezer(params.s1), gamma, [0])
    gamma = apply(squeezer(params.s2), gamma, [2])
    # outputs: port on m2 -> A, port on m1 -> B
    gamma = apply(beamsplitter(params.T2), gamma, [2, 0])
    return reorder(gamma, [2, 0, 1, 3])


def purify(state: TwoModeState) -> PurifiedState:
    """Solve and synthesize the purification, checking reconstruction and purity."""
    params = solve_purification(state)
    gamma = synthesize_network(params)
    ab = partial_trace(gamma, [MODE_A, MODE_B]).matrix
    err = float(np.max(np.abs(ab - state.gamma.matrix)))
    if err > RECONSTRUCTION_TOL:
        raise ReconstructionMismatch(f"A,B block deviates from the input by {err:.3g}")
    result = PurifiedState(gamma, params)
    residual = result.purity_residual()
    if residual > PURITY_TOL:
        raise ReconstructionMismatch(f"purified state is not pure (residual {residual:.3g})")
    return result


def _purifiable(state: TwoModeState) -> bool:
    Vx, Vp, Cx, Cp = state.V_B_x, state.V_B_p, state.C_AB_x, state.C_AB_p
    mx, mp_, px, pp = Vx - Cx, Vp - Cp, Vx + Cx, Vp + Cp
    return min(mx, mp_, px, pp) > 0 and mx * mp_ >= 1.0 and px * pp >= 1.0


def shrink_to_physical(stats: MeasuredPreparationStats, iterations: int = 80):
    """Scale both correlations ``C_MB`` by the largest ``t <= 1`` that admits a purification.

    Estimated statistics of (nearly) pure preparations scatter to both sides
    of the physical boundary; this pulls them back onto it. Returns
    ``(stats, t)``; ``t == 1`` means the input was already physical.
    """
    def scaled(t):
        return replace(stats, C_MB_x=t * stats.C_MB_x, C_MB_p=t * stats.C_MB_p)

    if _purifiable(build_equivalent_state(stats)):
        return stats, 1.0
    lo, hi = 0.0, 1.0
    if not _purifiable(build_equivalent_state(scaled(lo))):
        raise UnphysicalState("no correlation scaling yields a physical state")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if _purifiable(build_equivalent_state(scaled(mid))):
            lo = mid
        else:
            hi = mid
    return scaled(lo), lo
