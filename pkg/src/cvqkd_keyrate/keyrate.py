"""Asymptotic key rate under collective attacks with reverse reconciliation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import ChannelParams, PostChannelStats, apply_channel, transform_stats
from .errors import InvalidParameter, InvalidStatistics, NumericalFailure
from .gaussian import condition_on_heterodyne, condition_on_homodyne, quadrature_index, von_neumann_entropy
from .purifier import MODE_B, PurificationParams, purify
from .state import MeasuredPreparationStats, TwoModeState, build_equivalent_state

CHI_FLOOR = -1e-9
DETECTIONS = ("homodyne", "heterodyne")


def parse_log_base(value) -> float:
    """Accept ``2``, ``'2'``, ``'e'`` or ``math.e``."""
    if isinstance(value, str):
        value = value.strip()
        if value == "e":
            return math.e
        try:
            value = float(value)
        except ValueError:
            raise InvalidParameter(f"log_base must be 2 or e, got {value!r}") from None
    if value == 2 or value == math.e:
        return float(value)
    raise InvalidParameter(f"log_base must be 2 or e, got {value!r}")


@dataclass(frozen=True)
class ProtocolConfig:
    detection: str = "homodyne"
    measured_quadrature: str | None = None
    log_base: float = 2.0
    reconciliation_efficiency: float = 1.0

    def __post_init__(self):
        if self.detection not in DETECTIONS:
            raise InvalidParameter(f"detection must be one of {DETECTIONS}, got {self.detection!r}")
        if self.detection == "homodyne":
            if self.measured_quadrature is None:
                object.__setattr__(self, "measured_quadrature", "x")
            quadrature_index(self.measured_quadrature)
        elif self.measured_quadrature is not None:
            raise InvalidParameter("measured_quadrature only applies to homodyne detection")
        object.__setattr__(self, "log_base", parse_log_base(self.log_base))
        if not 0.0 < self.reconciliation_efficiency <= 1.0:
            raise InvalidParameter(
                f"reconciliation_efficiency must lie in (0, 1], got {self.reconciliation_efficiency}"
            )


@dataclass(frozen=True)
class KeyRateReport:
    I_AB: float
    S_E: float
    S_E_given_B: float
    chi_BE: float
    K: float
    purification: PurificationParams
    channel: ChannelParams


def _log(x: float, base: float) -> float:
    return math.log(x) if base == math.e else math.log(x, base)


def _gain(C: float, var_b: float, V_M: float, q: str) -> float:
    denom = var_b * V_M - C * C
    if not denom > 0:
        raise InvalidStatistics(f"super-physical correlations in quadrature {q}: Var(b) * V_M - C^2 = {denom:.6g}")
    return 1.0 + C * C / denom


def mutual_information_homodyne(post: PostChannelStats, quadrature: str = "x", log_base=2.0) -> float:
    """``1/2 log(1 + C'^2 / (V_B' V_M - C'^2))`` in the measured quadrature."""
    quadrature_index(quadrature)
    base = parse_log_base(log_base)
    V_M, V_Bp, C = post.quadrature(quadrature)
    return 0.5 * _log(_gain(C, V_Bp, V_M, quadrature), base)


def mutual_information_heterodyne(post: PostChannelStats, log_base=2.0) -> float:
    """Sum over both quadratures with the extra heterodyne vacuum unit on Bob's side."""
    base = parse_log_base(log_base)
    total = 1.0
    for q in "xp":
        V_M, V_Bp, C = post.quadrature(q)
        total *= _gain(C, V_Bp + 1.0, V_M, q)
    return 0.5 * _log(total, base)


def holevo_bound(state_pre: TwoModeState, ch: ChannelParams, cfg: ProtocolConfig):
    """Return ``(S_E, S_E_given_B, chi_BE, purification_params)``.

    Eve holds the purification of the whole (A, B, C, D) state after the
    channel, so ``S(E) = S(ABCD)`` and ``S(E|B) = S(ACD|B)``.
    """
    purified = purify(state_pre)
    gamma = apply_channel(purified.gamma_ABCD, MODE_B, ch)
    S_E = von_neumann_entropy(gamma, cfg.log_base)
    if cfg.detection == "homodyne":
        cond = condition_on_homodyne(gamma, MODE_B, cfg.measured_quadrature)
    else:
        cond = condition_on_heterodyne(gamma, MODE_B)
    S_EB = von_neumann_entropy(cond, cfg.log_base)
    chi = S_E - S_EB
    if chi < 0:
        if chi < CHI_FLOOR:
            raise NumericalFailure(f"negative Holevo bound {chi:.3g}")
        chi = 0.0
    return S_E, S_EB, chi, purified.params


def key_rate(stats: MeasuredPreparationStats, ch: ChannelParams, cfg: ProtocolConfig | None = None) -> KeyRateReport:
    """Full evaluation for one scenario: ``K = max(0, beta * I_AB - chi_BE)``."""
    cfg = cfg or ProtocolConfig()
    post = transform_stats(stats, ch)
    if cfg.detection == "homodyne":
        I_AB = mutual_information_homodyne(post, cfg.measured_quadrature, cfg.log_base)
    else:
        I_AB = mutual_information_heterodyne(post, cfg.log_base)
    S_E, S_EB, chi, params = holevo_bound(build_equivalent_state(stats), ch, cfg)
    K = max(0.0, cfg.reconciliation_efficiency * I_AB - chi)
    return KeyRateReport(I_AB=I_AB, S_E=S_E, S_E_given_B=S_EB, chi_BE=chi, K=K, purification=params, channel=ch)
