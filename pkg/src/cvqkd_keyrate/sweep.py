"""Attenuation sweeps and the asymmetric preparation-noise study."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .channel import ChannelParams
from .keyrate import KeyRateReport, ProtocolConfig, key_rate
from .state import MeasuredPreparationStats

SWEEP_COLUMNS = ("attenuation_db", "eta", "I_AB", "S_E", "S_E_given_B", "chi_BE", "key_rate")

FIG2_MODULATION = 9.0
FIG2_CORRELATION = 9.0
FIG2_EPSILON = 0.07
FIG2_GRID = (0.0, 15.0, 0.1)

# (V_B_x, V_B_p) per variant
FIG2_VARIANTS = {
    "perfect": (10.0, 10.0),
    "noise_p": (10.0, 10.1),
    "noise_x": (10.1, 10.0),
    "noise_both": (10.1, 10.1),
}
PANELS = ("homodyne", "heterodyne")


@dataclass(frozen=True)
class SweepRow:
    attenuation_db: float
    report: KeyRateReport

    def values(self) -> tuple[float, ...]:
        r = self.report
        return (self.attenuation_db, r.channel.eta, r.I_AB, r.S_E, r.S_E_given_B, r.chi_BE, r.K)


def fig2_stats(variant: str) -> MeasuredPreparationStats:
    V_B_x, V_B_p = FIG2_VARIANTS[variant]
    return MeasuredPreparationStats(
        V_M_x=FIG2_MODULATION,
        V_M_p=FIG2_MODULATION,
        V_B_x=V_B_x,
        V_B_p=V_B_p,
        C_MB_x=FIG2_CORRELATION,
        C_MB_p=-FIG2_CORRELATION,
    )


def fig2_protocol(panel: str) -> ProtocolConfig:
    return ProtocolConfig(detection=panel)


def sweep(
    stats: MeasuredPreparationStats,
    protocol: ProtocolConfig,
    epsilon: float,
    attenuations_db: Iterable[float],
) -> list[SweepRow]:
    """Key-rate report at each attenuation, in ascending dB order."""
    return [
        SweepRow(db, key_rate(stats, ChannelParams.from_db(db, epsilon), protocol))
        for db in sorted(attenuations_db)
    ]


def format_number(value: float) -> str:
    return "%.12g" % value


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    lines.extend(",".join(format_number(v) for v in row.values()) for row in rows)
    return "\n".join(lines) + "\n"
