"""Scenario files: flat ``key = value`` text with ``#`` comments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .channel import ChannelParams
from .errors import InvalidParameter
from .keyrate import ProtocolConfig
from .state import MeasuredPreparationStats

STATS_KEYS = ("V_M_x", "V_M_p", "V_B_x", "V_B_p", "C_MB_x", "C_MB_p")
GRID_KEYS = ("grid_start_db", "grid_stop_db", "grid_step_db")
NUMERIC_KEYS = STATS_KEYS + ("epsilon", "eta", "beta") + GRID_KEYS
TEXT_KEYS = ("detection", "quadrature", "log_base")
KNOWN_KEYS = NUMERIC_KEYS + TEXT_KEYS

# grid points are rounded to this many decimals to keep CSV output clean
_GRID_DECIMALS = 10


@dataclass(frozen=True)
class Grid:
    start_db: float
    stop_db: float
    step_db: float

    def __post_init__(self):
        if not self.step_db > 0:
            raise InvalidParameter(f"grid_step_db must be > 0, got {self.step_db}")
        if not self.stop_db >= self.start_db:
            raise InvalidParameter("grid_stop_db must be >= grid_start_db")
        if self.start_db < 0:
            raise InvalidParameter("grid_start_db must be >= 0")

    def points(self) -> list[float]:
        n = int(math.floor((self.stop_db - self.start_db) / self.step_db + 1e-9)) + 1
        return [round(self.start_db + i * self.step_db, _GRID_DECIMALS) for i in range(n)]


@dataclass(frozen=True)
class Scenario:
    stats: MeasuredPreparationStats
    protocol: ProtocolConfig
    epsilon: float = 0.0
    eta: float | None = None
    grid: Grid | None = None

    @property
    def channel(self) -> ChannelParams:
        if self.eta is None:
            raise InvalidParameter("missing required key 'eta'")
        return ChannelParams(self.eta, self.epsilon)


def parse_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameter(f"config line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise InvalidParameter(f"config line {lineno}: unknown key '{key}'")
        if key in values:
            raise InvalidParameter(f"config line {lineno}: duplicate key '{key}'")
        values[key] = value
    return values


def _number(values, key):
    try:
        v = float(values[key])
    except ValueError:
        raise InvalidParameter(f"key '{key}': cannot parse {values[key]!r} as a number") from None
    if not math.isfinite(v):
        raise InvalidParameter(f"key '{key}': value must be finite")
    return v


def scenario_from_mapping(values: dict[str, str]) -> Scenario:
    for key in values:
        if key not in KNOWN_KEYS:
            raise InvalidParameter(f"unknown key '{key}'")
    missing = [k for k in STATS_KEYS if k not in values]
    if missing:
        raise InvalidParameter(f"missing required key(s): {', '.join(missing)}")
    stats = MeasuredPreparationStats(**{k: _number(values, k) for k in STATS_KEYS})

    detection = values.get("detection", "homodyne")
    quadrature = values.get("quadrature")
    if detection == "heterodyne" and quadrature is not None:
        raise InvalidParameter("key 'quadrature' only applies to detection = homodyne")
    protocol = ProtocolConfig(
        detection=detection,
        measured_quadrature=quadrature,
        log_base=values.get("log_base", "2"),
        reconciliation_efficiency=_number(values, "beta") if "beta" in values else 1.0,
    )

    grid = None
    present = [k for k in GRID_KEYS if k in values]
    if present:
        absent = [k for k in GRID_KEYS if k not in values]
        if absent:
            raise InvalidParameter(f"missing required key(s): {', '.join(absent)}")
        grid = Grid(*(_number(values, k) for k in GRID_KEYS))
    epsilon = _number(values, "epsilon") if "epsilon" in values else 0.0
    eta = _number(values, "eta") if "eta" in values else None
    scenario = Scenario(stats=stats, protocol=protocol, epsilon=epsilon, eta=eta, grid=grid)
    # validates epsilon (and eta when given)
    ChannelParams(1.0 if eta is None else eta, epsilon)
    return scenario


def load_scenario(path, overrides: dict[str, str] | None = None) -> Scenario:
    values = parse_config_text(Path(path).read_text(encoding="utf-8"))
    values.update(overrides or {})
    return scenario_from_mapping(values)
