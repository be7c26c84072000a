"""Lossy, noisy phase-insensitive channel and parameter estimation.

Excess noise ``epsilon`` is referred to the channel input, so a mode of
variance ``V`` leaves the channel with ``eta * (V + epsilon) + 1 - eta``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    InconsistentEstimate,
    InsufficientData,
    InvalidParameter,
    InvalidStatistics,
    MalformedInput,
)
from .gaussian import CovarianceMatrix, _as_cov, _check_modes
from .state import MeasuredPreparationStats

HETERODYNE_COLUMNS = ("m_x", "m_p", "b_x", "b_p")
HOMODYNE_COLUMNS = ("m_x", "m_p", "basis", "b")
PROTOCOLS = ("homodyne", "heterodyne")


@dataclass(frozen=True)
class ChannelParams:
    eta: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise InvalidParameter(f"transmittance eta must lie in (0, 1], got {self.eta}")
        if not (self.epsilon >= 0.0 and math.isfinite(self.epsilon)):
            raise InvalidParameter(f"excess noise epsilon must be >= 0, got {self.epsilon}")

    @classmethod
    def from_db(cls, attenuation_db: float, epsilon: float = 0.0) -> "ChannelParams":
        return cls(db_to_transmittance(attenuation_db), epsilon)


@dataclass(frozen=True)
class PostChannelStats:
    """Statistics measured after the channel.

    ``V_Bp_q`` is the variance of the signal arriving at Bob and ``C_MBp_q``
    its covariance with Alice's modulation data. The modulation variances
    ``V_M_q`` pass through unchanged.
    """

    V_Bp_x: float
    V_Bp_p: float
    C_MBp_x: float
    C_MBp_p: float
    V_M_x: float
    V_M_p: float

    def __post_init__(self):
        for name in ("V_Bp_x", "V_Bp_p", "C_MBp_x", "C_MBp_p", "V_M_x", "V_M_p"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidStatistics(f"{name} is not finite")
        for q in "xp":
            if getattr(self, f"V_M_{q}") <= 0:
                raise InvalidStatistics(f"V_M_{q} must be positive")

    def quadrature(self, q: str) -> tuple[float, float, float]:
        """``(V_M, V_Bp, C_MBp)`` for quadrature ``'x'`` or ``'p'``."""
        return getattr(self, f"V_M_{q}"), getattr(self, f"V_Bp_{q}"), getattr(self, f"C_MBp_{q}")


def db_to_transmittance(attenuation_db: float) -> float:
    if not attenuation_db >= 0:
        raise InvalidParameter(f"attenuation must be >= 0 dB, got {attenuation_db}")
    return 10.0 ** (-attenuation_db / 10.0)


def apply_channel(gamma, mode: int, ch: ChannelParams) -> CovarianceMatrix:
    """Send ``mode`` of ``gamma`` through the channel ``ch``."""
    gamma = _as_cov(gamma)
    _check_modes([mode], gamma.n_modes)
    m = np.array(gamma.matrix)
    sl = slice(2 * mode, 2 * mode + 2)
    root = math.sqrt(ch.eta)
    m[sl, :] *= root
    m[:, sl] *= root
    # the diagonal block picked up eta from the two scalings above
    m[sl, sl] += (ch.eta * ch.epsilon + 1.0 - ch.eta) * np.eye(2)
    return CovarianceMatrix(m)


def transform_stats(stats: MeasuredPreparationStats, ch: ChannelParams) -> PostChannelStats:
    """Forward model: preparation statistics to what Bob measures."""
    root = math.sqrt(ch.eta)
    return PostChannelStats(
        V_Bp_x=ch.eta * (stats.V_B_x + ch.epsilon) + 1.0 - ch.eta,
        V_Bp_p=ch.eta * (stats.V_B_p + ch.epsilon) + 1.0 - ch.eta,
        C_MBp_x=root * stats.C_MB_x,
        C_MBp_p=root * stats.C_MB_p,
        V_M_x=stats.V_M_x,
        V_M_p=stats.V_M_p,
    )


def reconstruct_pre_channel(post: PostChannelStats, ch: ChannelParams) -> MeasuredPreparationStats:
    """Invert :func:`transform_stats` for known ``eta`` and ``epsilon``."""
    root = math.sqrt(ch.eta)
    V_B = {}
    for q in "xp":
        V_B[q] = (getattr(post, f"V_Bp_{q}") - (1.0 - ch.eta)) / ch.eta - ch.epsilon
        if V_B[q] < 1.0:
            raise InconsistentEstimate(
                f"reconstructed V_B_{q} = {V_B[q]:.12g} < 1: channel parameters are inconsistent with the data"
            )
    try:
        return MeasuredPreparationStats(
            V_M_x=post.V_M_x,
            V_M_p=post.V_M_p,
            V_B_x=V_B["x"],
            V_B_p=V_B["p"],
            C_MB_x=post.C_MBp_x / root,
            C_MB_p=post.C_MBp_p / root,
        )
    except InvalidParameter as exc:
        raise InconsistentEstimate(str(exc)) from exc


# --- estimation from samples -----------------------------------------------


def _columns_from_rows(samples: Iterable[Mapping], protocol: str) -> dict[str, list]:
    cols = HETERODYNE_COLUMNS if protocol == "heterodyne" else HOMODYNE_COLUMNS
    out: dict[str, list] = {c: [] for c in cols}
    for line, rec in enumerate(samples, start=2):
        for c in cols:
            if rec.get(c) is None:
                raise MalformedInput(f"missing field {c}", line)
            out[c].append(rec[c])
    return out


def _float_column(values, name: str) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        for i, v in enumerate(values):
            try:
                float(v)
            except (TypeError, ValueError):
                raise MalformedInput(f"{name}: cannot parse {v!r} as a number", i + 2) from None
        raise
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        i = int(bad[0])
        raise MalformedInput(f"{name}: non-finite value {values[i]!r}", i + 2)
    return arr


def _require(n: int, what: str):
    if n < 2:
        raise InsufficientData(f"need at least 2 records for {what}, got {n}")


def _nonzero(value: float, name: str):
    if not value > 0:
        raise InsufficientData(f"sample variance of {name} is zero")


def estimate_stats(samples, protocol: str) -> PostChannelStats:
    """Unbiased (N - 1) moment estimates from paired records.

    ``samples`` is either an iterable of records (mappings) or a mapping of
    columns. Heterodyne records carry ``m_x, m_p, b_x, b_p``; homodyne
    records carry ``m_x, m_p, basis, b`` and contribute to the tagged
    quadrature only. Record ``i`` is reported as CSV line ``i + 2``.

    Heterodyne outcomes are taken unscaled, ``b_q = x_q + vacuum``, so that
    ``Var(b_q) = V_Bp_q + 1`` and ``Cov(m_q, b_q) = C_MBp_q``.
    """
    if protocol not in PROTOCOLS:
        raise InvalidParameter(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    cols = HETERODYNE_COLUMNS if protocol == "heterodyne" else HOMODYNE_COLUMNS
    if isinstance(samples, Mapping):
        missing = [c for c in cols if c not in samples]
        if missing:
            raise MalformedInput(f"missing column(s) {', '.join(missing)}")
        raw = samples
    else:
        raw = _columns_from_rows(samples, protocol)

    n = len(raw["m_x"])
    if any(len(raw[c]) != n for c in cols):
        raise MalformedInput("columns have different lengths")
    m = {"x": _float_column(raw["m_x"], "m_x"), "p": _float_column(raw["m_p"], "m_p")}
    if protocol == "heterodyne":
        b = {"x": _float_column(raw["b_x"], "b_x"), "p": _float_column(raw["b_p"], "b_p")}
        pairs = {q: (m[q], b[q]) for q in "xp"}
    else:
        basis = np.char.strip(np.asarray(raw["basis"], dtype=str))
        bad = np.flatnonzero((basis != "x") & (basis != "p"))
        if bad.size:
            raise MalformedInput(f"basis must be 'x' or 'p', got {basis[bad[0]]!r}", int(bad[0]) + 2)
        values = _float_column(raw["b"], "b")
        pairs = {q: (m[q][basis == q], values[basis == q]) for q in "xp"}

    _require(n, "the modulation variances")
    for q in "xp":
        _require(len(pairs[q][1]), f"quadrature {q}")

    V_M, V_Bp, C = {}, {}, {}
    for q in "xp":
        V_M[q] = float(np.var(m[q], ddof=1))
        _nonzero(V_M[q], f"m_{q}")
        cov = np.cov(np.vstack(pairs[q]), ddof=1)
        var_b = float(cov[1, 1])
        _nonzero(var_b, f"Bob's {q} outcomes")
        V_Bp[q] = var_b - 1.0 if protocol == "heterodyne" else var_b
        C[q] = float(cov[0, 1])
    return PostChannelStats(
        V_Bp_x=V_Bp["x"], V_Bp_p=V_Bp["p"],
        C_MBp_x=C["x"], C_MBp_p=C["p"],
        V_M_x=V_M["x"], V_M_p=V_M["p"],
    )


def read_samples(source, protocol: str) -> dict[str, list[str]]:
    """Parse a sample CSV (path or text stream) into raw string columns."""
    if protocol not in PROTOCOLS:
        raise InvalidParameter(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_samples(fh, protocol)
    expected = HETERODYNE_COLUMNS if protocol == "heterodyne" else HOMODYNE_COLUMNS
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None:
        raise MalformedInput("empty sample file (header row required)", 1)
    header = [h.strip() for h in header]
    missing = [c for c in expected if c not in header]
    if missing:
        raise MalformedInput(f"missing column(s) {', '.join(missing)}", 1)
    index = [header.index(c) for c in expected]
    width = len(header)
    columns: dict[str, list[str]] = {c: [] for c in expected}
    appenders = [columns[c].append for c in expected]
    for line, row in enumerate(reader, start=2):
        if len(row) != width:
            raise MalformedInput(f"expected {width} fields, got {len(row)}", line)
        for app, i in zip(appenders, index):
            app(row[i])
    return columns


def simulate_samples(
    post: PostChannelStats,
    protocol: str,
    n: int,
    seed: int,
    quadrature_prob: float = 0.5,
) -> dict[str, np.ndarray]:
    """Draw ``n`` synthetic records with the given post-channel statistics.

    Homodyne records pick the basis at random with probability
    ``quadrature_prob`` for x.
    """
    if protocol not in PROTOCOLS:
        raise InvalidParameter(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    rng = np.random.default_rng(seed)
    out: dict[str, np.ndarray] = {}
    b = {}
    for q in "xp":
        V_M, V_Bp, C = post.quadrature(q)
        var_b = V_Bp + 1.0 if protocol == "heterodyne" else V_Bp
        cov = np.array([[V_M, C], [C, var_b]])
        draw = rng.multivariate_normal(np.zeros(2), cov, size=n, method="cholesky")
        out[f"m_{q}"] = draw[:, 0]
        b[q] = draw[:, 1]
    if protocol == "heterodyne":
        out["b_x"], out["b_p"] = b["x"], b["p"]
    else:
        is_x = rng.random(n) < quadrature_prob
        out["basis"] = np.where(is_x, "x", "p")
        out["b"] = np.where(is_x, b["x"], b["p"])
    return out


def write_samples(records: Mapping[str, np.ndarray], protocol: str, stream) -> None:
    """Write records produced by :func:`simulate_samples` as CSV (shortest round-trip floats)."""
    cols = HETERODYNE_COLUMNS if protocol == "heterodyne" else HOMODYNE_COLUMNS
    stream.write(",".join(cols) + "\n")
    columns = [
        np.asarray(records[c], dtype=str).tolist() if c == "basis"
        else [repr(v) for v in np.asarray(records[c], dtype=float).tolist()]
        for c in cols
    ]
    for row in zip(*columns):
        stream.write(",".join(row) + "\n")
