"""Asymptotic key rates for coherent-state CV QKD from asymmetric preparation statistics."""

from .channel import (
    ChannelParams,
    PostChannelStats,
    apply_channel,
    db_to_transmittance,
    estimate_stats,
    reconstruct_pre_channel,
    transform_stats,
)
from .errors import (
    CVQKDError,
    InconsistentEstimate,
    InsufficientData,
    InvalidParameter,
    InvalidStatistics,
    MalformedInput,
    NumericalFailure,
    ReconstructionMismatch,
    UnphysicalParameter,
    UnphysicalState,
    ValidationError,
)
from .gaussian import (
    CovarianceMatrix,
    SymplecticTransform,
    apply,
    beamsplitter,
    condition_on_heterodyne,
    condition_on_homodyne,
    epr_state,
    partial_trace,
    squeezer,
    symplectic_eigenvalues,
    validate_physicality,
    von_neumann_entropy,
)
from .keyrate import (
    KeyRateReport,
    ProtocolConfig,
    holevo_bound,
    key_rate,
    mutual_information_heterodyne,
    mutual_information_homodyne,
)
from .purifier import PurificationParams, PurifiedState, purify, solve_purification, synthesize_network
from .state import MeasuredPreparationStats, TwoModeState, build_equivalent_state, check_equivalence_ratio

__version__ = "0.1.0"
