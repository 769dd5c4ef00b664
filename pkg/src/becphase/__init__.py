"""Relative-phase emergence between two condensates under spin measurements."""

from becphase.approx import (
    CircularStats,
    LambdaPosterior,
    circular_stats,
    conditional_next,
    joint_probability_lambda,
    posterior,
    predict_from_posterior,
)
from becphase.config import ConfigDocument, parse_config, serialize_config
from becphase.errors import (
    BecPhaseError,
    CondensateExhausted,
    ConfigError,
    GridTooCoarse,
    InvariantViolation,
    IoFailure,
    NoDensityAtPosition,
    SchemaVersionUnsupported,
    SequenceTooLongForApproxEngine,
    SpecOutsideRegion,
    UnknownField,
    ZeroAmplitude,
    ZeroProbabilityOutcome,
)
from becphase.exact import (
    ExactState,
    apply_detection_exact,
    field_expectation_exact,
    init_exact,
    joint_probability_exact,
    outcome_probs_exact,
)
from becphase.kernels import BACKEND
from becphase.model import (
    DetectionRecord,
    DetectionSpec,
    DoubleFockState,
    Engine,
    ModePair,
    PhaseState,
    ScenarioConfig,
    SpatialMode,
    validate_config,
    xi,
)
from becphase.phase import density_matrix_phase, lambda_average, outcome_prob_phase
from becphase.scenarios import (
    EprConfig,
    EprGeometry,
    RunReport,
    dc_josephson_current,
    run_bohm_singlet,
    run_epr,
    run_interference,
    run_macroscopic_singlet,
    sample_sequence,
    weighing_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BecPhaseError",
    "CircularStats",
    "CondensateExhausted",
    "ConfigDocument",
    "ConfigError",
    "DetectionRecord",
    "DetectionSpec",
    "DoubleFockState",
    "Engine",
    "EprConfig",
    "EprGeometry",
    "ExactState",
    "GridTooCoarse",
    "InvariantViolation",
    "IoFailure",
    "LambdaPosterior",
    "ModePair",
    "NoDensityAtPosition",
    "PhaseState",
    "RunReport",
    "ScenarioConfig",
    "SchemaVersionUnsupported",
    "SequenceTooLongForApproxEngine",
    "SpatialMode",
    "SpecOutsideRegion",
    "UnknownField",
    "ZeroAmplitude",
    "ZeroProbabilityOutcome",
    "apply_detection_exact",
    "circular_stats",
    "conditional_next",
    "dc_josephson_current",
    "density_matrix_phase",
    "field_expectation_exact",
    "init_exact",
    "joint_probability_exact",
    "joint_probability_lambda",
    "lambda_average",
    "outcome_prob_phase",
    "outcome_probs_exact",
    "parse_config",
    "posterior",
    "predict_from_posterior",
    "run_bohm_singlet",
    "run_epr",
    "run_interference",
    "run_macroscopic_singlet",
    "sample_sequence",
    "serialize_config",
    "validate_config",
    "weighing_distribution",
    "xi",
]
