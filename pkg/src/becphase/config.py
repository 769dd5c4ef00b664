"""Versioned JSON configuration documents with strict parsing."""

from __future__ import annotations

import json
import math
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from becphase.errors import (
    InvariantViolation,
    SchemaVersionUnsupported,
    UnknownField,
    Violation,
)
from becphase.model import (
    DetectionSpec,
    DoubleFockState,
    ModePair,
    PhaseState,
    ScenarioConfig,
    SpatialMode,
    config_violations,
    grid_specs,
)

SCHEMA_VERSION = "1.0"
SUPPORTED_VERSIONS = ("1.0",)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class ModeDoc(_Strict):
    kind: Literal["uniform", "gaussian", "plane_wave", "region_indicator"] = "uniform"
    amplitude_scale: float = Field(1.0, ge=0)
    center: Optional[float] = None
    width: Optional[float] = Field(None, gt=0)
    wavenumber: Optional[float] = None
    intervals: Optional[list[tuple[float, float]]] = None


class ModesDoc(_Strict):
    u_a: ModeDoc = ModeDoc()
    v_b: ModeDoc = ModeDoc()


class StateDoc(_Strict):
    kind: Literal["double_fock", "phase"] = "double_fock"
    n_a: int = Field(ge=0)
    n_b: int = Field(ge=0)
    lambda_: Optional[float] = Field(None, alias="lambda")
    modes: ModesDoc = ModesDoc()


class DetectionDoc(_Strict):
    position: float
    angle: float
    width: float = Field(1e-3, gt=0)
    eta: Optional[Literal[1, -1]] = None


class GridRuleDoc(_Strict):
    kind: Literal["grid"] = "grid"
    count: int = Field(ge=0)
    start: float
    stop: float
    width: float = Field(gt=0)
    angles: list[float] = Field(default_factory=lambda: [0.0], min_length=1)


class MeasurementDoc(_Strict):
    detections: Optional[list[DetectionDoc]] = None
    rule: Optional[GridRuleDoc] = None


class EprDoc(_Strict):
    region_a: tuple[float, float]
    region_b: tuple[float, float]
    scale_a: float = Field(1.0, gt=0)
    scale_b: float = Field(1.0, gt=0)
    m_a: int = Field(ge=0)
    n_probes: int = Field(1000, ge=1)
    angles: list[float] = Field(default_factory=lambda: [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4],
                                min_length=1)


class SingletDoc(_Strict):
    angles_1: list[float] = Field(default_factory=lambda: [0.0, math.pi / 2])
    angles_2: list[float] = Field(default_factory=lambda: [math.pi / 4, 3 * math.pi / 4])
    n_samples: int = Field(10000, ge=0)
    macroscopic_N: int = Field(1, ge=1)


class WeighingDoc(_Strict):
    N: int = Field(ge=1)
    amp_left: float = 1.0
    amp_right: float = 1.0
    n_samples: int = Field(100000, ge=1)
    bins: int = Field(20, ge=2)


class OutputDoc(_Strict):
    format: Literal["csv", "json", "both"] = "both"


class ConfigDocument(_Strict):
    schema_version: str
    scenario: Literal["interference", "epr", "singlet", "macroscopic_singlet", "weighing", "compare"]
    engine: Literal["exact", "lambda_integral", "phase"] = "exact"
    state: Optional[StateDoc] = None
    measurement: Optional[MeasurementDoc] = None
    ensemble_size: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    epr: Optional[EprDoc] = None
    singlet: Optional[SingletDoc] = None
    weighing: Optional[WeighingDoc] = None
    output: OutputDoc = OutputDoc()


def _mode(doc: ModeDoc) -> SpatialMode:
    if doc.kind == "uniform":
        return SpatialMode.uniform(doc.amplitude_scale)
    if doc.kind == "gaussian":
        return SpatialMode.gaussian(doc.center or 0.0, doc.width or 1.0, doc.amplitude_scale)
    if doc.kind == "plane_wave":
        return SpatialMode.plane_wave(doc.wavenumber or 0.0, doc.amplitude_scale)
    return SpatialMode.region_indicator(doc.intervals or [], doc.amplitude_scale)


def build_state(doc: StateDoc):
    modes = ModePair(_mode(doc.modes.u_a), _mode(doc.modes.v_b))
    if doc.kind == "phase":
        return PhaseState(doc.lambda_ or 0.0, doc.n_a, doc.n_b, modes)
    return DoubleFockState(doc.n_a, doc.n_b, modes)


def build_specs(doc: Optional[MeasurementDoc]) -> tuple[tuple, Optional[tuple]]:
    """Detection specs plus forced outcomes (None unless every detection has eta)."""
    if doc is None:
        return (), None
    if doc.detections is not None:
        specs = tuple(DetectionSpec(d.position, d.angle, d.width) for d in doc.detections)
        etas = [d.eta for d in doc.detections]
        forced = tuple(etas) if etas and all(e is not None for e in etas) else None
        return specs, forced
    if doc.rule is not None:
        r = doc.rule
        return grid_specs(r.count, r.start, r.stop, r.width, r.angles), None
    return (), None


def to_scenario_config(doc: ConfigDocument, seed: Optional[int] = None) -> ScenarioConfig:
    specs, forced = build_specs(doc.measurement)
    return ScenarioConfig(build_state(doc.state), specs, forced, doc.ensemble_size,
                          doc.seed if seed is None else seed, doc.engine)


def _path(loc) -> str:
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def _semantic_violations(doc: ConfigDocument) -> list[Violation]:
    need = {"interference": ("state",), "compare": ("state",), "epr": ("state", "epr"),
            "weighing": ("weighing",)}
    out = [Violation("MissingSection", f"scenario {doc.scenario!r} needs a {key!r} section", key)
           for key in need.get(doc.scenario, ()) if getattr(doc, key) is None]
    if out:
        return out
    m = doc.measurement
    if m is not None and m.detections is not None and m.rule is not None:
        out.append(Violation("AmbiguousMeasurement", "give detections or rule, not both", "measurement"))
    if m is not None and m.detections is not None:
        etas = [d.eta for d in m.detections]
        if any(e is not None for e in etas) and not all(e is not None for e in etas):
            out.append(Violation("PartialForcedHistory",
                                 "eta must be given for all detections or none",
                                 "measurement.detections"))
    if doc.state is not None:
        if doc.state.kind == "phase" and doc.state.lambda_ is None:
            out.append(Violation("MissingPhase", "phase state needs 'lambda'", "state.lambda"))
        try:
            cfg = to_scenario_config(doc)
        except ValueError as exc:
            out.append(Violation("InvalidValue", str(exc), "state"))
            return out
        if doc.scenario in ("interference", "compare"):
            where = "measurement.detections" if m is not None and m.detections is not None else "measurement.rule"
            for v in config_violations(cfg):
                out.append(Violation(v.code, v.message, v.path.replace("specs", where)))
    if doc.scenario == "epr" and doc.epr is not None:
        a, b = doc.epr.region_a, doc.epr.region_b
        if not (a[0] < a[1] and b[0] < b[1]) or (a[1] >= b[0] and b[1] >= a[0]):
            out.append(Violation("OverlappingRegions", "regions A and B must be disjoint intervals",
                                 "epr.region_a,epr.region_b"))
        if doc.engine == "lambda_integral" and doc.epr.m_a > 0.1 * min(doc.state.n_a, doc.state.n_b):
            out.append(Violation("SequenceTooLongForApproxEngine",
                                 "m_a exceeds min(n_a, n_b)/10", "epr.m_a"))
        if doc.engine == "phase":
            out.append(Violation("EngineStateMismatch", "epr runs the exact or lambda_integral engine",
                                 "engine"))
    if doc.scenario == "weighing" and doc.weighing is not None:
        if doc.weighing.amp_left == 0 and doc.weighing.amp_right == 0:
            out.append(Violation("InvalidValue", "amplitudes must not both vanish", "weighing"))
    return out


def parse_config(text: Union[bytes, str]) -> ConfigDocument:
    """Parse and fully validate a configuration document."""
    try:
        raw = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InvariantViolation([Violation("InvalidJson", str(exc))]) from None
    if not isinstance(raw, dict):
        raise InvariantViolation([Violation("InvalidJson", "top level must be an object")])
    version = raw.get("schema_version")
    if version not in SUPPORTED_VERSIONS:
        raise SchemaVersionUnsupported([Violation("SchemaVersionUnsupported",
                                                  f"unsupported schema_version {version!r}",
                                                  "schema_version")])
    try:
        doc = ConfigDocument.model_validate(raw)
    except ValidationError as exc:
        unknown = [e for e in exc.errors() if e["type"] == "extra_forbidden"]
        if unknown:
            raise UnknownField([Violation("UnknownField", f"unknown field {e['loc'][-1]!r}",
                                          _path(e["loc"])) for e in unknown]) from None
        raise InvariantViolation([Violation("InvariantViolation", e["msg"], _path(e["loc"]))
                                  for e in exc.errors()]) from None
    problems = _semantic_violations(doc)
    if problems:
        raise InvariantViolation(problems)
    return doc


def serialize_config(doc: ConfigDocument) -> str:
    return json.dumps(doc.model_dump(mode="json", by_alias=True, exclude_none=True),
                      indent=2, sort_keys=True)


def config_json_schema() -> dict:
    return ConfigDocument.model_json_schema(by_alias=True)
