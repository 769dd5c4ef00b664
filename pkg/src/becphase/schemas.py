"""JSON schemas for configuration documents and emitted reports.

The files under ``becphase/schema`` are generated from this module
(``python -m becphase.schemas``); the test suite checks they are current.
"""

from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

from becphase.config import config_json_schema

NUM = {"type": ["number", "null"]}
INT = {"type": "integer"}
STR = {"type": "string"}


def _obj(props: dict, required=None, doc: str = "") -> dict:
    out = {"type": "object", "properties": props, "additionalProperties": False,
           "required": list(props) if required is None else list(required)}
    if doc:
        out["description"] = doc
    return out


def _d(schema: dict, doc: str) -> dict:
    return dict(schema, description=doc)


_TRAJECTORY = {
    "run": _d(INT, "ensemble member index"),
    "m": _d(INT, "number of detections so far"),
    "position": _d(NUM, "detection window centre"),
    "angle": _d(NUM, "transverse spin angle phi"),
    "width": _d(NUM, "detection window width"),
    "eta": _d({"enum": [1, -1]}, "spin outcome"),
    "conditional_p": _d(NUM, "probability of this outcome given the earlier ones"),
    "R": _d(NUM, "resultant length of the phase posterior"),
    "circular_std": _d(NUM, "sqrt(-2 ln R); null when R = 0"),
    "mean_direction": _d(NUM, "posterior circular mean in [0, 2pi); null when R = 0"),
}

STEP_SCHEMAS = {
    "interference": _obj(_TRAJECTORY, doc="one detection of an interference run"),
    "epr": _obj(dict(_TRAJECTORY,
                     phi_lambda=_d(NUM, "B angle maximizing the conditional polarization"),
                     B_polarization=_d(NUM, "conditional E[eta] for one B detection at phi_lambda"),
                     summed_spin_expectation=_d(NUM, "conditional summed spin over the B probes")),
                doc="one A detection with the B prediction after it"),
    "posterior": _obj({"lambda": _d(NUM, "grid phase"),
                       "weight": _d(NUM, "normalized posterior mass")}),
    "weighing": _obj({"D": _d(INT, "number difference N_L - N_R"),
                      "count": _d(INT, "samples with this D"),
                      "frequency": _d(NUM, "count / n_samples"),
                      "p_theory": _d(NUM, "binomial probability of D"),
                      "mean_theory": _d(NUM, "N (2p - 1)"),
                      "var_theory": _d(NUM, "4 N p (1 - p)")}),
    "compare": _obj({"outcomes": _d(STR, "outcome string, one + or - per detection"),
                     "p_exact": _d(NUM, "exact double Fock probability"),
                     "p_lambda": _d(NUM, "phase-averaged probability"),
                     "rel_error": _d(NUM, "|p_exact - p_lambda| / p_lambda")}),
    "singlet": _obj({"phi_1": _d(NUM, "angle of spin 1"), "phi_2": _d(NUM, "angle of spin 2"),
                     "E_closed_form": _d(NUM, "-cos(phi_1 - phi_2)"),
                     "E_exact": _d(NUM, "correlation from explicit projectors"),
                     "E_sampled": _d(NUM, "empirical correlation; null without samples"),
                     "n_samples": _d(INT, "sampled pairs")}),
    "macroscopic_singlet": _obj({"N": _d(INT, "block size"),
                                 "correlation": _d(NUM, "normalized block z-spin correlation"),
                                 "freq_plus_a": _d(NUM, "frequency of +N in block a"),
                                 "n_samples": _d(INT, "sampled pairs")}),
}

_NUM_LIST = {"type": "array", "items": NUM}

SUMMARY_FIELDS = {
    "M": _d(INT, "detections in the run"),
    "K": _d(INT, "phase grid size"),
    "final_R": _d(NUM, "posterior resultant length after the last detection"),
    "final_circular_std": _d(NUM, "posterior circular std after the last detection"),
    "final_mean_direction": _d(NUM, "posterior mean after the last detection"),
    "joint_probability": _d(NUM, "product of the conditional probabilities"),
    "log_normalization": _d(NUM, "log of the unnormalized posterior mass"),
    "runs": _d(INT, "ensemble size"),
    "median_final_R": _d(NUM, "ensemble median of final_R"),
    "median_final_circular_std": _d(NUM, "ensemble median of final_circular_std"),
    "median_B_polarization": _d(NUM, "ensemble median of B_polarization"),
    "final_R_by_run": _d(_NUM_LIST, "final_R per ensemble member"),
    "joint_probability_by_run": _d(_NUM_LIST, "joint_probability per ensemble member"),
    "B_polarization_by_run": _d(_NUM_LIST, "B_polarization per ensemble member"),
    "summed_spin_expectation_by_run": _d(_NUM_LIST, "summed spin per ensemble member"),
    "m_A": _d(INT, "A detections"),
    "n_probes": _d(INT, "B probe windows"),
    "phi_lambda": _d(NUM, "final B angle"),
    "B_polarization": _d(NUM, "final conditional B polarization"),
    "summed_spin_expectation": _d(NUM, "final summed B spin expectation"),
    "chsh": _d(NUM, "CHSH combination of the closed-form correlations"),
    "correlation": _d(NUM, "block z-spin correlation"),
    "freq_plus_a": _d(NUM, "frequency of +N in block a"),
    "N": _d(INT, "total particle number"),
    "p": _d(NUM, "binomial success probability"),
    "mean_theory": _d(NUM, "N (2p - 1)"),
    "var_theory": _d(NUM, "4 N p (1 - p)"),
    "sample_mean": _d(NUM, "mean of the D samples"),
    "sample_std": _d(NUM, "standard deviation of the D samples"),
    "gof_pvalue": _d(NUM, "chi-square binomial goodness-of-fit p-value"),
    "strings": _d(INT, "number of outcome strings compared"),
    "max_rel_error": _d(NUM, "largest rel_error over the strings"),
}

FLAG_FIELDS = {
    "probabilities_conditional_on_detection": _d({"type": "boolean"},
                                                 "probabilities assume every window fires"),
    "window_prefactor_dropped": _d({"type": "boolean"}, "common window factor cancels"),
    "approx_guard_ratio": _d(NUM, "largest m / min(n_a, n_b) for the phase-averaged engine"),
    "window_variation_tolerance": _d(NUM, "allowed relative mode variation across a window"),
    "phase_grid_rule": _d(STR, "phase grid size rule"),
    "phase_factor_sign": _d(STR, "per-detection phase factor"),
    "total_spin_single_measurement": _d(STR, "scope note for total B spin"),
}

CONFIG_FIELDS = {
    "kind": _d({"enum": ["double_fock", "phase"]}, "initial state kind"),
    "n_a": _d(INT, "particles in condensate a"),
    "n_b": _d(INT, "particles in condensate b"),
    "lambda": _d(NUM, "relative phase of a phase state"),
    "detections": _d(INT, "planned detections"),
    "ensemble_size": _d(INT, "ensemble members"),
    "forced": _d({"type": "boolean"}, "outcomes fixed by the configuration"),
    "region_a": _d({"type": "array", "items": NUM}, "region A interval"),
    "region_b": _d({"type": "array", "items": NUM}, "region B interval"),
    "scale_a": _d(NUM, "u_a amplitude in the regions"),
    "scale_b": _d(NUM, "v_b amplitude in the regions"),
    "m_a": _d(INT, "A detections"),
    "n_probes": _d(INT, "B probe windows"),
    "source": {"$ref": "#/$defs/ConfigDocument",
               "description": "the validated configuration document"},
}


def report_json_schema() -> dict:
    cfg = config_json_schema()
    defs = dict(cfg.pop("$defs", {}))
    defs["ConfigDocument"] = cfg
    scen = list(STEP_SCHEMAS)
    schema = {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "RunReport",
        "type": "object",
        "additionalProperties": False,
        "required": ["schema_version", "scenario", "engine", "seed", "config", "steps",
                     "summary", "flags", "log_weight"],
        "properties": {
            "schema_version": _d({"const": "1.0"}, "report format version"),
            "scenario": _d({"enum": scen}, "scenario that produced the report"),
            "engine": _d({"enum": ["exact", "lambda_integral", "phase", None]},
                         "sampling engine; null for scenarios without one"),
            "seed": _d({"type": ["integer", "null"]}, "master seed"),
            "config": _obj(CONFIG_FIELDS, required=[], doc="run parameters"),
            "steps": {"type": "array", "description": "per-step table",
                      "items": {"anyOf": [{"$ref": f"#/$defs/step_{k}"} for k in scen]}},
            "summary": _obj(SUMMARY_FIELDS, required=[], doc="run summary"),
            "flags": _obj(FLAG_FIELDS, required=[], doc="modelling conventions"),
            "log_weight": _d(NUM, "summed log conditional probability of the sampled history"),
        },
        "$defs": dict(defs, **{f"step_{k}": v for k, v in STEP_SCHEMAS.items()}),
    }
    return schema


SCHEMA_FILES = {"config.schema.json": config_json_schema,
                "report.schema.json": report_json_schema}


def render(name: str) -> str:
    return json.dumps(SCHEMA_FILES[name](), indent=2, sort_keys=True) + "\n"


def shipped(name: str) -> str:
    return resources.files("becphase").joinpath("schema", name).read_text(encoding="utf-8")


def write_schemas(directory=None) -> None:
    directory = Path(directory or Path(__file__).parent / "schema")
    directory.mkdir(parents=True, exist_ok=True)
    for name in SCHEMA_FILES:
        (directory / name).write_text(render(name), encoding="utf-8")


if __name__ == "__main__":
    write_schemas(sys.argv[1] if len(sys.argv) > 1 else None)
