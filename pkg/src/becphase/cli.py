"""``becphase`` command line: run a configured scenario and write CSV/JSON artifacts.

Exit status is 0 on success, 1 for configuration problems and 2 for runtime
failures; diagnostics are a single line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from becphase import approx, scenarios
from becphase.config import ConfigDocument, SingletDoc, parse_config, serialize_config, to_scenario_config
from becphase.errors import BecPhaseError, ConfigError, IoFailure, InvariantViolation, Violation
from becphase.model import Engine, validate_config

OUT_ENV = "BECPHASE_OUT"
DEFAULT_OUT = "results"

#: Documented column headers of every plot-data table.
PLOT_COLUMNS = {
    "interference": ("run", "m", "eta", "R", "circular_std", "conditional_p"),
    "posterior": ("lambda", "weight"),
    "epr": ("run", "m_A", "eta", "R", "phi_lambda", "B_polarization", "summed_spin_expectation"),
    "weighing": ("D", "count", "frequency", "p_theory", "mean_theory", "var_theory"),
    "compare": ("outcomes", "p_exact", "p_lambda", "rel_error"),
    "singlet": ("phi_1", "phi_2", "E_closed_form", "E_exact", "E_sampled", "n_samples"),
    "macroscopic_singlet": ("N", "correlation", "freq_plus_a", "n_samples"),
}

SUBCOMMANDS = {
    "simulate": ("interference",),
    "epr": ("epr",),
    "singlet": ("singlet", "macroscopic_singlet"),
    "weigh": ("weighing",),
    "compare": ("compare", "interference"),
    "posterior": ("interference",),
}


def format_cell(value) -> str:
    """Fixed textual form: 17 significant digits for floats, blank for missing."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def table_text(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc.strerror or exc}") from None


def _rows(report: dict) -> list:
    kind = report["scenario"]
    if kind == "epr":
        return [dict(s, m_A=s["m"]) for s in report["steps"]]
    return report["steps"]


def emit_plot_data(report, out_dir, stem: Optional[str] = None) -> Path:
    """Write the per-step table of ``report`` (a RunReport or its dict) as CSV."""
    doc = report.to_dict() if hasattr(report, "to_dict") else report
    kind = doc["scenario"]
    path = Path(out_dir) / f"{stem or kind}.csv"
    _write(path, table_text(PLOT_COLUMNS[kind], _rows(doc)))
    return path


def emit_json(report, out_dir, stem: Optional[str] = None) -> Path:
    doc = report.to_dict() if hasattr(report, "to_dict") else report
    path = Path(out_dir) / f"{stem or doc['scenario']}.json"
    _write(path, json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


# ---------------------------------------------------------------- commands


def _merge(reports: list, extra: Optional[dict] = None) -> scenarios.RunReport:
    """Combine ensemble members into one report ordered by run index."""
    if len(reports) == 1:
        return reports[0]
    first = reports[0]
    summary = dict(extra or {})
    for key in ("final_R", "joint_probability", "B_polarization", "summed_spin_expectation"):
        if key in first.summary:
            summary[f"{key}_by_run"] = [r.summary[key] for r in reports]
    steps = [s for r in reports for s in r.steps]
    return scenarios.RunReport(first.scenario, first.engine, first.seed, first.config, steps,
                               summary, first.flags, None)


def _interference(doc: ConfigDocument, seed: int) -> scenarios.RunReport:
    cfg = to_scenario_config(doc, seed)
    reports = scenarios.run_interference_ensemble(cfg, seed)
    extra = scenarios.ensemble_summary(reports) if len(reports) > 1 else None
    report = _merge(reports, extra)
    report.config = dict(report.config, source=_source(doc))
    return report


def _epr(doc: ConfigDocument, seed: int) -> scenarios.RunReport:
    e = doc.epr
    geo = scenarios.EprGeometry(e.region_a, e.region_b, e.scale_a, e.scale_b)
    forced = None
    if doc.measurement is not None and doc.measurement.detections is not None:
        dets = doc.measurement.detections
        if all(d.eta is not None for d in dets) and len(dets) == e.m_a:
            forced = tuple(d.eta for d in dets)
    cfg = scenarios.EprConfig(geo, doc.state.n_a, doc.state.n_b, e.m_a, e.n_probes,
                              Engine(doc.engine), tuple(e.angles), forced)
    reports = [scenarios.run_epr(cfg, seed, i) for i in range(doc.ensemble_size)]
    extra = None
    if len(reports) > 1:
        pol = [r.summary["B_polarization"] for r in reports]
        extra = {"runs": len(reports), "median_B_polarization": float(np.median(pol))}
    report = _merge(reports, extra)
    report.config = dict(report.config, source=_source(doc))
    return report


def _singlet(doc: ConfigDocument, seed: int) -> scenarios.RunReport:
    s = doc.singlet or SingletDoc()
    rng = scenarios.run_generator(seed)
    if doc.scenario == "macroscopic_singlet":
        res = scenarios.run_macroscopic_singlet(s.macroscopic_N, s.n_samples, rng)
        freq = float(np.mean(res.samples_a > 0)) if s.n_samples else None
        steps = [{"N": s.macroscopic_N, "correlation": res.correlation,
                  "freq_plus_a": freq, "n_samples": s.n_samples}]
        summary = {"correlation": res.correlation, "freq_plus_a": freq}
    else:
        steps = []
        for p1 in s.angles_1:
            for p2 in s.angles_2:
                probs = scenarios.singlet_joint_probs(p1, p2)
                e_exact = float(probs[0, 0] + probs[1, 1] - probs[0, 1] - probs[1, 0])
                e_samp = None
                if s.n_samples:
                    a, b = scenarios.sample_bohm_singlet(p1, p2, s.n_samples, rng)
                    e_samp = float(np.mean(a * b))
                steps.append({"phi_1": p1, "phi_2": p2,
                              "E_closed_form": scenarios.run_bohm_singlet(p1, p2),
                              "E_exact": e_exact, "E_sampled": e_samp, "n_samples": s.n_samples})
        summary = {}
        if len(s.angles_1) == 2 and len(s.angles_2) == 2:
            summary["chsh"] = scenarios.chsh(scenarios.run_bohm_singlet, *s.angles_1, *s.angles_2)
    config = {"source": _source(doc)}
    return scenarios.RunReport(doc.scenario, None, seed, config, steps, summary)


def _weighing(doc: ConfigDocument, seed: int) -> scenarios.RunReport:
    w = doc.weighing
    res = scenarios.weighing_distribution(w.N, w.amp_left, w.amp_right, w.n_samples, seed)
    vals, counts, pmf = res.histogram()
    steps = [{"D": int(d), "count": int(c), "frequency": c / w.n_samples, "p_theory": float(p),
              "mean_theory": res.mean_theory, "var_theory": res.var_theory}
             for d, c, p in zip(vals, counts, pmf)]
    summary = {"N": w.N, "p": res.p, "mean_theory": res.mean_theory, "var_theory": res.var_theory,
               "sample_mean": res.sample_mean, "sample_std": res.sample_std,
               "gof_pvalue": scenarios.binomial_gof_pvalue(res, w.bins) if res.p not in (0.0, 1.0)
               else None}
    return scenarios.RunReport("weighing", None, seed, {"source": _source(doc)}, steps, summary)


def _compare(doc: ConfigDocument, seed: int) -> scenarios.RunReport:
    cfg = to_scenario_config(doc, seed)
    rows = scenarios.compare_engines(cfg.state, cfg.specs)
    worst = max((r["rel_error"] for r in rows), default=0.0)
    return scenarios.RunReport("compare", None, seed, dict(scenarios.describe_config(cfg),
                                                           source=_source(doc)),
                               rows, {"strings": len(rows), "max_rel_error": worst})


def _posterior(doc: ConfigDocument, seed: int) -> scenarios.RunReport:
    cfg = to_scenario_config(doc, seed)
    validate_config(cfg)
    chain = scenarios.sample_chain(cfg.engine, cfg.state, cfg.specs,
                                   scenarios.run_generator(seed, 0), cfg.forced_etas)
    post = approx.posterior(cfg.state, chain.records)
    cs = approx.circular_stats(post)
    steps = [{"lambda": float(g), "weight": float(w)} for g, w in zip(post.grid, post.weights)]
    summary = {"M": len(chain.records), "K": post.K, "final_R": cs.resultant_length,
               "final_circular_std": cs.circular_std, "final_mean_direction": cs.mean_direction,
               "log_normalization": post.log_normalization}
    return scenarios.RunReport("posterior", Engine(cfg.engine).value, seed,
                               dict(scenarios.describe_config(cfg), source=_source(doc)),
                               steps, summary, log_weight=chain.log_weight)


def _source(doc: ConfigDocument) -> dict:
    return json.loads(serialize_config(doc))


RUNNERS = {
    "simulate": _interference,
    "epr": _epr,
    "singlet": _singlet,
    "weigh": _weighing,
    "compare": _compare,
    "posterior": _posterior,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="becphase",
                                     description="Relative-phase emergence in two-condensate "
                                                 "detection experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        p.add_argument("--out", default=None,
                       help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="write only this format (default: config output.format)")
    return parser


def _load(path: str) -> ConfigDocument:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError([Violation("ConfigUnreadable", f"{path}: {exc.strerror or exc}")]) from None
    return parse_config(data)


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        doc = _load(args.config)
        if doc.scenario not in SUBCOMMANDS[args.command]:
            raise InvariantViolation([Violation(
                "ScenarioMismatch",
                f"'{args.command}' cannot run scenario {doc.scenario!r}", "scenario")])
        seed = doc.seed if args.seed is None else args.seed
        if not 0 <= seed < 2**64:
            raise InvariantViolation([Violation("SeedOutOfRange", "seed must fit in 64 bits", "seed")])
        report = RUNNERS[args.command](doc, seed)
        out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
        fmt = args.format or doc.output.format
        stem = f"{report.scenario}_seed{seed}"
        if fmt in ("csv", "both"):
            emit_plot_data(report, out, stem)
        if fmt in ("json", "both"):
            emit_json(report, out, stem)
    except ConfigError as exc:
        print(f"becphase: config error: {_one_line(exc)}", file=sys.stderr)
        return 1
    except (BecPhaseError, ValueError, ArithmeticError, OSError) as exc:
        print(f"becphase: error: {_one_line(exc)}", file=sys.stderr)
        return 2
    return 0


def _one_line(exc: Exception) -> str:
    return " ".join(str(exc).split()) or type(exc).__name__


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
