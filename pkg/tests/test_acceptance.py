"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records one pass/fail line, printed in the pytest terminal summary.
Run alone with ``pytest tests/test_acceptance.py``.
"""

import itertools
import json
import math
import time

import numpy as np

import oracle
from becphase import cli
from becphase.approx import (
    circular_stats,
    conditional_next,
    joint_probability_lambda,
    posterior,
)
from becphase.exact import init_exact, joint_probability_exact, outcome_probs_exact
from becphase.model import (
    DetectionRecord,
    DetectionSpec,
    DoubleFockState,
    ModePair,
    PhaseState,
    ScenarioConfig,
    SpatialMode,
    grid_specs,
)
from becphase.phase import lambda_average
from becphase.scenarios import (
    DEFAULT_ANGLES,
    EprConfig,
    EprGeometry,
    binomial_gof_pvalue,
    chsh,
    compare_engines,
    dc_josephson_current,
    run_bohm_singlet,
    run_epr,
    run_interference,
    run_macroscopic_singlet,
    run_generator,
    singlet_joint_probs,
    weighing_distribution,
)

TWO_PI = 2 * math.pi


def _recs(specs, etas):
    return [DetectionRecord(s, e) for s, e in zip(specs, etas)]


def _random_modes(rng):
    return ModePair(SpatialMode.plane_wave(rng.normal(), rng.uniform(0.3, 2.0)),
                    SpatialMode.gaussian(rng.normal(), rng.uniform(1.0, 3.0), rng.uniform(0.3, 2.0)))


def test_criterion_01_oracle_equivalence(criterion):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        total = int(rng.integers(1, 7))
        n_a = int(rng.integers(0, total + 1))
        n_b = total - n_a
        m = int(rng.integers(1, min(3, total) + 1))
        modes = _random_modes(rng)
        specs = [DetectionSpec(float(x), float(rng.uniform(0, TWO_PI)))
                 for x in rng.uniform(-1, 1) + 0.4 * np.arange(m)]
        uvp = [(modes.u_a(s.position), modes.v_b(s.position), s.angle) for s in specs]
        ref = oracle.fock_joint_probs(n_a, n_b, uvp)
        state = DoubleFockState(n_a, n_b, modes)
        for etas, p in ref.items():
            worst = max(worst, abs(joint_probability_exact(state, _recs(specs, etas)) - p))
    elapsed = time.perf_counter() - t0
    ok = criterion(1, worst <= 1e-12 and elapsed < 10,
                   f"max |exact - oracle| = {worst:.2e} over 200 configs in {elapsed:.2f}s")
    assert ok


def test_criterion_02_finite_n_exactness(criterion):
    specs = [DetectionSpec(0.0, 0.0), DetectionSpec(1.0, 0.0)]
    small = DoubleFockState(1, 1)
    pp = joint_probability_exact(small, _recs(specs, (1, 1)))
    pm = joint_probability_exact(small, _recs(specs, (1, -1)))
    large = joint_probability_lambda(DoubleFockState(10**4, 10**4), _recs(specs, (1, 1)))
    ok = criterion(2, abs(pp - 0.5) <= 1e-12 and abs(pm) <= 1e-12,
                   f"N=1+1: P(+,+)={pp:.15f} P(+,-)={pm:.1e}; large-N value {large:.15f} "
                   "(finite-size sqrt(N-q) factors)")
    assert ok


def test_criterion_03_large_n_convergence(criterion):
    rng = np.random.default_rng(303)
    specs = [DetectionSpec(float(j), float(a)) for j, a in enumerate(rng.uniform(0, TWO_PI, 6))]
    t0 = time.perf_counter()
    ns = [10**2, 10**3, 10**4, 10**5]
    dev = [max(r["rel_error"] for r in compare_engines(DoubleFockState(n, n), specs)) for n in ns]
    slope = np.polyfit(np.log(ns), np.log(dev), 1)[0]
    elapsed = time.perf_counter() - t0
    ok = criterion(3, dev[2] <= 2e-3 and abs(slope + 1) <= 0.2 and elapsed < 60,
                   f"max rel dev at n=1e4: {dev[2]:.2e}; slope vs n {slope:.3f}; {elapsed:.2f}s")
    assert ok


def test_criterion_04_no_single_detection_interference(criterion):
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 10**5))
        state = DoubleFockState(n, n, _random_modes(rng))
        spec = DetectionSpec(float(rng.uniform(-3, 3)), float(rng.uniform(0, TWO_PI)))
        pe = outcome_probs_exact(init_exact(state), spec)
        if n >= 10:
            pl = conditional_next(state, [], spec)
            worst = max(worst, abs(pl[0] - 0.5), abs(pl[1] - 0.5))
        worst = max(worst, abs(pe[0] - 0.5), abs(pe[1] - 0.5))
    ok = criterion(4, worst <= 1e-12, f"max |p - 1/2| over 100 random specs: {worst:.2e}")
    assert ok


def test_criterion_05_closed_form_conditionals(criterion):
    state = DoubleFockState(10**4, 10**4)
    s1, s2 = DetectionSpec(0.0, 1.1), DetectionSpec(1.0, 1.1)
    ppp = joint_probability_lambda(state, _recs([s1, s2], (1, 1)))
    ppm = joint_probability_lambda(state, _recs([s1, s2], (1, -1)))
    cond = conditional_next(state, _recs([s1], (1,)), s2)[0]
    rng = np.random.default_rng(505)
    worst_k = 0.0
    for _ in range(50):
        m = int(rng.integers(1, 20))
        recs = _recs([DetectionSpec(j, a) for j, a in enumerate(rng.uniform(0, TWO_PI, m))],
                     rng.choice([1, -1], m))
        K = m + 1 + int(rng.integers(0, 10))
        worst_k = max(worst_k, abs(joint_probability_lambda(state, recs, K)
                                   - joint_probability_lambda(state, recs, 2 * K)))
    err = max(abs(ppp - 3 / 8), abs(ppm - 1 / 8), abs(cond - 3 / 4))
    ok = criterion(5, err <= 1e-12 and worst_k <= 1e-14,
                   f"closed-form error {err:.2e}; K-doubling change {worst_k:.2e}")
    assert ok


def test_criterion_06_posterior_law(criterion):
    t0 = time.perf_counter()
    state = DoubleFockState(10**5, 10**5)
    aligned = max(abs(circular_stats(posterior(state, _recs([DetectionSpec(j, 0.0) for j in range(m)],
                                                            [1] * m))).resultant_length - m / (m + 1))
                  for m in (1, 2, 10, 100))
    cfg100 = ScenarioConfig(state, grid_specs(100, 0, 100, 1e-3, DEFAULT_ANGLES),
                            engine="lambda_integral")
    med_R = float(np.median([run_interference(cfg100, seed).summary["final_R"]
                             for seed in range(200)]))
    ms = [10, 30, 100, 300, 1000]
    stds = []
    for m in ms:
        cfg = ScenarioConfig(state, grid_specs(m, 0, m, 1e-3, DEFAULT_ANGLES), engine="lambda_integral")
        stds.append(float(np.median([run_interference(cfg, seed).summary["final_circular_std"]
                                     for seed in range(50)])))
    slope = np.polyfit(np.log(ms), np.log(stds), 1)[0]
    elapsed = time.perf_counter() - t0
    ok = criterion(6, aligned <= 1e-12 and med_R >= 0.9 and abs(slope + 0.5) <= 0.1 and elapsed < 120,
                   f"aligned R error {aligned:.1e}; median R(m=100) {med_R:.4f}; "
                   f"std exponent {slope:.3f}; {elapsed:.1f}s")
    assert ok


def test_criterion_07_phase_average_indistinguishable(criterion):
    rng = np.random.default_rng(707)
    worst_phase = 0.0
    worst_exact = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 7))
        modes = _random_modes(rng)
        specs = [DetectionSpec(float(x), float(a))
                 for x, a in zip(0.3 * np.arange(m), rng.uniform(0, TWO_PI, m))]
        recs = _recs(specs, rng.choice([1, -1], m))
        fock = DoubleFockState(10**4, 10**4, modes)
        pl = joint_probability_lambda(fock, recs)
        pa = lambda_average(PhaseState(0.0, 10**4, 10**4, modes), recs)
        pe = joint_probability_exact(fock, recs)
        worst_phase = max(worst_phase, abs(pa - pl))
        worst_exact = max(worst_exact, abs(pe - pl) / pl)
    ok = criterion(7, worst_phase <= 1e-14 and worst_exact <= 2e-3,
                   f"|phase avg - lambda| {worst_phase:.1e}; max rel dev vs exact {worst_exact:.2e}")
    assert ok


def test_criterion_08_epr(criterion):
    t0 = time.perf_counter()
    geo = EprGeometry((0.0, 1.0), (2.0, 3.0))
    cfg = EprConfig(geo, 10**4, 10**4, 100, n_probes=1000, engine="lambda_integral")
    pol = float(np.median([run_epr(cfg, seed).summary["B_polarization"] for seed in range(50)]))
    ns = [10**2, 10**3, 10**4, 10**5]
    summed = [run_epr(EprConfig(geo, n, n, 1, n_probes=1000, engine="exact"), 1)
              .summary["summed_spin_expectation"] for n in ns]
    slope = np.polyfit(np.log([float(n) * n for n in ns]), np.log(summed), 1)[0]
    elapsed = time.perf_counter() - t0
    ok = criterion(8, pol >= 0.9 and abs(slope - 0.5) <= 0.05 and elapsed < 120,
                   f"median B polarization (m_A=100) {pol:.4f}; exponent in n_a n_b {slope:.4f}; "
                   f"{elapsed:.1f}s")
    assert ok


def test_criterion_09_singlet_baselines(criterion):
    grid = np.linspace(0, TWO_PI, 20)
    worst = 0.0
    for p1, p2 in itertools.product(grid, grid):
        probs = singlet_joint_probs(p1, p2)
        e = probs[0, 0] + probs[1, 1] - probs[0, 1] - probs[1, 0]
        worst = max(worst, abs(e + math.cos(p1 - p2)), abs(run_bohm_singlet(p1, p2) + math.cos(p1 - p2)))
    s = chsh(run_bohm_singlet, 0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)
    mac = [run_macroscopic_singlet(N, 1000, run_generator(9)).correlation for N in (1, 10**6)]
    ok = criterion(9, worst <= 1e-12 and abs(s - 2 * math.sqrt(2)) <= 1e-12 and mac == [-1.0, -1.0],
                   f"max correlation error {worst:.1e}; CHSH {s:.15f}; block correlations {mac}")
    assert ok


def test_criterion_10_weighing(criterion):
    res = weighing_distribution(10**4, 1.0, 1.0, 10**5, seed=10)
    target = math.sqrt(4 * 10**4 * 0.25)
    rel = abs(res.sample_std - target) / target
    pval = binomial_gof_pvalue(res, 20)
    phis = np.linspace(-7, 7, 101)
    jos = max(abs(dc_josephson_current(p, 1.7) - 1.7 * math.sin(p)) / 1.7 for p in phis)
    ok = criterion(10, rel <= 0.05 and pval > 1e-3 and jos <= 1e-15,
                   f"std {res.sample_std:.3f} vs {target:.0f} ({rel:.2%}); GOF p={pval:.3f}; "
                   f"Josephson error {jos:.1e}")
    assert ok


def test_criterion_11_cli_determinism(criterion, tmp_path):
    from test_cli import CONFIGS

    identical = []
    for cmd, doc in sorted(CONFIGS.items()):
        cfg = tmp_path / f"{cmd}.json"
        cfg.write_text(json.dumps(doc))
        blobs = []
        for rep in range(2):
            out = tmp_path / f"{cmd}_{rep}"
            assert cli.run_command([cmd, "--config", str(cfg), "--out", str(out),
                                    "--seed", "12345", "--format", "csv"]) == 0
            (csv_file,) = out.glob("*.csv")
            blobs.append(csv_file.read_bytes())
        identical.append(blobs[0] == blobs[1] and len(blobs[0]) > 0)
    ok = criterion(11, all(identical),
                   f"byte-identical CSV for {sum(identical)}/{len(identical)} subcommands")
    assert ok
