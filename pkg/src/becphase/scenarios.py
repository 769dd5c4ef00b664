"""Seeded Monte Carlo runners for the condensate measurement scenarios.

Every run draws from its own Philox stream keyed by (master seed, run index),
so ensemble results do not depend on execution order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from becphase import approx, exact, kernels
from becphase.errors import (
    NoDensityAtPosition,
    SpecOutsideRegion,
    ZeroProbabilityOutcome,
)
from becphase.model import (
    APPROX_GUARD,
    WINDOW_TOLERANCE,
    DetectionRecord,
    DetectionSpec,
    DoubleFockState,
    Engine,
    ModePair,
    PhaseState,
    ScenarioConfig,
    SpatialMode,
    evaluate_mode,
    validate_config,
    wrap_angle,
    xi,
)
from becphase.phase import outcome_prob_phase

DEFAULT_ANGLES = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)

CONVENTION_FLAGS = {
    "probabilities_conditional_on_detection": True,
    "window_prefactor_dropped": True,
    "approx_guard_ratio": APPROX_GUARD,
    "window_variation_tolerance": WINDOW_TOLERANCE,
    "phase_grid_rule": "K = max(4(m+1), 256)",
    "phase_factor_sign": "cos(L - xi(r) - phi)",
}


def run_generator(seed: int, run_index: int = 0) -> np.random.Generator:
    """Counter-based stream for one ensemble member."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(run_index),))
    return np.random.Generator(np.random.Philox(ss))


def _finite(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class RunReport:
    """Result of one scenario run; ``to_dict`` gives the JSON document."""

    scenario: str
    engine: Optional[str]
    seed: Optional[int]
    config: dict
    steps: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    flags: dict = field(default_factory=lambda: dict(CONVENTION_FLAGS))
    log_weight: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "schema_version": "1.0",
            "scenario": self.scenario,
            "engine": self.engine,
            "seed": self.seed,
            "config": self.config,
            "steps": [{k: _clean(v) for k, v in s.items()} for s in self.steps],
            "summary": {k: _clean(v) for k, v in self.summary.items()},
            "flags": self.flags,
            "log_weight": _finite(self.log_weight),
        }


def _clean(v):
    if isinstance(v, (float, np.floating)):
        return _finite(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class SampledChain:
    records: tuple
    p_chosen: np.ndarray
    p_plus: np.ndarray

    @property
    def log_weight(self) -> float:
        with np.errstate(divide="ignore"):
            return float(np.sum(np.log(self.p_chosen)))


def sample_chain(engine, state, specs, rng: Optional[np.random.Generator] = None,
                 forced=None, K: Optional[int] = None) -> SampledChain:
    """Draw each outcome from the engine's conditional law given the earlier ones.

    ``forced`` (a sequence of +-1) replaces sampling by a fixed history.
    """
    engine = Engine(engine)
    specs = tuple(specs)
    m = len(specs)
    uniforms = rng.random(m) if rng is not None else np.zeros(m)
    fv = np.zeros(m, dtype=np.int64) if forced is None else np.asarray(forced, dtype=np.int64)
    if engine is Engine.EXACT:
        etas, p_plus, p_chosen, _, _, status, idx = exact.run_chain(state, specs, uniforms, fv)
    elif engine is Engine.LAMBDA_INTEGRAL:
        approx._guard(state, m)
        etas, p_plus, p_chosen, _, _, _, status, idx = approx.run_chain(state, specs, K, uniforms, fv)
    else:
        p_plus = np.array([outcome_prob_phase(state, s)[0] for s in specs])
        etas = np.where(fv != 0, fv, np.where(uniforms < p_plus, 1, -1)).astype(np.int64)
        p_chosen = np.where(etas == 1, p_plus, 1.0 - p_plus)
        bad = np.flatnonzero(p_chosen <= 0)
        status, idx = (kernels.ZERO_PROBABILITY, int(bad[0])) if bad.size else (kernels.OK, m)
    if status == kernels.NO_DENSITY:
        raise NoDensityAtPosition(f"no particle density at detection {idx + 1}")
    if status == kernels.ZERO_PROBABILITY:
        raise ZeroProbabilityOutcome(f"forced outcome at detection {idx + 1} has probability 0")
    records = tuple(DetectionRecord(s, int(e)) for s, e in zip(specs, etas))
    return SampledChain(records, np.asarray(p_chosen, dtype=float), np.asarray(p_plus, dtype=float))


def sample_sequence(engine, state, specs, seed: int, run_index: int = 0) -> tuple:
    """Seeded outcome sequence for ``specs``; identical seeds give identical records."""
    return sample_chain(engine, state, specs, run_generator(seed, run_index)).records


def sample_outcome_strings(engine, state, specs, n_runs: int, seed: int) -> np.ndarray:
    """``n_runs`` independent outcome strings, shape (n_runs, m), from one seeded stream.

    Kernel inputs are prepared once, so this is the fast path for frequency
    estimates.
    """
    engine = Engine(engine)
    specs = tuple(specs)
    m = len(specs)
    U = run_generator(seed).random((n_runs, m))
    out = np.empty((n_runs, m), dtype=np.int64)
    free = np.zeros(m, dtype=np.int64)
    if engine is Engine.EXACT:
        ua, vb = exact._mode_values(state, specs)
        phi = np.array([s.angle for s in specs], dtype=float)
        one = np.ones(1, dtype=complex)
        for i in range(n_runs):
            res = kernels.exact_sequence(one, 0, float(state.n_a), float(state.n_b), ua, vb, phi,
                                         U[i], free)
            if res[5] != kernels.OK:
                raise NoDensityAtPosition(f"no particle density at detection {res[6] + 1}")
            out[i] = res[0]
    elif engine is Engine.LAMBDA_INTEGRAL:
        approx._guard(state, m)
        K = approx.default_grid_size(m)
        grid = approx.phase_grid(K)
        vis, off = approx.chain_inputs(state, specs)
        c, s, w0 = np.cos(grid), np.sin(grid), np.full(K, 1.0 / K)
        for i in range(n_runs):
            out[i] = kernels.lambda_sequence(w0, c, s, vis, off, U[i], free)[0]
    else:
        p_plus = np.array([outcome_prob_phase(state, s)[0] for s in specs])
        out[:] = np.where(U < p_plus, 1, -1)
    return out


def posterior_trajectory(state, records, K: Optional[int] = None):
    """Resultant vector of the phase posterior after each record."""
    specs = [r.spec for r in records]
    etas = np.array([r.eta for r in records], dtype=np.int64)
    K = approx.default_grid_size(len(specs)) if K is None else K
    out = approx.run_chain(state, specs, K, forced=etas)
    status = out[6]
    if status != kernels.OK:
        raise ZeroProbabilityOutcome("history impossible under the phase-averaged model")
    return out[3] + 1j * out[4]


# ---------------------------------------------------------------- interference


def run_interference(cfg: ScenarioConfig, seed: Optional[int] = None,
                     run_index: int = 0) -> RunReport:
    """One sequential-measurement run with the phase posterior after every step."""
    validate_config(cfg)
    seed = cfg.seed if seed is None else int(seed)
    rng = run_generator(seed, run_index)
    chain = sample_chain(cfg.engine, cfg.state, cfg.specs, rng, cfg.forced_etas)
    traj = posterior_trajectory(cfg.state, chain.records)
    steps = []
    for j, (rec, p, z) in enumerate(zip(chain.records, chain.p_chosen, traj)):
        cs = approx.stats_from_resultant(complex(z))
        steps.append({
            "run": run_index, "m": j + 1, "position": rec.spec.position,
            "angle": rec.spec.angle, "width": rec.spec.width, "eta": rec.eta,
            "conditional_p": float(p), "R": cs.resultant_length,
            "circular_std": cs.circular_std, "mean_direction": cs.mean_direction,
        })
    final = approx.stats_from_resultant(complex(traj[-1])) if len(traj) else \
        approx.stats_from_resultant(0j)
    summary = {
        "M": len(chain.records),
        "final_R": final.resultant_length,
        "final_circular_std": final.circular_std,
        "final_mean_direction": final.mean_direction,
        "joint_probability": math.exp(chain.log_weight),
    }
    return RunReport("interference", Engine(cfg.engine).value, seed, describe_config(cfg),
                     steps, summary, log_weight=chain.log_weight)


def run_interference_ensemble(cfg: ScenarioConfig, seed: Optional[int] = None) -> list:
    seed = cfg.seed if seed is None else int(seed)
    return [run_interference(cfg, seed, i) for i in range(cfg.ensemble_size)]


def ensemble_summary(reports: Sequence[RunReport]) -> dict:
    R = np.array([r.summary["final_R"] for r in reports])
    std = np.array([r.summary["final_circular_std"] for r in reports], dtype=float)
    return {"runs": len(reports), "median_final_R": float(np.median(R)),
            "median_final_circular_std": float(np.median(std))}


def describe_config(cfg: ScenarioConfig) -> dict:
    st = cfg.state
    out = {"kind": "phase" if isinstance(st, PhaseState) else "double_fock",
           "n_a": st.n_a, "n_b": st.n_b, "detections": len(cfg.specs),
           "ensemble_size": cfg.ensemble_size, "forced": cfg.forced_etas is not None}
    if isinstance(st, PhaseState):
        out["lambda"] = st.lam
    return out


# ---------------------------------------------------------------- EPR


@dataclass(frozen=True)
class EprGeometry:
    """Two condensate modes that overlap only on the disjoint regions A and B.

    ``scale_a`` and ``scale_b`` are the amplitudes of u_a and v_b there; both
    modes are real, so xi = 0 wherever they overlap.
    """

    region_a: tuple
    region_b: tuple
    scale_a: float = 1.0
    scale_b: float = 1.0

    def __post_init__(self):
        a, b = tuple(map(float, self.region_a)), tuple(map(float, self.region_b))
        if not (a[0] < a[1] and b[0] < b[1]):
            raise ValueError("regions must be nonempty intervals")
        if a[1] >= b[0] and b[1] >= a[0]:
            raise ValueError("regions A and B must be disjoint")
        object.__setattr__(self, "region_a", a)
        object.__setattr__(self, "region_b", b)

    def modes(self) -> ModePair:
        ivs = [self.region_a, self.region_b]
        return ModePair(SpatialMode.region_indicator(ivs, self.scale_a),
                        SpatialMode.region_indicator(ivs, self.scale_b))

    def windows(self, region: tuple, count: int, angles=DEFAULT_ANGLES) -> tuple:
        """``count`` disjoint windows tiling ``region``, half-filled, angles cycled."""
        lo, hi = region
        cell = (hi - lo) / count
        return tuple(DetectionSpec(lo + (i + 0.5) * cell, float(angles[i % len(angles)]), 0.5 * cell)
                     for i in range(count))

    def contains(self, region: tuple, spec: DetectionSpec) -> bool:
        lo, hi = spec.window
        return region[0] <= lo and hi <= region[1]


@dataclass(frozen=True)
class EprConfig:
    geometry: EprGeometry
    n_a: int
    n_b: int
    m_a: int
    n_probes: int = 1000
    engine: Engine = Engine.LAMBDA_INTEGRAL
    angles: tuple = DEFAULT_ANGLES
    forced_etas: Optional[tuple] = None
    a_specs: Optional[tuple] = None
    probe_specs: Optional[tuple] = None

    def state(self) -> DoubleFockState:
        return DoubleFockState(self.n_a, self.n_b, self.geometry.modes())

    def specs_a(self) -> tuple:
        return self.a_specs if self.a_specs is not None else \
            self.geometry.windows(self.geometry.region_a, self.m_a, self.angles)

    def probes_b(self) -> tuple:
        return self.probe_specs if self.probe_specs is not None else \
            self.geometry.windows(self.geometry.region_b, self.n_probes, (0.0,))


def run_epr(cfg: EprConfig, seed: int, run_index: int = 0) -> RunReport:
    """Condition on m_A detections in A and predict transverse spin in B.

    Per step the report holds the phase posterior from the A records, the
    angle phi_L that maximizes the conditional B polarization, that
    polarization, and the conditional expectation of the transverse spin
    summed over the B probe windows.
    """
    geo = cfg.geometry
    state = cfg.state()
    specs_a = cfg.specs_a()
    probes = cfg.probes_b()
    for s in specs_a:
        if not geo.contains(geo.region_a, s):
            raise SpecOutsideRegion(f"A detection at r={s.position} is outside region A")
    for s in probes:
        if not geo.contains(geo.region_b, s):
            raise SpecOutsideRegion(f"B probe at r={s.position} is outside region B")
    engine = Engine(cfg.engine)
    scfg = ScenarioConfig(state, specs_a, cfg.forced_etas, 1, seed, engine)
    validate_config(scfg)
    rng = run_generator(seed, run_index)
    chain = sample_chain(engine, state, specs_a, rng, cfg.forced_etas)
    traj = posterior_trajectory(state, chain.records)

    centre = probes[len(probes) // 2]
    xi_b = xi(state.modes, centre.position)
    pos = np.array([p.position for p in probes])
    widths = np.array([p.width for p in probes])
    u = evaluate_mode(state.modes.u_a, pos)
    v = evaluate_mode(state.modes.v_b, pos)
    # sum_p width_p conj(u_p) v_p, the probe-set weight of the exact hopping term
    probe_sum = complex(np.sum(widths * np.conj(u) * v))

    es = exact.init_exact(state) if engine is Engine.EXACT else None
    steps = []
    for j, (rec, p, z) in enumerate(zip(chain.records, chain.p_chosen, traj)):
        cs = approx.stats_from_resultant(complex(z))
        mean = cs.mean_direction if cs.mean_direction is not None else 0.0
        phi_l = wrap_angle(mean - xi_b)
        probe = DetectionSpec(centre.position, phi_l, centre.width)
        if engine is Engine.EXACT:
            es = exact.apply_detection_exact(es, rec)
            pp, pm = exact.outcome_probs_exact(es, probe)
            summed = 2.0 * (np.exp(-1j * phi_l) * probe_sum * exact.hopping_expectation(es)).real
        else:
            fp = approx.factor_params(state, probe)
            pp = 0.5 * (1.0 + fp.visibility * (complex(z) * np.exp(1j * fp.phase_offset)).real)
            pm = 1.0 - pp
            # cross(r) cos(L - xi - phi) summed over probes = Re(2 sqrt(n_a n_b) e^{i(L - phi)} sum u* v)
            summed = (2.0 * math.sqrt(state.n_a * state.n_b)
                      * (complex(z) * np.exp(-1j * phi_l) * probe_sum).real)
        steps.append({
            "run": run_index, "m": j + 1, "position": rec.spec.position,
            "angle": rec.spec.angle, "width": rec.spec.width, "eta": rec.eta,
            "conditional_p": float(p), "R": cs.resultant_length,
            "circular_std": cs.circular_std, "mean_direction": cs.mean_direction,
            "phi_lambda": phi_l, "B_polarization": pp - pm,
            "summed_spin_expectation": float(summed),
        })
    last = steps[-1] if steps else {}
    summary = {
        "m_A": len(chain.records),
        "n_probes": len(probes),
        "final_R": last.get("R", 0.0),
        "phi_lambda": last.get("phi_lambda"),
        "B_polarization": last.get("B_polarization", 0.0),
        "summed_spin_expectation": last.get("summed_spin_expectation", 0.0),
        "joint_probability": math.exp(chain.log_weight),
    }
    flags = dict(CONVENTION_FLAGS)
    flags["total_spin_single_measurement"] = (
        "not established: only per-detection conditionals and summed expectations are computed")
    config = {"region_a": list(geo.region_a), "region_b": list(geo.region_b),
              "scale_a": geo.scale_a, "scale_b": geo.scale_b, "n_a": cfg.n_a, "n_b": cfg.n_b,
              "m_a": cfg.m_a, "n_probes": len(probes)}
    return RunReport("epr", engine.value, seed, config, steps, summary, flags,
                     log_weight=chain.log_weight)


# ---------------------------------------------------------------- singlets


def transverse_spin(phi: float) -> np.ndarray:
    """sigma_phi = exp(-i phi)|alpha><beta| + h.c."""
    return np.array([[0.0, np.exp(-1j * phi)], [np.exp(1j * phi), 0.0]])


SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)


def singlet_joint_probs(phi_1: float, phi_2: float) -> np.ndarray:
    """P(eta_1, eta_2) for the two-spin singlet, indexed [eta_1 == -1, eta_2 == -1]."""
    out = np.zeros((2, 2))
    for i, e1 in enumerate((1, -1)):
        P1 = 0.5 * (np.eye(2) + e1 * transverse_spin(phi_1))
        for j, e2 in enumerate((1, -1)):
            P2 = 0.5 * (np.eye(2) + e2 * transverse_spin(phi_2))
            out[i, j] = float(np.vdot(SINGLET, np.kron(P1, P2) @ SINGLET).real)
    return out


def run_bohm_singlet(phi_1: float, phi_2: float) -> float:
    """Correlation E(phi_1, phi_2) = -cos(phi_1 - phi_2) of transverse spins."""
    return -math.cos(phi_1 - phi_2)


def sample_bohm_singlet(phi_1: float, phi_2: float, n: int, rng: np.random.Generator):
    probs = singlet_joint_probs(phi_1, phi_2).ravel()
    idx = rng.choice(4, size=n, p=probs / probs.sum())
    eta_1 = np.where(idx < 2, 1, -1)
    eta_2 = np.where(idx % 2 == 0, 1, -1)
    return eta_1, eta_2


def chsh(correlation, a: float, a2: float, b: float, b2: float) -> float:
    return abs(correlation(a, b) - correlation(a, b2) + correlation(a2, b) + correlation(a2, b2))


@dataclass(frozen=True)
class MacroSingletResult:
    N: int
    correlation: float
    samples_a: np.ndarray
    samples_b: np.ndarray


def run_macroscopic_singlet(N: int, n_samples: int = 0,
                            rng: Optional[np.random.Generator] = None) -> MacroSingletResult:
    """Block z-spins of the macroscopic singlet: outcomes (+N, -N) or (-N, +N)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    # branch weights |1/sqrt2|^2 are exactly 1/2
    branches = ((0.5, N, -N), (0.5, -N, N))
    corr = sum(w * sa * sb for w, sa, sb in branches) / (N * N)
    if n_samples:
        rng = rng if rng is not None else run_generator(0)
        first = rng.random(n_samples) < 0.5
        sa = np.where(first, N, -N)
        sb = -sa
    else:
        sa = sb = np.zeros(0, dtype=np.int64)
    return MacroSingletResult(N, float(corr), sa, sb)


# ---------------------------------------------------------------- weighing


@dataclass(frozen=True)
class WeighingResult:
    N: int
    p: float
    samples: np.ndarray
    mean_theory: float
    var_theory: float

    @property
    def sample_mean(self) -> float:
        return float(np.mean(self.samples))

    @property
    def sample_std(self) -> float:
        return float(np.std(self.samples, ddof=1)) if len(self.samples) > 1 else 0.0

    def histogram(self):
        """Observed values of D with counts and the exact binomial probabilities."""
        vals, counts = np.unique(self.samples, return_counts=True)
        k = (vals + self.N) // 2
        return vals, counts, stats.binom.pmf(k, self.N, self.p)


def weighing_distribution(N: int, amp_left: complex, amp_right: complex, n_samples: int,
                          seed: int, run_index: int = 0) -> WeighingResult:
    """Number difference D = N_L - N_R of a phase state expanded in double Fock states.

    The squared expansion coefficients are binomial in N_L with
    p = |a|**2 / (|a|**2 + |b|**2), so D = 2 Binomial(N, p) - N.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    wl, wr = abs(amp_left) ** 2, abs(amp_right) ** 2
    if wl + wr == 0:
        raise ValueError("amplitudes must not both vanish")
    p = wl / (wl + wr)
    rng = run_generator(seed, run_index)
    samples = 2 * rng.binomial(N, p, size=n_samples) - N
    return WeighingResult(N, p, samples.astype(np.int64), N * (2 * p - 1), 4 * N * p * (1 - p))


def binomial_gof_pvalue(result: WeighingResult, bins: int = 20) -> float:
    """Chi-square p-value of the D samples against the binomial law, equal-mass bins."""
    N, p = result.N, result.p
    k = (result.samples + N) // 2
    edges = np.unique(stats.binom.ppf(np.linspace(0, 1, bins + 1)[1:-1], N, p))
    idx = np.searchsorted(edges, k, side="left")
    observed = np.bincount(idx, minlength=len(edges) + 1)
    cdf = np.concatenate([[0.0], stats.binom.cdf(edges, N, p), [1.0]])
    expected = np.diff(cdf) * len(k)
    keep = expected > 0
    return float(stats.chisquare(observed[keep], expected[keep]).pvalue)


def dc_josephson_current(phase_difference: float, critical_current: float) -> float:
    if critical_current < 0:
        raise ValueError("critical_current must be nonnegative")
    return critical_current * math.sin(phase_difference)


# ---------------------------------------------------------------- engine comparison


def compare_engines(state: DoubleFockState, specs) -> list[dict]:
    """Exact and phase-averaged probabilities for every outcome string."""
    rows = []
    for etas in itertools.product((1, -1), repeat=len(specs)):
        recs = [DetectionRecord(s, e) for s, e in zip(specs, etas)]
        pe = exact.joint_probability_exact(state, recs)
        pl = approx.joint_probability_lambda(state, recs)
        rows.append({"outcomes": "".join("+" if e == 1 else "-" for e in etas),
                     "p_exact": pe, "p_lambda": pl,
                     "rel_error": abs(pe - pl) / pl if pl > 0 else (0.0 if pe == 0 else math.inf)})
    return rows
