"""Exact detection statistics for a double Fock state.

After m detections the conditioned state lives in the (m + 1)-dimensional
span of ``|n_a - k, n_b - (m - k)>``, k = 0..m, so the engine only tracks
one complex amplitude per k. The detected-mode annihilator for outcome eta
at angle phi is ``exp(i phi/2) u_a(r) a + eta exp(-i phi/2) v_b(r) b`` (the
common sqrt(width/2) prefactor cancels in every reported ratio).

All probabilities are conditional on every window registering a particle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from becphase import kernels
from becphase.errors import (
    CondensateExhausted,
    ConfigError,
    NoDensityAtPosition,
    Violation,
    ZeroProbabilityOutcome,
)
from becphase.model import (
    DetectionRecord,
    DetectionSpec,
    DoubleFockState,
    evaluate_mode,
)


@dataclass(frozen=True)
class ExactState:
    """Conditioned state after ``m`` detections.

    ``log_weight`` is the summed log of the sequential conditional
    probabilities; ``log_norm`` is the log squared norm of the unnormalized
    operator string applied to the initial state.
    """

    origin: DoubleFockState
    m: int
    amplitudes: np.ndarray
    log_weight: float = 0.0
    log_norm: float = 0.0
    used: tuple = field(default=(), repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if len(amps) != self.m + 1:
            raise ValueError("need m + 1 amplitudes")


def init_exact(state: DoubleFockState) -> ExactState:
    return ExactState(state, 0, np.ones(1, dtype=complex))


def _mode_values(origin: DoubleFockState, specs) -> tuple[np.ndarray, np.ndarray]:
    pos = np.array([s.position for s in specs], dtype=float)
    ua = np.atleast_1d(evaluate_mode(origin.modes.u_a, pos)).astype(complex)
    vb = np.atleast_1d(evaluate_mode(origin.modes.v_b, pos)).astype(complex)
    return ua, vb


def _check_step(es: ExactState, spec: DetectionSpec):
    if es.m >= es.origin.n_a + es.origin.n_b:
        raise CondensateExhausted(f"all {es.m} particles already detected")
    for i, prev in enumerate(es.used):
        if prev.overlaps(spec):
            raise ConfigError([Violation("OverlappingRegions",
                                         f"window at r={spec.position} overlaps detection {i}")])


def _branches(es: ExactState, spec: DetectionSpec):
    ua, vb = _mode_values(es.origin, [spec])
    out = []
    for eta in (1, -1):
        out.append(kernels.exact_branch(es.amplitudes, es.m, float(es.origin.n_a),
                                        float(es.origin.n_b), complex(ua[0]),
                                        complex(vb[0]), float(spec.angle), eta))
    return out


def outcome_probs_exact(es: ExactState, spec: DetectionSpec) -> tuple[float, float]:
    """Conditional (p_plus, p_minus) for the next detection."""
    _check_step(es, spec)
    (_, n_p), (_, n_m) = _branches(es, spec)
    total = n_p + n_m
    if total <= 0:
        raise NoDensityAtPosition(f"no particle density at r={spec.position}")
    return n_p / total, n_m / total


def apply_detection_exact(es: ExactState, record: DetectionRecord) -> ExactState:
    """Condition on ``record`` and return the renormalized state."""
    _check_step(es, record.spec)
    (plus, n_p), (minus, n_m) = _branches(es, record.spec)
    total = n_p + n_m
    if total <= 0:
        raise NoDensityAtPosition(f"no particle density at r={record.spec.position}")
    vec, nrm = (plus, n_p) if record.eta == 1 else (minus, n_m)
    if nrm <= 0:
        raise ZeroProbabilityOutcome(
            f"eta={record.eta} has probability 0 at detection {es.m + 1}")
    return ExactState(es.origin, es.m + 1, vec / math.sqrt(nrm),
                      es.log_weight + math.log(nrm / total),
                      es.log_norm + math.log(nrm),
                      es.used + (record.spec,))


def log_falling_factorial(n: float, k: int) -> float:
    if k > n:
        return -math.inf
    return float(gammaln(n + 1) - gammaln(n - k + 1))


def log_detection_normalizer(state: DoubleFockState, specs) -> float:
    """log of the summed operator-string norms over all 2**m outcome strings.

    Equals m log 2 + log <:prod_j n(r_j):>, where the normally ordered density
    product expands as sum_k e_k ff(n_a, k) ff(n_b, m - k) with e_k the x**k
    coefficient of prod_j (|v_b(r_j)|**2 + |u_a(r_j)|**2 x).
    """
    m = len(specs)
    if m == 0:
        return 0.0
    ua, vb = _mode_values(state, specs)
    coeff = np.zeros(m + 1)
    coeff[0] = 1.0
    log_scale = 0.0
    for j in range(m):
        nxt = coeff * abs(vb[j]) ** 2
        nxt[1:] += coeff[:-1] * abs(ua[j]) ** 2
        top = nxt.max()
        if top <= 0:
            return -math.inf
        coeff = nxt / top
        log_scale += math.log(top)
    with np.errstate(divide="ignore"):
        terms = [math.log(coeff[k]) + log_falling_factorial(state.n_a, k)
                 + log_falling_factorial(state.n_b, m - k)
                 if coeff[k] > 0 else -math.inf for k in range(m + 1)]
    return m * math.log(2.0) + log_scale + float(logsumexp(terms))


def run_chain(state: DoubleFockState, specs, uniforms=None, forced=None):
    """Drive the compiled kernel through ``specs``; returns the raw kernel tuple."""
    m = len(specs)
    ua, vb = _mode_values(state, specs) if m else (np.zeros(0, complex), np.zeros(0, complex))
    phi = np.array([s.angle for s in specs], dtype=float)
    if uniforms is None:
        uniforms = np.zeros(m)
    if forced is None:
        forced = np.zeros(m, dtype=np.int64)
    return kernels.exact_sequence(np.ones(1, dtype=complex), 0, float(state.n_a),
                                  float(state.n_b), ua, vb, phi,
                                  np.asarray(uniforms, dtype=float),
                                  np.asarray(forced, dtype=np.int64))


def joint_probability_exact(state0: DoubleFockState, records) -> float:
    """Probability of the outcome string given that every window fires."""
    records = list(records)
    m = len(records)
    if m == 0:
        return 1.0
    if m > state0.n_a + state0.n_b:
        raise CondensateExhausted(f"{m} detections exceed {state0.n_a + state0.n_b} particles")
    specs = [r.spec for r in records]
    for i, j in itertools.combinations(range(m), 2):
        if specs[i].overlaps(specs[j]):
            raise ConfigError([Violation("OverlappingRegions", f"windows {i} and {j} overlap")])
    log_z = log_detection_normalizer(state0, specs)
    if log_z == -math.inf:
        raise NoDensityAtPosition("some window has no particle density")
    etas = np.array([r.eta for r in records], dtype=np.int64)
    _, _, _, log_norm, _, status, _ = run_chain(state0, specs, forced=etas)
    if status == kernels.ZERO_PROBABILITY:
        return 0.0
    if status == kernels.NO_DENSITY:
        # density can vanish mid-chain only when a mode is exhausted locally
        return 0.0
    return math.exp(log_norm - log_z)


def field_expectation_exact(state: DoubleFockState) -> complex:
    """<Phi| a |Phi> for the condensate-a annihilator; always zero.

    ``a`` maps the (n_a, n_b) number sector into (n_a - 1, n_b), which is
    orthogonal to the original sector.
    """
    return 0j


def hopping_expectation(es: ExactState) -> complex:
    """<a^dagger b> in the conditioned state."""
    n_a, n_b, m = es.origin.n_a, es.origin.n_b, es.m
    if m == 0:
        return 0j
    A = es.amplitudes
    k = np.arange(1, m + 1)
    coef = np.sqrt(np.clip(n_a - k + 1.0, 0, None) * np.clip(n_b - m + k, 0, None))
    return complex(np.sum(np.conj(A[:-1]) * A[1:] * coef))


def spin_density_expectation_exact(es: ExactState, r: float, phi: float) -> float:
    """<sigma_phi(r)> (transverse spin density at angle phi) in the conditioned state."""
    u = evaluate_mode(es.origin.modes.u_a, r)
    v = evaluate_mode(es.origin.modes.v_b, r)
    return 2.0 * (np.exp(-1j * phi) * np.conj(u) * v * hopping_expectation(es)).real


def z_spin_expectation_exact(es: ExactState, r: float) -> float:
    """Normalized z-spin of a particle found at r, from the conditioned state."""
    probs = np.abs(es.amplitudes) ** 2
    k = np.arange(es.m + 1)
    mean_a = float(np.sum(probs * np.clip(es.origin.n_a - k, 0, None)))
    mean_b = float(np.sum(probs * np.clip(es.origin.n_b - (es.m - k), 0, None)))
    d_a = abs(evaluate_mode(es.origin.modes.u_a, r)) ** 2 * mean_a
    d_b = abs(evaluate_mode(es.origin.modes.v_b, r)) ** 2 * mean_b
    if d_a + d_b <= 0:
        raise NoDensityAtPosition(f"no particle density at r={r}")
    return (d_a - d_b) / (d_a + d_b)
