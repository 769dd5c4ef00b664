"""Large-N phase-averaged detection probabilities and the phase posterior.

For m << n_a, n_b every detection contributes a factor

    d_a + d_b + eta * cross * cos(L - xi(r) - phi)

to an integrand averaged uniformly over the latent relative phase L. The
product of m such factors is a trigonometric polynomial of degree m, so a
K-point periodic rectangle rule with K >= m + 1 integrates it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from becphase import kernels
from becphase.errors import GridTooCoarse, NoDensityAtPosition, SequenceTooLongForApproxEngine
from becphase.model import (
    APPROX_GUARD,
    TWO_PI,
    DetectionRecord,
    DetectionSpec,
    local_densities,
    wrap_angle,
)

#: Resultant lengths below this are treated as "no preferred direction".
MIN_RESULTANT = 1e-12


@dataclass(frozen=True)
class LambdaFactorParams:
    d_a: float
    d_b: float
    cross: float
    phase_offset: float

    def __post_init__(self):
        vals = (self.d_a, self.d_b, self.cross, self.phase_offset)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("factor parameters must be finite")
        if min(self.d_a, self.d_b, self.cross) < 0:
            raise ValueError("densities must be nonnegative")
        if self.cross > (self.d_a + self.d_b) * (1 + 1e-12):
            raise ValueError("cross term exceeds d_a + d_b")

    @property
    def density(self) -> float:
        return self.d_a + self.d_b

    @property
    def visibility(self) -> float:
        tot = self.d_a + self.d_b
        return min(self.cross / tot, 1.0) if tot > 0 else 0.0


def factor_params(state, spec: DetectionSpec) -> LambdaFactorParams:
    """Per-detection factor parameters; ``phase_offset`` is -(xi(r) + phi).

    This sign is the one fixed by the detection eigenstates and the phase
    state; it makes the factor peak at L = phi + xi(r).
    """
    d_a, d_b, cross, xi_r = local_densities(state, spec.position)
    return LambdaFactorParams(d_a, d_b, cross, wrap_angle(-xi_r - spec.angle))


def lambda_factor(params: LambdaFactorParams, eta: int, lam):
    """d_a + d_b + eta * cross * cos(lam + phase_offset), clipped at 0."""
    val = params.d_a + params.d_b + eta * params.cross * np.cos(np.asarray(lam) + params.phase_offset)
    val = np.maximum(val, 0.0)
    return float(val) if np.ndim(val) == 0 else val


def default_grid_size(m: int) -> int:
    return max(4 * (m + 1), 256)


def phase_grid(K: int) -> np.ndarray:
    return TWO_PI * np.arange(K) / K


def _guard(state, m: int):
    limit = APPROX_GUARD * min(state.n_a, state.n_b)
    if m > limit:
        raise SequenceTooLongForApproxEngine(
            f"m={m} exceeds min(n_a, n_b)/10 = {limit:g}")


def _log_integrand(state, records, grid: np.ndarray) -> np.ndarray:
    """Sum over records of log((1 + eta V cos(L + offset)) / 2) on the grid."""
    out = np.zeros_like(grid)
    for rec in records:
        p = factor_params(state, rec.spec)
        if p.density <= 0:
            raise NoDensityAtPosition(f"no particle density at r={rec.spec.position}")
        f = 0.5 * (1.0 + rec.eta * p.visibility * np.cos(grid + p.phase_offset))
        with np.errstate(divide="ignore"):
            out += np.log(np.maximum(f, 0.0))
    return out


def joint_probability_lambda(state, records, K: Optional[int] = None) -> float:
    """Outcome-string probability from the phase-averaged formula.

    The normalization over the 2**m strings is prod_j 2 (d_a + d_b), because
    the eta-sum of each factor is free of L.
    """
    records = list(records)
    m = len(records)
    _guard(state, m)
    if m == 0:
        return 1.0
    K = default_grid_size(m) if K is None else K
    if K < m + 1:
        raise GridTooCoarse(f"K={K} < m + 1 = {m + 1}")
    logs = _log_integrand(state, records, phase_grid(K))
    if np.all(np.isneginf(logs)):
        return 0.0
    return float(np.exp(logsumexp(logs) - math.log(K)))


def conditional_next(state, history, spec: DetectionSpec, K: Optional[int] = None):
    """(p_plus, p_minus) for one more detection given ``history``."""
    history = list(history)
    _guard(state, len(history) + 1)
    p_plus = joint_probability_lambda(state, history + [DetectionRecord(spec, 1)], K)
    p_minus = joint_probability_lambda(state, history + [DetectionRecord(spec, -1)], K)
    total = p_plus + p_minus
    return p_plus / total, p_minus / total


@dataclass(frozen=True)
class LambdaPosterior:
    """Discretized posterior over the relative phase.

    ``log_normalization`` is logsumexp of ``log_weights``; ``weights`` is the
    normalized probability mass on ``grid``.
    """

    grid: np.ndarray
    log_weights: np.ndarray
    log_normalization: float

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights - self.log_normalization)

    @property
    def K(self) -> int:
        return len(self.grid)

    @classmethod
    def from_log_weights(cls, grid, log_weights) -> "LambdaPosterior":
        grid = np.asarray(grid, dtype=float)
        lw = np.asarray(log_weights, dtype=float)
        return cls(grid, lw, float(logsumexp(lw)))

    @classmethod
    def uniform(cls, K: int) -> "LambdaPosterior":
        return cls.from_log_weights(phase_grid(K), np.zeros(K))


def posterior(state, history, K: Optional[int] = None) -> LambdaPosterior:
    """Phase posterior, proportional to the product of per-detection factors."""
    history = list(history)
    m = len(history)
    K = default_grid_size(m) if K is None else K
    if K < m + 1:
        raise GridTooCoarse(f"K={K} < m + 1 = {m + 1}")
    grid = phase_grid(K)
    return LambdaPosterior.from_log_weights(grid, _log_integrand(state, history, grid))


@dataclass(frozen=True)
class CircularStats:
    mean_direction: Optional[float]
    resultant_length: float
    circular_std: float


def circular_stats(post: LambdaPosterior) -> CircularStats:
    z = complex(np.sum(post.weights * np.exp(1j * post.grid)))
    return stats_from_resultant(z)


def stats_from_resultant(z: complex) -> CircularStats:
    R = abs(z)
    if R < MIN_RESULTANT:
        return CircularStats(None, 0.0, math.inf)
    R = min(R, 1.0)
    return CircularStats(wrap_angle(math.atan2(z.imag, z.real)), R, math.sqrt(-2.0 * math.log(R)))


def predict_from_posterior(post: LambdaPosterior, state, spec: DetectionSpec):
    """(p_plus, p_minus) at ``spec`` averaged over a phase posterior."""
    p = factor_params(state, spec)
    if p.density <= 0:
        raise NoDensityAtPosition(f"no particle density at r={spec.position}")
    c = float(np.sum(post.weights * np.cos(post.grid + p.phase_offset)))
    pp = 0.5 * (1.0 + p.visibility * c)
    return pp, 1.0 - pp


def spin_density_from_posterior(post: LambdaPosterior, state, r: float, phi: float) -> float:
    """Posterior-averaged transverse spin density cross(r) * E[cos(L - xi - phi)]."""
    p = factor_params(state, DetectionSpec(r, phi))
    return p.cross * float(np.sum(post.weights * np.cos(post.grid + p.phase_offset)))


def chain_inputs(state, specs):
    """Per-detection visibilities and phase offsets for the sequential kernel."""
    vis = np.zeros(len(specs))
    off = np.zeros(len(specs))
    for j, s in enumerate(specs):
        p = factor_params(state, s)
        if p.density <= 0:
            raise NoDensityAtPosition(f"no particle density at r={s.position}")
        vis[j] = p.visibility
        off[j] = p.phase_offset
    return vis, off


def run_chain(state, specs, K: Optional[int] = None, uniforms=None, forced=None):
    """Sequential kernel over ``specs``; returns the raw kernel tuple."""
    m = len(specs)
    K = default_grid_size(m) if K is None else K
    grid = phase_grid(K)
    vis, off = chain_inputs(state, specs)
    if uniforms is None:
        uniforms = np.zeros(m)
    if forced is None:
        forced = np.zeros(m, dtype=np.int64)
    return kernels.lambda_sequence(np.full(K, 1.0 / K), np.cos(grid), np.sin(grid), vis, off,
                                   np.asarray(uniforms, dtype=float),
                                   np.asarray(forced, dtype=np.int64))
