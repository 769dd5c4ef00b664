"""Detection statistics for a state with a definite relative phase."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from becphase.approx import _guard, default_grid_size, factor_params, phase_grid
from becphase.errors import GridTooCoarse, NoDensityAtPosition
from becphase.model import CondensateState, DetectionSpec, PhaseState, evaluate_mode


@dataclass(frozen=True)
class TwoByTwoDensity:
    """One-particle spin density matrix in the (alpha, beta) basis, unnormalized."""

    matrix: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> np.ndarray:
        return self.matrix / self.trace

    @property
    def determinant(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=atol))


def _p_plus(state: CondensateState, spec: DetectionSpec, lam):
    p = factor_params(state, spec)
    if p.density <= 0:
        raise NoDensityAtPosition(f"no particle density at r={spec.position}")
    return 0.5 * (1.0 + p.visibility * np.cos(lam + p.phase_offset))


def outcome_prob_phase(state: PhaseState, spec: DetectionSpec) -> tuple[float, float]:
    """p(eta) = (1 + eta V cos(lam - xi - phi)) / 2 for a definite phase."""
    pp = float(_p_plus(state, spec, state.lam))
    return pp, 1.0 - pp


def density_matrix_phase(state: PhaseState, r: float) -> TwoByTwoDensity:
    """W = psi psi^dagger for the one-particle spinor of the phase state at r.

    The coherence is ``sqrt(n_a n_b) exp(-i lam) u_a v_b*``.
    """
    u = complex(evaluate_mode(state.modes.u_a, r))
    v = complex(evaluate_mode(state.modes.v_b, r))
    d_a = state.n_a * abs(u) ** 2
    d_b = state.n_b * abs(v) ** 2
    if d_a + d_b <= 0:
        raise NoDensityAtPosition(f"no particle density at r={r}")
    off = math.sqrt(state.n_a * state.n_b) * np.exp(-1j * state.lam) * u * np.conj(v)
    W = np.array([[d_a, off], [np.conj(off), d_b]], dtype=complex)
    return TwoByTwoDensity(W)


def z_spin_expectation(state: CondensateState, r: float) -> float:
    """(d_a - d_b) / (d_a + d_b); identical for phase and double Fock states."""
    d_a = state.n_a * abs(evaluate_mode(state.modes.u_a, r)) ** 2
    d_b = state.n_b * abs(evaluate_mode(state.modes.v_b, r)) ** 2
    if d_a + d_b <= 0:
        raise NoDensityAtPosition(f"no particle density at r={r}")
    return (d_a - d_b) / (d_a + d_b)


def lambda_average(template: CondensateState, records, K: Optional[int] = None) -> float:
    """Uniform phase average of the fixed-phase outcome-string probability.

    ``template`` supplies particle numbers and modes; its phase (if any) is
    ignored. Uses the same exact periodic quadrature as the approximate engine.
    """
    records = list(records)
    m = len(records)
    _guard(template, m)
    if m == 0:
        return 1.0
    K = default_grid_size(m) if K is None else K
    if K < m + 1:
        raise GridTooCoarse(f"K={K} < m + 1 = {m + 1}")
    grid = phase_grid(K)
    logs = np.zeros(K)
    for rec in records:
        pp = _p_plus(template, rec.spec, grid)
        p = pp if rec.eta == 1 else 1.0 - pp
        with np.errstate(divide="ignore"):
            logs += np.log(np.maximum(p, 0.0))
    if np.all(np.isneginf(logs)):
        return 0.0
    return float(np.exp(logsumexp(logs) - math.log(K)))
