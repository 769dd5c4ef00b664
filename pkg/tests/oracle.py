"""Independent reference computations used only by the tests.

``fock_joint_probs`` works in first quantization: an N-particle symmetric
wavefunction over the two condensate orbitals is stored as a dense tensor of
shape (2,) * N, and removing a particle in the detected mode contracts one
index. No Fock-space square-root factors appear anywhere, so the result is
independent of the engine's amplitude recursion.

``fock_operators`` builds dense second-quantized matrices for expectation
values. ``phase_average_quad`` integrates the phase-averaged probability with
adaptive quadrature rather than a periodic grid.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate


def symmetric_state(n_a: int, n_b: int) -> np.ndarray:
    """Normalized symmetrization of |a>^n_a |b>^n_b as a (2,)*N tensor (a=0, b=1)."""
    N = n_a + n_b
    psi = np.zeros((2,) * N, dtype=complex)
    for occupied in itertools.combinations(range(N), n_b):
        idx = [0] * N
        for i in occupied:
            idx[i] = 1
        psi[tuple(idx)] = 1.0
    return psi / np.linalg.norm(psi)


def detected_weights(u: complex, v: complex, phi: float, eta: int) -> np.ndarray:
    """Orbital components of the annihilated one-particle mode for outcome eta."""
    return np.array([np.exp(0.5j * phi) * u, eta * np.exp(-0.5j * phi) * v])


def remove_particle(psi: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.tensordot(w, psi, axes=([0], [0]))


def fock_string_norms(n_a: int, n_b: int, uv_phi, etas) -> float:
    """Squared norm of the unnormalized state after the detections (up to a common factor)."""
    psi = symmetric_state(n_a, n_b)
    for (u, v, phi), eta in zip(uv_phi, etas):
        psi = remove_particle(psi, detected_weights(u, v, phi, eta))
    return float(np.vdot(psi, psi).real)


def fock_joint_probs(n_a: int, n_b: int, uv_phi) -> dict:
    """Joint probabilities of every outcome string, normalized over all 2**m strings."""
    m = len(uv_phi)
    raw = {etas: fock_string_norms(n_a, n_b, uv_phi, etas)
           for etas in itertools.product((1, -1), repeat=m)}
    total = sum(raw.values())
    return {k: v / total for k, v in raw.items()}


def fock_operators(n_a: int, n_b: int):
    """Dense annihilators a, b on the truncated two-mode space and the initial vector."""
    da, db = n_a + 1, n_b + 1
    low_a = np.diag(np.sqrt(np.arange(1, da)), 1)
    low_b = np.diag(np.sqrt(np.arange(1, db)), 1)
    a = np.kron(low_a, np.eye(db))
    b = np.kron(np.eye(da), low_b)
    vec = np.zeros(da * db, dtype=complex)
    vec[n_a * db + n_b] = 1.0
    return a, b, vec


def conditioned_vector(n_a, n_b, uv_phi, etas) -> np.ndarray:
    a, b, vec = fock_operators(n_a, n_b)
    for (u, v, phi), eta in zip(uv_phi, etas):
        c = np.exp(0.5j * phi) * u * a + eta * np.exp(-0.5j * phi) * v * b
        vec = c @ vec
        vec = vec / np.linalg.norm(vec)
    return vec


def hopping_oracle(n_a, n_b, uv_phi, etas) -> complex:
    """<a^dagger b> in the conditioned state, from dense matrices."""
    a, b, _ = fock_operators(n_a, n_b)
    vec = conditioned_vector(n_a, n_b, uv_phi, etas)
    return complex(np.vdot(vec, a.conj().T @ b @ vec))


def phase_average_quad(factors) -> float:
    """(1/2pi) int prod_j (1 + eta_j V_j cos(L + offset_j)) / 2 dL by adaptive quadrature.

    ``factors`` is a list of (eta, V, offset).
    """
    def f(lam):
        out = 1.0
        for eta, V, off in factors:
            out *= 0.5 * (1.0 + eta * V * math.cos(lam + off))
        return out

    val, _ = integrate.quad(f, 0.0, 2 * math.pi, limit=400, epsabs=1e-15, epsrel=1e-13)
    return val / (2 * math.pi)
