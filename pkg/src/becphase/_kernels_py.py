"""Pure numpy implementation of the sequential-measurement kernels.

Mirrors ``_kernels.pyx`` call for call; ``becphase.kernels`` picks one at
import time. Status codes: 0 ok, 1 no particle density at the window,
2 forced outcome has zero probability.
"""

import math

import numpy as np

OK, NO_DENSITY, ZERO_PROBABILITY = 0, 1, 2


def exact_branch(amps, m, n_a, n_b, ua, vb, phi, eta):
    """Apply the detected-mode annihilator for outcome ``eta`` to ``amps``.

    ``amps[k]`` is the amplitude of having removed k particles from mode a and
    m - k from mode b. Returns the unnormalized image (length m + 1 + 1) and
    its squared norm.
    """
    amps = np.asarray(amps, dtype=complex)
    k = np.arange(m + 1, dtype=float)
    left_a = np.clip(n_a - k, 0.0, None)
    left_b = np.clip(n_b - (m - k), 0.0, None)
    out = np.zeros(m + 2, dtype=complex)
    out[1:] += np.exp(0.5j * phi) * ua * np.sqrt(left_a) * amps
    out[:-1] += eta * np.exp(-0.5j * phi) * vb * np.sqrt(left_b) * amps
    return out, float(np.vdot(out, out).real)


def exact_sequence(amps, m0, n_a, n_b, ua, vb, phi, uniforms, forced):
    """Run a chain of detections through the exact engine.

    ``forced[j]`` of 0 means sample with ``uniforms[j]``; +-1 forces the
    outcome. Returns (etas, p_plus, p_chosen, log_norm, amps, status, index).
    ``log_norm`` accumulates the log squared norm of the unnormalized chain.
    """
    steps = len(phi)
    etas = np.zeros(steps, dtype=np.int64)
    p_plus = np.zeros(steps)
    p_chosen = np.zeros(steps)
    log_norm = 0.0
    a = np.asarray(amps, dtype=complex)
    m = m0
    for j in range(steps):
        plus, n_p = exact_branch(a, m, n_a, n_b, ua[j], vb[j], phi[j], 1)
        minus, n_m = exact_branch(a, m, n_a, n_b, ua[j], vb[j], phi[j], -1)
        total = n_p + n_m
        if total <= 0.0:
            return etas, p_plus, p_chosen, log_norm, a, NO_DENSITY, j
        pp = n_p / total
        p_plus[j] = pp
        e = forced[j]
        if e == 0:
            e = 1 if uniforms[j] < pp else -1
        etas[j] = e
        chosen, nrm = (plus, n_p) if e == 1 else (minus, n_m)
        p_chosen[j] = pp if e == 1 else n_m / total
        if nrm <= 0.0:
            return etas, p_plus, p_chosen, log_norm, a, ZERO_PROBABILITY, j
        a = chosen / math.sqrt(nrm)
        log_norm += math.log(nrm)
        m += 1
    return etas, p_plus, p_chosen, log_norm, a, OK, steps


def lambda_sequence(weights, cos_grid, sin_grid, visibility, offset, uniforms, forced):
    """Sequential sampling from the phase-averaged (large-N) model.

    ``weights`` is a normalized pmf on the phase grid and is updated
    multiplicatively by each per-detection factor (1 + eta V cos(L + offset))/2,
    renormalized every step. Returns (etas, p_plus, p_chosen, res_re, res_im,
    weights, status, index); ``res_*`` is the resultant vector after each step.
    """
    steps = len(visibility)
    etas = np.zeros(steps, dtype=np.int64)
    p_plus = np.zeros(steps)
    p_chosen = np.zeros(steps)
    res_re = np.zeros(steps)
    res_im = np.zeros(steps)
    w = np.array(weights, dtype=float)
    for j in range(steps):
        c = cos_grid * math.cos(offset[j]) - sin_grid * math.sin(offset[j])
        vmean = visibility[j] * float(w @ c)
        pp = 0.5 * (1.0 + vmean)
        p_plus[j] = pp
        e = forced[j]
        if e == 0:
            e = 1 if uniforms[j] < pp else -1
        etas[j] = e
        pc = pp if e == 1 else 1.0 - pp
        p_chosen[j] = pc
        if pc <= 0.0:
            return etas, p_plus, p_chosen, res_re, res_im, w, ZERO_PROBABILITY, j
        w = w * (1.0 + e * visibility[j] * c)
        w /= w.sum()
        res_re[j] = float(w @ cos_grid)
        res_im[j] = float(w @ sin_grid)
    return etas, p_plus, p_chosen, res_re, res_im, w, OK, steps
