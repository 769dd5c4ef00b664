# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sequential-measurement kernels; see _kernels_py for the contract."""

import numpy as np

from libc.math cimport sqrt, log, cos, sin

cdef extern from "<complex.h>" nogil:
    double complex cexp(double complex)

cdef enum:
    OK = 0
    NO_DENSITY = 1
    ZERO_PROBABILITY = 2


cdef double _branch(const double complex[:] amps, Py_ssize_t m, double n_a, double n_b,
                    double complex ua, double complex vb, double phi, int eta,
                    double complex[:] out) nogil:
    cdef Py_ssize_t k
    cdef double left_a, left_b, nrm = 0.0
    cdef double complex ca = cexp(0.5j * phi) * ua
    cdef double complex cb = eta * cexp(-0.5j * phi) * vb
    for k in range(m + 2):
        out[k] = 0.0
    for k in range(m + 1):
        left_a = n_a - k
        left_b = n_b - (m - k)
        if left_a > 0.0:
            out[k + 1] = out[k + 1] + ca * sqrt(left_a) * amps[k]
        if left_b > 0.0:
            out[k] = out[k] + cb * sqrt(left_b) * amps[k]
    for k in range(m + 2):
        nrm += out[k].real * out[k].real + out[k].imag * out[k].imag
    return nrm


def exact_branch(amps, Py_ssize_t m, double n_a, double n_b, double complex ua,
                 double complex vb, double phi, int eta):
    cdef const double complex[:] a = np.ascontiguousarray(amps, dtype=complex)
    out = np.zeros(m + 2, dtype=complex)
    cdef double complex[:] o = out
    cdef double nrm = _branch(a, m, n_a, n_b, ua, vb, phi, eta, o)
    return out, nrm


def exact_sequence(amps, Py_ssize_t m0, double n_a, double n_b, ua, vb, phi,
                   uniforms, forced):
    cdef Py_ssize_t steps = len(phi)
    cdef Py_ssize_t size = m0 + steps + 2
    cdef const double complex[:] uav = np.ascontiguousarray(ua, dtype=complex)
    cdef const double complex[:] vbv = np.ascontiguousarray(vb, dtype=complex)
    cdef const double[:] phv = np.ascontiguousarray(phi, dtype=float)
    cdef const double[:] unv = np.ascontiguousarray(uniforms, dtype=float)
    cdef const long long[:] fv = np.ascontiguousarray(forced, dtype=np.int64)
    etas_arr = np.zeros(steps, dtype=np.int64)
    pp_arr = np.zeros(steps)
    pc_arr = np.zeros(steps)
    cdef long long[:] etas = etas_arr
    cdef double[:] p_plus = pp_arr
    cdef double[:] p_chosen = pc_arr
    cur_arr = np.zeros(size, dtype=complex)
    plus_arr = np.zeros(size, dtype=complex)
    minus_arr = np.zeros(size, dtype=complex)
    cdef double complex[:] cur = cur_arr
    cdef double complex[:] plus = plus_arr
    cdef double complex[:] minus = minus_arr
    cdef double complex[:] chosen
    cur_arr[:m0 + 1] = np.asarray(amps, dtype=complex)
    cdef Py_ssize_t j, k, m = m0
    cdef double n_p, n_m, total, pp, nrm, scale, log_norm = 0.0
    cdef long long e
    cdef int status = OK
    cdef Py_ssize_t index = steps
    for j in range(steps):
        n_p = _branch(cur, m, n_a, n_b, uav[j], vbv[j], phv[j], 1, plus)
        n_m = _branch(cur, m, n_a, n_b, uav[j], vbv[j], phv[j], -1, minus)
        total = n_p + n_m
        if total <= 0.0:
            status = NO_DENSITY
            index = j
            break
        pp = n_p / total
        p_plus[j] = pp
        e = fv[j]
        if e == 0:
            e = 1 if unv[j] < pp else -1
        etas[j] = e
        if e == 1:
            chosen = plus
            nrm = n_p
            p_chosen[j] = pp
        else:
            chosen = minus
            nrm = n_m
            p_chosen[j] = n_m / total
        if nrm <= 0.0:
            status = ZERO_PROBABILITY
            index = j
            break
        scale = 1.0 / sqrt(nrm)
        for k in range(m + 2):
            cur[k] = chosen[k] * scale
        log_norm += log(nrm)
        m += 1
    return (etas_arr, pp_arr, pc_arr, log_norm, np.array(cur_arr[:m + 1]),
            status, index)


def lambda_sequence(weights, cos_grid, sin_grid, visibility, offset, uniforms, forced):
    cdef Py_ssize_t steps = len(visibility)
    cdef Py_ssize_t K = len(weights)
    w_arr = np.array(weights, dtype=float)
    cdef double[:] w = w_arr
    cdef const double[:] cg = np.ascontiguousarray(cos_grid, dtype=float)
    cdef const double[:] sg = np.ascontiguousarray(sin_grid, dtype=float)
    cdef const double[:] vis = np.ascontiguousarray(visibility, dtype=float)
    cdef const double[:] off = np.ascontiguousarray(offset, dtype=float)
    cdef const double[:] unv = np.ascontiguousarray(uniforms, dtype=float)
    cdef const long long[:] fv = np.ascontiguousarray(forced, dtype=np.int64)
    etas_arr = np.zeros(steps, dtype=np.int64)
    pp_arr = np.zeros(steps)
    pc_arr = np.zeros(steps)
    re_arr = np.zeros(steps)
    im_arr = np.zeros(steps)
    cdef long long[:] etas = etas_arr
    cdef double[:] p_plus = pp_arr
    cdef double[:] p_chosen = pc_arr
    cdef double[:] res_re = re_arr
    cdef double[:] res_im = im_arr
    cdef Py_ssize_t j, k
    cdef double co, so, v, acc, pp, pc, tot, sr, si, c
    cdef long long e
    cdef int status = OK
    cdef Py_ssize_t index = steps
    for j in range(steps):
        co = cos(off[j])
        so = sin(off[j])
        v = vis[j]
        acc = 0.0
        for k in range(K):
            acc += w[k] * (cg[k] * co - sg[k] * so)
        pp = 0.5 * (1.0 + v * acc)
        p_plus[j] = pp
        e = fv[j]
        if e == 0:
            e = 1 if unv[j] < pp else -1
        etas[j] = e
        pc = pp if e == 1 else 1.0 - pp
        p_chosen[j] = pc
        if pc <= 0.0:
            status = ZERO_PROBABILITY
            index = j
            break
        tot = 0.0
        for k in range(K):
            c = cg[k] * co - sg[k] * so
            w[k] = w[k] * (1.0 + e * v * c)
            tot += w[k]
        sr = 0.0
        si = 0.0
        for k in range(K):
            w[k] = w[k] / tot
            sr += w[k] * cg[k]
            si += w[k] * sg[k]
        res_re[j] = sr
        res_im[j] = si
    return etas_arr, pp_arr, pc_arr, re_arr, im_arr, w_arr, status, index
