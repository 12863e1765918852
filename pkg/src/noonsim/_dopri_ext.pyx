# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Dormand-Prince 5(4) integrator for dpsi/dt = -i H_eff(t) psi.

Mirrors ``noonsim._dopri_py.advance`` step for step.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, tanh, sqrt, fabs, isnan, pow, fmin, fmax

cnp.import_array()

ctypedef double complex cplx

cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0, B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0, E5 = -17253.0 / 339200.0
cdef double E6 = 22.0 / 525.0, E7 = -1.0 / 40.0


cdef inline double _omega(int code, double[::1] p, object fn, double t):
    cdef double x
    if code == 1:
        x = (t - p[2]) / p[1]
        return p[0] * exp(-x * x)
    if code == 2:
        return -p[0] * (tanh(p[1] * (t - p[2])) + 1.0 / (t - p[3]))
    if code == 3:
        return -p[0] * (tanh(p[1] * (t - p[2])) + 1.0) / (t - p[3])
    return float(fn(t))


cdef void _rhs(double om, double g,
               int[::1] pi, int[::1] pj, double[::1] pv,
               int[::1] ci, int[::1] cj, double[::1] cv,
               double[::1] rates, cplx[::1] y, cplx[::1] out) noexcept nogil:
    cdef Py_ssize_t n = y.shape[0], r, k
    cdef cplx acc_p, acc_c
    for r in range(n):
        acc_p = 0
        for k in range(pi[r], pi[r + 1]):
            acc_p = acc_p + pv[k] * y[pj[k]]
        acc_c = 0
        for k in range(ci[r], ci[r + 1]):
            acc_c = acc_c + cv[k] * y[cj[k]]
        # -i (om Hp + g Hc) y - rates y
        acc_p = om * acc_p + g * acc_c
        out[r] = (acc_p.imag - rates[r] * y[r].real) + 1j * (-acc_p.real - rates[r] * y[r].imag)


def advance(cplx[::1] y0, double t, double t_end, double h,
            int[::1] p_indptr, int[::1] p_indices, double[::1] p_data,
            int[::1] c_indptr, int[::1] c_indices, double[::1] c_data,
            double[::1] rates, double g,
            int pulse_code, double[::1] pulse_params, object pulse_fn,
            double rtol, double atol, double h_max, double h_min):
    """Integrate from ``t`` to ``t_end``; see the pure-Python twin for semantics."""
    cdef Py_ssize_t n = y0.shape[0], i
    cdef cplx[::1] y = np.array(y0, dtype=np.complex128)
    cdef cplx[::1] yn = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] tmp = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k1 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k2 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k3 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k4 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k5 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k6 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k7 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] swap
    cdef double om, err, sc, ay, ayn, fac, hh, e_re, e_im
    cdef long n_acc = 0, n_rej = 0
    cdef int status = 0
    cdef bint last, rejected = False
    cdef cplx e

    if n == 0 or t_end <= t:
        return np.asarray(y), t, h, 0, 0, 0

    om = _omega(pulse_code, pulse_params, pulse_fn, t)
    _rhs(om, g, p_indptr, p_indices, p_data, c_indptr, c_indices, c_data, rates, y, k1)

    while t < t_end:
        if h > h_max:
            h = h_max
        last = False
        if t + h >= t_end:
            hh = t_end - t
            last = True
        else:
            hh = h
        if hh < h_min and not last:
            status = 1
            break

        for i in range(n):
            tmp[i] = y[i] + hh * A21 * k1[i]
        om = _omega(pulse_code, pulse_params, pulse_fn, t + C2 * hh)
        _rhs(om, g, p_indptr, p_indices, p_data, c_indptr, c_indices, c_data, rates, tmp, k2)
        for i in range(n):
            tmp[i] = y[i] + hh * (A31 * k1[i] + A32 * k2[i])
        om = _omega(pulse_code, pulse_params, pulse_fn, t + C3 * hh)
        _rhs(om, g, p_indptr, p_indices, p_data, c_indptr, c_indices, c_data, rates, tmp, k3)
        for i in range(n):
            tmp[i] = y[i] + hh * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        om = _omega(pulse_code, pulse_params, pulse_fn, t + C4 * hh)
        _rhs(om, g, p_indptr, p_indices, p_data, c_indptr, c_indices, c_data, rates, tmp, k4)
        for i in range(n):
            tmp[i] = y[i] + hh * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        om = _omega(pulse_code, pulse_params, pulse_fn, t + C5 * hh)
        _rhs(om, g, p_indptr, p_indices, p_data, c_indptr, c_indices, c_data, rates, tmp, k5)
        for i in range(n):
            tmp[i] = y[i] + hh * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        om = _omega(pulse_code, pulse_params, pulse_fn, t + hh)
        _rhs(om, g, p_indptr, p_indices, p_data, c_indptr, c_indices, c_data, rates, tmp, k6)
        for i in range(n):
            yn[i] = y[i] + hh * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        _rhs(om, g, p_indptr, p_indices, p_data, c_indptr, c_indices, c_data, rates, yn, k7)

        err = 0.0
        for i in range(n):
            e = hh * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            ay = sqrt(y[i].real * y[i].real + y[i].imag * y[i].imag)
            ayn = sqrt(yn[i].real * yn[i].real + yn[i].imag * yn[i].imag)
            sc = atol + rtol * fmax(ay, ayn)
            e_re = e.real / sc
            e_im = e.imag / sc
            err += e_re * e_re + e_im * e_im
        err = sqrt(err / n)
        if isnan(err):
            status = 2
            break

        if err <= 1.0:
            t = t_end if last else t + hh
            swap = y; y = yn; yn = swap
            swap = k1; k1 = k7; k7 = swap
            n_acc += 1
            fac = 5.0 if err == 0.0 else fmin(5.0, fmax(0.2, 0.9 * pow(err, -0.2)))
            if rejected:
                fac = fmin(fac, 1.0)
            rejected = False
            # a step shortened to land on t_end does not shrink the next one
            if not last or hh >= h:
                h = hh * fac
        else:
            n_rej += 1
            rejected = True
            h = hh * fmax(0.2, 0.9 * pow(err, -0.2))
    return np.asarray(y), t, h, n_acc, n_rej, status
