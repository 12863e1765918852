"""Pure-Python Dormand-Prince 5(4) integrator (fallback for ``_dopri_ext``)."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


def omega_fn(code: int, p: np.ndarray, fn):
    if code == 1:
        A, w, t0 = p[0], p[1], p[2]
        return lambda t: A * math.exp(-((t - t0) / w) ** 2)
    if code == 2:
        c, s, t1, t2 = p[0], p[1], p[2], p[3]
        return lambda t: -c * (math.tanh(s * (t - t1)) + 1.0 / (t - t2))
    if code == 3:
        c, s, t1, t2 = p[0], p[1], p[2], p[3]
        return lambda t: -c * (math.tanh(s * (t - t1)) + 1.0) / (t - t2)
    return fn


def advance(y0, t, t_end, h,
            p_indptr, p_indices, p_data,
            c_indptr, c_indices, c_data,
            rates, g, pulse_code, pulse_params, pulse_fn,
            rtol, atol, h_max, h_min):
    """Integrate ``dy/dt = -i (Omega(t) Hp + g Hc) y - rates * y`` over ``[t, t_end]``.

    Returns ``(y, t_reached, h_next, n_accepted, n_rejected, status)`` with
    status 0 on success, 1 on step-size underflow and 2 on a NaN error norm.
    The final step is shortened to land exactly on ``t_end``.
    """
    n = len(y0)
    y = np.array(y0, dtype=complex)
    if n == 0 or t_end <= t:
        return y, t, h, 0, 0, 0
    Hp = sp.csr_matrix((p_data, p_indices, p_indptr), shape=(n, n))
    Hc = sp.csr_matrix((c_data, c_indices, c_indptr), shape=(n, n))
    rates = np.asarray(rates, dtype=float)
    omega = omega_fn(pulse_code, pulse_params, pulse_fn)

    def rhs(tt, yy):
        return -1j * (omega(tt) * (Hp @ yy) + g * (Hc @ yy)) - rates * yy

    k1 = rhs(t, y)
    n_acc = n_rej = 0
    status = 0
    rejected = False
    while t < t_end:
        h = min(h, h_max)
        last = t + h >= t_end
        hh = t_end - t if last else h
        if hh < h_min and not last:
            status = 1
            break
        k2 = rhs(t + C2 * hh, y + hh * (A21 * k1))
        k3 = rhs(t + C3 * hh, y + hh * (A31 * k1 + A32 * k2))
        k4 = rhs(t + C4 * hh, y + hh * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = rhs(t + C5 * hh, y + hh * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = rhs(t + hh, y + hh * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        yn = y + hh * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = rhs(t + hh, yn)
        e = hh * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(yn))
        err = math.sqrt(np.mean(np.abs(e / sc) ** 2))
        if math.isnan(err):
            status = 2
            break
        if err <= 1.0:
            t = t_end if last else t + hh
            y, k1 = yn, k7
            n_acc += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if rejected:
                fac = min(fac, 1.0)
            rejected = False
            if not last or hh >= h:
                h = hh * fac
        else:
            n_rej += 1
            rejected = True
            h = hh * max(0.2, 0.9 * err ** -0.2)
    return y, t, h, n_acc, n_rej, status


def rk4_fixed(y0, t, t_end, step, rhs):
    """Classical fixed-step RK4, for debugging against the adaptive path."""
    y = np.array(y0, dtype=complex)
    n = max(1, int(math.ceil((t_end - t) / step - 1e-12)))
    h = (t_end - t) / n
    for _ in range(n):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y, n
