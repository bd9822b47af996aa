# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the Euler and RK4 loops (see ``_pykernels``)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()


cdef inline void _sigma_times(const double[:, :] S0, const double[:, :, :] S1, const double[:] x,
                              const double[:] v, double[:] out, Py_ssize_t m, Py_ssize_t d) noexcept nogil:
    # out = (S0 + S1 @ x) @ v
    cdef Py_ssize_t a, b, k
    cdef double s, sk
    for a in range(m):
        s = 0.0
        for b in range(d):
            sk = S0[a, b]
            for k in range(m):
                sk = sk + S1[a, b, k] * x[k]
            s = s + sk * v[b]
        out[a] = s


def euler_affine(const double[:] times, const double[:] x0, const double[:, :] G, const double[:] h,
                 const double[:, :] S0, const double[:, :, :] S1, double r0, const double[:] r1,
                 const double[:] e, const double[:, :] dZ, const double[:] dR,
                 const long[:] jump_at, const double[:, :] jump_u, const double[:] jump_upow, double cap):
    cdef Py_ssize_t n = times.shape[0] - 1
    cdef Py_ssize_t m = x0.shape[0]
    cdef Py_ssize_t d = S0.shape[1]
    cdef Py_ssize_t nj = jump_u.shape[0]
    values_a = np.empty((n + 1, m))
    pre_a = np.empty((nj, m))
    post_a = np.empty((nj, m))
    cdef double[:, :] values = values_a
    cdef double[:, :] pre = pre_a
    cdef double[:, :] post = post_a
    cdef double[:] x = np.array(x0, dtype=float)
    cdef double[:] y = np.empty(m)
    cdef double[:] sv = np.empty(m)
    cdef Py_ssize_t i, a, k, j
    cdef double dt, rx, s
    cdef long blow = -1
    with nogil:
        for a in range(m):
            values[0, a] = x[a]
        for i in range(n):
            dt = times[i + 1] - times[i]
            _sigma_times(S0, S1, x, dZ[i], sv, m, d)
            rx = r0
            for k in range(m):
                rx = rx + r1[k] * x[k]
            for a in range(m):
                s = h[a]
                for k in range(m):
                    s = s + G[a, k] * x[k]
                y[a] = x[a] + s * dt + sv[a] + rx * dR[i] * e[a]
            for a in range(m):
                x[a] = y[a]
            j = jump_at[i + 1]
            if j >= 0:
                _sigma_times(S0, S1, x, jump_u[j], sv, m, d)
                rx = r0
                for k in range(m):
                    rx = rx + r1[k] * x[k]
                for a in range(m):
                    pre[j, a] = x[a]
                    x[a] = x[a] + sv[a] + rx * jump_upow[j] * e[a]
                    post[j, a] = x[a]
            for a in range(m):
                values[i + 1, a] = x[a]
            for a in range(m):
                if not (fabs(x[a]) <= cap):
                    blow = i + 1
            if blow >= 0:
                break
    return values_a, pre_a, post_a, blow


def rk4_affine(const double[:] x0, const double[:, :] G, const double[:] h, double dt, Py_ssize_t n):
    cdef Py_ssize_t m = x0.shape[0]
    out_a = np.empty((n + 1, m))
    cdef double[:, :] out = out_a
    cdef double[:] x = np.array(x0, dtype=float)
    cdef double[:] k1 = np.empty(m)
    cdef double[:] k2 = np.empty(m)
    cdef double[:] k3 = np.empty(m)
    cdef double[:] k4 = np.empty(m)
    cdef double[:] tmp = np.empty(m)
    cdef Py_ssize_t i, a, b
    cdef double s
    with nogil:
        for a in range(m):
            out[0, a] = x[a]
        for i in range(n):
            for a in range(m):
                s = h[a]
                for b in range(m):
                    s = s + G[a, b] * x[b]
                k1[a] = s
            for a in range(m):
                tmp[a] = x[a] + 0.5 * dt * k1[a]
            for a in range(m):
                s = h[a]
                for b in range(m):
                    s = s + G[a, b] * tmp[b]
                k2[a] = s
            for a in range(m):
                tmp[a] = x[a] + 0.5 * dt * k2[a]
            for a in range(m):
                s = h[a]
                for b in range(m):
                    s = s + G[a, b] * tmp[b]
                k3[a] = s
            for a in range(m):
                tmp[a] = x[a] + dt * k3[a]
            for a in range(m):
                s = h[a]
                for b in range(m):
                    s = s + G[a, b] * tmp[b]
                k4[a] = s
            for a in range(m):
                x[a] = x[a] + dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a])
                out[i + 1, a] = x[a]
    return out_a
