"""Reference implementations of the hot loops.

These mirror ``_ckernels`` exactly and are used when the extension is not
built (or when ``JUMPSUPPORT_PURE_PYTHON=1``).
"""
import numpy as np


def _sigma(S0, S1, x):
    return S0 + S1 @ x


def euler_affine(times, x0, G, h, S0, S1, r0, r1, e, dZ, dR, jump_at, jump_u, jump_upow, cap):
    """Euler recursion ``x += (Gx+h)dt + sigma(x)dZ + R(x) e dR`` with exact jumps.

    ``sigma(x) = S0 + S1 @ x`` (``S1`` has shape ``(m, d, m)``) and
    ``R(x) = r0 + r1 . x``.  ``jump_at[i] = j >= 0`` applies jump ``j`` at
    node ``i`` after the step arriving there.  Returns ``(values, pre, post,
    blowup)`` where ``blowup`` is the first node whose state norm exceeds
    ``cap`` (or -1).
    """
    n = times.shape[0] - 1
    m = x0.shape[0]
    values = np.empty((n + 1, m))
    pre = np.empty((jump_u.shape[0], m))
    post = np.empty((jump_u.shape[0], m))
    x = np.array(x0, dtype=float)
    values[0] = x
    for i in range(n):
        dt = times[i + 1] - times[i]
        x = x + (G @ x + h) * dt + _sigma(S0, S1, x) @ dZ[i] + (r0 + r1 @ x) * dR[i] * e
        j = jump_at[i + 1]
        if j >= 0:
            pre[j] = x
            x = x + _sigma(S0, S1, x) @ jump_u[j] + (r0 + r1 @ x) * jump_upow[j] * e
            post[j] = x
        values[i + 1] = x
        if not np.all(np.abs(x) <= cap):
            return values, pre, post, i + 1
    return values, pre, post, -1


def rk4_affine(x0, G, h, dt, n):
    """``n`` classical RK4 steps of size ``dt`` for ``x' = Gx + h``."""
    m = x0.shape[0]
    out = np.empty((n + 1, m))
    x = np.array(x0, dtype=float)
    out[0] = x
    for i in range(n):
        k1 = G @ x + h
        k2 = G @ (x + 0.5 * dt * k1) + h
        k3 = G @ (x + 0.5 * dt * k2) + h
        k4 = G @ (x + dt * k3) + h
        x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = x
    return out
