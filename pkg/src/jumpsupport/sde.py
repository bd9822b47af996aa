"""Coefficients of the jump SDE and its Euler simulators.

The equation is

    dX = b(X) dt + int_{|u|<=1} c(X-, u) Ntilde(du, dt) + int_{|u|>1} c(X-, u) N(du, dt)

with jump map ``c(x, u) = sigma(x) u + r(x, u)``.  Built-in coefficient
forms are affine in ``x`` so the effective drift stays affine and the Euler
loop can run in the compiled kernel; registered callables fall back to a
Python loop.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import AssumptionError, BlowUpError, ConfigError
from .levy import (
    SmallJumpConfig,
    SmallJumpSampler,
    beta_moment,
    integrability_subspace,
    sample_large_jumps,
    upsilon_eta,
)
from .paths import CadlagPath

BLOWUP_CAP = 1e12

_DRIFTS = {}
_SIGMAS = {}
_FACTORS = {}


def register_drift(name, fn):
    """Register ``fn: R^m -> R^m`` for use as ``{"kind": "registered", "name": name}``."""
    _DRIFTS[name] = fn


def register_sigma(name, fn):
    """Register ``fn: R^m -> R^{m x d}``."""
    _SIGMAS[name] = fn


def register_remainder(name, fn):
    """Register a scalar factor ``R: R^m -> R``; the remainder is ``R(x) |u|^beta e``."""
    _FACTORS[name] = fn


# --------------------------------------------------------------------------
# coefficient descriptors

@dataclass(frozen=True, eq=False)
class AffineDrift:
    """``b(x) = A x + a``."""

    A: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        a = np.asarray(self.a, dtype=float).ravel()
        if A.shape != (a.size, a.size):
            raise ValueError(f"drift matrix shape {A.shape} does not match offset length {a.size}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "a", a)

    affine = True

    @property
    def m(self):
        return self.a.size

    def __call__(self, x):
        return self.A @ np.asarray(x, dtype=float) + self.a

    def lipschitz(self):
        return float(np.linalg.norm(self.A, 2))

    def to_dict(self):
        return {"kind": "affine", "A": self.A.tolist(), "a": self.a.tolist()}


@dataclass(frozen=True, eq=False)
class AffineSigma:
    """``sigma(x) = S0 + sum_k x_k S1[:, :, k]``."""

    S0: np.ndarray
    S1: np.ndarray = None

    def __post_init__(self):
        S0 = np.atleast_2d(np.asarray(self.S0, dtype=float))
        m, d = S0.shape
        S1 = np.zeros((m, d, m)) if self.S1 is None else np.asarray(self.S1, dtype=float).reshape(m, d, m)
        object.__setattr__(self, "S0", S0)
        object.__setattr__(self, "S1", S1)

    affine = True

    @property
    def m(self):
        return self.S0.shape[0]

    @property
    def d(self):
        return self.S0.shape[1]

    def __call__(self, x):
        return self.S0 + self.S1 @ np.asarray(x, dtype=float)

    def x_matrix(self, v):
        """Matrix ``M`` with ``sigma(x) v = S0 v + M x``."""
        return np.einsum("adk,d->ak", self.S1, np.asarray(v, dtype=float))

    def lipschitz(self):
        # Frobenius-norm Lipschitz constant of x -> sigma(x)
        return float(np.linalg.norm(self.S1.reshape(-1, self.m), 2))

    def to_dict(self):
        out = {"kind": "affine", "S0": self.S0.tolist()}
        if np.any(self.S1):
            out["S1"] = self.S1.tolist()
        return out


@dataclass(frozen=True, eq=False)
class PowerRemainder:
    """``r(x, u) = (r0 + r1 . x) |u|^beta e``; zero when ``r0 = 0`` and ``r1 = 0``."""

    r0: float
    r1: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        r1 = np.asarray(self.r1, dtype=float).ravel()
        e = np.asarray(self.e, dtype=float).ravel()
        if r1.size != e.size:
            raise ValueError("remainder vectors must have length m")
        n = np.linalg.norm(e)
        if not np.isclose(n, 1.0, rtol=0, atol=1e-12) and (self.r0 != 0.0 or np.any(r1)):
            raise ValueError("remainder direction e must be a unit vector")
        object.__setattr__(self, "r0", float(self.r0))
        object.__setattr__(self, "r1", r1)
        object.__setattr__(self, "e", e)

    affine = True

    @classmethod
    def zero(cls, m):
        e = np.zeros(m)
        e[0] = 1.0
        return cls(0.0, np.zeros(m), e)

    @property
    def is_zero(self):
        return self.r0 == 0.0 and not np.any(self.r1)

    def factor(self, x):
        return self.r0 + float(self.r1 @ np.asarray(x, dtype=float))

    def lipschitz(self):
        return float(np.linalg.norm(self.r1))

    def to_dict(self):
        if self.is_zero:
            return {"kind": "zero"}
        return {"kind": "power", "r0": self.r0, "r1": self.r1.tolist(), "e": self.e.tolist()}


@dataclass(frozen=True, eq=False)
class RegisteredDrift:
    name: str
    m: int
    affine = False

    def __call__(self, x):
        return np.asarray(_DRIFTS[self.name](np.asarray(x, dtype=float)), dtype=float)

    def to_dict(self):
        return {"kind": "registered", "name": self.name}


@dataclass(frozen=True, eq=False)
class RegisteredSigma:
    name: str
    m: int
    d: int
    affine = False

    def __call__(self, x):
        return np.asarray(_SIGMAS[self.name](np.asarray(x, dtype=float)), dtype=float).reshape(self.m, self.d)

    def to_dict(self):
        return {"kind": "registered", "name": self.name}


@dataclass(frozen=True, eq=False)
class RegisteredRemainder:
    name: str
    e: np.ndarray
    affine = False
    is_zero = False

    def factor(self, x):
        return float(_FACTORS[self.name](np.asarray(x, dtype=float)))

    def to_dict(self):
        return {"kind": "registered", "name": self.name, "e": np.asarray(self.e).tolist()}


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Drift, jump matrix and remainder of the SDE, with the constants ``beta`` and ``C``.

    ``lipschitz_b`` and ``lipschitz_sigma`` are the declared Lipschitz
    constants; for affine forms they default to the exact values.
    """

    drift: object
    sigma: object
    remainder: object = None
    beta: float = 2.0
    C: float = None
    lipschitz_b: float = None
    lipschitz_sigma: float = None
    box: float = 10.0

    def __post_init__(self):
        if self.remainder is None:
            object.__setattr__(self, "remainder", PowerRemainder.zero(self.m))
        if self.drift.m != self.sigma.m:
            raise ValueError("drift and sigma disagree on the state dimension")
        if not self.beta > 1.0:
            raise ValueError("beta must exceed 1")
        if self.lipschitz_b is None and self.drift.affine:
            object.__setattr__(self, "lipschitz_b", self.drift.lipschitz())
        if self.lipschitz_sigma is None and self.sigma.affine:
            object.__setattr__(self, "lipschitz_sigma", self.sigma.lipschitz())
        if self.C is None and self.remainder.affine:
            object.__setattr__(self, "C", max(self.remainder.lipschitz(), abs(self.remainder.r0), 1e-300))

    @property
    def m(self):
        return self.sigma.m

    @property
    def d(self):
        return self.sigma.d

    @property
    def affine(self):
        return self.drift.affine and self.sigma.affine and self.remainder.affine

    def b(self, x):
        return self.drift(x)

    def sigma_at(self, x):
        return self.sigma(x)

    def r(self, x, u):
        u = np.asarray(u, dtype=float)
        if self.remainder.is_zero:
            return np.zeros(self.m)
        return self.remainder.factor(x) * np.linalg.norm(u) ** self.beta * self.remainder.e

    def c(self, x, u):
        """Jump map ``sigma(x) u + r(x, u)``."""
        return self.sigma(x) @ np.asarray(u, dtype=float) + self.r(x, u)

    def to_dict(self):
        out = {
            "drift": self.drift.to_dict(),
            "sigma": self.sigma.to_dict(),
            "remainder": self.remainder.to_dict(),
            "beta": self.beta,
            "box": self.box,
        }
        for key in ("C", "lipschitz_b", "lipschitz_sigma"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out

    @classmethod
    def from_dict(cls, spec):
        spec = dict(spec)
        try:
            sig = spec["sigma"]
            if sig.get("kind", "affine") == "affine":
                sigma = AffineSigma(sig["S0"], sig.get("S1"))
            else:
                sigma = RegisteredSigma(sig["name"], int(sig["m"]), int(sig["d"]))
            m = sigma.m
            dr = spec.get("drift", {"kind": "affine", "A": np.zeros((m, m)).tolist(), "a": [0.0] * m})
            if dr.get("kind", "affine") == "affine":
                drift = AffineDrift(dr["A"], dr.get("a", [0.0] * m))
            else:
                drift = RegisteredDrift(dr["name"], m)
            rm = spec.get("remainder", {"kind": "zero"})
            kind = rm.get("kind", "zero")
            if kind == "zero":
                remainder = PowerRemainder.zero(m)
            elif kind == "power":
                remainder = PowerRemainder(rm.get("r0", 0.0), rm.get("r1", [0.0] * m), rm["e"])
            else:
                remainder = RegisteredRemainder(rm["name"], np.asarray(rm["e"], dtype=float))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed coefficient spec: {exc!r}") from None
        return cls(drift, sigma, remainder, beta=float(spec.get("beta", 2.0)), C=spec.get("C"),
                   lipschitz_b=spec.get("lipschitz_b"), lipschitz_sigma=spec.get("lipschitz_sigma"),
                   box=float(spec.get("box", 10.0)))


def check_assumptions(coeffs, model=None, rng=None, n=1000, x0=None):
    """Sample Lipschitz and growth quotients against the declared constants.

    Raises :class:`AssumptionError` on the first violated bound; returns the
    largest observed quotients otherwise.
    """
    rng = rng or np.random.default_rng(0)
    m, d = coeffs.m, coeffs.d
    slack = 1.0 + 1e-6
    x = rng.uniform(-coeffs.box, coeffs.box, (n, m))
    y = rng.uniform(-coeffs.box, coeffs.box, (n, m))
    u = rng.standard_normal((n, d))
    u *= (rng.random(n) ** (1.0 / d) / np.linalg.norm(u, axis=1))[:, None]
    dx = np.linalg.norm(x - y, axis=1)
    qb = max(np.linalg.norm(coeffs.b(a) - coeffs.b(b)) / s for a, b, s in zip(x, y, dx))
    qs = max(np.linalg.norm(coeffs.sigma_at(a) - coeffs.sigma_at(b)) / s for a, b, s in zip(x, y, dx))
    out = {"b": qb, "sigma": qs, "r": 0.0, "r_growth": 0.0}
    if coeffs.lipschitz_b is not None and qb > coeffs.lipschitz_b * slack:
        raise AssumptionError(f"drift Lipschitz quotient {qb:.6g} exceeds declared {coeffs.lipschitz_b:.6g}")
    if coeffs.lipschitz_sigma is not None and qs > coeffs.lipschitz_sigma * slack:
        raise AssumptionError(f"sigma Lipschitz quotient {qs:.6g} exceeds declared {coeffs.lipschitz_sigma:.6g}")
    if not coeffs.remainder.is_zero:
        x0 = np.zeros(m) if x0 is None else np.asarray(x0, dtype=float)
        ub = np.linalg.norm(u, axis=1) ** coeffs.beta
        qr = max(np.linalg.norm(coeffs.r(a, w) - coeffs.r(b, w)) / (s * p)
                 for a, b, w, s, p in zip(x, y, u, dx, ub))
        qg = max(np.linalg.norm(coeffs.r(x0, w)) / p for w, p in zip(u, ub))
        out["r"], out["r_growth"] = qr, qg
        if coeffs.C is not None and max(qr, qg) > coeffs.C * slack:
            raise AssumptionError(f"remainder quotient {max(qr, qg):.6g} exceeds C={coeffs.C:.6g}")
    if model is not None:
        indices = model.stability_indices()
        if indices and not coeffs.beta > max(indices):
            raise AssumptionError(f"beta={coeffs.beta} must exceed every stability index {indices}")
        beta_moment(model, coeffs.beta)
    return out


# --------------------------------------------------------------------------
# effective drift

@dataclass(frozen=True, eq=False)
class EffectiveDrift:
    """``x -> b(x) - sigma(x) m_L - R(x) B e`` with precomputed ``m_L`` and ``B``.

    ``m_L`` is the integral of ``u_L`` and ``B`` that of ``|u|^beta`` over the
    chosen shell.  ``A`` and ``a`` are populated for affine coefficients.
    """

    coeffs: CoefficientSet
    m_L: np.ndarray
    B: float
    A: np.ndarray = None
    a: np.ndarray = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.A is not None:
            return self.A @ x + self.a
        out = self.coeffs.b(x) - self.coeffs.sigma_at(x) @ self.m_L
        if self.B:
            out = out - self.coeffs.remainder.factor(x) * self.B * self.coeffs.remainder.e
        return out

    @property
    def affine(self):
        return self.A is not None

    def with_control(self, f):
        """Affine pair ``(G, h)`` of ``x -> btilde(x) + sigma(x) f``."""
        if self.A is None:
            raise TypeError("control folding needs affine coefficients")
        f = np.asarray(f, dtype=float)
        sig = self.coeffs.sigma
        return self.A + sig.x_matrix(f), self.a + sig.S0 @ f


def _drift_integrals(coeffs, model, lo):
    L = integrability_subspace(model)
    if L.dim_L == 0:
        m_L = np.zeros(model.dim)
    elif lo == 0.0:
        m_L = L.project(model.first_moment(0.0, 1.0, upper_closed=True))
    else:
        m_L = L.project(model.first_moment(lo, 1.0, upper_closed=True))
    if coeffs.remainder.is_zero:
        B = 0.0
    elif lo == 0.0:
        B = beta_moment(model, coeffs.beta)
    else:
        B = model.power_moment(coeffs.beta, lo, 1.0, upper_closed=True)
    return m_L, B


@lru_cache(maxsize=256)
def _effective(coeffs, model, lo):
    m_L, B = _drift_integrals(coeffs, model, lo)
    A = a = None
    if coeffs.affine:
        sig = coeffs.sigma
        rem = coeffs.remainder
        A = coeffs.drift.A - sig.x_matrix(m_L) - B * np.outer(rem.e, rem.r1)
        a = coeffs.drift.a - sig.S0 @ m_L - B * rem.r0 * rem.e
    return EffectiveDrift(coeffs, m_L, B, A, a)


def effective_drift(coeffs, model):
    """``btilde(x) = b(x) - int_{|u|<=1} sigma(x) u_L mu(du) - int_{|u|<=1} r(x,u) mu(du)``."""
    return _effective(coeffs, model, 0.0)


def effective_drift_eta(coeffs, model, eta):
    """``btilde_eta``: the same integrals restricted to ``eta <= |u| <= 1``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    return _effective(coeffs, model, float(eta))


def euler_drift(coeffs, model, eta):
    """Drift of the Euler scheme at cutoff ``eta``: ``btilde_eta(x) - sigma(x) upsilon_eta``.

    Returns the affine pair ``(G, h)`` for affine coefficients, else a callable.
    """
    bt = effective_drift_eta(coeffs, model, eta)
    ups = upsilon_eta(model, eta)
    if bt.affine:
        return bt.with_control(-ups)
    return lambda x: bt(x) - coeffs.sigma_at(x) @ ups


# --------------------------------------------------------------------------
# simulation

@lru_cache(maxsize=256)
def _sampler(model, eta, config, inner, beta):
    return SmallJumpSampler(model, eta, config, inner=inner, beta=beta)


def small_jump_sampler(coeffs, model, eta, config=None, inner=None):
    beta = None if coeffs.remainder.is_zero else coeffs.beta
    return _sampler(model, float(eta), config or SmallJumpConfig(), inner, beta)


@dataclass
class _Noise:
    """All random input of one Euler run, already placed on the time grid."""

    grid: np.ndarray
    dZ: np.ndarray
    dR: np.ndarray
    jump_times: np.ndarray
    jump_u: np.ndarray
    atoms_t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    atoms_u: np.ndarray = None
    log_density: float = 0.0


def _uniform_grid(t0, t1, n_steps):
    if int(n_steps) < 1:
        raise ValueError("n_steps must be >= 1")
    return np.linspace(t0, t1, int(n_steps) + 1)


def _prepare_noise(coeffs, model, t0, t1, n_steps, eta, rng, large, config, tilt=None):
    base = _uniform_grid(t0, t1, n_steps)
    if large:
        jt, ju = sample_large_jumps(model, eta, t1 - t0, rng, t0)
        keep = (jt > t0) & (jt < t1)
        jt, ju = jt[keep], ju[keep]
    else:
        jt, ju = np.zeros(0), np.zeros((0, model.dim))
    inner = None if tilt is None else tilt.min_inner
    sampler = small_jump_sampler(coeffs, model, eta, config, inner)
    at, au = sampler.draw_atoms(t0, t1, rng)
    logd = 0.0
    if tilt is not None:
        at, au, logd = tilt.apply(model, at, au, t0, t1, rng)
    grid = np.union1d(base, jt)
    dZ, dR = sampler.bin_atoms(grid, at, au, rng)
    return _Noise(grid, dZ, dR, jt, ju, at, au, logd)


def _run(coeffs, model, x, noise, eta, cap):
    grid = noise.grid
    m = coeffs.m
    x = np.asarray(x, dtype=float).reshape(m)
    J = noise.jump_times.size
    jump_at = np.full(grid.size, -1, dtype=np.int_)
    if J:
        jump_at[np.searchsorted(grid, noise.jump_times)] = np.arange(J)
    beta = coeffs.beta
    upow = np.linalg.norm(noise.jump_u, axis=1) ** beta if J else np.zeros(0)
    if coeffs.affine:
        G, h = euler_drift(coeffs, model, eta)
        rem = coeffs.remainder
        values, pre, post, blow = kernels.euler_affine(
            grid, x, G, h, coeffs.sigma.S0, coeffs.sigma.S1, rem.r0, rem.r1, rem.e,
            noise.dZ, noise.dR, jump_at, noise.jump_u.reshape(J, model.dim), upow, cap,
        )
    else:
        values, pre, post, blow = _euler_generic(coeffs, model, eta, grid, x, noise, jump_at, upow, cap)
    if blow >= 0:
        raise BlowUpError(f"state norm exceeded {cap:g} at t={grid[blow]:.6g}", float(grid[blow]))
    return CadlagPath(grid, values, noise.jump_times, pre, post)


def _euler_generic(coeffs, model, eta, grid, x, noise, jump_at, upow, cap):
    drift = euler_drift(coeffs, model, eta)
    rem = coeffs.remainder
    n = grid.size - 1
    J = noise.jump_times.size
    values = np.empty((n + 1, coeffs.m))
    pre = np.empty((J, coeffs.m))
    post = np.empty((J, coeffs.m))
    values[0] = x
    for i in range(n):
        dt = grid[i + 1] - grid[i]
        step = drift(x) * dt + coeffs.sigma_at(x) @ noise.dZ[i]
        if not rem.is_zero:
            step = step + rem.factor(x) * noise.dR[i] * rem.e
        x = x + step
        j = jump_at[i + 1]
        if j >= 0:
            pre[j] = x
            x = x + coeffs.sigma_at(x) @ noise.jump_u[j]
            if not rem.is_zero:
                x = x + rem.factor(pre[j]) * upow[j] * rem.e
            post[j] = x
        values[i + 1] = x
        if not np.all(np.abs(x) <= cap):
            return values, pre, post, i + 1
    return values, pre, post, -1


def euler_simulate(coeffs, model, x0, T, n_steps, eta, rng, config=None, cap=BLOWUP_CAP):
    """Euler path of the full SDE on ``[0, T]``.

    Jumps with ``|u| >= eta`` are applied exactly at their times (the grid is
    refined to contain them); smaller jumps enter as compensated per-step
    increments.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    noise = _prepare_noise(coeffs, model, 0.0, float(T), n_steps, eta, rng, True, config)
    return _run(coeffs, model, x0, noise, eta, cap)


def _single_point(x, S):
    return CadlagPath(np.array([float(S)]), np.asarray(x, dtype=float).reshape(1, -1))


def simulate_truncated(coeffs, model, x, S, Q, n_steps, eta, rng, config=None, cap=BLOWUP_CAP):
    """Path on ``[S, Q]`` from ``X_S = x`` of the equation without jumps of size ``>= eta``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    if not Q >= S >= 0.0:
        raise ValueError("need 0 <= S <= Q")
    if Q == S:
        return _single_point(x, S)
    noise = _prepare_noise(coeffs, model, float(S), float(Q), n_steps, eta, rng, False, config)
    return _run(coeffs, model, x, noise, eta, cap)


def simulate_tilted(coeffs, model, x, S, Q, n_steps, eta, g, rng, config=None, cap=BLOWUP_CAP,
                    return_atoms=False):
    """Truncated equation driven by the Poisson measure with intensity ``(1 + g) mu``.

    Returns ``(path, log_density)`` where ``log_density`` is the realised log
    Radon-Nikodym derivative of the untilted law with respect to the tilted
    one.  With ``return_atoms`` the tilted annulus atoms ``(times, amps)``
    are appended.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    if abs(g.eta - eta) > 1e-12 * eta:
        raise ValueError(f"tilt outer radius {g.eta} does not match eta={eta}")
    g.validate()
    if not Q >= S >= 0.0:
        raise ValueError("need 0 <= S <= Q")
    if Q == S:
        out = (_single_point(x, S), 0.0)
        return out + ((np.zeros(0), np.zeros((0, model.dim))),) if return_atoms else out
    noise = _prepare_noise(coeffs, model, float(S), float(Q), n_steps, eta, rng, False, config, tilt=g)
    path = _run(coeffs, model, x, noise, eta, cap)
    if return_atoms:
        zeta = g.min_inner
        r = np.linalg.norm(noise.atoms_u, axis=1)
        sel = (r > zeta) & (r < eta)
        return path, noise.log_density, (noise.atoms_t[sel], noise.atoms_u[sel])
    return path, noise.log_density


def direct_increment(model, T, eta, rng, config=None):
    """One draw of the driving noise ``Z_T`` from the same jump decomposition.

    Large jumps are summed, the compensated small-jump integral is drawn
    over a single step and the compensator drift ``-upsilon_eta T`` added.
    """
    jt, ju = sample_large_jumps(model, eta, T, rng)
    sampler = _sampler(model, float(eta), config or SmallJumpConfig(), None, None)
    at, au = sampler.draw_atoms(0.0, T, rng)
    dZ, _ = sampler.bin_atoms(np.array([0.0, T]), at, au, rng)
    return ju.sum(axis=0) + dZ[0] - T * upsilon_eta(model, eta)


__all__ = [
    "AffineDrift",
    "AffineSigma",
    "PowerRemainder",
    "CoefficientSet",
    "EffectiveDrift",
    "register_drift",
    "register_sigma",
    "register_remainder",
    "check_assumptions",
    "effective_drift",
    "effective_drift_eta",
    "euler_drift",
    "euler_simulate",
    "simulate_truncated",
    "simulate_tilted",
    "direct_increment",
    "small_jump_sampler",
]
