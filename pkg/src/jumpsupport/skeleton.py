"""Skeleton paths: piecewise ODE solutions with finitely many admissible jumps.

Between jumps a skeleton solves ``phi' = btilde(phi) + sigma(phi) f_t`` for a
piecewise-constant control ``f`` valued in ``L^perp``; at planned times it
jumps by ``c(phi-, u)`` with ``u`` in the support of the Lévy measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import kernels
from .errors import BlowUpError, GapViolationError, InadmissibleJumpError
from .paths import CadlagPath
from .sde import BLOWUP_CAP, effective_drift

YES, NO, BOUNDARY = "yes", "no", "boundary"
DEFAULT_TOL = 1e-6


# --------------------------------------------------------------------------
# controls and plans

@dataclass(frozen=True, eq=False)
class ControlFunction:
    """Piecewise-constant control on ``[t0, T)``.

    ``values[i]`` holds on ``[breakpoints[i], breakpoints[i+1])`` with
    ``breakpoints[0] = t0``.  When ``L`` is given every value must have zero
    projection onto it.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    T: float
    L: object = None

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).ravel()
        vals = np.atleast_2d(np.asarray(self.values, dtype=float))
        if bp.size < 1 or vals.shape[0] != bp.size:
            raise ValueError("need one control value per breakpoint")
        if np.any(np.diff(bp) <= 0.0) or not bp[-1] < self.T:
            raise ValueError("breakpoints must increase strictly and stay below T")
        if not np.all(np.isfinite(vals)):
            raise ValueError("control values must be finite")
        if self.L is not None:
            leak = np.linalg.norm(self.L.project(vals), axis=1)
            if np.any(leak > 1e-10):
                raise ValueError(f"control value has a component in L of size {leak.max():.3g}")
        bp.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "T", float(self.T))

    @classmethod
    def constant(cls, value, T, L=None, t0=0.0):
        return cls(np.array([t0]), np.atleast_2d(np.asarray(value, dtype=float)), T, L)

    @classmethod
    def zero(cls, d, T, t0=0.0):
        return cls.constant(np.zeros(d), T, None, t0)

    @property
    def t0(self):
        return float(self.breakpoints[0])

    @property
    def d(self):
        return self.values.shape[1]

    @property
    def n_pieces(self):
        return self.breakpoints.size

    def piece_index(self, t):
        return int(np.clip(np.searchsorted(self.breakpoints, t, side="right") - 1, 0, self.n_pieces - 1))

    def __call__(self, t):
        return self.values[self.piece_index(t)]

    def intervals(self):
        ends = np.append(self.breakpoints[1:], self.T)
        return list(zip(self.breakpoints, ends, self.values))

    def to_dict(self):
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist(), "T": self.T}

    @classmethod
    def from_dict(cls, spec, L=None):
        return cls(spec["breakpoints"], spec["values"], spec["T"], L)


@dataclass(frozen=True)
class JumpEntry:
    """A planned jump: either an explicit amplitude ``u`` or a target point ``y``."""

    t: float
    amplitude: tuple = None
    target: tuple = None

    def __post_init__(self):
        if (self.amplitude is None) == (self.target is None):
            raise ValueError("a jump entry needs exactly one of amplitude or target")
        for name in ("amplitude", "target"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(float(x) for x in np.atleast_1d(v)))
        object.__setattr__(self, "t", float(self.t))

    def to_dict(self):
        out = {"t": self.t}
        if self.amplitude is not None:
            out["amplitude"] = list(self.amplitude)
        else:
            out["target"] = list(self.target)
        return out


@dataclass(frozen=True)
class JumpPlan:
    entries: tuple = ()

    def __post_init__(self):
        entries = tuple(e if isinstance(e, JumpEntry) else JumpEntry(**e) for e in self.entries)
        times = [e.t for e in entries]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("jump times must increase strictly")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def amplitudes(cls, times, amps):
        return cls(tuple(JumpEntry(t, amplitude=u) for t, u in zip(times, np.atleast_2d(amps) if len(times) else [])))

    @property
    def times(self):
        return np.array([e.t for e in self.entries])

    def __len__(self):
        return len(self.entries)

    def check_horizon(self, t0, T):
        for e in self.entries:
            if not t0 < e.t < T:
                raise ValueError(f"jump time {e.t} outside ({t0}, {T})")

    def to_dict(self):
        return [e.to_dict() for e in self.entries]

    @classmethod
    def from_dict(cls, spec):
        return cls(tuple(JumpEntry(**e) for e in spec))


# --------------------------------------------------------------------------
# admissibility

@dataclass(frozen=True)
class Admissibility:
    decision: str
    distance: float
    amplitude: np.ndarray
    threshold: float
    diagnostic: str = ""


def _support_search(model, residual, guesses, scale):
    """Minimise ``|residual(u)|`` over the closed support of ``model``.

    Returns ``(distance, u, converged)``; among near-minimisers the smallest
    ``|u|`` wins.
    """
    cands = []
    converged = True
    kind = model.support_kind
    if kind == "atoms":
        for u in model.atom_array:
            cands.append((float(np.linalg.norm(residual(u))), u))
    elif kind == "full":
        starts = [np.asarray(g, dtype=float) for g in guesses] + [np.zeros(model.dim)]
        for s in starts:
            r0 = float(np.linalg.norm(residual(s)))
            cands.append((r0, s))
            if r0 <= 1e-15 * (1.0 + float(np.linalg.norm(s))):
                break
            res = optimize.least_squares(residual, s, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
            converged = converged and res.status > 0
            cands.append((float(np.linalg.norm(residual(res.x))), res.x))
    else:
        for lo, hi, curve in model.support_curves():
            a = max(lo, -scale)
            b = min(hi, scale)
            s = np.linspace(-12.0, 12.0, 2401)
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            z = mid + half * np.sinh(s) / math.sinh(12.0)
            z = np.unique(np.concatenate([z, [0.0] if a <= 0.0 <= b else []]))
            vals = np.array([np.linalg.norm(residual(curve(zz))) for zz in z])
            order = np.argsort(vals)[:6]
            for k in order:
                za, zb = z[max(k - 1, 0)], z[min(k + 1, z.size - 1)]
                if zb > za:
                    res = optimize.minimize_scalar(lambda q: np.linalg.norm(residual(curve(q))),
                                                   bounds=(za, zb), method="bounded",
                                                   options={"xatol": 1e-13 * max(1.0, abs(z[k]))})
                    zbest = res.x if res.fun <= vals[k] else z[k]
                else:
                    zbest = z[k]
                # Gauss-Newton polish on the curve parameter
                if za < zb and za < zbest < zb:
                    pol = optimize.least_squares(lambda q: residual(np.asarray(curve(q[0]), dtype=float).ravel()),
                                                 [zbest], bounds=([za], [zb]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
                    if np.linalg.norm(pol.fun) < np.linalg.norm(residual(np.asarray(curve(zbest)).ravel())):
                        zbest = float(pol.x[0])
                u = np.asarray(curve(zbest), dtype=float).ravel()
                cands.append((float(np.linalg.norm(residual(u))), u))
    best = min(c[0] for c in cands)
    near = [c for c in cands if c[0] <= best + 1e-12 * (1.0 + best)]
    dist, u = min(near, key=lambda c: float(np.linalg.norm(c[1])))
    return dist, np.asarray(u, dtype=float), converged


def _decide(dist, thr):
    if dist <= thr:
        return YES
    if dist >= 10.0 * thr:
        return NO
    return BOUNDARY


def admissible(x, y, coeffs, model, tol=DEFAULT_TOL):
    """Is ``y`` in the support of the jump kernel ``J(x, .)``?

    Minimises ``|x + c(x, u) - y|`` over the support of the Lévy measure;
    ``yes`` when the infimum is below ``tol (1 + |y - x|)``, ``no`` when it is
    at least ten times that, ``boundary`` in between.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gap = y - x
    thr = tol * (1.0 + float(np.linalg.norm(gap)))
    sig = coeffs.sigma_at(x)
    guess = np.linalg.pinv(sig) @ gap
    scale = 10.0 * (1.0 + float(np.linalg.norm(guess))) * (1.0 + float(np.linalg.norm(gap)))
    dist, u, ok = _support_search(model, lambda u: x + coeffs.c(x, u) - y, [guess], scale)
    decision = _decide(dist, thr)
    diag = ""
    if not ok and decision != YES:
        decision, diag = BOUNDARY, "optimizer did not converge"
    return Admissibility(decision, dist, u, thr, diag)


def support_distance(model, u):
    """Distance from ``u`` to the closed support of ``model``."""
    u = np.asarray(u, dtype=float)
    dist, _, _ = _support_search(model, lambda v: v - u, [u], 10.0 * (1.0 + float(np.linalg.norm(u))))
    return dist


# --------------------------------------------------------------------------
# skeleton ODE

@dataclass(frozen=True, eq=False)
class SkeletonPath:
    """Solved skeleton: the path plus the control, the resolved plan and the step size."""

    path: CadlagPath
    control: ControlFunction
    plan: JumpPlan
    h: float
    amplitudes: np.ndarray = field(default=None)

    def __call__(self, t):
        return self.path(t)

    @property
    def times(self):
        return self.path.times

    @property
    def values(self):
        return self.path.values

    @property
    def terminal(self):
        return self.path.terminal

    @property
    def jump_times(self):
        return self.path.jump_times


def _segment_grid(a, b, h):
    n = max(1, int(math.ceil((b - a) / h - 1e-9)))
    return n, (b - a) / n


def _rk4_generic(rhs, x, dt, n):
    out = np.empty((n + 1, x.size))
    out[0] = x
    for i in range(n):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = x
    return out


def solve_skeleton(x0, coeffs, model, f, plan=None, T=None, h=1e-3, drift=None, tol=DEFAULT_TOL,
                   cap=BLOWUP_CAP):
    """Integrate the skeleton equation with classical fixed-step RK4.

    The grid passes through every control breakpoint and every planned jump
    time.  ``drift`` defaults to the effective drift of ``(coeffs, model)``;
    target-mode jumps resolve to the smallest admissible amplitude.
    """
    plan = plan or JumpPlan()
    T = f.T if T is None else float(T)
    if abs(T - f.T) > 1e-12 * max(1.0, abs(T)):
        raise ValueError("control horizon differs from T")
    t0 = f.t0
    plan.check_horizon(t0, T)
    drift = drift or effective_drift(coeffs, model)
    knots = sorted(set(f.breakpoints.tolist()) | set(plan.times.tolist()) | {T})
    jumps = {e.t: e for e in plan.entries}
    x = np.asarray(x0, dtype=float).reshape(coeffs.m)
    times = [np.array([t0])]
    values = [x[None, :]]
    jt, pre, post, amps = [], [], [], []
    a = t0
    for b in knots:
        if b <= a:
            continue
        n, dt = _segment_grid(a, b, h)
        fv = f(a)
        if drift.affine:
            G, hv = drift.with_control(fv)
            seg = kernels.rk4_affine(x, G, hv, dt, n)
        else:
            seg = _rk4_generic(lambda z: drift(z) + coeffs.sigma_at(z) @ fv, x, dt, n)
        if not np.all(np.isfinite(seg)) or np.max(np.abs(seg)) > cap:
            raise BlowUpError(f"skeleton left the cap {cap:g} on [{a:.6g}, {b:.6g}]", float(b))
        grid = a + dt * np.arange(1, n + 1)
        grid[-1] = b
        times.append(grid)
        values.append(seg[1:])
        x = seg[-1].copy()
        if b in jumps:
            e = jumps[b]
            if e.amplitude is not None:
                u = np.asarray(e.amplitude, dtype=float)
                if support_distance(model, u) > tol * (1.0 + np.linalg.norm(u)):
                    raise InadmissibleJumpError(f"amplitude {u} at t={b} is not in the support")
            else:
                res = admissible(x, e.target, coeffs, model, tol)
                if res.decision != YES:
                    raise InadmissibleJumpError(
                        f"target {e.target} at t={b} is not admissible from {x} "
                        f"(distance {res.distance:.3g}, {res.decision}) {res.diagnostic}".rstrip())
                u = res.amplitude
            jt.append(b)
            pre.append(x.copy())
            x = x + coeffs.c(x, u)
            post.append(x.copy())
            amps.append(u)
            values[-1][-1] = x
        a = b
    path = CadlagPath(np.concatenate(times), np.vstack(values), np.array(jt),
                      np.array(pre).reshape(-1, coeffs.m), np.array(post).reshape(-1, coeffs.m))
    amps_arr = np.array(amps).reshape(-1, model.dim)
    resolved = JumpPlan.amplitudes(jt, amps_arr)
    return SkeletonPath(path, f, resolved, float(h), amps_arr)


def ode_residual(skel, coeffs, model, drift=None):
    """Largest centred-difference defect of the skeleton ODE over interior nodes.

    Only nodes whose two neighbours lie in the same jump-free, constant-control
    stretch are used.
    """
    drift = drift or effective_drift(coeffs, model)
    p = skel.path
    t, v = p.times, p.values
    left = p.left_values
    cuts = set(skel.control.breakpoints.tolist()) | set(p.jump_times.tolist())
    worst = 0.0
    for i in range(1, t.size - 1):
        if t[i] in cuts:
            continue
        h1, h2 = t[i] - t[i - 1], t[i + 1] - t[i]
        if abs(h1 - h2) > 1e-9 * h1:
            continue
        # left limit at i+1 so a jump there does not enter the difference
        fd = (left[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1])
        fv = skel.control(t[i])
        rhs = drift(v[i]) + coeffs.sigma_at(v[i]) @ fv
        worst = max(worst, float(np.max(np.abs(fd - rhs))))
    return worst


# --------------------------------------------------------------------------
# time change

@dataclass(frozen=True, eq=False)
class TimeChange:
    """Increasing piecewise-linear bijection of ``[t0, T]`` through given anchors."""

    knots_t: np.ndarray
    knots_s: np.ndarray

    def __post_init__(self):
        kt = np.asarray(self.knots_t, dtype=float)
        ks = np.asarray(self.knots_s, dtype=float)
        if kt.shape != ks.shape or kt.size < 2:
            raise ValueError("anchor lists must match")
        if np.any(np.diff(kt) <= 0.0) or np.any(np.diff(ks) <= 0.0):
            raise ValueError("anchor images must increase strictly")
        object.__setattr__(self, "knots_t", kt)
        object.__setattr__(self, "knots_s", ks)

    def __call__(self, t):
        return np.interp(t, self.knots_t, self.knots_s)

    def inverse(self, s):
        return np.interp(s, self.knots_s, self.knots_t)

    @property
    def slopes(self):
        return np.diff(self.knots_s) / np.diff(self.knots_t)

    @property
    def max_log_slope(self):
        return float(np.max(np.abs(np.log(self.slopes))))

    @property
    def is_identity(self):
        return bool(np.array_equal(self.knots_t, self.knots_s))

    @property
    def anchors(self):
        return list(zip(self.knots_t[1:-1].tolist(), self.knots_s[1:-1].tolist()))


def time_change_lambda(times_t, times_s, T, t0=0.0):
    """Piecewise-linear ``lambda`` with ``lambda(t0)=t0``, ``lambda(T)=T`` and ``lambda(t_j)=s_j``."""
    tt = np.asarray(times_t, dtype=float).ravel()
    ss = np.asarray(times_s, dtype=float).ravel()
    if tt.shape != ss.shape:
        raise ValueError("anchor lists must have equal length")
    for arr in (tt, ss):
        if arr.size and (arr[0] <= t0 or arr[-1] >= T):
            raise ValueError("anchors must lie strictly inside the horizon")
    return TimeChange(np.concatenate([[t0], tt, [T]]), np.concatenate([[t0], ss, [T]]))


def jump_gap(times, t0, T):
    """Half the smallest gap between consecutive points of ``{t0} u times u {T}``."""
    pts = np.concatenate([[t0], np.asarray(times, dtype=float), [T]])
    return 0.5 * float(np.min(np.diff(pts)))


def perturb_jump_times(skel, times_s, coeffs, model, drift=None):
    """Re-solve ``skel`` with its jumps moved to ``times_s``.

    Amplitudes are kept; control breakpoints follow the time change through
    the old and new jump times, so every stretch between jumps keeps its
    control values.
    """
    p = skel.path
    tt = p.jump_times
    ss = np.asarray(times_s, dtype=float).ravel()
    if ss.size != tt.size:
        raise ValueError("need one new time per jump")
    if tt.size == 0:
        return skel
    t0, T = p.t0, p.T
    delta = jump_gap(tt, t0, T)
    if np.any(np.abs(ss - tt) >= delta):
        raise GapViolationError(f"|s - t| must stay below half the minimal gap {delta:.6g}")
    if np.array_equal(ss, tt):
        return skel
    lam = time_change_lambda(tt, ss, T, t0)
    f = skel.control
    bp = lam(f.breakpoints)
    bp[0] = t0
    new_f = ControlFunction(bp, f.values, f.T)
    plan = JumpPlan.amplitudes(ss, skel.amplitudes)
    return solve_skeleton(p.values[0], coeffs, model, new_f, plan, T, skel.h, drift=drift)


__all__ = [
    "ControlFunction",
    "JumpEntry",
    "JumpPlan",
    "Admissibility",
    "SkeletonPath",
    "TimeChange",
    "admissible",
    "support_distance",
    "solve_skeleton",
    "ode_residual",
    "time_change_lambda",
    "perturb_jump_times",
    "jump_gap",
]
