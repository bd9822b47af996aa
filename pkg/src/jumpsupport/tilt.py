"""Bounded tilts of the Poisson intensity and their densities.

A tilt ``g`` replaces the jump intensity ``mu(du) dt`` by
``(1 + g_t(u)) mu(du) dt``.  Each time piece uses the ansatz

    g(u) = sum_j c_j sign(ell_j . u) 1{zeta < |u| < eta},    sum_j |c_j| <= 1/2,

with directions ``ell_j`` in ``L^perp``, so that ``int (u - u_L) g dmu``
hits a prescribed vector ``w``.  Shrinking ``zeta`` makes the sign moments
blow up along every direction outside ``L``, which is what makes small
coefficients eventually sufficient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import InfeasibleTiltError, QuadratureError
from .levy import CurveImage, integrability_subspace, integrate, upsilon_eta

MAX_ABS = 0.5
ZETA_FLOOR = 1e-12
VERIFY_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class TiltPiece:
    """``g(u) = sum_j coef[j] sign(directions[j] . u)`` on ``zeta < |u| < eta``."""

    zeta: float
    eta: float
    directions: np.ndarray
    coef: np.ndarray

    def __post_init__(self):
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
        coef = np.asarray(self.coef, dtype=float).ravel()
        if dirs.shape[0] != coef.size:
            raise ValueError("one coefficient per direction")
        if not 0.0 < self.zeta < self.eta:
            raise ValueError(f"need 0 < zeta < eta, got zeta={self.zeta}, eta={self.eta}")
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "zeta", float(self.zeta))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def bound(self):
        """Upper bound ``sum |c_j|`` of ``sup |g|``."""
        return float(np.sum(np.abs(self.coef)))

    @property
    def is_zero(self):
        return not np.any(self.coef)

    def __call__(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self.is_zero:
            return np.zeros(u.shape[0])
        r = np.linalg.norm(u, axis=1)
        inside = (r > self.zeta) & (r < self.eta)
        vals = np.sign(u @ self.directions.T) @ self.coef
        return np.where(inside, vals, 0.0)

    def mu_integral(self, model):
        """``int g dmu`` over the annulus (closed form)."""
        if self.is_zero:
            return 0.0
        return float(sum(c * model.sign_mass(ell, self.zeta, self.eta)
                         for c, ell in zip(self.coef, self.directions)))

    def matched_vector(self, model, L):
        """``int (u - u_L) g dmu`` in closed form."""
        out = np.zeros(model.dim)
        for c, ell in zip(self.coef, self.directions):
            if c:
                out += c * model.sign_moment(ell, self.zeta, self.eta)
        return L.project_perp(out)

    def to_dict(self):
        return {"zeta": self.zeta, "eta": self.eta, "directions": self.directions.tolist(),
                "coef": self.coef.tolist()}


@dataclass(frozen=True, eq=False)
class TiltFunction:
    """Piecewise-constant-in-time tilt; ``pieces[i]`` holds from ``breakpoints[i]``."""

    breakpoints: np.ndarray
    pieces: tuple
    T: float

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).ravel()
        if bp.size != len(self.pieces) or bp.size < 1:
            raise ValueError("one tilt piece per breakpoint")
        if np.any(np.diff(bp) <= 0.0) or not bp[-1] < self.T:
            raise ValueError("breakpoints must increase strictly below T")
        etas = {p.eta for p in self.pieces}
        if len(etas) != 1:
            raise ValueError("all pieces must share the outer radius")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "T", float(self.T))

    @classmethod
    def zero(cls, eta, T, t0=0.0, d=1):
        return cls(np.array([t0]), (TiltPiece(eta / 2.0, eta, np.eye(d)[:1], [0.0]),), T)

    @property
    def eta(self):
        return self.pieces[0].eta

    @property
    def min_inner(self):
        return min(p.zeta for p in self.pieces)

    def validate(self):
        for p in self.pieces:
            if p.bound > MAX_ABS + 1e-12:
                raise ValueError(f"tilt magnitude bound {p.bound:.6g} exceeds 1/2")
        return True

    def intervals(self, t0=None, t1=None):
        """``(a, b, piece)`` for each piece clipped to ``[t0, t1]``."""
        ends = np.append(self.breakpoints[1:], self.T)
        lo = self.breakpoints[0] if t0 is None else t0
        hi = self.T if t1 is None else t1
        out = []
        for a, b, p in zip(self.breakpoints, ends, self.pieces):
            a2, b2 = max(a, lo), min(b, hi)
            if b2 > a2:
                out.append((float(a2), float(b2), p))
        return out

    def values(self, times, amps):
        """``g_t(u)`` for paired atoms."""
        times = np.asarray(times, dtype=float).ravel()
        if times.size == 0:
            return np.zeros(0)
        amps = np.asarray(amps, dtype=float).reshape(times.size, -1)
        idx = np.clip(np.searchsorted(self.breakpoints, times, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.zeros(times.size)
        for k, p in enumerate(self.pieces):
            sel = idx == k
            if np.any(sel):
                out[sel] = p(amps[sel])
        return out

    def apply(self, model, times, amps, t0, t1, rng):
        """Turn atoms of intensity ``mu`` into atoms of intensity ``(1 + g) mu``.

        Atoms where ``g < 0`` are kept with probability ``1 + g``; atoms where
        ``g > 0`` are added from an independent stream of rate ``mu/2`` on
        each annulus, accepted with probability ``2 g``.  Returns the new
        atoms and the realised log density.
        """
        d = model.dim
        amps = np.asarray(amps, dtype=float).reshape(-1, d)
        gv = self.values(times, amps)
        keep = rng.random(gv.size) < 1.0 + np.minimum(gv, 0.0)
        ts, us = [np.asarray(times)[keep]], [amps[keep]]
        for a, b, p in self.intervals(t0, t1):
            if p.is_zero:
                continue
            rate = MAX_ABS * model.mass(p.zeta, p.eta)
            n = rng.poisson(rate * (b - a))
            tt = a + (b - a) * rng.random(n)
            uu = model.sample(p.zeta, p.eta, n, rng).reshape(n, d)
            acc = rng.random(n) * MAX_ABS < np.maximum(p(uu), 0.0)
            ts.append(tt[acc])
            us.append(uu[acc])
        t_all = np.concatenate(ts)
        u_all = np.vstack(us)
        order = np.argsort(t_all, kind="stable")
        t_all, u_all = t_all[order], u_all[order]
        return t_all, u_all, density_log(self, (t_all, u_all), model, t0, t1)

    def to_dict(self):
        return {"breakpoints": self.breakpoints.tolist(), "T": self.T,
                "pieces": [p.to_dict() for p in self.pieces]}

    @classmethod
    def from_dict(cls, spec):
        return cls(spec["breakpoints"], tuple(TiltPiece(**p) for p in spec["pieces"]), spec["T"])


def density_log(g, atoms, model, t0=None, t1=None):
    """Log Radon-Nikodym density of the untilted Poisson law w.r.t. the tilted one.

    ``-sum_atoms log(1 + g_t(u)) + int int g_t(u) mu(du) dt`` over
    ``[t0, t1]``; its exponential has mean one under the tilted law.
    ``atoms`` is a pair ``(times, amplitudes)`` or a list of ``(t, u)``.
    """
    if isinstance(atoms, tuple) and len(atoms) == 2 and np.ndim(atoms[0]) == 1 and np.ndim(atoms[1]) == 2:
        times, amps = atoms
    else:
        atoms = list(atoms)
        times = np.array([a[0] for a in atoms], dtype=float)
        amps = np.array([np.atleast_1d(a[1]) for a in atoms], dtype=float).reshape(len(atoms), model.dim)
    times = np.asarray(times, dtype=float)
    lo = g.breakpoints[0] if t0 is None else t0
    hi = g.T if t1 is None else t1
    if times.size and (times.min() < lo or times.max() > hi):
        raise ValueError("atom times outside the horizon")
    gv = g.values(times, amps)
    total = -float(np.sum(np.log1p(gv)))
    for a, b, p in g.intervals(lo, hi):
        total += (b - a) * p.mu_integral(model)
    return total


# --------------------------------------------------------------------------
# tilt solver

def _candidate_directions(model, L, zeta, eta):
    """Directions in ``L^perp`` for the sign ansatz: the basis first, then extras."""
    perp = L.perp
    dirs = [v for v in perp]
    k = perp.shape[0]
    if k >= 2:
        # a fan in each coordinate plane of the L^perp basis
        for i in range(k):
            for j in range(i + 1, k):
                for th in np.linspace(0.0, math.pi, 73)[1:-1]:
                    dirs.append(math.cos(th) * perp[i] + math.sin(th) * perp[j])
    if isinstance(model, CurveImage) and k == 2:
        # hyperplanes crossing the curve inside the annulus
        za, zb = model.z_of(zeta), model.z_of(eta)
        for zs in np.geomspace(za, zb, 14)[1:-1]:
            t = zs ** (1.0 - model.gamma)
            ell = np.array([1.0, -t]) / math.hypot(1.0, t)
            dirs.append(ell)
    return np.array(dirs)


def _moment_matrix(model, L, dirs, zeta, eta):
    cols = [L.perp @ model.sign_moment(ell, zeta, eta) for ell in dirs]
    return np.array(cols).T


def _basis_solve(model, L, W, zeta, eta):
    M = _moment_matrix(model, L, L.perp, zeta, eta)
    try:
        if np.linalg.cond(M) > 1e12:
            return None
        return np.linalg.solve(M, W)
    except np.linalg.LinAlgError:
        return None


def _lp_solve(model, L, W, zeta, eta):
    dirs = _candidate_directions(model, L, zeta, eta)
    V = _moment_matrix(model, L, dirs, zeta, eta)
    n = dirs.shape[0]
    scale = max(np.max(np.abs(V)), 1e-300)
    res = optimize.linprog(np.ones(2 * n), A_eq=np.hstack([V, -V]) / scale, b_eq=W / scale,
                           bounds=[(0, None)] * (2 * n), method="highs")
    if res.status != 0:
        return None, None
    c = res.x[:n] - res.x[n:]
    used = np.abs(c) > 1e-14 * max(np.abs(c).max(), 1e-300)
    c, dirs = c[used], dirs[used]
    # polish: exact solve on the active set when it is square
    if used.sum() == W.size:
        M = V[:, used]
        try:
            c = np.linalg.solve(M, W)
        except np.linalg.LinAlgError:
            pass
    return dirs, c


def solve_tilt(model, L, w, eta, verify=True, zeta_start=None, floor=ZETA_FLOOR):
    """Find ``(zeta, g)`` with ``int (u - u_L) g dmu = w`` and ``sup |g| <= 1/2``.

    Starts at ``zeta = eta/2`` and halves until the coefficients satisfy
    ``sum |c_j| <= 1/2``.  The square solve over the ``L^perp`` basis is
    tried first; when it is singular or too large, a minimum-``l1`` solve
    over a wider fan of directions in ``L^perp`` is used.
    """
    L = L or integrability_subspace(model)
    w = np.asarray(w, dtype=float).ravel()
    if w.size != model.dim:
        raise ValueError(f"target has dimension {w.size}, expected {model.dim}")
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    leak = float(np.linalg.norm(L.project(w)))
    if leak > 1e-10 * max(1.0, float(np.linalg.norm(w))):
        raise ValueError(f"target has a component of size {leak:.3g} in L")
    zeta = eta / 2.0 if zeta_start is None else float(zeta_start)
    if not np.any(w):
        dirs = L.perp if L.dim_perp else np.eye(model.dim)[:1]
        return TiltPiece(zeta, eta, dirs, np.zeros(dirs.shape[0]))
    if L.dim_perp == 0:
        raise InfeasibleTiltError("L^perp = {0} but the target is non-zero")
    W = L.perp @ w
    tried = []
    while zeta >= floor:
        c = _basis_solve(model, L, W, zeta, eta)
        if c is not None and np.sum(np.abs(c)) <= MAX_ABS:
            piece = TiltPiece(zeta, eta, L.perp, c)
            break
        dirs, c2 = _lp_solve(model, L, W, zeta, eta)
        if c2 is not None and np.sum(np.abs(c2)) <= MAX_ABS * (1.0 + 1e-12):
            if np.sum(np.abs(c2)) > MAX_ABS:
                c2 = c2 * (MAX_ABS / np.sum(np.abs(c2)))
            piece = TiltPiece(zeta, eta, dirs, c2)
            break
        tried.append((zeta, None if c is None else float(np.sum(np.abs(c)))))
        zeta /= 2.0
    else:
        raise InfeasibleTiltError(f"no feasible inner radius above {floor:g}; last attempts {tried[-3:]}")
    if verify:
        verify_tilt(piece, model, L, w)
    return piece


def verify_tilt(piece, model, L, w, rtol=VERIFY_RTOL):
    """Check the matching integral by adaptive quadrature; returns the relative error."""
    got = integrate(model, lambda u: L.project_perp(u) * piece(u[None, :])[0],
                    piece.zeta, piece.eta, normals=list(piece.directions))
    err = float(np.linalg.norm(np.asarray(got) - w) / max(np.linalg.norm(w), 1e-300))
    if err > rtol:
        raise QuadratureError(f"tilt matching integral off by {err:.3g} (relative)")
    return err


def control_to_tilt(f, model, eta, L=None, verify=True):
    """Per-piece tilts whose drift correction turns the truncated equation into the skeleton with control ``f``.

    Each piece matches ``w = f_i + upsilon_eta``.
    """
    L = L or integrability_subspace(model)
    ups = upsilon_eta(model, eta)
    pieces = tuple(solve_tilt(model, L, fv + ups, eta, verify=verify) for _, _, fv in f.intervals())
    return TiltFunction(f.breakpoints, pieces, f.T)


__all__ = [
    "TiltPiece",
    "TiltFunction",
    "solve_tilt",
    "verify_tilt",
    "control_to_tilt",
    "density_log",
]
