"""Desk-scale checks of the support of the law and of the reachability constructions.

Monte-Carlo routines take a master seed (or a generator, from which one is
drawn) and give path ``i`` its own substream, so results are identical for
any number of worker processes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import linalg, stats

from . import kernels
from .errors import (
    ConeConditionError,
    GapViolationError,
    IterationCapError,
    RankDeficiencyError,
)
from .levy import integrability_subspace, sample_large_jumps, tail_mass, upsilon_eta
from .metric import skorokhod_upper_value, uniform_distance
from .rng import map_paths
from .sde import effective_drift, effective_drift_eta, euler_simulate, simulate_tilted
from .skeleton import (
    YES,
    ControlFunction,
    JumpPlan,
    admissible,
    jump_gap,
    solve_skeleton,
)
from .tilt import control_to_tilt


def _seed_of(rng):
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**63))
    return int(rng)


def clopper_pearson(k, n, level=0.95):
    """Exact two-sided binomial confidence interval."""
    if n == 0:
        return 0.0, 1.0
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


# --------------------------------------------------------------------------
# second inclusion: positivity of small balls around skeletons

@dataclass(frozen=True)
class SupportCheckReport:
    target: str
    eps: float
    n: int
    hits: int
    estimate: float
    ci_low: float
    ci_high: float

    @property
    def positive(self):
        return self.ci_low > 0.0

    def to_dict(self):
        return {"target": self.target, "eps": self.eps, "n": self.n, "hits": self.hits,
                "estimate": self.estimate, "ci_low": self.ci_low, "ci_high": self.ci_high,
                "positive": self.positive}


def _support_distance_worker(i, rng, coeffs, model, x0, T, n_steps, eta, target, config, metric):
    path = euler_simulate(coeffs, model, x0, T, n_steps, eta, rng, config)
    if metric == "uniform":
        return uniform_distance(path, target)
    return skorokhod_upper_value(path, target)


def support_distances(coeffs, model, phi, N, eta, rng, n_steps=200, config=None, jobs=1, metric="skorokhod"):
    """Distances ``d_upper(X^i, phi)`` for ``N`` Euler paths of the full equation."""
    target = getattr(phi, "path", phi)
    worker = partial(_support_distance_worker, coeffs=coeffs, model=model, x0=target.values[0],
                     T=target.T, n_steps=n_steps, eta=eta, target=target, config=config, metric=metric)
    return np.array(map_paths(worker, N, _seed_of(rng), "support", jobs))


def report_from_distances(distances, eps, target="skeleton"):
    n = int(distances.size)
    k = int(np.sum(distances <= eps))
    lo, hi = clopper_pearson(k, n)
    return SupportCheckReport(target, float(eps), n, k, k / n if n else 0.0, lo, hi)


def mc_support_probability(coeffs, model, phi, eps, N, eta, rng, n_steps=200, config=None, jobs=1,
                           target="skeleton", metric="skorokhod"):
    """Estimate ``P(d_upper(X, phi) <= eps)`` with a 95% Clopper-Pearson interval.

    ``eps`` may be a sequence; the distances are simulated once and a report
    is returned per value, so estimates are monotone in ``eps``.
    """
    if N < 100:
        raise ValueError("need N >= 100 paths")
    d = support_distances(coeffs, model, phi, N, eta, rng, n_steps, config, jobs, metric)
    if np.ndim(eps):
        return [report_from_distances(d, e, target) for e in eps]
    return report_from_distances(d, eps, target)


# --------------------------------------------------------------------------
# first inclusion: paths are ODE pieces glued by admissible jumps

@dataclass
class InclusionReport:
    n_paths: int
    passed: int
    tol: float
    max_deviation: np.ndarray
    segment_deviations: list = field(default_factory=list)
    jump_failures: int = 0

    @property
    def pass_rate(self):
        return 1.0 if self.n_paths == 0 else self.passed / self.n_paths

    @property
    def median_segment_deviation(self):
        segs = [d for path in self.segment_deviations for d in path]
        return float(np.median(segs)) if segs else 0.0

    def to_dict(self):
        return {"n_paths": self.n_paths, "passed": self.passed, "pass_rate": self.pass_rate, "tol": self.tol,
                "jump_failures": self.jump_failures, "median_segment_deviation": self.median_segment_deviation}


def euler_error_bound(coeffs, model, eta, x0, T, dt):
    """Crude global bound ``dt/2 * |G| (|G| R + |h|) (e^{|G| T} - 1)/|G|`` for the Euler drift flow."""
    G, h = effective_drift_eta(coeffs, model, eta).with_control(-upsilon_eta(model, eta))
    g = max(float(np.linalg.norm(G, 2)), 1e-12)
    R = float(np.linalg.norm(x0)) + float(np.linalg.norm(h)) * T
    R = R * math.exp(g * T)
    return 0.5 * dt * g * (g * R + float(np.linalg.norm(h))) * math.expm1(g * T) / g


def neglected_variance_tolerance(coeffs, model, eta, T, k=4.0, x=None):
    """``k |sigma(x)| sqrt(T tr int_{|u|<eta} u u^T mu(du))``: the noise scale of jumps below ``eta``."""
    x = np.zeros(coeffs.m) if x is None else np.asarray(x, dtype=float)
    var = float(np.trace(model.second_moment(0.0, eta)))
    return k * float(np.linalg.norm(coeffs.sigma_at(x), 2)) * math.sqrt(T * var)


def _segment_flow(G, h, x, grid, substeps=4):
    out = np.empty((grid.size, x.size))
    out[0] = x
    for i in range(grid.size - 1):
        dt = (grid[i + 1] - grid[i]) / substeps
        x = kernels.rk4_affine(x, G, h, dt, substeps)[-1]
        out[i + 1] = x
    return out


def _inclusion_worker(i, rng, coeffs, model, eta, x0, T, n_steps, tol, config, adm_tol):
    path = euler_simulate(coeffs, model, x0, T, n_steps, eta, rng, config)
    G, h = effective_drift_eta(coeffs, model, eta).with_control(-upsilon_eta(model, eta))
    t, v, left = path.times, path.values, path.left_values
    cuts = [0] + list(np.searchsorted(t, path.jump_times)) + [t.size - 1]
    cuts = sorted(set(cuts))
    devs = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        grid = t[a:b + 1]
        ode = _segment_flow(G, h, v[a], grid)
        seg = np.vstack([v[a:b], left[b][None, :]])
        devs.append(float(np.max(np.linalg.norm(seg - ode, axis=1))))
    bad_jumps = 0
    for pre, post in zip(path.jump_pre, path.jump_post):
        res = admissible(pre, post, coeffs, model, adm_tol)
        if res.decision != YES:
            bad_jumps += 1
    ok = bad_jumps == 0 and all(d <= tol for d in devs)
    return ok, devs, bad_jumps


def forward_inclusion_check(coeffs, model, eta, n_paths, tol, rng, x0=None, T=1.0, n_steps=200,
                            config=None, jobs=1, adm_tol=1e-6):
    """Fraction of Euler paths that stay within ``tol`` of the ODE pieces between their big jumps.

    On each stretch between consecutive jumps of size ``>= eta`` the drift
    ODE (control ``-upsilon_eta``) is re-integrated from the path's
    post-jump value; every jump is checked for admissibility.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    x0 = np.zeros(coeffs.m) if x0 is None else np.asarray(x0, dtype=float)
    if n_paths == 0:
        return InclusionReport(0, 0, tol, np.zeros(0))
    worker = partial(_inclusion_worker, coeffs=coeffs, model=model, eta=eta, x0=x0, T=T, n_steps=n_steps,
                     tol=tol, config=config, adm_tol=adm_tol)
    res = map_paths(worker, n_paths, _seed_of(rng), "inclusion", jobs)
    passed = sum(1 for ok, _, _ in res if ok)
    devs = [d for _, d, _ in res]
    return InclusionReport(n_paths, passed, float(tol), np.array([max(d) for d in devs]), devs,
                           sum(b for _, _, b in res))


# --------------------------------------------------------------------------
# big-jump window

def jump_window_probability(model, eta, times_t, delta, T):
    """``P(J = K, |tau_k - t_k| < delta for all k) = e^{-T m} (2 delta m)^K`` with ``m = mu(|u| >= eta)``."""
    times_t = np.asarray(times_t, dtype=float).ravel()
    if times_t.size and not delta < jump_gap(times_t, 0.0, T):
        raise GapViolationError(f"delta={delta} must stay below half the minimal gap {jump_gap(times_t, 0.0, T):.6g}")
    m = tail_mass(model, eta)
    return math.exp(-T * m) * (2.0 * delta * m) ** times_t.size


def _window_worker(i, rng, model, eta, times_t, delta, T):
    jt, _ = sample_large_jumps(model, eta, T, rng)
    return jt.size == times_t.size and bool(np.all(np.abs(jt - times_t) < delta))


def jump_window_frequency(model, eta, times_t, delta, T, N, rng, jobs=1):
    """Monte-Carlo frequency of the window event; returns ``(frequency, hits)``."""
    times_t = np.asarray(times_t, dtype=float).ravel()
    worker = partial(_window_worker, model=model, eta=eta, times_t=times_t, delta=delta, T=T)
    hits = int(sum(map_paths(worker, N, _seed_of(rng), "window", jobs)))
    return hits / N, hits


# --------------------------------------------------------------------------
# reachability

@dataclass(frozen=True, eq=False)
class ReachCertificate:
    x: np.ndarray
    y: np.ndarray
    T: float
    eps: float
    route: str  # "cone" or "control"
    control: ControlFunction
    plan: JumpPlan
    h: float
    terminal_error: float

    def replay(self, coeffs, model):
        """Re-solve the skeleton; returns ``(skeleton, terminal error)``."""
        sk = solve_skeleton(self.x, coeffs, model, self.control, self.plan, self.T, self.h)
        return sk, float(np.linalg.norm(sk.terminal - self.y))

    def to_dict(self):
        return {"route": self.route, "x": self.x.tolist(), "y": self.y.tolist(), "T": self.T, "eps": self.eps,
                "h": self.h, "terminal_error": self.terminal_error, "control": self.control.to_dict(),
                "plan": self.plan.to_dict()}


def _direction_grid(d, n=72):
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        th = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    rng = np.random.default_rng(12345)
    g = rng.standard_normal((400, d))
    return np.vstack([np.eye(d), -np.eye(d), g / np.linalg.norm(g, axis=1, keepdims=True)])


INF_RADIUS = math.inf


def cone_aperture(model, radii=(1e-1, 1e-2, 1e-3, 1e-4, 1e-6), drift_tol=0.05):
    """Largest ``theta`` such that every grid direction has support directions within ``cos >= theta``.

    Infinite measures are probed at shrinking radii (only small jumps
    count); finite ones use all atoms.  The cone must have a fixed
    aperture at all small scales, so if the aperture at the finest radius
    has shrunk by more than ``drift_tol`` (relative) from the coarsest one
    the cone degenerates and 0.0 is returned.  Returns 1.0 for full support.
    """
    grid = _direction_grid(model.dim)
    per_radius = []
    for r in ([INF_RADIUS] if model.finite else radii):
        dirs = model.support_directions(r)
        if dirs is None:
            continue
        cos = grid @ np.asarray(dirs).T
        per_radius.append(float(np.min(np.max(cos, axis=1))))
    if not per_radius:
        return 1.0
    if len(per_radius) > 1 and per_radius[-1] < (1.0 - drift_tol) * per_radius[0]:
        return 0.0
    return min(per_radius)


def _check_rank(coeffs, z):
    if np.linalg.matrix_rank(coeffs.sigma_at(z), tol=1e-10) < coeffs.m:
        raise RankDeficiencyError(f"sigma has rank below {coeffs.m} at {np.round(z, 6)}")


def reach_cone(model, coeffs, x, y, T, eps, theta=None, max_jumps=256, h=1e-3):
    """Steer from ``x`` to within ``eps`` of ``y`` by jumps alone (control ``f = 0``).

    Jumps sit on a uniform grid of slots in ``(0, T)``; at each slot the
    jump in the support that best reduces the predicted terminal miss is
    taken.  The slot count doubles until the replayed skeleton lands within
    ``eps`` or ``max_jumps`` is exceeded.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    aperture = cone_aperture(model)
    if aperture <= 0.0 or (theta is not None and aperture < theta):
        raise ConeConditionError(
            f"cone condition not certified: best aperture {aperture:.3g}" + (f" < theta={theta}" if theta else ""))
    drift = effective_drift(coeffs, model)
    if not drift.affine:
        raise TypeError("reach_cone needs affine coefficients")
    f0 = ControlFunction.zero(model.dim, T)
    _check_rank(coeffs, x)
    base = solve_skeleton(x, coeffs, model, f0, None, T, h)
    if np.linalg.norm(base.terminal - y) <= eps:
        return ReachCertificate(x, y, T, eps, "cone", f0, JumpPlan(), h, float(np.linalg.norm(base.terminal - y)))
    G, hv = drift.with_control(np.zeros(model.dim))
    bound = float(np.linalg.norm(G, 2)) * max(np.linalg.norm(x), np.linalg.norm(y)) + float(np.linalg.norm(hv))
    K = max(model.dim, 1, int(math.ceil(4.0 * T * bound / eps)))
    while K <= max_jumps:
        slots = T * np.arange(1, K + 1) / (K + 1)
        times, amps = [], []
        state, t_prev = x.copy(), 0.0
        for k, t in enumerate(slots):
            state = kernels.rk4_affine(state, G, hv, (t - t_prev) / 64, 64)[-1]
            t_prev = t
            _check_rank(coeffs, state)
            P = linalg.expm(G * (T - t))
            free_end = kernels.rk4_affine(state, G, hv, (T - t) / 256, 256)[-1]
            miss = y - free_end
            if np.linalg.norm(miss) <= 1e-3 * eps:
                continue
            res = admissible(state, state + np.linalg.solve(P, miss), coeffs, model)
            step = coeffs.c(state, res.amplitude)
            if np.linalg.norm(miss - P @ step) >= np.linalg.norm(miss) - 1e-15:
                continue
            times.append(t)
            amps.append(res.amplitude)
            state = state + step
        plan = JumpPlan.amplitudes(times, np.array(amps).reshape(-1, model.dim))
        sk = solve_skeleton(x, coeffs, model, f0, plan, T, h)
        err = float(np.linalg.norm(sk.terminal - y))
        if err <= eps:
            return ReachCertificate(x, y, T, eps, "cone", f0, plan, h, err)
        K *= 2
    raise IterationCapError(f"no certificate within {max_jumps} jumps")


def _piece_flow(drift, coeffs, x, f, a, b, h):
    # the same arithmetic as one control piece of solve_skeleton
    n = max(1, int(math.ceil((b - a) / h - 1e-9)))
    G, hv = drift.with_control(f)
    return kernels.rk4_affine(x, G, hv, (b - a) / n, n)[-1]


def reach_control(coeffs, model, x, y, T, n_pieces=64, h=1e-3, shoot=True, newton_tol=1e-13, max_newton=30):
    """Steer along the straight line ``x + (t/T)(y - x)`` with a piecewise-constant control.

    Each piece starts from the frozen feedback
    ``f = sigma(phi)^+ ((y - x)/T - btilde(phi))`` and, with ``shoot``, is
    corrected by Newton steps so the piece ends on the line.
    """
    L = integrability_subspace(model)
    if L.dim_L != 0:
        raise ValueError("the control route needs L = {0}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    drift = effective_drift(coeffs, model)
    if not drift.affine:
        raise TypeError("reach_control needs affine coefficients")
    bps = T * np.arange(n_pieces) / n_pieces
    ends = np.append(bps[1:], T)
    vel = (y - x) / T
    state = x.copy()
    values = []
    for a, b in zip(bps, ends):
        _check_rank(coeffs, state)
        sig = coeffs.sigma_at(state)
        f = np.linalg.pinv(sig) @ (vel - drift(state))
        if shoot:
            goal = x + (b / T) * (y - x)
            for _ in range(max_newton):
                r = _piece_flow(drift, coeffs, state, f, a, b, h) - goal
                if np.linalg.norm(r) <= newton_tol * (1.0 + np.linalg.norm(goal)):
                    break
                J = np.empty((coeffs.m, model.dim))
                for j in range(model.dim):
                    df = np.zeros(model.dim)
                    df[j] = 1e-6 * (1.0 + abs(f[j]))
                    J[:, j] = (_piece_flow(drift, coeffs, state, f + df, a, b, h) - goal - r) / df[j]
                f = f - np.linalg.lstsq(J, r, rcond=None)[0]
        values.append(f)
        state = _piece_flow(drift, coeffs, state, f, a, b, h)
    control = ControlFunction(bps, np.array(values), T, L)
    sk = solve_skeleton(x, coeffs, model, control, None, T, h)
    err = float(np.linalg.norm(sk.terminal - y))
    return ReachCertificate(x, y, T, float("nan"), "control", control, JumpPlan(), h, err)


# --------------------------------------------------------------------------
# scaling diagnostic

@dataclass(frozen=True)
class ScalingReport:
    directions: np.ndarray
    implied_alpha: np.ndarray
    max_misfit: np.ndarray
    spread_tol: float
    linear_tol: float

    @property
    def spread(self):
        return float(np.max(self.implied_alpha) - np.min(self.implied_alpha))

    @property
    def holds(self):
        return self.spread <= self.spread_tol and bool(np.all(self.max_misfit <= self.linear_tol))

    def to_dict(self):
        return {"directions": self.directions.tolist(), "implied_alpha": self.implied_alpha.tolist(),
                "max_misfit": self.max_misfit.tolist(), "spread": self.spread, "holds": self.holds}


def check_scaling_condition(model, eps_grid=None, direction_grid=None, spread_tol=0.05, linear_tol=0.05):
    """Fit ``log int_{|u|<=eps} (u . ell)^2 mu(du)`` against ``log eps`` per direction.

    The implied index is ``2 - slope``; the condition holds when all
    directions agree within ``spread_tol`` and every fit is linear within
    ``linear_tol`` (largest absolute log residual).
    """
    eps = np.geomspace(1e-4, 1e-1, 13) if eps_grid is None else np.asarray(eps_grid, dtype=float)
    dirs = _direction_grid(model.dim, 8) if direction_grid is None else np.atleast_2d(direction_grid)
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    if eps.size < 2 or dirs.shape[0] < 1:
        raise ValueError("grids must be non-empty (at least two radii)")
    covs = [model.second_moment(0.0, e, upper_closed=True) for e in eps]
    alphas, misfit = [], []
    le = np.log(eps)
    for ell in dirs:
        vals = np.array([ell @ c @ ell for c in covs])
        if np.any(vals <= 0.0):
            alphas.append(np.nan)
            misfit.append(np.inf)
            continue
        lv = np.log(vals)
        slope, icpt = np.polyfit(le, lv, 1)
        alphas.append(2.0 - slope)
        misfit.append(float(np.max(np.abs(lv - (slope * le + icpt)))))
    alphas = np.array(alphas)
    misfit = np.array(misfit)
    if np.any(np.isnan(alphas)):
        alphas = np.where(np.isnan(alphas), np.inf, alphas)
    return ScalingReport(dirs, alphas, misfit, spread_tol, linear_tol)


# --------------------------------------------------------------------------
# tilted equation: tracking and Girsanov consistency

def _tracking_worker(i, rng, coeffs, model, x0, S, Q, n_steps, eta, g, phi, config):
    path, _ = simulate_tilted(coeffs, model, x0, S, Q, n_steps, eta, g, rng, config)
    return uniform_distance(path, phi)


def tilted_tracking(coeffs, model, x0, f, eta, N, rng, n_steps=200, config=None, jobs=1, h=1e-3):
    """Sup-distances between tilted truncated paths and the skeleton with control ``f``."""
    g = control_to_tilt(f, model, eta)
    phi = solve_skeleton(x0, coeffs, model, f, None, f.T, h).path
    worker = partial(_tracking_worker, coeffs=coeffs, model=model, x0=np.asarray(x0, dtype=float), S=f.t0,
                     Q=f.T, n_steps=n_steps, eta=eta, g=g, phi=phi, config=config)
    return np.array(map_paths(worker, N, _seed_of(rng), ("tracking", int(round(eta * 1e9))), jobs))


def tracking_rho(lipschitz, T):
    """Default contraction factor ``rho = e^{-L T} / 2`` for the tracking estimate."""
    return 0.5 * math.exp(-lipschitz * T)


def _girsanov_worker(i, rng, coeffs, model, x0, S, Q, n_steps, eta, g, config):
    _, logd, (at, au) = simulate_tilted(coeffs, model, x0, S, Q, n_steps, eta, g, rng, config, return_atoms=True)
    return logd, at, au


@dataclass
class GirsanovReport:
    n: int
    mean_density: float
    std_error: float
    bin_edges: np.ndarray
    observed: np.ndarray
    expected: np.ndarray

    @property
    def density_z(self):
        return (self.mean_density - 1.0) / self.std_error

    @property
    def bin_z(self):
        safe = np.where(self.expected > 0.0, self.expected, 1.0)
        z = (self.observed - self.expected) / np.sqrt(safe)
        return np.where(self.expected > 0.0, z, np.where(self.observed > 0, np.inf, 0.0))

    def to_dict(self):
        return {"n": self.n, "mean_density": self.mean_density, "std_error": self.std_error,
                "density_z": self.density_z, "bin_edges": self.bin_edges.tolist(),
                "observed": self.observed.tolist(), "expected": self.expected.tolist(),
                "bin_z": self.bin_z.tolist()}


def girsanov_check(coeffs, model, x0, g, eta, N, rng, n_steps=10, n_radial_bins=5, config=None, jobs=1):
    """Mean of ``exp(log density)`` and binned tilted-atom counts against ``(1 + g) mu``.

    Bins are signed radial shells of the tilt annulus (one-dimensional
    models), so ``g`` is constant on each bin and the expected counts are
    closed form.
    """
    if model.dim != 1:
        raise ValueError("the binned intensity check is implemented for one-dimensional models")
    S, Q = float(g.breakpoints[0]), g.T
    worker = partial(_girsanov_worker, coeffs=coeffs, model=model, x0=np.asarray(x0, dtype=float), S=S, Q=Q,
                     n_steps=n_steps, eta=eta, g=g, config=config)
    res = map_paths(worker, N, _seed_of(rng), "girsanov", jobs)
    dens = np.exp(np.array([r[0] for r in res]))
    zeta = g.min_inner
    radii = np.geomspace(zeta, eta, n_radial_bins + 1)
    edges = np.concatenate([-radii[::-1], radii])
    u = np.concatenate([r[2].ravel() for r in res])
    observed, expected = [], []
    for sign in (-1.0, 1.0):
        for lo, hi in zip(radii[:-1], radii[1:]):
            sel = (np.sign(u) == sign) & (np.abs(u) > lo) & (np.abs(u) < hi)
            observed.append(int(np.sum(sel)))
            exp_count = 0.0
            for a, b, p in g.intervals(S, Q):
                gv = float(p(np.array([[sign * math.sqrt(lo * hi)]]))[0]) if p.zeta <= lo and hi <= p.eta else 0.0
                mass = _signed_mass(model, lo, hi, sign)
                exp_count += (b - a) * mass * (1.0 + gv)
            expected.append(N * exp_count)
    return GirsanovReport(N, float(dens.mean()), float(dens.std(ddof=1) / math.sqrt(N)), edges,
                          np.array(observed), np.array(expected))


def _signed_mass(model, lo, hi, sign):
    total = model.mass(lo, hi)
    if model.symmetric:
        return 0.5 * total
    # one-sided: sign_mass gives (mass+) - (mass-)
    diff = model.sign_mass(np.array([1.0]), lo, hi)
    return 0.5 * (total + sign * diff)


__all__ = [
    "SupportCheckReport",
    "InclusionReport",
    "ReachCertificate",
    "ScalingReport",
    "GirsanovReport",
    "clopper_pearson",
    "mc_support_probability",
    "support_distances",
    "report_from_distances",
    "forward_inclusion_check",
    "euler_error_bound",
    "neglected_variance_tolerance",
    "jump_window_probability",
    "jump_window_frequency",
    "cone_aperture",
    "reach_cone",
    "reach_control",
    "check_scaling_condition",
    "tilted_tracking",
    "girsanov_check",
    "tracking_rho",
]
