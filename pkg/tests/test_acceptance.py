"""Acceptance criteria 1-12 at their stated tolerances.

Each test carries ``@pytest.mark.criterion(n)``; the conftest prints one
pass/fail line per criterion at the end of the run.
"""
import json
import math
import time

import numpy as np
import pytest

from jumpsupport import cli
from jumpsupport import levy as lv
from jumpsupport import metric as mt
from jumpsupport import sde
from jumpsupport import skeleton as sk
from jumpsupport import support as sp
from jumpsupport import tilt as tl
from jumpsupport.levy import SmallJumpConfig

SEED = 20240611


def affine(A, S0, a=None, S1=None):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    a = np.zeros(A.shape[0]) if a is None else a
    return sde.CoefficientSet(sde.AffineDrift(A, a), sde.AffineSigma(S0, S1))


# --------------------------------------------------------------------------
# 1. integrability subspace against closed forms

E1, E2, E3 = np.eye(3)

SUBSPACE_CASES = [
    # (model, closed-form basis of L as rows)
    (lv.RadialStable(0.5), np.eye(1)),
    (lv.RadialStable(1.2), np.zeros((0, 1))),
    (lv.RadialStable(1.5), np.zeros((0, 1))),
    (lv.RadialStable(0.5, d=2), np.eye(2)),
    (lv.RadialStable(1.2, d=2), np.zeros((0, 2))),
    (lv.RadialStable(1.5, d=3), np.zeros((0, 3))),
    (lv.CylindricalStable((0.5, 1.5)), np.array([[1.0, 0.0]])),
    (lv.CylindricalStable((1.5, 0.5)), np.array([[0.0, 1.0]])),
    (lv.CylindricalStable((0.5, 1.2, 0.8)), np.array([E1, E3])),
    # |l1 z + l2 z^gamma| z^(-1-alpha) is integrable at 0 iff l1 = 0 and gamma > alpha
    (lv.CurveImage(1.5, 1.2), np.zeros((0, 2))),
    (lv.CurveImage(1.5, 2.0), np.array([[0.0, 1.0]])),
    (lv.Discrete([[1.0, 0.0], [0.0, -2.0]], [1.0, 3.0]), np.eye(2)),
]


@pytest.mark.criterion(1)
def test_integrability_subspace_closed_forms():
    assert len(SUBSPACE_CASES) == 12
    lv.integrability_subspace.cache_clear()
    start = time.perf_counter()
    results = [lv.integrability_subspace(m) for m, _ in SUBSPACE_CASES]
    elapsed = time.perf_counter() - start
    for (model, expected), L in zip(SUBSPACE_CASES, results):
        assert L.dim_L == expected.shape[0], model
        # exact agreement of the projectors
        P_got = L.basis.T @ L.basis
        P_exp = expected.T @ expected
        assert np.array_equal(P_got, P_exp), model
        assert np.array_equal(L.perp.T @ L.perp + P_got, np.eye(model.dim)), model
    assert elapsed < 1.0


# --------------------------------------------------------------------------
# 2. closed-form integrals

@pytest.mark.criterion(2)
def test_upsilon_eta_one_sided():
    # int_{0.01}^{1} u * u^(-2.5) du = 2 (0.01^(-0.5) - 1) = 18
    val = lv.upsilon_eta(lv.OneSidedStable1D(1.5), 0.01)
    assert val[0] == pytest.approx(18.0, rel=1e-6)


@pytest.mark.criterion(2)
def test_beta_moment_radial():
    # 2 int_0^1 u^1.6 u^(-2.5) du = 2 / 0.1 = 20
    assert lv.beta_moment(lv.RadialStable(1.5), 1.6) == pytest.approx(20.0, rel=1e-6)


# --------------------------------------------------------------------------
# 3. skeleton solver

@pytest.mark.criterion(3)
def test_skeleton_linear_drift_terminal():
    co = affine([[-1.0]], [[0.0]])
    f = sk.ControlFunction.zero(1, 1.0)
    s = sk.solve_skeleton([1.0], co, lv.RadialStable(1.5), f, None, 1.0, 1e-3)
    assert abs(s.terminal[0] - math.exp(-1.0)) <= 1e-8


@pytest.mark.criterion(3)
def test_skeleton_residual_convergence():
    co = affine([[-1.0, 0.3], [0.0, -0.5]], np.eye(2))
    model = lv.RadialStable(1.5, d=2)
    f = sk.ControlFunction([0.0, 0.4], [[1.0, -0.5], [-0.2, 0.7]], 1.0)
    plan = sk.JumpPlan.amplitudes([0.6], [[0.5, 0.5]])
    res = [sk.ode_residual(sk.solve_skeleton([1.0, 0.0], co, model, f, plan, 1.0, h), co, model)
           for h in (1e-2, 5e-3, 2.5e-3)]
    assert res[0] / res[1] >= 3.5
    assert res[1] / res[2] >= 3.5


# --------------------------------------------------------------------------
# 4. perturbed-skeleton convergence

@pytest.mark.criterion(4)
def test_perturbed_skeleton_linear_in_delta():
    start = time.perf_counter()
    co = affine([[-1.0]], [[1.0]])
    model = lv.RadialStable(1.5)
    f = sk.ControlFunction([0.0, 0.5], [[0.5], [-0.3]], 1.0)
    plan = sk.JumpPlan.amplitudes([0.25, 0.75], [[0.8], [-0.5]])
    base = sk.solve_skeleton([1.0], co, model, f, plan, 1.0, 1e-3)
    deltas = (0.1, 0.05, 0.01, 0.005)
    dist = {}
    for d in deltas:
        s_times = base.jump_times + d * np.array([1.0, -1.0])
        moved = sk.perturb_jump_times(base, s_times, co, model)
        lam = sk.time_change_lambda(base.jump_times, s_times, 1.0)
        dist[d] = mt.composite_distance(moved.path, base.path, lam)
    C = max(dist[d] / d for d in deltas[:2])
    for d in deltas[2:]:
        assert dist[d] <= 1.5 * C * d
    assert time.perf_counter() - start < 30.0


# --------------------------------------------------------------------------
# 5. tilt solver

TILT_MODELS = [
    lv.RadialStable(1.5),
    lv.RadialStable(1.2, d=2),
    lv.CylindricalStable((0.5, 1.5)),
    lv.CurveImage(1.5, 1.2),
    lv.CurveImage(1.5, 2.0),
    lv.OneSidedStable1D(1.5),
]


@pytest.mark.criterion(5)
@pytest.mark.parametrize("model", TILT_MODELS, ids=lambda m: type(m).__name__)
def test_tilt_solver_random_targets(model):
    L = lv.integrability_subspace(model)
    assert L.dim_perp > 0
    rng = np.random.default_rng(SEED)
    eta = 0.1
    for _ in range(20):
        w = L.perp.T @ rng.normal(size=L.dim_perp)
        g = tl.solve_tilt(model, L, w, eta, verify=False)
        # support: the annulus zeta < |u| < eta and directions inside L^perp
        assert 0.0 < g.zeta < g.eta == eta
        assert np.allclose(L.project(g.directions), 0.0, atol=1e-12)
        probe = model.sample(1e-9, 1.0, 400, rng)
        inside = (np.linalg.norm(probe, axis=1) > g.zeta) & (np.linalg.norm(probe, axis=1) < g.eta)
        assert np.all(g(probe[~inside]) == 0.0)
        # magnitude
        assert g.bound <= 0.5
        assert np.all(np.abs(g(probe)) <= 0.5)
        # matching integral by adaptive quadrature
        assert tl.verify_tilt(g, model, L, w, rtol=1e-6) <= 1e-6


# --------------------------------------------------------------------------
# 6. Girsanov consistency

@pytest.mark.criterion(6)
def test_girsanov_density_and_intensity():
    start = time.perf_counter()
    model = lv.RadialStable(1.5)
    co = affine([[0.0]], [[1.0]])
    eta = 0.1
    f = sk.ControlFunction.constant([0.5], 1.0)
    g = tl.control_to_tilt(f, model, eta)
    rep = sp.girsanov_check(co, model, [0.0], g, eta, 100_000, SEED, n_steps=10, n_radial_bins=5,
                            config=SmallJumpConfig(max_rate=200))
    assert abs(rep.mean_density - 1.0) <= 3.0 * rep.std_error
    assert rep.observed.size >= 10
    assert np.all(np.abs(rep.bin_z) <= 3.0)
    assert time.perf_counter() - start < 300.0


# --------------------------------------------------------------------------
# 7. tilted tracking probability

@pytest.mark.criterion(7)
def test_tilted_tracking_probability_monotone():
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.3]])
    f = sk.ControlFunction.constant([1.0], 1.0)
    probs = []
    for eta in (0.2, 0.1, 0.05):
        d = sp.tilted_tracking(co, model, [0.0], f, eta, 1000, SEED, n_steps=200)
        probs.append(float(np.mean(d <= 0.5)))
    assert probs[0] <= probs[1] <= probs[2]
    assert probs[2] > 2.0 / 3.0


# --------------------------------------------------------------------------
# 8. positivity around skeletons

@pytest.mark.criterion(8)
def test_support_positivity_three_skeletons():
    start = time.perf_counter()
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.2]])
    eta, N = 0.5, 10_000
    zero = sk.ControlFunction.zero(1, 1.0)
    scenarios = {
        "pure-drift": sk.solve_skeleton([1.0], co, model, zero, None, 1.0),
        "one-jump": sk.solve_skeleton([1.0], co, model, zero, sk.JumpPlan.amplitudes([0.5], [[2.0]]), 1.0),
        "control-only": sk.solve_skeleton([1.0], co, model, sk.ControlFunction.constant([1.5], 1.0), None, 1.0),
    }
    for k, (name, phi) in enumerate(scenarios.items()):
        rep = sp.mc_support_probability(co, model, phi, 0.3, N, eta, SEED + k, target=name)
        assert rep.positive, rep
    p = scenarios["pure-drift"].path
    far = type(p)(p.times, p.values + 100.0)
    rep = sp.mc_support_probability(co, model, far, 0.1, N, eta, SEED + 10, target="far-shifted")
    assert rep.estimate == 0.0
    assert time.perf_counter() - start < 600.0


# --------------------------------------------------------------------------
# 9. forward inclusion

@pytest.mark.criterion(9)
def test_forward_inclusion_discrete():
    model = lv.Discrete([[-1.0], [-0.5], [0.5], [1.0]], [1.0, 1.0, 1.0, 1.0])
    co = affine([[-1.0]], [[0.5]])
    tol = 10.0 * sp.euler_error_bound(co, model, 0.2, [1.0], 1.0, 1.0 / 200)
    rep = sp.forward_inclusion_check(co, model, 0.2, 1000, tol, SEED, x0=[1.0])
    assert rep.pass_rate == 1.0


@pytest.mark.criterion(9)
def test_forward_inclusion_stable():
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.5]])
    tol = sp.neglected_variance_tolerance(co, model, 0.2, 1.0)
    rep = sp.forward_inclusion_check(co, model, 0.2, 1000, tol, SEED, x0=[1.0])
    assert rep.pass_rate >= 0.9


# --------------------------------------------------------------------------
# 10. big-jump window

@pytest.mark.criterion(10)
@pytest.mark.parametrize("times", [[], [0.5], [0.3, 0.7]], ids=["K0", "K1", "K2"])
def test_jump_window_formula(times):
    model = lv.RadialStable(1.5)
    eta, delta, T, N = 0.5, 0.1, 1.0, 100_000
    p = sp.jump_window_probability(model, eta, times, delta, T)
    freq, _ = sp.jump_window_frequency(model, eta, times, delta, T, N, SEED)
    assert abs(freq - p) <= 3.0 * math.sqrt(p * (1.0 - p) / N)


# --------------------------------------------------------------------------
# 11. reachability and scaling

@pytest.mark.criterion(11)
def test_reach_cone_cylindrical():
    model = lv.CylindricalStable((1.5, 1.5))
    co = affine(-np.eye(2), np.eye(2))
    cert = sp.reach_cone(model, co, [0.0, 0.0], [1.0, -0.5], 1.0, 0.05)
    _, err = cert.replay(co, model)
    assert err <= 0.05
    assert err == cert.terminal_error


@pytest.mark.criterion(11)
def test_reach_control_strong_type_two():
    model = lv.RadialStable(1.5, d=2)
    S1 = [[[0.1, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.1]]]
    co = affine([[-1.0, 0.5], [0.0, -1.0]], [[1.0, 0.0], [0.0, 0.5]], S1=S1)
    cert = sp.reach_control(co, model, [0.0, 0.0], [1.0, -0.5], 1.0)
    assert cert.terminal_error <= 1e-3
    assert cert.replay(co, model)[1] <= 1e-3


@pytest.mark.criterion(11)
def test_scaling_diagnostic_verdicts():
    assert not sp.check_scaling_condition(lv.CylindricalStable((0.5, 1.5))).holds
    assert not sp.check_scaling_condition(lv.CurveImage(1.5, 1.2)).holds
    assert sp.check_scaling_condition(lv.RadialStable(1.5, d=2)).holds
    assert sp.check_scaling_condition(lv.RadialStable(1.5)).holds


# --------------------------------------------------------------------------
# 12. determinism across runs and --jobs

MODEL_1D = {"variant": "radial_stable", "alpha": 1.5}
COEFFS_1D = {"drift": {"kind": "affine", "A": [[-1.0]], "a": [0.0]}, "sigma": {"kind": "affine", "S0": [[0.3]]}}

CLI_CASES = {
    "analyze-levy": {"model": {"variant": "cylindrical_stable", "alpha": [0.5, 1.5]}, "params": {"eta": 0.1}},
    "skeleton": {"model": MODEL_1D, "coefficients": COEFFS_1D,
                 "skeletons": [{"x0": [1.0], "f": [0.5], "plan": [{"t": 0.5, "amplitude": [1.0]}]}]},
    "simulate": {"model": MODEL_1D, "coefficients": COEFFS_1D,
                 "params": {"n_paths": 6, "n_steps": 50, "eta": 0.2, "x0": [1.0]}},
    "support-check": {"model": MODEL_1D, "coefficients": COEFFS_1D,
                      "skeletons": [{"x0": [1.0]}], "params": {"N": 200, "eps": [0.3, 0.6], "eta": 0.5,
                                                             "n_steps": 50}},
    "inclusion-check": {"model": MODEL_1D, "coefficients": COEFFS_1D,
                        "params": {"eta": [0.2, 0.5], "n_paths": 40, "x0": [1.0], "n_steps": 50}},
    "tilt-check": {"model": MODEL_1D, "coefficients": COEFFS_1D,
                   "params": {"eta": 0.1, "f": [0.5], "N": 300, "small_jumps": {"max_rate": 200}}},
    "reach": {"model": {"variant": "cylindrical_stable", "alpha": [1.5, 1.5]},
              "coefficients": {"drift": {"kind": "affine", "A": [[-1.0, 0.0], [0.0, -1.0]], "a": [0.0, 0.0]},
                               "sigma": {"kind": "affine", "S0": [[1.0, 0.0], [0.0, 1.0]]}},
              "params": {"x": [0.0, 0.0], "y": [1.0, -0.5], "eps": 0.05}},
}


def _run_cli(tmp_path, name, body, jobs, tag):
    cfg = tmp_path / f"{name}.json"
    cfg.write_text(json.dumps({"seed": SEED, "operation": name, **body}))
    out = tmp_path / f"{name}-{tag}"
    code = cli.run([name, "--config", str(cfg), "--out", str(out), "--jobs", str(jobs)])
    assert code == 0
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


@pytest.mark.criterion(12)
@pytest.mark.parametrize("name", sorted(CLI_CASES))
def test_cli_outputs_byte_identical(tmp_path, name):
    first = _run_cli(tmp_path, name, CLI_CASES[name], 1, "a")
    second = _run_cli(tmp_path, name, CLI_CASES[name], 1, "b")
    parallel = _run_cli(tmp_path, name, CLI_CASES[name], 2, "c")
    assert first == second == parallel
    assert any(k.endswith(".csv") for k in first)


@pytest.mark.criterion(12)
def test_cli_metric_byte_identical(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text("t,x_1,is_jump\n0,0,0\n0.4,0,0\n0.4,1,1\n1,1,0\n")
    b.write_text("t,x_1,is_jump\n0,0,0\n0.5,0,0\n0.5,1,1\n1,1,0\n")
    body = {"paths": [str(a), str(b)]}
    first = _run_cli(tmp_path, "metric", body, 1, "a")
    second = _run_cli(tmp_path, "metric", body, 2, "b")
    assert first == second


@pytest.mark.criterion(12)
def test_library_monte_carlo_independent_of_jobs():
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.2]])
    phi = sk.solve_skeleton([1.0], co, model, sk.ControlFunction.zero(1, 1.0), None, 1.0)
    d1 = sp.support_distances(co, model, phi, 120, 0.5, SEED, n_steps=50, jobs=1)
    d2 = sp.support_distances(co, model, phi, 120, 0.5, SEED, n_steps=50, jobs=3)
    assert d1.tobytes() == d2.tobytes()
    f1, _ = sp.jump_window_frequency(model, 0.5, [0.5], 0.1, 1.0, 500, SEED, jobs=1)
    f2, _ = sp.jump_window_frequency(model, 0.5, [0.5], 0.1, 1.0, 500, SEED, jobs=2)
    assert f1 == f2
