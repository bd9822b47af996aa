import math

import numpy as np
import pytest
from scipy import stats

from jumpsupport import levy as lv
from jumpsupport import metric
from jumpsupport import sde
from jumpsupport import skeleton as sk
from jumpsupport import tilt as tl
from jumpsupport.errors import AssumptionError, BlowUpError, ConfigError


def affine(A, S0, a=None, S1=None, remainder=None, **kw):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    a = np.zeros(A.shape[0]) if a is None else a
    return sde.CoefficientSet(sde.AffineDrift(A, a), sde.AffineSigma(S0, S1), remainder, **kw)


def test_effective_drift_symmetric_is_b():
    co = affine([[-1.0, 0.2], [0.0, -0.5]], np.eye(2), a=[0.3, -0.1])
    for model in (lv.RadialStable(1.5, d=2), lv.CylindricalStable((0.5, 1.5)), lv.RadialStable(0.5, d=2)):
        bt = sde.effective_drift(co, model)
        x = np.array([0.7, -1.1])
        assert np.allclose(bt(x), co.b(x), atol=1e-12)


def test_effective_drift_one_sided_integrable():
    # alpha = 0.5: L = R and int_0^1 u u^(-1.5) du = 2
    co = affine([[0.0]], [[0.5]], a=[1.0])
    bt = sde.effective_drift(co, lv.OneSidedStable1D(0.5))
    assert bt(np.array([3.0]))[0] == pytest.approx(1.0 - 0.5 * 2.0, rel=1e-10)
    bt_eta = sde.effective_drift_eta(co, lv.OneSidedStable1D(0.5), 0.25)
    # int_0.25^1 u^(-0.5) du = 2 - 1 = 1
    assert bt_eta(np.array([3.0]))[0] == pytest.approx(1.0 - 0.5 * 1.0, rel=1e-10)


def test_effective_drift_remainder_term():
    rem = sde.PowerRemainder(0.5, [0.0], [1.0])
    co = affine([[0.0]], [[1.0]], remainder=rem, beta=1.6)
    bt = sde.effective_drift(co, lv.RadialStable(1.5))
    # b - r0 * int |u|^beta = -0.5 * 20
    assert bt(np.array([0.0]))[0] == pytest.approx(-10.0, rel=1e-8)


def test_zero_coefficients_give_constant_path(rng):
    co = affine([[0.0, 0.0], [0.0, 0.0]], np.zeros((2, 2)))
    p = sde.euler_simulate(co, lv.RadialStable(1.5, d=2), [1.0, -2.0], 1.0, 50, 0.2, rng)
    assert np.all(p.values == np.array([1.0, -2.0]))


def test_single_point_path(rng):
    co = affine([[-1.0]], [[1.0]])
    p = sde.simulate_truncated(co, lv.RadialStable(1.5), [0.3], 0.4, 0.4, 10, 0.1, rng)
    assert p.times.tolist() == [0.4] and p.values.tolist() == [[0.3]]


def test_no_small_jumps_matches_skeleton(rng):
    # Discrete atoms all above eta: no small-jump noise remains, and a
    # constant drift makes the Euler scheme exact
    model = lv.Discrete([[1.0], [-0.7]], [2.0, 1.5])
    co = affine([[0.0]], [[0.8]], a=[0.4])
    path = sde.euler_simulate(co, model, [0.2], 2.0, 40, 0.5, rng)
    assert path.n_jumps > 0
    amps = np.array([[(post - pre)[0] / 0.8] for pre, post in zip(path.jump_pre, path.jump_post)])
    f = sk.ControlFunction.zero(1, 2.0)
    phi = sk.solve_skeleton([0.2], co, model, f, sk.JumpPlan.amplitudes(path.jump_times, amps), 2.0, 1e-3)
    assert abs(path.terminal[0] - phi.terminal[0]) <= 1e-6
    assert np.allclose(path(phi.times), phi.values, atol=1e-6)


def test_one_sided_truncated_mean(rng):
    # b = 0, sigma = 1: the compensated jumps in [eta, 1] are dropped but their
    # compensator stays, so E X_T = -upsilon_eta T = -2 (eta^-0.5 - 1) T
    model = lv.OneSidedStable1D(1.5)
    co = affine([[0.0]], [[1.0]])
    x = np.array([sde.simulate_truncated(co, model, [0.0], 0.0, 1.0, 10, 0.1, rng).terminal[0]
                  for _ in range(4000)])
    ref = -2.0 * (0.1 ** -0.5 - 1.0)
    assert abs(x.mean() - ref) <= 4.0 * x.std() / math.sqrt(x.size)


def test_zero_tilt_matches_truncated():
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.5]])
    g = tl.TiltFunction.zero(0.1, 1.0)
    r1, r2 = np.random.default_rng(1), np.random.default_rng(2)
    a, dens = [], []
    for _ in range(1500):
        p, logd = sde.simulate_tilted(co, model, [0.0], 0.0, 1.0, 20, 0.1, g, r1)
        a.append(p.terminal[0])
        dens.append(logd)
    b = [sde.simulate_truncated(co, model, [0.0], 0.0, 1.0, 20, 0.1, r2).terminal[0] for _ in range(1500)]
    assert stats.ks_2samp(a, b).pvalue > 0.01
    assert np.all(np.array(dens) == 0.0)


def test_blow_up_guard(rng):
    co = affine([[40.0]], [[1.0]])
    with pytest.raises(BlowUpError):
        sde.euler_simulate(co, lv.RadialStable(1.5), [1.0], 1.0, 100, 0.2, rng, cap=1e6)


def test_registered_coefficients_match_affine():
    sde.register_drift("neg", lambda x: -x + 0.1)
    sde.register_sigma("half", lambda x: np.array([[0.5 + 0.1 * x[0]]]))
    generic = sde.CoefficientSet(sde.RegisteredDrift("neg", 1), sde.RegisteredSigma("half", 1, 1),
                                 lipschitz_b=1.0, lipschitz_sigma=0.1)
    aff = affine([[-1.0]], [[0.5]], a=[0.1], S1=[[[0.1]]])
    model = lv.RadialStable(1.5)
    p1 = sde.euler_simulate(generic, model, [0.5], 1.0, 100, 0.3, np.random.default_rng(5))
    p2 = sde.euler_simulate(aff, model, [0.5], 1.0, 100, 0.3, np.random.default_rng(5))
    assert np.array_equal(p1.times, p2.times)
    assert np.allclose(p1.values, p2.values, atol=1e-12)


def test_check_assumptions(rng):
    co = affine([[-2.0]], [[1.0]], lipschitz_b=2.0)
    out = sde.check_assumptions(co, lv.RadialStable(1.5), rng)
    assert out["b"] == pytest.approx(2.0, rel=1e-9)
    bad = affine([[-2.0]], [[1.0]], lipschitz_b=1.0)
    with pytest.raises(AssumptionError):
        sde.check_assumptions(bad, None, rng)
    small_beta = affine([[-1.0]], [[1.0]], remainder=sde.PowerRemainder(1.0, [0.0], [1.0]), beta=1.4)
    with pytest.raises(AssumptionError):
        sde.check_assumptions(small_beta, lv.RadialStable(1.5), rng)


def test_coefficient_round_trip():
    co = affine([[-1.0, 0.0], [0.5, -1.0]], np.eye(2), a=[0.1, 0.2],
                remainder=sde.PowerRemainder(0.3, [0.1, 0.0], [0.0, 1.0]), beta=1.8)
    again = sde.CoefficientSet.from_dict(co.to_dict())
    assert again.to_dict() == co.to_dict()
    with pytest.raises(ConfigError):
        sde.CoefficientSet.from_dict({"drift": {"kind": "affine", "A": [[1.0]]}})


def test_path_csv_schema(rng):
    co = affine([[-1.0]], [[1.0]])
    p = sde.euler_simulate(co, lv.RadialStable(1.5), [0.0], 1.0, 20, 0.2, rng)
    text = p.to_csv()
    lines = text.split("\n")
    assert lines[0] == "t,x_1,is_jump"
    assert "\r" not in text and text.endswith("\n")
    assert sum(line.endswith(",1") for line in lines) == p.n_jumps


def test_seeded_paths_reproduce():
    co = affine([[-1.0]], [[1.0]])
    a = sde.euler_simulate(co, lv.RadialStable(1.5), [0.0], 1.0, 50, 0.1, np.random.default_rng(9))
    b = sde.euler_simulate(co, lv.RadialStable(1.5), [0.0], 1.0, 50, 0.1, np.random.default_rng(9))
    assert a.to_csv() == b.to_csv()


def test_effective_drift_eta_symmetric_is_b():
    co = affine([[-1.0, 0.2], [0.0, -0.5]], np.eye(2), a=[0.3, -0.1])
    x = np.array([0.7, -1.1])
    for model in (lv.RadialStable(1.5, d=2), lv.CylindricalStable((0.5, 1.5)), lv.CurveImage(1.5, 2.0)):
        for eta in (0.01, 0.2, 1.0):
            assert np.allclose(sde.effective_drift_eta(co, model, eta)(x), co.b(x), atol=1e-12)


def test_large_jumps_applied_exactly(rng):
    rem = sde.PowerRemainder(0.2, [0.1], [1.0])
    co = affine([[-0.5]], [[0.7]], S1=[[[0.2]]], remainder=rem, beta=1.8)
    model = lv.RadialStable(1.5)
    noise = sde._prepare_noise(co, model, 0.0, 2.0, 50, 0.3, rng, True, None)
    p = sde._run(co, model, [0.3], noise, 0.3, 1e12)
    assert p.n_jumps == noise.jump_times.size > 0
    assert np.array_equal(p.jump_times, noise.jump_times)
    for pre, post, u in zip(p.jump_pre, p.jump_post, noise.jump_u):
        assert abs(u[0]) >= 0.3
        # r(x, u) = (0.2 + 0.1 x) |u|^1.8; the compiled loop may round differently by an ulp or two
        ref = pre[0] + (0.7 + 0.2 * pre[0]) * u[0] + (0.2 + 0.1 * pre[0]) * abs(u[0]) ** 1.8
        assert abs(post[0] - ref) <= 4.0 * np.finfo(float).eps * (abs(pre[0]) + abs(u[0]) + 1.0)


def test_large_jumps_exact_in_reference_kernel(rng, monkeypatch):
    from jumpsupport import _pykernels, kernels
    monkeypatch.setattr(kernels, "_impl", _pykernels)
    co = affine([[-0.5]], [[0.7]], S1=[[[0.2]]])
    model = lv.RadialStable(1.5)
    noise = sde._prepare_noise(co, model, 0.0, 2.0, 50, 0.3, rng, True, None)
    p = sde._run(co, model, [0.3], noise, 0.3, 1e12)
    assert p.n_jumps > 0
    for pre, post, u in zip(p.jump_pre, p.jump_post, noise.jump_u):
        assert post[0] == pre[0] + (0.7 + 0.2 * pre[0]) * u[0]


def _paired_terminals(co, model, eta, levels, n_paths, seed):
    # one noise realization on the finest grid, aggregated onto coarser grids
    cfg = lv.SmallJumpConfig(max_rate=200)
    rng = np.random.default_rng(seed)
    out = np.zeros((n_paths, len(levels)))
    for p in range(n_paths):
        noise = sde._prepare_noise(co, model, 0.0, 1.0, levels[-1], eta, rng, True, cfg)
        for k, n in enumerate(levels):
            grid = np.union1d(np.linspace(0.0, 1.0, n + 1), noise.jump_times)
            idx = np.searchsorted(noise.grid, grid)[:-1]
            coarse = sde._Noise(grid, np.add.reduceat(noise.dZ, idx, axis=0), np.add.reduceat(noise.dR, idx),
                                noise.jump_times, noise.jump_u)
            out[p, k] = sde._run(co, model, [1.0], coarse, eta, 1e12).terminal[0]
    return out


def test_refinement_consistency():
    co = affine([[-1.0]], [[0.5]], S1=[[[0.3]]])
    levels = [25, 50, 100, 200, 400]
    x = _paired_terminals(co, lv.RadialStable(1.5), 0.5, levels, 1000, 1)
    rms = np.sqrt(np.mean(np.diff(x, axis=1) ** 2, axis=0))
    slope = np.polyfit(np.log(1.0 / np.array(levels[:-1])), np.log(rms), 1)[0]
    assert 0.3 <= slope <= 1.2


def test_marginal_and_jump_count_against_direct_draws():
    # X_T - x0 with b = 0, sigma = 1 against 1e5 one-step draws of Z_T; large-jump counts against Poisson
    model = lv.RadialStable(1.5)
    co = affine([[0.0]], [[1.0]])
    cfg = lv.SmallJumpConfig(max_rate=200)
    n = 100_000
    r1, r2 = np.random.default_rng(1), np.random.default_rng(2)
    x, k = np.empty(n), np.empty(n)
    for i in range(n):
        p = sde.euler_simulate(co, model, [0.0], 1.0, 10, 0.5, r1, cfg)
        x[i], k[i] = p.terminal[0], p.n_jumps
    z = np.array([sde.direct_increment(model, 1.0, 0.5, r2, cfg)[0] for _ in range(n)])
    assert stats.ks_2samp(x, z).pvalue > 0.01
    lam = lv.tail_mass(model, 0.5)
    assert abs(k.mean() - lam) <= 3.0 * math.sqrt(lam / n)


def test_truncated_paths_approach_skeleton_as_eta_decreases():
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.5]])
    phi = sk.solve_skeleton([1.0], co, model, sk.ControlFunction.zero(1, 1.0), None, 1.0).path
    rng = np.random.default_rng(12)
    med = []
    for eta in (0.2, 0.1, 0.05):
        d = [metric.uniform_distance(sde.simulate_truncated(co, model, [1.0], 0.0, 1.0, 100, eta, rng), phi)
             for _ in range(1000)]
        med.append(np.median(d))
    assert med[0] > med[1] > med[2]
