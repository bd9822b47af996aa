import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jumpsupport import levy as lv
from jumpsupport import sde
from jumpsupport import skeleton as sk
from jumpsupport import support as sp
from jumpsupport import tilt as tl
from jumpsupport.errors import ConeConditionError, GapViolationError, RankDeficiencyError
from jumpsupport.levy import SmallJumpConfig


def affine(A, S0, a=None):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    a = np.zeros(A.shape[0]) if a is None else a
    return sde.CoefficientSet(sde.AffineDrift(A, a), sde.AffineSigma(S0))


# --------------------------------------------------------------------------
# confidence intervals

@given(st.integers(0, 200), st.integers(1, 200))
def test_clopper_pearson_contains_estimate(k, n):
    k = min(k, n)
    lo, hi = sp.clopper_pearson(k, n)
    assert 0.0 <= lo <= k / n <= hi <= 1.0
    assert (lo == 0.0) == (k == 0)


# --------------------------------------------------------------------------
# positivity around skeletons

def test_large_eps_hits_everything():
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.2]])
    phi = sk.solve_skeleton([1.0], co, model, sk.ControlFunction.zero(1, 1.0), None, 1.0)
    rep = sp.mc_support_probability(co, model, phi, 1e6, 200, 0.5, 3, n_steps=50, metric="uniform")
    assert rep.estimate == 1.0 and rep.positive


def test_drift_dominated_positive():
    model = lv.Discrete([[-1.0], [1.0]], [1e-4, 1e-4])
    co = affine([[-1.0]], [[1.0]])
    phi = sk.solve_skeleton([1.0], co, model, sk.ControlFunction.zero(1, 1.0), None, 1.0)
    assert phi.terminal[0] == pytest.approx(math.exp(-1.0), abs=1e-8)
    rep = sp.mc_support_probability(co, model, phi, 0.3, 10_000, 0.5, 11, n_steps=100)
    assert rep.positive and rep.estimate > 0.99


def test_far_shift_negative():
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.2]])
    phi = sk.solve_skeleton([1.0], co, model, sk.ControlFunction.zero(1, 1.0), None, 1.0).path
    far = type(phi)(phi.times, phi.values + 100.0)
    rep = sp.mc_support_probability(co, model, far, 0.1, 300, 0.5, 4, n_steps=50)
    assert rep.estimate == 0.0 and not rep.positive


def test_estimates_monotone_in_eps():
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.3]])
    phi = sk.solve_skeleton([1.0], co, model, sk.ControlFunction.zero(1, 1.0), None, 1.0)
    reps = sp.mc_support_probability(co, model, phi, [0.1, 0.2, 0.4, 0.8], 300, 0.3, 5, n_steps=50)
    est = [r.estimate for r in reps]
    assert est == sorted(est)


def test_too_few_paths():
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.3]])
    phi = sk.solve_skeleton([1.0], co, model, sk.ControlFunction.zero(1, 1.0), None, 1.0)
    with pytest.raises(ValueError):
        sp.mc_support_probability(co, model, phi, 0.3, 50, 0.3, 5)


# --------------------------------------------------------------------------
# forward inclusion

def test_inclusion_zero_paths():
    co = affine([[-1.0]], [[0.5]])
    rep = sp.forward_inclusion_check(co, lv.RadialStable(1.5), 0.2, 0, 0.1, 1)
    assert rep.pass_rate == 1.0


def test_inclusion_median_shrinks_with_eta():
    co = affine([[-1.0]], [[0.5]])
    model = lv.RadialStable(1.5)
    med = []
    for eta in (0.2, 0.1, 0.05):
        tol = sp.neglected_variance_tolerance(co, model, eta, 1.0)
        rep = sp.forward_inclusion_check(co, model, eta, 100, tol, 8, x0=[1.0], n_steps=100)
        med.append(rep.median_segment_deviation)
    assert med[0] > med[1] > med[2]


# --------------------------------------------------------------------------
# big-jump window

def test_window_formula_examples():
    model = lv.RadialStable(1.5)
    assert sp.jump_window_probability(model, 1.0, [], 0.1, 1.0) == pytest.approx(math.exp(-4.0 / 3.0), rel=1e-12)
    p = sp.jump_window_probability(model, 1.0, [0.5], 0.1, 1.0)
    assert p == pytest.approx(math.exp(-4.0 / 3.0) * 4.0 / 15.0, rel=1e-12)


def test_window_gap_violation():
    with pytest.raises(GapViolationError):
        sp.jump_window_probability(lv.RadialStable(1.5), 1.0, [0.5, 0.6], 0.1, 1.0)


# --------------------------------------------------------------------------
# reachability

def test_reach_cone_trivial():
    co = affine(np.zeros((2, 2)), np.eye(2))
    cert = sp.reach_cone(lv.CylindricalStable((1.5, 1.5)), co, [0.3, 0.3], [0.3, 0.3], 1.0, 0.05)
    assert len(cert.plan) == 0 and cert.terminal_error == 0.0


def test_reach_cone_cylindrical_unit_target():
    co = affine(np.zeros((2, 2)), np.eye(2))
    model = lv.CylindricalStable((1.5, 1.5))
    cert = sp.reach_cone(model, co, [0.0, 0.0], [1.0, 1.0], 1.0, 0.05, max_jumps=64)
    assert len(cert.plan) <= 64 and cert.terminal_error <= 0.05
    # deterministic replay reproduces the stored error exactly
    assert cert.replay(co, model)[1] == cert.terminal_error


def test_reach_cone_curve_rejected():
    co = affine(np.zeros((2, 2)), np.eye(2))
    with pytest.raises(ConeConditionError):
        sp.reach_cone(lv.CurveImage(1.5, 1.2), co, [0.0, 0.0], [1.0, 1.0], 1.0, 0.05)


def test_cone_aperture_scale_stability():
    # the curve's tangent flattens at small scales, so no fixed cone exists
    assert sp.cone_aperture(lv.CurveImage(1.5, 1.2)) == 0.0
    assert sp.cone_aperture(lv.CylindricalStable((0.5, 1.5))) == pytest.approx(math.sqrt(0.5), rel=1e-12)
    assert sp.cone_aperture(lv.RadialStable(1.5, d=2)) == 1.0


def test_reach_control_straight_line():
    co = affine(np.zeros((2, 2)), np.eye(2))
    cert = sp.reach_control(co, lv.RadialStable(1.5, d=2), [0.0, 1.0], [2.0, -1.0], 2.0, n_pieces=8)
    assert np.allclose(cert.control.values, [[1.0, -1.0]] * 8, atol=1e-12)
    assert cert.terminal_error <= 1e-12


def test_reach_control_linear_drift_analytic():
    co = affine([[-1.0]], [[1.0]])
    cert = sp.reach_control(co, lv.RadialStable(1.5), [0.0], [1.0], 1.0, n_pieces=64)
    assert cert.terminal_error <= 1e-3
    # analytic oracle for the stored piecewise-constant control of x' = -x + f
    x = 0.0
    for a, b, f in cert.control.intervals():
        x = x * math.exp(-(b - a)) + f[0] * (1.0 - math.exp(-(b - a)))
    assert abs(x - 1.0) <= 1e-3
    assert x == pytest.approx(cert.replay(co, lv.RadialStable(1.5))[0].terminal[0], abs=1e-10)


def test_reach_control_rank_error():
    co = affine([[-1.0]], [[0.0]])
    with pytest.raises(RankDeficiencyError):
        sp.reach_control(co, lv.RadialStable(1.5), [0.0], [1.0], 1.0)


# --------------------------------------------------------------------------
# scaling diagnostic

def test_scaling_radial():
    rep = sp.check_scaling_condition(lv.RadialStable(1.5, d=2))
    assert rep.holds
    assert np.all(np.abs(rep.implied_alpha - 1.5) <= 0.02)


def test_scaling_cylindrical_per_axis():
    rep = sp.check_scaling_condition(lv.CylindricalStable((0.5, 1.5)), direction_grid=np.eye(2))
    assert rep.implied_alpha == pytest.approx([0.5, 1.5], abs=0.02)
    assert not rep.holds


def test_scaling_curve_fails():
    rep = sp.check_scaling_condition(lv.CurveImage(1.5, 1.2), direction_grid=np.eye(2))
    assert abs(rep.implied_alpha[0] - rep.implied_alpha[1]) > 0.05
    assert not rep.holds


# --------------------------------------------------------------------------
# tilted equation

def test_tracking_rho():
    assert sp.tracking_rho(2.0, 1.0) == pytest.approx(0.5 * math.exp(-2.0))
    assert 0.0 < sp.tracking_rho(0.0, 1.0) < 1.0


def test_girsanov_small_sample():
    model = lv.RadialStable(1.5)
    co = affine([[0.0]], [[1.0]])
    g = tl.control_to_tilt(sk.ControlFunction.constant([0.5], 1.0), model, 0.1)
    rep = sp.girsanov_check(co, model, [0.0], g, 0.1, 2000, 3, config=SmallJumpConfig(max_rate=200))
    assert abs(rep.density_z) <= 4.0
    assert rep.observed.size == 10 and np.all(np.abs(rep.bin_z) <= 4.0)


def test_tilted_tracking_shrinks():
    model = lv.RadialStable(1.5)
    co = affine([[-1.0]], [[0.3]])
    f = sk.ControlFunction.constant([1.0], 1.0)
    d1 = sp.tilted_tracking(co, model, [0.0], f, 0.2, 200, 2, n_steps=100)
    d2 = sp.tilted_tracking(co, model, [0.0], f, 0.05, 200, 2, n_steps=100)
    assert np.median(d2) < np.median(d1)
