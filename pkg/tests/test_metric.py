import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumpsupport import metric as mt
from jumpsupport import skeleton as sk
from jumpsupport.paths import CadlagPath


def step(at, T=1.0, n=11):
    """Unit jump at ``at`` on a uniform grid that contains ``at``."""
    times = np.union1d(np.linspace(0.0, T, n), [at])
    values = (times >= at).astype(float)
    return CadlagPath(times, values, [at], [[0.0]], [[1.0]])


def const(c, T=1.0):
    return CadlagPath([0.0, T], [[c], [c]])


def test_uniform_examples():
    p = step(0.4)
    assert mt.uniform_distance(p, p) == 0.0
    assert mt.uniform_distance(const(0.0), const(1.0)) == 1.0
    assert mt.uniform_distance(step(0.4), step(0.5)) == 1.0


def test_uniform_sees_left_limits():
    # right values agree on the merged grid but the left limit at 0.5 differs
    p = CadlagPath([0.0, 0.5, 1.0], [[0.0], [1.0], [1.0]], [0.5], [[-1.0]], [[1.0]])
    q = CadlagPath([0.0, 0.5, 1.0], [[0.0], [1.0], [1.0]], [0.5], [[0.0]], [[1.0]])
    assert mt.uniform_distance(p, q) == 1.0


def test_skorokhod_identity_witness():
    p = step(0.4)
    rep = mt.skorokhod_distance_upper(p, p)
    assert rep.skorokhod_upper == 0.0 and rep.identity_witness


def test_skorokhod_step_example():
    rep = mt.skorokhod_distance_upper(step(0.5), step(0.4))
    assert rep.skorokhod_upper == pytest.approx(math.log(1.25), abs=1e-15)
    assert rep.sup_term == 0.0
    assert rep.anchors == ((0.4, 0.5),)


def test_skorokhod_step_example_is_best_in_family():
    # grid search over anchored time changes t=0.4 -> s for s near 0.5
    p, q = step(0.5), step(0.4)
    best = math.inf
    for s in np.linspace(0.3, 0.7, 401):
        lam = sk.time_change_lambda([0.4], [s], 1.0)
        best = min(best, mt.composite_distance(p, q, lam))
    assert mt.skorokhod_upper_value(p, q) <= best + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=5, max_size=5), st.lists(st.floats(-3, 3), min_size=5, max_size=5))
def test_continuous_paths_bounded_by_uniform(a, b):
    t = np.linspace(0.0, 1.0, 5)
    p, q = CadlagPath(t, np.array(a)[:, None]), CadlagPath(t, np.array(b)[:, None])
    rep = mt.skorokhod_distance_upper(p, q)
    assert 0.0 <= rep.skorokhod_upper <= rep.uniform
    assert rep.uniform == mt.uniform_distance(q, p)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.1, 0.9), st.floats(0.5, 2.0))
def test_single_jump_paths(t1, t2, h):
    def jump_path(t):
        grid = np.union1d([0.0, 1.0], [t])
        return CadlagPath(grid, (grid >= t)[:, None] * h, [t], [[0.0]], [[h]])

    p, q = jump_path(t1), jump_path(t2)
    rep = mt.skorokhod_distance_upper(p, q)
    exact = min(h if t1 != t2 else 0.0,
                max(abs(math.log(t1 / t2)), abs(math.log((1 - t1) / (1 - t2)))))
    assert rep.skorokhod_upper <= exact + 1e-12
    assert rep.skorokhod_upper <= rep.uniform


def test_mismatched_paths_rejected():
    with pytest.raises(ValueError):
        mt.uniform_distance(const(0.0, 1.0), const(0.0, 2.0))


def multi_jump(times, heights, T=1.0, n=21):
    grid = np.union1d(np.linspace(0.0, T, n), times)
    vals = np.zeros(grid.size)
    pre, post = [], []
    for t, h in zip(times, heights):
        pre.append(vals[grid == t][0])
        vals = vals + h * (grid >= t)
        post.append(vals[grid == t][0])
    return CadlagPath(grid, vals, times, np.array(pre)[:, None], np.array(post)[:, None])


jump_lists = st.lists(st.floats(0.05, 0.95), min_size=0, max_size=3, unique=True).map(sorted)
height_lists = st.lists(st.floats(-2.0, 2.0).filter(lambda h: abs(h) > 0.05), min_size=3, max_size=3)


@settings(max_examples=60, deadline=None)
@given(jump_lists, height_lists, jump_lists, height_lists)
def test_upper_bound_symmetric(tp, hp, tq, hq):
    p, q = multi_jump(tp, hp[: len(tp)]), multi_jump(tq, hq[: len(tq)])
    assert mt.skorokhod_upper_value(p, q) == pytest.approx(mt.skorokhod_upper_value(q, p), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(jump_lists, height_lists, jump_lists, height_lists)
def test_upper_bound_never_exceeds_identity(tp, hp, tq, hq):
    p, q = multi_jump(tp, hp[: len(tp)]), multi_jump(tq, hq[: len(tq)])
    rep = mt.skorokhod_distance_upper(p, q)
    assert rep.skorokhod_upper <= rep.uniform


@settings(max_examples=60, deadline=None)
@given(jump_lists, height_lists, st.floats(-1e-3, 1e-3))
def test_zero_iff_equal_on_merged_grid(tp, hp, bump):
    p = multi_jump(tp, hp[: len(tp)])
    assert mt.skorokhod_upper_value(p, p) == 0.0
    vals = p.values.copy()
    vals[len(vals) // 2] += bump
    post = vals[np.searchsorted(p.times, p.jump_times)]
    q = CadlagPath(p.times, vals, p.jump_times, p.jump_pre, post)
    equal = np.array_equal(p(p.times), q(p.times)) and np.array_equal(p.left_limit(p.times), q.left_limit(p.times))
    assert (mt.skorokhod_upper_value(p, q) == 0.0) == equal
