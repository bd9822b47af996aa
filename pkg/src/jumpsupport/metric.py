"""Distances between càdlàg paths.

:func:`skorokhod_distance_upper` bounds the J1 distance

    d(p, q) = inf_lambda ( sup_{s != t} |log((lambda_t - lambda_s)/(t - s))|
                           + sup_t |p(lambda_t) - q(t)| )

from above by evaluating a finite family of piecewise-linear time changes
that send jump times of ``q`` onto jump times of ``p``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .skeleton import TimeChange, time_change_lambda

EXHAUSTIVE_MAX = 8
_HORIZON_TOL = 1e-12


@dataclass(frozen=True)
class PathDistanceReport:
    uniform: float
    skorokhod_upper: float
    anchors: tuple  # ((t_j, s_j), ...) of the witnessing time change
    slope_term: float
    sup_term: float

    @property
    def identity_witness(self):
        return len(self.anchors) == 0


def _check_pair(p, q):
    if p.m != q.m:
        raise ValueError(f"dimension mismatch: {p.m} vs {q.m}")
    if abs(p.t0 - q.t0) > _HORIZON_TOL or abs(p.T - q.T) > _HORIZON_TOL:
        raise ValueError(f"horizon mismatch: [{p.t0}, {p.T}] vs [{q.t0}, {q.T}]")


def _max_row_norm(diff):
    """``max_i |diff_i|`` without underflow for tiny differences."""
    scale = np.max(np.abs(diff))
    if scale == 0.0 or not np.isfinite(scale):
        return float(scale)
    return float(scale * np.max(np.linalg.norm(diff / scale, axis=-1)))


def uniform_distance(p, q):
    """``sup_t |p(t) - q(t)|``, checking right values and left limits on the merged grid."""
    _check_pair(p, q)
    grid = np.union1d(p.times, q.times)
    right = _max_row_norm(p(grid) - q(grid))
    left = _max_row_norm(p.left_limit(grid) - q.left_limit(grid))
    return float(max(right, left))


def time_changed_distance(p, q, lam):
    """``sup_t |p(lambda(t)) - q(t)|`` for a piecewise-linear time change ``lam``."""
    _check_pair(p, q)
    if lam.is_identity:
        return uniform_distance(p, q)
    grid = np.union1d(np.union1d(q.times, lam.inverse(p.times)), lam.knots_t)
    grid = grid[(grid >= q.t0) & (grid <= q.T)]
    s = lam(grid)
    # anchors map exactly so matched jumps line up on both sides
    for kt, ks in zip(lam.knots_t, lam.knots_s):
        s[grid == kt] = ks
    s = np.clip(s, p.t0, p.T)
    right = _max_row_norm(p(s) - q(grid))
    left = _max_row_norm(p.left_limit(s) - q.left_limit(grid))
    return float(max(right, left))


def composite_distance(p, q, lam):
    """``sup |log slope(lam)| + sup_t |p(lam(t)) - q(t)|`` for a given time change."""
    return (0.0 if lam.is_identity else lam.max_log_slope) + time_changed_distance(p, q, lam)


def _matchings(tp, tq, exhaustive):
    """Order-preserving partial matchings as lists of (q index, p index)."""
    n, k = len(tp), len(tq)
    if exhaustive:
        for r in range(1, min(n, k) + 1):
            for qi in itertools.combinations(range(k), r):
                for pi in itertools.combinations(range(n), r):
                    yield list(zip(qi, pi))
        return
    # greedy: nearest p-jump for each q-jump, keeping order
    pairs, last = [], -1
    for j, t in enumerate(tq):
        i = int(np.argmin(np.abs(tp - t)))
        if i > last:
            pairs.append((j, i))
            last = i
    if pairs:
        yield pairs


def skorokhod_distance_upper(p, q, exhaustive_max=EXHAUSTIVE_MAX):
    """Smallest functional value over identity plus anchor-matching time changes."""
    _check_pair(p, q)
    uni = uniform_distance(p, q)
    best = (uni, (), 0.0, uni)
    tp, tq = p.jump_times, q.jump_times
    exhaustive = len(tp) <= exhaustive_max and len(tq) <= exhaustive_max
    for match in _matchings(tp, tq, exhaustive):
        t_anchor = np.array([tq[j] for j, _ in match])
        s_anchor = np.array([tp[i] for _, i in match])
        if np.array_equal(t_anchor, s_anchor):
            continue
        lam = time_change_lambda(t_anchor, s_anchor, q.T, q.t0)
        slope = lam.max_log_slope
        if slope >= best[0]:
            continue
        sup = time_changed_distance(p, q, lam)
        if slope + sup < best[0]:
            best = (slope + sup, tuple(lam.anchors), slope, sup)
    value, anchors, slope, sup = best
    return PathDistanceReport(uni, float(value), anchors, float(slope), float(sup))


def skorokhod_upper_value(p, q, exhaustive_max=EXHAUSTIVE_MAX):
    return skorokhod_distance_upper(p, q, exhaustive_max).skorokhod_upper


__all__ = [
    "PathDistanceReport",
    "TimeChange",
    "uniform_distance",
    "time_changed_distance",
    "composite_distance",
    "skorokhod_distance_upper",
    "skorokhod_upper_value",
]
