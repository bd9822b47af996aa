"""Right-continuous piecewise-linear paths with an explicit jump list."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class CadlagPath:
    """Càdlàg path on a grid.

    ``values[i]`` is the value at ``times[i]`` (the right limit).  Between
    grid nodes the path is linear, running from ``values[i]`` to the left
    limit at ``times[i+1]``, which equals ``jump_pre[j]`` when jump ``j``
    sits at that node.
    """

    times: np.ndarray
    values: np.ndarray
    jump_times: np.ndarray = None
    jump_pre: np.ndarray = None
    jump_post: np.ndarray = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if t.size < 1 or v.shape[0] != t.size:
            raise ValueError("need one value row per grid time and at least one grid time")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("grid times must be strictly increasing")
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(t)):
            raise ValueError("path values must be finite")
        m = v.shape[1]
        jt = np.zeros(0) if self.jump_times is None else np.asarray(self.jump_times, dtype=float).ravel()
        pre = np.zeros((0, m)) if self.jump_pre is None else np.asarray(self.jump_pre, dtype=float).reshape(-1, m)
        post = np.zeros((0, m)) if self.jump_post is None else np.asarray(self.jump_post, dtype=float).reshape(-1, m)
        if not (jt.size == pre.shape[0] == post.shape[0]):
            raise ValueError("jump lists have inconsistent lengths")
        idx = np.searchsorted(t, jt)
        if jt.size and (np.any(idx >= t.size) or np.any(t[np.minimum(idx, t.size - 1)] != jt)):
            raise ValueError("jump times must be grid nodes")
        if jt.size and np.any(np.diff(jt) <= 0.0):
            raise ValueError("jump times must be strictly increasing")
        if jt.size and not np.array_equal(v[idx], post):
            raise ValueError("jump post-values disagree with the grid values")
        if jt.size and np.any(idx == 0):
            raise ValueError("a jump at the initial time is not representable")
        for name, arr in (("times", t), ("values", v), ("jump_times", jt), ("jump_pre", pre), ("jump_post", post)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        left = v.copy()
        left[idx] = pre
        left.setflags(write=False)
        object.__setattr__(self, "_left", left)
        object.__setattr__(self, "_jump_idx", idx)

    @property
    def m(self):
        return self.values.shape[1]

    @property
    def t0(self):
        return float(self.times[0])

    @property
    def T(self):
        return float(self.times[-1])

    @property
    def n_jumps(self):
        return self.jump_times.size

    @property
    def left_values(self):
        """Left limits at the grid nodes (equal to ``values`` off jumps)."""
        return self._left

    @property
    def terminal(self):
        return self.values[-1].copy()

    def _locate(self, t, right):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0] - 1e-12) or np.any(t > self.times[-1] + 1e-12):
            raise ValueError("evaluation time outside the path horizon")
        side = "right" if right else "left"
        i = np.clip(np.searchsorted(self.times, t, side=side) - 1, 0, max(self.times.size - 2, 0))
        return t, i

    def __call__(self, t):
        """Right-continuous evaluation."""
        if self.times.size == 1:
            return np.broadcast_to(self.values[0], np.shape(t) + (self.m,)).copy()
        t, i = self._locate(t, right=True)
        at_end = t >= self.times[-1]
        return self._interp(t, i, at_end, self.values[-1])

    def left_limit(self, t):
        if self.times.size == 1:
            return np.broadcast_to(self.values[0], np.shape(t) + (self.m,)).copy()
        t, i = self._locate(t, right=False)
        at_start = t <= self.times[0]
        return self._interp(t, i, at_start, self.values[0])

    def _interp(self, t, i, pin, pin_value):
        t0, t1 = self.times[i], self.times[i + 1]
        w = np.clip((t - t0) / (t1 - t0), 0.0, 1.0)[..., None]
        out = self.values[i] + w * (self._left[i + 1] - self.values[i])
        return np.where(np.asarray(pin)[..., None], pin_value, out)

    def sup_norm(self):
        return float(max(np.max(np.linalg.norm(self.values, axis=1)), np.max(np.linalg.norm(self._left, axis=1))))

    def csv_rows(self):
        """Rows ``(t, x_1..x_m, is_jump)``; a jump node emits its left limit first."""
        rows = []
        jumps = set(self._jump_idx.tolist())
        for i, t in enumerate(self.times):
            if i in jumps:
                rows.append((t, *self._left[i], 0))
                rows.append((t, *self.values[i], 1))
            else:
                rows.append((t, *self.values[i], 0))
        return rows

    def to_csv(self, dest=None):
        """Write the path as CSV (LF line endings, ``.17g`` floats); returns the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", *[f"x_{k + 1}" for k in range(self.m)], "is_jump"])
        for row in self.csv_rows():
            writer.writerow([format(v, ".17g") for v in row[:-1]] + [str(row[-1])])
        text = buf.getvalue()
        if dest is not None:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, src):
        if isinstance(src, str) and "\n" in src:
            lines = src.splitlines()
        else:
            with open(src, newline="") as fh:
                lines = fh.read().splitlines()
        reader = csv.reader(lines)
        header = next(reader)
        m = len(header) - 2
        times, values, jt, pre, post = [], [], [], [], []
        pending = None
        for row in reader:
            t = float(row[0])
            x = [float(v) for v in row[1:1 + m]]
            flag = int(row[-1])
            if flag:
                if pending is None or pending[0] != t:
                    raise ValueError(f"jump row at t={t} without its left-limit row")
                jt.append(t)
                pre.append(pending[1])
                post.append(x)
                values[-1] = x
                pending = None
                continue
            times.append(t)
            values.append(x)
            pending = (t, x)
        return cls(np.array(times), np.array(values).reshape(-1, m), np.array(jt),
                   np.array(pre).reshape(-1, m), np.array(post).reshape(-1, m))

    def shifted(self, offset):
        """The same path plus a constant vector."""
        off = np.asarray(offset, dtype=float)
        return CadlagPath(self.times, self.values + off, self.jump_times, self.jump_pre + off, self.jump_post + off)
