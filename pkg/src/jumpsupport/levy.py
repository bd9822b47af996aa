"""Parametric Lévy measures.

Every variant answers the same closed-form queries over radial shells
``lo <= |u| < hi``: mass, first/second/power moments, the sign moments used
by the tilt solver, and exact inverse-CDF sampling from the normalised
restriction.  :func:`integrate` is a separate adaptive-quadrature route to
the same numbers, used for verification and by the tests as an oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate as _spi
from scipy import linalg, optimize
from scipy.special import gamma as _gamma

from .errors import DivergenceError, NotAnalyzableError, QuadratureError

INF = math.inf
QUAD_RTOL = 1e-8
_QUAD_LIMIT = 400

__all__ = [
    "LevyModel",
    "CylindricalStable",
    "RadialStable",
    "CurveImage",
    "OneSidedStable1D",
    "Discrete",
    "IntegrabilitySubspace",
    "SmallJumpConfig",
    "SmallJumpSampler",
    "integrability_subspace",
    "project_onto_L",
    "beta_moment",
    "upsilon_eta",
    "tail_mass",
    "sample_large_jumps",
    "sample_small_jump_increment",
    "integrate",
    "model_from_dict",
]


# --------------------------------------------------------------------------
# power-law helpers

def _pint(p, a, b):
    """Closed form of ``int_a^b z**p dz`` for ``0 <= a`` and ``b <= inf``."""
    if not b > a:
        return 0.0
    q = p + 1.0
    if q == 0.0:
        if a == 0.0 or math.isinf(b):
            raise DivergenceError(f"int z^{p:g} dz diverges on [{a:g}, {b:g}]")
        return math.log(b / a)
    if q > 0.0:
        if math.isinf(b):
            raise DivergenceError(f"int z^{p:g} dz diverges at infinity")
        return (b**q - a**q) / q
    if a == 0.0:
        raise DivergenceError(f"int z^{p:g} dz diverges at the origin")
    top = 0.0 if math.isinf(b) else b**q
    return (a**q - top) / -q


def _lin(coef, p, a, b):
    # skip the (possibly divergent) integral when its coefficient vanishes
    return 0.0 if coef == 0.0 else coef * _pint(p, a, b)


def _sample_power(p, a, b, n, rng):
    """Inverse-CDF draws from the density proportional to ``z**p`` on ``[a, b)``."""
    u = rng.random(n)
    q = p + 1.0
    if q == 0.0:
        return a * (b / a) ** u
    lo = a**q if a > 0.0 else 0.0
    hi = 0.0 if math.isinf(b) else b**q
    return (lo + u * (hi - lo)) ** (1.0 / q)


def _quad_power(h, p, a, b, log_points=()):
    """Adaptive quadrature of ``int_a^b h(z) z**p dz`` in the variable ``s = log z``.

    ``h`` may be vector valued.  Failures raise :class:`QuadratureError`.
    """
    if not b > a:
        return 0.0
    s0 = -INF if a == 0.0 else math.log(a)
    s1 = INF if math.isinf(b) else math.log(b)

    def g(s):
        z = math.exp(s)
        return np.asarray(h(z), dtype=float) * math.exp(s * (p + 1.0))

    pts = sorted(x for x in log_points if s0 < x < s1)
    # quad_vec only accepts break points on finite intervals
    if pts and (math.isinf(s0) or math.isinf(s1)):
        edges = [s0, *pts, s1]
        return sum(_quad_power_piece(g, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))
    return _quad_power_piece(g, s0, s1, pts)


def _quad_power_piece(g, s0, s1, pts=()):
    res, err, info = _spi.quad_vec(
        g, s0, s1, epsrel=1e-11, epsabs=1e-300, limit=_QUAD_LIMIT,
        points=pts or None, full_output=True,
    )
    if not info.success:
        raise QuadratureError(f"adaptive quadrature failed on [{s0:g}, {s1:g}]: status {info.status}")
    # tolerance relative to the largest component: cancelling components of a
    # vector integral have no meaningful relative accuracy of their own
    if np.max(np.abs(err)) > QUAD_RTOL * max(float(np.max(np.abs(res))), 1e-300) + 1e-14:
        raise QuadratureError(f"quadrature error estimate {np.max(err):.3g} above tolerance")
    return res


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero direction")
    return v / n


# --------------------------------------------------------------------------
# integrability subspace

@dataclass(frozen=True, eq=False)
class IntegrabilitySubspace:
    """Orthonormal bases of ``L`` and of its complement ``L^perp`` in ``R^d``."""

    basis: np.ndarray  # (k, d)
    perp: np.ndarray  # (d - k, d)
    dim: int

    @classmethod
    def from_vectors(cls, vectors, dim):
        vecs = np.asarray(vectors, dtype=float).reshape(-1, dim)
        if vecs.shape[0] == 0:
            basis = np.zeros((0, dim))
        elif _is_coordinate_set(vecs):
            basis = np.abs(vecs)
        else:
            u, s, _ = np.linalg.svd(vecs.T, full_matrices=False)
            basis = u[:, s > 1e-12 * s.max()].T
        if basis.shape[0] and _is_coordinate_set(basis):
            idx = set(np.argmax(np.abs(basis), axis=1).tolist())
            perp = np.eye(dim)[[i for i in range(dim) if i not in idx]]
        elif basis.shape[0] == 0:
            perp = np.eye(dim)
        else:
            perp = linalg.null_space(basis).T
        basis.setflags(write=False)
        perp.setflags(write=False)
        return cls(basis, perp.reshape(-1, dim), dim)

    @property
    def dim_L(self):
        return self.basis.shape[0]

    @property
    def dim_perp(self):
        return self.perp.shape[0]

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.dim:
            raise ValueError(f"vector of dimension {u.shape[-1]} for a subspace of R^{self.dim}")
        return u

    def project(self, u):
        u = self._check(u)
        return (u @ self.basis.T) @ self.basis

    def project_perp(self, u):
        u = self._check(u)
        return (u @ self.perp.T) @ self.perp

    def to_dict(self):
        return {"dim": self.dim, "basis": self.basis.tolist(), "perp": self.perp.tolist()}


def _is_coordinate_set(vecs):
    a = np.abs(vecs)
    return bool(np.all((a == 0.0) | (a == 1.0)) and np.all(a.sum(axis=1) == 1.0))


# --------------------------------------------------------------------------
# model variants

_VARIANTS = {}


def _register(cls):
    _VARIANTS[cls.variant] = cls
    return cls


class LevyModel:
    """Common interface of the parametric Lévy measures.

    Shell queries integrate over ``lo <= |u| < hi`` (``<= hi`` when
    ``upper_closed``; this only matters for atoms).
    """

    variant = "abstract"
    finite = False
    symmetric = False

    @property
    def dim(self):
        raise NotImplementedError

    def integrability_basis(self):
        raise NotAnalyzableError(f"no closed-form integrability analysis for {type(self).__name__}")

    def stability_indices(self):
        return ()

    def mass(self, lo, hi=INF, upper_closed=False):
        raise NotImplementedError

    def first_moment(self, lo, hi, upper_closed=False):
        raise NotImplementedError

    def power_moment(self, beta, lo, hi, upper_closed=False):
        raise NotImplementedError

    def second_moment(self, lo, hi, upper_closed=False):
        raise NotImplementedError

    def sign_moment(self, ell, lo, hi):
        """``int u sign(ell . u) mu(du)`` over the open shell ``lo < |u| < hi``."""
        raise NotImplementedError

    def sign_mass(self, ell, lo, hi):
        """``int sign(ell . u) mu(du)`` over ``lo < |u| < hi``."""
        raise NotImplementedError

    def abs_moment(self, ell, lo, hi):
        """``int |ell . u| mu(du)`` over ``lo < |u| < hi``."""
        raise NotImplementedError

    def sample(self, lo, hi, n, rng):
        raise NotImplementedError

    def _integrate(self, fn, lo, hi, normals):
        raise NotAnalyzableError(f"no quadrature route for {type(self).__name__}")

    # support description used by the admissibility search
    support_kind = "curves"

    def support_curves(self):
        return []

    def support_directions(self, radius):
        """Unit directions of support points with ``|u| <= radius``; None means all."""
        raise NotAnalyzableError(f"no support description for {type(self).__name__}")

    def to_dict(self):
        raise NotImplementedError


@_register
@dataclass(frozen=True)
class RadialStable(LevyModel):
    """Isotropic density ``scale * |u|**(-dim-alpha)`` on ``R^dim``."""

    alpha: float
    scale: float = 1.0
    d: int = 1

    variant = "radial_stable"
    symmetric = True
    support_kind = "full"

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")
        if int(self.d) < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def dim(self):
        return int(self.d)

    @property
    def _sphere(self):
        d = self.dim
        return 2.0 * math.pi ** (d / 2.0) / _gamma(d / 2.0)

    @property
    def _abs_cos(self):
        # int_{S^{d-1}} |theta_1| dsigma
        d = self.dim
        return 2.0 * math.pi ** ((d - 1) / 2.0) / _gamma((d + 1) / 2.0)

    def stability_indices(self):
        return (self.alpha,)

    def integrability_basis(self):
        return np.eye(self.dim) if self.alpha < 1.0 else np.zeros((0, self.dim))

    def mass(self, lo, hi=INF, upper_closed=False):
        return self.scale * self._sphere * _pint(-1.0 - self.alpha, lo, hi)

    def first_moment(self, lo, hi, upper_closed=False):
        return np.zeros(self.dim)

    def power_moment(self, beta, lo, hi, upper_closed=False):
        try:
            return self.scale * self._sphere * _pint(beta - 1.0 - self.alpha, lo, hi)
        except DivergenceError as exc:
            raise DivergenceError(f"{exc}; every direction of the radial model", "radial") from None

    def second_moment(self, lo, hi, upper_closed=False):
        c = self.scale * self._sphere / self.dim * _pint(1.0 - self.alpha, lo, hi)
        return c * np.eye(self.dim)

    def sign_moment(self, ell, lo, hi):
        return self.scale * self._abs_cos * _pint(-self.alpha, lo, hi) * _unit(ell)

    def sign_mass(self, ell, lo, hi):
        return 0.0

    def abs_moment(self, ell, lo, hi):
        n = float(np.linalg.norm(ell))
        return _lin(self.scale * self._abs_cos * n, -self.alpha, lo, hi)

    def sample(self, lo, hi, n, rng):
        r = _sample_power(-1.0 - self.alpha, lo, hi, n, rng)
        g = rng.standard_normal((n, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return g * r[:, None]

    def _integrate(self, fn, lo, hi, normals):
        w = self.scale
        p = -1.0 - self.alpha
        if self.dim == 1:
            return _quad_power(lambda z: np.asarray(fn(np.array([z]))) + np.asarray(fn(np.array([-z]))), p, lo, hi) * w
        if self.dim == 2:
            cuts = []
            for ell in normals:
                base = math.atan2(ell[1], ell[0])
                for th in (base + math.pi / 2, base - math.pi / 2):
                    cuts.append(th % (2 * math.pi))
            cuts = sorted(c for c in set(cuts) if 0.0 < c < 2 * math.pi)

            def ring(th):
                e = np.array([math.cos(th), math.sin(th)])
                return _quad_power(lambda z: fn(z * e), p, lo, hi)

            res, err, info = _spi.quad_vec(
                ring, 0.0, 2 * math.pi, epsrel=1e-10, epsabs=1e-300,
                points=cuts or None, limit=_QUAD_LIMIT, full_output=True,
            )
            if not info.success:
                raise QuadratureError("angular quadrature failed")
            return res * w
        raise NotAnalyzableError("numeric quadrature for the radial model is implemented for d <= 2")

    def support_directions(self, radius):
        return None

    def to_dict(self):
        return {"variant": self.variant, "alpha": self.alpha, "scale": self.scale, "dim": self.dim}


@_register
@dataclass(frozen=True)
class CylindricalStable(LevyModel):
    """Independent symmetric stable components: mass on the coordinate axes."""

    alpha: tuple
    scale: tuple = None

    variant = "cylindrical_stable"
    symmetric = True

    def __post_init__(self):
        a = tuple(float(x) for x in np.atleast_1d(self.alpha))
        s = (1.0,) * len(a) if self.scale is None else tuple(float(x) for x in np.atleast_1d(self.scale))
        if len(a) < 1 or len(s) != len(a):
            raise ValueError("alpha and scale must be non-empty and of equal length")
        if not all(0.0 < x < 2.0 for x in a):
            raise ValueError(f"every alpha must lie in (0, 2), got {a}")
        if not all(x > 0.0 for x in s):
            raise ValueError("scales must be positive")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "scale", s)

    @property
    def dim(self):
        return len(self.alpha)

    def stability_indices(self):
        return self.alpha

    def integrability_basis(self):
        return np.eye(self.dim)[[k for k, a in enumerate(self.alpha) if a < 1.0]]

    def _axis_mass(self, lo, hi):
        return np.array([2.0 * c * _pint(-1.0 - a, lo, hi) for a, c in zip(self.alpha, self.scale)])

    def mass(self, lo, hi=INF, upper_closed=False):
        return float(self._axis_mass(lo, hi).sum())

    def first_moment(self, lo, hi, upper_closed=False):
        return np.zeros(self.dim)

    def power_moment(self, beta, lo, hi, upper_closed=False):
        total = 0.0
        for k, (a, c) in enumerate(zip(self.alpha, self.scale)):
            try:
                total += 2.0 * c * _pint(beta - 1.0 - a, lo, hi)
            except DivergenceError as exc:
                raise DivergenceError(f"{exc}; offending direction e{k + 1} (alpha={a})", k) from None
        return total

    def second_moment(self, lo, hi, upper_closed=False):
        return np.diag([2.0 * c * _pint(1.0 - a, lo, hi) for a, c in zip(self.alpha, self.scale)])

    def sign_moment(self, ell, lo, hi):
        ell = np.asarray(ell, dtype=float)
        return np.array([
            _lin(2.0 * c * np.sign(ell[k]), -a, lo, hi)
            for k, (a, c) in enumerate(zip(self.alpha, self.scale))
        ])

    def sign_mass(self, ell, lo, hi):
        return 0.0

    def abs_moment(self, ell, lo, hi):
        ell = np.asarray(ell, dtype=float)
        return sum(_lin(2.0 * c * abs(ell[k]), -a, lo, hi) for k, (a, c) in enumerate(zip(self.alpha, self.scale)))

    def sample(self, lo, hi, n, rng):
        w = self._axis_mass(lo, hi)
        axes = rng.choice(self.dim, size=n, p=w / w.sum())
        out = np.zeros((n, self.dim))
        for k, a in enumerate(self.alpha):
            idx = np.flatnonzero(axes == k)
            r = _sample_power(-1.0 - a, lo, hi, idx.size, rng)
            out[idx, k] = r
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return out * sign[:, None]

    def _integrate(self, fn, lo, hi, normals):
        total = 0.0
        for k, (a, c) in enumerate(zip(self.alpha, self.scale)):
            e = np.eye(self.dim)[k]
            total = total + c * _quad_power(lambda z: np.asarray(fn(z * e)) + np.asarray(fn(-z * e)), -1.0 - a, lo, hi)
        return total

    def support_curves(self):
        eye = np.eye(self.dim)
        return [(-INF, INF, (lambda z, e=eye[k]: z * e)) for k in range(self.dim)]

    def support_directions(self, radius):
        eye = np.eye(self.dim)
        return np.vstack([eye, -eye])

    def to_dict(self):
        return {"variant": self.variant, "alpha": list(self.alpha), "scale": list(self.scale)}


@_register
@dataclass(frozen=True)
class CurveImage(LevyModel):
    """Image of ``scale |z|^(-1-alpha) dz`` under ``z -> (z, |z|^gamma sgn z)`` in ``R^2``."""

    alpha: float
    gamma: float
    scale: float = 1.0

    variant = "curve_image"
    symmetric = True

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.gamma > 1.0:
            raise ValueError("gamma must exceed 1")
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")

    @property
    def dim(self):
        return 2

    def stability_indices(self):
        return (self.alpha,)

    def psi(self, z):
        z = np.asarray(z, dtype=float)
        return np.stack([z, np.abs(z) ** self.gamma * np.sign(z)], axis=-1)

    def z_of(self, rho):
        """Curve parameter ``z > 0`` with ``|psi(z)| = rho``."""
        if rho == 0.0 or math.isinf(rho):
            return rho
        g2 = 2.0 * self.gamma
        return optimize.brentq(lambda z: z * z + z**g2 - rho * rho, 0.0, rho, xtol=1e-16 * rho, rtol=1e-15)

    def integrability_basis(self):
        if self.alpha < 1.0:
            return np.eye(2)
        if self.gamma > self.alpha:
            return np.array([[0.0, 1.0]])
        return np.zeros((0, 2))

    def _zrange(self, lo, hi):
        return self.z_of(lo), self.z_of(hi)

    def mass(self, lo, hi=INF, upper_closed=False):
        a, b = self._zrange(lo, hi)
        return 2.0 * self.scale * _pint(-1.0 - self.alpha, a, b)

    def first_moment(self, lo, hi, upper_closed=False):
        return np.zeros(2)

    def power_moment(self, beta, lo, hi, upper_closed=False):
        a, b = self._zrange(lo, hi)
        if not b > a:
            return 0.0
        if a == 0.0 and beta <= self.alpha:
            raise DivergenceError(
                f"int |u|^{beta:g} mu(du) diverges near 0; offending direction e1 (alpha={self.alpha})", 0)
        g2 = 2.0 * self.gamma - 2.0
        p = beta - 1.0 - self.alpha

        def h(z):
            return (1.0 + z**g2) ** (beta / 2.0)

        if a == 0.0 and not math.isinf(b):
            val, err, *rest = _spi.quad(h, 0.0, b, weight="alg", wvar=(p, 0.0),
                                        epsrel=1e-11, epsabs=0.0, limit=_QUAD_LIMIT, full_output=1)
            if len(rest) > 1:
                raise QuadratureError(f"power moment quadrature failed: {rest[1]}")
        else:
            val = float(_quad_power(h, p, a, b))
        return 2.0 * self.scale * val

    def second_moment(self, lo, hi, upper_closed=False):
        a, b = self._zrange(lo, hi)
        g, al = self.gamma, self.alpha
        m11 = _pint(1.0 - al, a, b)
        m12 = _pint(g - al, a, b)
        m22 = _pint(2.0 * g - 1.0 - al, a, b)
        return 2.0 * self.scale * np.array([[m11, m12], [m12, m22]])

    def _sign_pieces(self, ell, a, b):
        l1, l2 = float(ell[0]), float(ell[1])
        cuts = [a]
        if l2 != 0.0 and -l1 / l2 > 0.0:
            zs = (-l1 / l2) ** (1.0 / (self.gamma - 1.0))
            if a < zs < b:
                cuts.append(zs)
        cuts.append(b)
        out = []
        for za, zb in zip(cuts[:-1], cuts[1:]):
            if math.isinf(zb):
                zm = 2.0 * za + 1.0
            elif za == 0.0:
                zm = zb / 2.0
            else:
                zm = math.sqrt(za * zb)
            out.append((za, zb, float(np.sign(l1 * zm + l2 * zm**self.gamma))))
        return out

    def sign_moment(self, ell, lo, hi):
        a, b = self._zrange(lo, hi)
        res = np.zeros(2)
        for za, zb, s in self._sign_pieces(ell, a, b):
            res += s * np.array([_lin(1.0, -self.alpha, za, zb), _lin(1.0, self.gamma - 1.0 - self.alpha, za, zb)])
        return 2.0 * self.scale * res

    def sign_mass(self, ell, lo, hi):
        return 0.0

    def abs_moment(self, ell, lo, hi):
        a, b = self._zrange(lo, hi)
        l1, l2 = float(ell[0]), float(ell[1])
        total = 0.0
        for za, zb, s in self._sign_pieces(ell, a, b):
            total += s * (_lin(l1, -self.alpha, za, zb) + _lin(l2, self.gamma - 1.0 - self.alpha, za, zb))
        return 2.0 * self.scale * total

    def sample(self, lo, hi, n, rng):
        a, b = self._zrange(lo, hi)
        z = _sample_power(-1.0 - self.alpha, a, b, n, rng)
        z *= np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return self.psi(z).reshape(n, 2)

    def _integrate(self, fn, lo, hi, normals):
        a, b = self._zrange(lo, hi)
        pts = []
        for ell in normals:
            for za, _, _ in self._sign_pieces(ell, a, b)[1:]:
                pts.append(math.log(za))

        def h(z):
            return np.asarray(fn(self.psi(z))) + np.asarray(fn(self.psi(-z)))

        return self.scale * _quad_power(h, -1.0 - self.alpha, a, b, pts)

    def support_curves(self):
        return [(-INF, INF, lambda z: self.psi(z))]

    def support_directions(self, radius):
        zmax = self.z_of(radius)
        z = zmax * np.logspace(-3, 0, 61)
        pts = self.psi(np.concatenate([z, -z]))
        return pts / np.linalg.norm(pts, axis=1, keepdims=True)

    def to_dict(self):
        return {"variant": self.variant, "alpha": self.alpha, "gamma": self.gamma, "scale": self.scale}


@_register
@dataclass(frozen=True)
class OneSidedStable1D(LevyModel):
    """Density ``scale * z**(-1-alpha)`` on ``(0, 1]``."""

    alpha: float
    scale: float = 1.0

    variant = "one_sided_stable_1d"

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")

    @property
    def dim(self):
        return 1

    def stability_indices(self):
        return (self.alpha,)

    def integrability_basis(self):
        return np.eye(1) if self.alpha < 1.0 else np.zeros((0, 1))

    def mass(self, lo, hi=INF, upper_closed=False):
        return self.scale * _pint(-1.0 - self.alpha, lo, min(hi, 1.0))

    def first_moment(self, lo, hi, upper_closed=False):
        return np.array([self.scale * _pint(-self.alpha, lo, min(hi, 1.0))])

    def power_moment(self, beta, lo, hi, upper_closed=False):
        try:
            return self.scale * _pint(beta - 1.0 - self.alpha, lo, min(hi, 1.0))
        except DivergenceError as exc:
            raise DivergenceError(f"{exc}; offending direction +e1 (alpha={self.alpha})", 0) from None

    def second_moment(self, lo, hi, upper_closed=False):
        return np.array([[self.scale * _pint(1.0 - self.alpha, lo, min(hi, 1.0))]])

    def sign_moment(self, ell, lo, hi):
        return np.array([_lin(self.scale * float(np.sign(ell[0])), -self.alpha, lo, min(hi, 1.0))])

    def sign_mass(self, ell, lo, hi):
        return float(np.sign(ell[0])) * self.mass(lo, hi)

    def abs_moment(self, ell, lo, hi):
        return _lin(self.scale * abs(float(ell[0])), -self.alpha, lo, min(hi, 1.0))

    def sample(self, lo, hi, n, rng):
        return _sample_power(-1.0 - self.alpha, lo, min(hi, 1.0), n, rng).reshape(n, 1)

    def _integrate(self, fn, lo, hi, normals):
        return self.scale * _quad_power(lambda z: fn(np.array([z])), -1.0 - self.alpha, lo, min(hi, 1.0))

    def support_curves(self):
        return [(0.0, 1.0, lambda z: np.array([z]))]

    def support_directions(self, radius):
        return np.array([[1.0]])

    def to_dict(self):
        return {"variant": self.variant, "alpha": self.alpha, "scale": self.scale}


@_register
@dataclass(frozen=True)
class Discrete(LevyModel):
    """Finite measure ``sum_j w_j delta_{u_j}``."""

    atoms: tuple
    weights: tuple

    variant = "discrete"
    finite = True
    support_kind = "atoms"

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        if a.ndim != 2:
            raise ValueError("atoms must be a list of vectors")
        w = np.asarray(self.weights, dtype=float).ravel()
        if a.shape[0] == 0 or w.shape[0] != a.shape[0]:
            raise ValueError("need one positive weight per atom and at least one atom")
        if np.any(w <= 0.0):
            raise ValueError("weights must be positive")
        if np.any(np.linalg.norm(a, axis=1) == 0.0):
            raise ValueError("an atom at the origin is not allowed")
        object.__setattr__(self, "atoms", tuple(map(tuple, a.tolist())))
        object.__setattr__(self, "weights", tuple(w.tolist()))

    @property
    def dim(self):
        return len(self.atoms[0])

    @property
    def atom_array(self):
        return np.asarray(self.atoms, dtype=float)

    @property
    def weight_array(self):
        return np.asarray(self.weights, dtype=float)

    def _mask(self, lo, hi, upper_closed=False, open_lower=False):
        r = np.linalg.norm(self.atom_array, axis=1)
        lower = r > lo if open_lower else r >= lo
        upper = r <= hi if upper_closed else r < hi
        return lower & upper

    @property
    def symmetric(self):
        a = self.atom_array
        w = self.weight_array
        for u, x in zip(a, w):
            hit = np.all(np.isclose(a, -u, rtol=0, atol=1e-14), axis=1)
            if not np.isclose(w[hit].sum(), x, rtol=1e-12):
                return False
        return True

    def integrability_basis(self):
        return np.eye(self.dim)

    def mass(self, lo, hi=INF, upper_closed=False):
        return float(self.weight_array[self._mask(lo, hi, upper_closed)].sum())

    def first_moment(self, lo, hi, upper_closed=False):
        m = self._mask(lo, hi, upper_closed)
        return self.weight_array[m] @ self.atom_array[m]

    def power_moment(self, beta, lo, hi, upper_closed=False):
        m = self._mask(lo, hi, upper_closed)
        return float(self.weight_array[m] @ np.linalg.norm(self.atom_array[m], axis=1) ** beta)

    def second_moment(self, lo, hi, upper_closed=False):
        m = self._mask(lo, hi, upper_closed)
        a = self.atom_array[m]
        return (a * self.weight_array[m][:, None]).T @ a

    def sign_moment(self, ell, lo, hi):
        m = self._mask(lo, hi, open_lower=True)
        a = self.atom_array[m]
        return (self.weight_array[m] * np.sign(a @ ell)) @ a

    def sign_mass(self, ell, lo, hi):
        m = self._mask(lo, hi, open_lower=True)
        return float(self.weight_array[m] @ np.sign(self.atom_array[m] @ ell))

    def abs_moment(self, ell, lo, hi):
        m = self._mask(lo, hi, open_lower=True)
        return float(self.weight_array[m] @ np.abs(self.atom_array[m] @ ell))

    def sample(self, lo, hi, n, rng):
        m = self._mask(lo, hi)
        w = self.weight_array[m]
        if n == 0 or w.size == 0:
            return np.zeros((0, self.dim))
        idx = rng.choice(w.size, size=n, p=w / w.sum())
        return self.atom_array[m][idx]

    def _integrate(self, fn, lo, hi, normals):
        m = self._mask(lo, hi)
        total = 0.0
        for u, w in zip(self.atom_array[m], self.weight_array[m]):
            total = total + w * np.asarray(fn(u), dtype=float)
        return total

    def support_directions(self, radius):
        a = self.atom_array
        return a / np.linalg.norm(a, axis=1, keepdims=True)

    def to_dict(self):
        return {"variant": self.variant, "atoms": [list(a) for a in self.atoms], "weights": list(self.weights)}


def model_from_dict(spec):
    """Build a model from its JSON-compatible description."""
    spec = dict(spec)
    variant = spec.pop("variant", None)
    if variant not in _VARIANTS:
        raise ValueError(f"unknown Lévy model variant {variant!r}; known: {sorted(_VARIANTS)}")
    if variant == "radial_stable":
        return RadialStable(alpha=float(spec["alpha"]), scale=float(spec.get("scale", 1.0)),
                            d=int(spec.get("dim", 1)))
    if variant == "cylindrical_stable":
        return CylindricalStable(alpha=spec["alpha"], scale=spec.get("scale"))
    if variant == "curve_image":
        return CurveImage(alpha=float(spec["alpha"]), gamma=float(spec["gamma"]),
                          scale=float(spec.get("scale", 1.0)))
    if variant == "one_sided_stable_1d":
        return OneSidedStable1D(alpha=float(spec["alpha"]), scale=float(spec.get("scale", 1.0)))
    return Discrete(atoms=spec["atoms"], weights=spec["weights"])


# --------------------------------------------------------------------------
# operations

@lru_cache(maxsize=256)
def integrability_subspace(model):
    """Directions ``ell`` with ``int_{|u|<=1} |u . ell| mu(du) < inf``, decided analytically."""
    basis = model.integrability_basis()
    return IntegrabilitySubspace.from_vectors(basis, model.dim)


def project_onto_L(u, L):
    return L.project(u)


def beta_moment(model, beta):
    """``int_{|u|<=1} |u|^beta mu(du)``; raises :class:`DivergenceError` when infinite."""
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    return model.power_moment(beta, 0.0, 1.0, upper_closed=True)


@lru_cache(maxsize=1024)
def upsilon_eta(model, eta):
    """Compensator shift ``int_{eta<=|u|<=1} (u - u_L) mu(du)``, a vector in ``L^perp``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    L = integrability_subspace(model)
    v = L.project_perp(model.first_moment(eta, 1.0, upper_closed=True))
    leak = np.linalg.norm(L.project(v))
    assert leak <= 1e-10 * max(np.linalg.norm(v), 1e-300), "shift vector leaks into L"
    v.setflags(write=False)
    return v


def tail_mass(model, eta):
    """``mu(|u| >= eta)``."""
    if not eta > 0.0:
        raise ValueError("eta must be positive")
    return model.mass(eta, INF)


def sample_large_jumps(model, eta, T, rng, t0=0.0):
    """Atoms of the Poisson measure with ``|u| >= eta`` on ``[t0, t0 + T]``.

    Returns ``(times, amplitudes)``: sorted times and an ``(J, d)`` array.
    """
    m = tail_mass(model, eta)
    if m == 0.0 or T <= 0.0:
        return np.zeros(0), np.zeros((0, model.dim))
    count = rng.poisson(T * m)
    times = np.sort(t0 + T * rng.random(count))
    return times, model.sample(eta, INF, count, rng)


@dataclass(frozen=True)
class SmallJumpConfig:
    """Simulation of the compensated small-jump integral.

    Atoms with ``zeta_in < |u| < eta`` are simulated exactly; the band below
    ``zeta_in`` is dropped or replaced by a centred Gaussian with matching
    covariance.  ``zeta_in`` is the larger of the radius at which the band's
    variance per unit time falls below ``tol_var`` and the radius at which
    the atom rate reaches ``max_rate``.
    """

    tol_var: float = 1e-10
    max_rate: float = 2000.0
    gaussian: bool = True


def _solve_radius(fn, target, lo, hi, increasing=True):
    # bisection on log-radius for a monotone shell quantity
    a, b = math.log(lo), math.log(hi)
    for _ in range(200):
        mid = 0.5 * (a + b)
        v = fn(math.exp(mid))
        if (v <= target) == increasing:
            a = mid
        else:
            b = mid
        if b - a < 1e-13:
            break
    return math.exp(a if increasing else b)


class SmallJumpSampler:
    """Increments of ``int_{|u|<eta} u Ntilde(du, dt)`` (plus its ``|u|^beta`` companion)."""

    def __init__(self, model, eta, config=None, inner=None, beta=None):
        self.model = model
        self.eta = float(eta)
        self.config = config or SmallJumpConfig()
        self.beta = beta
        d = model.dim
        if model.finite:
            zeta = 0.0
        else:
            cfg = self.config
            zeta_var = _solve_radius(lambda z: np.trace(model.second_moment(0.0, z)), cfg.tol_var, 1e-300, self.eta)
            if model.mass(zeta_var, self.eta) <= cfg.max_rate:
                zeta = zeta_var
            else:
                zeta = _solve_radius(lambda z: model.mass(z, self.eta), cfg.max_rate, zeta_var, self.eta,
                                     increasing=False)
            zeta = min(zeta, self.eta)
        if inner is not None:
            zeta = min(zeta, float(inner))
        self.zeta_in = zeta
        self.rate = model.mass(zeta, self.eta)
        self.mean = model.first_moment(zeta, self.eta)
        self.pow_mean = model.power_moment(beta, zeta, self.eta) if beta is not None else 0.0
        if zeta > 0.0 and self.config.gaussian:
            cov = model.second_moment(0.0, zeta)
            vals, vecs = np.linalg.eigh(cov)
            self.band_factor = vecs * np.sqrt(np.clip(vals, 0.0, None))
            self.band_cov = cov
        else:
            self.band_factor = None
            self.band_cov = np.zeros((d, d))

    def draw_atoms(self, t0, t1, rng):
        """Atoms ``(times, amplitudes)`` of the shell ``zeta_in < |u| < eta`` on ``[t0, t1)``."""
        count = rng.poisson(self.rate * (t1 - t0)) if self.rate > 0.0 else 0
        times = t0 + (t1 - t0) * rng.random(count)
        return times, self.model.sample(self.zeta_in, self.eta, count, rng)

    def bin_atoms(self, edges, times, amps, rng):
        """Compensated per-interval sums of the given atoms plus the Gaussian band.

        Returns ``(dZ, dR)`` with ``dZ`` of shape ``(n, d)`` and ``dR`` the
        compensated ``|u|^beta`` sums (zero when ``beta`` is None).
        """
        n = len(edges) - 1
        d = self.model.dim
        dt = np.diff(edges)
        idx = np.clip(np.searchsorted(edges, times, side="right") - 1, 0, n - 1)
        dZ = np.empty((n, d))
        for k in range(d):
            dZ[:, k] = np.bincount(idx, weights=amps[:, k], minlength=n)
        dZ -= dt[:, None] * self.mean[None, :]
        if self.beta is not None:
            dR = np.bincount(idx, weights=np.linalg.norm(amps, axis=1) ** self.beta, minlength=n)
            dR -= dt * self.pow_mean
        else:
            dR = np.zeros(n)
        if self.band_factor is not None:
            dZ += np.sqrt(dt)[:, None] * (rng.standard_normal((n, d)) @ self.band_factor.T)
        return dZ, dR

    def path_increments(self, edges, rng):
        times, amps = self.draw_atoms(edges[0], edges[-1], rng)
        return self.bin_atoms(edges, times, amps, rng)

    def increment(self, dt, rng):
        if dt <= 0.0:
            return np.zeros(self.model.dim)
        dZ, _ = self.path_increments(np.array([0.0, dt]), rng)
        return dZ[0]


def sample_small_jump_increment(model, eta, dt, rng, config=None):
    """One increment of the compensated small-jump integral over a step ``dt``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    if dt == 0.0:
        return np.zeros(model.dim)
    return SmallJumpSampler(model, eta, config).increment(dt, rng)


def integrate(model, fn, lo, hi, normals=()):
    """Adaptive-quadrature value of ``int_{lo<|u|<hi} fn(u) mu(du)``.

    ``normals`` lists vectors ``ell`` across whose hyperplanes ``ell . u = 0``
    the integrand may jump; they become break points of the quadrature.
    """
    return model._integrate(fn, lo, hi, [np.asarray(n, dtype=float) for n in normals])
