"""Smooth bounded convex domains given by defining functions.

A domain is ``{z : rho(z) < 0}`` in C^n.  Real coordinates are interleaved,
``(x1, y1, x2, y2, ...)`` with ``z_j = x_j + i y_j``; gradients and Hessians
of ``rho`` are taken in that order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm, qmc

from .errors import (
    DegenerateGradient,
    NoCrossing,
    NotOnBoundary,
    ValidationError,
)

GRADIENT_FLOOR = 1e-8
BOUNDARY_TOL = 1e-8


def to_real(z):
    """Complex (..., n) -> interleaved real (..., 2n)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def as_point(z):
    """Promote a scalar (n = 1) or sequence to a complex 1-d array."""
    return np.atleast_1d(np.asarray(z, dtype=complex))


def to_complex(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Immutable description of ``{rho < 0}``.

    ``rho``, ``grad`` and ``hess`` act on interleaved real arrays and
    broadcast over leading axes.  ``quadratic_weights`` is set for the
    built-in quadrics (disk, ball, ellipsoid), where ``rho = sum(w x^2) - 1``;
    it enables exact ray intersection.
    """

    dimension: int
    rho: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    bounding_radius: float
    kind: str = "custom"
    witness: np.ndarray = field(default=None)
    quadratic_weights: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.witness is None:
            object.__setattr__(self, "witness", np.zeros(self.dimension, dtype=complex))
        else:
            object.__setattr__(self, "witness", np.asarray(self.witness, dtype=complex))

    # complex-argument conveniences
    def rho_at(self, z):
        return self.rho(to_real(z))

    def grad_at(self, z):
        return self.grad(to_real(z))

    def hess_at(self, z):
        return self.hess(to_real(z))

    def complex_grad(self, z):
        """``g_x + i g_y`` per coordinate, so that ``d rho = Re(conj(G) . dz)``."""
        return to_complex(self.grad_at(z))

    @property
    def gradient_floor(self):
        return GRADIENT_FLOOR / self.bounding_radius

    def describe(self):
        return {"kind": self.kind, "dimension": self.dimension, **self.params}


def _quadric(weights, kind, radius, params):
    w = np.asarray(weights, dtype=float)

    def rho(x):
        return np.sum(w * x * x, axis=-1) - 1.0

    def grad(x):
        return 2.0 * w * x

    def hess(x):
        x = np.asarray(x)
        return np.broadcast_to(np.diag(2.0 * w), x.shape + (w.size,)).copy()

    return DomainSpec(
        dimension=w.size // 2,
        rho=rho,
        grad=grad,
        hess=hess,
        bounding_radius=float(radius),
        kind=kind,
        quadratic_weights=w,
        params=params,
    )


def unit_disk():
    return _quadric(np.ones(2), "disk", 1.0, {})


def unit_ball(n):
    if n < 1:
        raise ValidationError("ball dimension must be >= 1")
    if n == 1:
        return unit_disk()
    return _quadric(np.ones(2 * n), "ball", 1.0, {})


def ellipsoid(semiaxes):
    """Real ellipsoid ``sum(x_j^2/a_j^2 + y_j^2/b_j^2) < 1``.

    ``semiaxes`` is a sequence of ``(a_j, b_j)`` pairs, one per complex coordinate.
    """
    ab = np.asarray(semiaxes, dtype=float).reshape(-1, 2)
    if np.any(ab <= 0):
        raise ValidationError("ellipsoid semiaxes must be positive")
    w = (1.0 / ab**2).ravel()
    return _quadric(w, "ellipsoid", ab.max(), {"semiaxes": ab.tolist()})


def polynomial_domain(terms, dimension, bounding_radius=10.0, witness=None):
    """Domain whose defining function is a real polynomial.

    ``terms`` is a list of ``(coefficient, exponents)`` with ``exponents`` of
    length ``2 * dimension`` in interleaved real coordinates.
    """
    coef = np.array([float(c) for c, _ in terms])
    exps = np.array([list(e) for _, e in terms], dtype=int).reshape(len(terms), 2 * dimension)
    m = 2 * dimension

    def _mono(x, e):
        return np.prod(np.asarray(x)[..., None, :] ** e, axis=-1)

    # first derivatives: d/dx_k of c x^e = c e_k x^(e - 1_k)
    d1 = []
    for k in range(m):
        ek = exps.copy()
        ck = coef * exps[:, k]
        ek[:, k] = np.maximum(ek[:, k] - 1, 0)
        d1.append((ck, ek))
    d2 = [[None] * m for _ in range(m)]
    for k in range(m):
        ck, ek = d1[k]
        for j in range(m):
            ej = ek.copy()
            cj = ck * ek[:, j]
            ej[:, j] = np.maximum(ej[:, j] - 1, 0)
            d2[k][j] = (cj, ej)

    def rho(x):
        return _mono(x, exps) @ coef

    def grad(x):
        return np.stack([_mono(x, e) @ c for c, e in d1], axis=-1)

    def hess(x):
        rows = [np.stack([_mono(x, e) @ c for c, e in row], axis=-1) for row in d2]
        return np.stack(rows, axis=-2)

    dom = DomainSpec(
        dimension=dimension,
        rho=rho,
        grad=grad,
        hess=hess,
        bounding_radius=float(bounding_radius),
        kind="custom",
        witness=witness,
        params={"terms": [[float(c), list(map(int, e))] for c, e in terms]},
    )
    if not dom.rho_at(dom.witness) < 0:
        raise ValidationError("witness point is not inside the polynomial domain")
    return dom


# ---------------------------------------------------------------------------
# operations


def contains(domain, point, margin=0.0):
    """``rho(point) <= -margin``; boundary points are never contained."""
    if margin < 0:
        raise ValidationError("margin must be nonnegative")
    r = float(domain.rho_at(as_point(point)))
    return r < 0 and r <= -margin


def boundary_hit(domain, interior_point, direction, xtol=1e-14):
    """First boundary point on the ray ``p + t d``, ``t > 0``."""
    p = as_point(interior_point)
    d = as_point(direction)
    dn = np.linalg.norm(d)
    if dn == 0:
        raise ValidationError("direction must be nonzero")
    c0 = float(domain.rho_at(p))
    if not c0 < 0:
        raise ValidationError("ray origin is not strictly inside the domain", witness=p)
    w = domain.quadratic_weights
    if w is not None:
        xr, er = to_real(p), to_real(d)
        a = float(np.sum(w * er * er))
        b = float(np.sum(w * xr * er))
        disc = np.sqrt(b * b - a * c0)
        t = -c0 / (b + disc) if b > 0 else (disc - b) / a
        return p + t * d

    hi = 2.0 * domain.bounding_radius / dn
    f = lambda t: float(domain.rho_at(p + t * d))
    if not f(hi) > 0:
        raise NoCrossing("ray exits the bounding radius without leaving the domain", witness=p)
    t = brentq(f, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return p + t * d


def _halton(dim, count, seed):
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(count)


def sphere_directions(real_dim, count, seed=None):
    """Deterministic quasi-uniform unit vectors in R^real_dim."""
    if count <= 0:
        return np.empty((0, real_dim))
    u = np.clip(_halton(real_dim, count, count if seed is None else seed), 1e-12, 1 - 1e-12)
    g = norm.ppf(u)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def axis_directions(real_dim):
    eye = np.eye(real_dim)
    return np.concatenate([eye, -eye])


def boundary_samples(domain, count):
    """Coordinate-axis hits followed by ``count`` low-discrepancy hits."""
    m = 2 * domain.dimension
    dirs = np.concatenate([axis_directions(m), sphere_directions(m, count)])
    return np.array([boundary_hit(domain, domain.witness, to_complex(d)) for d in dirs])


def interior_grid(domain, count, margin=1e-3, seed=None):
    """Deterministic interior points, uniform in volume for the ball.

    Each point is ``w + s (b - w)`` with ``b`` the boundary hit from the witness
    ``w`` and ``s <= 1 - margin``.
    """
    m = 2 * domain.dimension
    u = np.clip(_halton(m + 1, count, count if seed is None else seed), 1e-12, 1 - 1e-12)
    g = norm.ppf(u[:, :m])
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    s = (1.0 - margin) * u[:, m] ** (1.0 / m)
    w = domain.witness
    pts = []
    for d, si in zip(g, s):
        b = boundary_hit(domain, w, to_complex(d))
        pts.append(w + si * (b - w))
    return np.array(pts)


@dataclass
class CurvatureReport:
    min_normal_curvature: float
    witness_point: np.ndarray
    passed: bool
    sample_count: int


def normal_curvatures(domain, point):
    """Principal curvatures of the level set through ``point`` (ascending)."""
    g = domain.grad_at(point)
    gn = np.linalg.norm(g)
    if gn < domain.gradient_floor:
        raise DegenerateGradient(f"|grad rho| = {gn:.3e} below floor", witness=point)
    # orthonormal basis of the tangent space: trailing columns of a QR of g
    q, _ = np.linalg.qr(np.column_stack([g / gn, np.eye(g.size)]))
    tangent = q[:, 1 : g.size]
    shape_op = tangent.T @ domain.hess_at(point) @ tangent / gn
    return np.linalg.eigvalsh(shape_op)


def rolling_radius(domain):
    """Radius R such that a ball of radius R tangent at any boundary point contains the domain.

    Known exactly only for the quadrics (``R = s_max^2 / s_min`` over the real
    semiaxes, the reciprocal of the least principal curvature); None otherwise.
    """
    w = domain.quadratic_weights
    if w is None:
        return None
    s = 1.0 / np.sqrt(w)
    return float(s.max() ** 2 / s.min())


def verify_strong_convexity(domain, boundary_sample_count=256, tolerance=1e-6):
    if boundary_sample_count < 1:
        raise ValidationError("boundary_sample_count must be >= 1")
    pts = boundary_samples(domain, boundary_sample_count)
    best, where = np.inf, None
    for b in pts:
        k = normal_curvatures(domain, b)[0]
        if k < best:
            best, where = k, b
    return CurvatureReport(float(best), where, bool(best > tolerance), len(pts))


@dataclass(frozen=True)
class SupportingFunctional:
    """Complex affine form ``l(z) = sum((z - anchor) * normal)``.

    ``Re l`` is the signed distance along the outward normal at the anchor,
    so ``Re l < 0`` on a convex domain.
    """

    anchor: np.ndarray
    normal: np.ndarray

    def __call__(self, z):
        return np.sum((np.asarray(z, dtype=complex) - self.anchor) * self.normal, axis=-1)


def supporting_functional_at(domain, boundary_point, tol=BOUNDARY_TOL):
    xi = as_point(boundary_point)
    r = float(domain.rho_at(xi))
    if abs(r) > tol:
        raise NotOnBoundary(f"rho = {r:.3e} at the proposed anchor", witness=xi)
    g = domain.grad_at(xi)
    gn = np.linalg.norm(g)
    if gn < domain.gradient_floor:
        raise DegenerateGradient(f"|grad rho| = {gn:.3e} below floor", witness=xi)
    # Re((z - xi) * nu) = g . (z - xi) in real coordinates
    nu = (g[0::2] - 1j * g[1::2]) / gn
    return SupportingFunctional(anchor=xi, normal=nu)
