"""Smooth maps C^n -> C^m with optional closed-form Wirtinger blocks.

Built-in families: identity, complex-affine plus antiholomorphic linear maps,
Moebius automorphisms of the disk and ball, deformed ball automorphisms,
the spiralling disk homeomorphism ``z exp(i/(1-|z|))`` and polynomial maps
in ``z`` and ``conj(z)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domains import as_point
from .errors import UndefinedDerivative, ValidationError


@dataclass(frozen=True, eq=False)
class SmoothMapSpec:
    """An evaluatable map with optional analytic ``(holo, anti)`` blocks.

    ``evaluate`` takes a complex array whose last axis has length
    ``source_dim``; built-ins broadcast over leading axes.  ``jacobians``
    returns the pair ``(dF, dbarF)`` of ``m x n`` complex matrices at a point.
    ``inverse`` is a zero-argument factory so inverse pairs can reference
    each other without recursion at construction time.  ``fd_scale`` returns
    a per-point multiplier for the finite-difference step.
    """

    source_dim: int
    target_dim: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    jacobians: Callable[[np.ndarray], tuple] | None = None
    inverse: Callable[[], "SmoothMapSpec"] | None = None
    fd_step: float = 1e-5
    fd_scale: Callable[[np.ndarray], float] | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict)
    holomorphic: bool = False

    def __call__(self, z):
        return self.evaluate(as_point(z))

    def inverse_map(self):
        return None if self.inverse is None else self.inverse()

    def describe(self):
        return {"kind": self.name, **self.params}


def compose(outer, inner, name=None):
    """``outer o inner`` with the Wirtinger chain rule for the blocks."""
    jac = None
    if outer.jacobians is not None and inner.jacobians is not None:

        def jac(z):
            h1, a1 = inner.jacobians(z)
            h2, a2 = outer.jacobians(inner.evaluate(z))
            return h2 @ h1 + a2 @ np.conj(a1), h2 @ a1 + a2 @ np.conj(h1)

    inv = None
    if outer.inverse is not None and inner.inverse is not None:
        inv = lambda: compose(inner.inverse(), outer.inverse())
    return SmoothMapSpec(
        source_dim=inner.source_dim,
        target_dim=outer.target_dim,
        evaluate=lambda z: outer.evaluate(inner.evaluate(z)),
        jacobians=jac,
        inverse=inv,
        fd_step=min(outer.fd_step, inner.fd_step),
        name=name or f"{outer.name}*{inner.name}",
        params={"outer": outer.describe(), "inner": inner.describe()},
        holomorphic=outer.holomorphic and inner.holomorphic,
    )


def identity(n):
    eye = np.eye(n, dtype=complex)
    zero = np.zeros((n, n), dtype=complex)
    m = SmoothMapSpec(
        n, n, lambda z: np.array(z, dtype=complex), lambda z: (eye, zero),
        name="identity", params={"dimension": n}, holomorphic=True,
    )
    return _with_inverse(m, lambda: m)


def _with_inverse(m, factory):
    object.__setattr__(m, "inverse", factory)
    return m


def linear_map(holo, anti):
    """``F(z) = A z + B conj(z)`` for complex ``n x n`` matrices A, B."""
    A = np.atleast_2d(np.asarray(holo, dtype=complex))
    B = np.atleast_2d(np.asarray(anti, dtype=complex))
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ValidationError("linear map blocks must be square and of equal shape")
    n = A.shape[0]

    def ev(z):
        z = np.asarray(z, dtype=complex)
        return z @ A.T + np.conj(z) @ B.T

    fwd = SmoothMapSpec(
        n, n, ev, lambda z: (A, B), name="linear-antiholo",
        params={"holo": _cplx_list(A), "anti": _cplx_list(B)},
        holomorphic=not np.any(B),
    )

    def inv():
        # invert the real-linear map through its 2n x 2n real matrix
        Ai, Bi = real_to_wirtinger(np.linalg.inv(wirtinger_to_real(A, B)))
        back = linear_map(Ai, Bi)
        return _with_inverse(back, lambda: fwd)

    return _with_inverse(fwd, inv)


def _cplx_list(M):
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.atleast_2d(M)]


def wirtinger_to_real(H, K):
    """Real matrix of ``h -> H h + K conj(h)`` acting on stacked ``(x, y)``."""
    P, Q = H + K, H - K
    return np.block([[P.real, -Q.imag], [P.imag, Q.real]])


def real_to_wirtinger(M):
    n = M.shape[0] // 2
    m11, m12, m21, m22 = M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]
    H = 0.5 * ((m11 + m22) + 1j * (m21 - m12))
    K = 0.5 * ((m11 - m22) + 1j * (m21 + m12))
    return H, K


def disk_mobius(a, theta=0.0):
    """``z -> e^{i theta} (z - a) / (1 - conj(a) z)`` on the unit disk."""
    a = complex(a)
    if abs(a) >= 1:
        raise ValidationError("Moebius parameter must lie in the unit disk")
    rot = np.exp(1j * theta)
    s = 1 - abs(a) ** 2

    def ev(z):
        z = np.asarray(z, dtype=complex)
        return rot * (z - a) / (1 - np.conj(a) * z)

    def jac(z):
        z = as_point(z)
        return np.array([[rot * s / (1 - np.conj(a) * z[0]) ** 2]]), np.zeros((1, 1), complex)

    def iev(w):
        u = np.conj(rot) * np.asarray(w, dtype=complex)
        return (u + a) / (1 + np.conj(a) * u)

    def ijac(w):
        u = np.conj(rot) * as_point(w)[0]
        return np.array([[np.conj(rot) * s / (1 + np.conj(a) * u) ** 2]]), np.zeros((1, 1), complex)

    params = {"a": [a.real, a.imag], "theta": float(theta)}
    fwd = SmoothMapSpec(1, 1, ev, jac, name="mobius", params=params, holomorphic=True)
    back = SmoothMapSpec(1, 1, iev, ijac, name="mobius-inverse", params=params, holomorphic=True)
    _with_inverse(back, lambda: fwd)
    return _with_inverse(fwd, lambda: back)


def ball_automorphism(a):
    """The involutive automorphism of the unit ball exchanging 0 and ``a``.

    ``phi_a(z) = (a - P z - s Q z) / (1 - <z, a>)`` with ``P`` the orthogonal
    projection onto ``C a``, ``Q = I - P`` and ``s = sqrt(1 - |a|^2)``.
    """
    a = as_point(a)
    n = a.size
    na2 = float(np.vdot(a, a).real)
    if na2 >= 1:
        raise ValidationError("automorphism parameter must lie in the unit ball")
    P = np.outer(a, np.conj(a)) / na2 if na2 > 0 else np.zeros((n, n), complex)
    L = P + np.sqrt(1 - na2) * (np.eye(n) - P)
    ca = np.conj(a)

    def ev(z):
        z = np.asarray(z, dtype=complex)
        den = 1 - z @ ca
        return (a - z @ L.T) / den[..., None]

    def jac(z):
        z = as_point(z)
        den = 1 - z @ ca
        num = a - L @ z
        return -L / den + np.outer(num, ca) / den**2, np.zeros((n, n), complex)

    m = SmoothMapSpec(
        n, n, ev, jac, name="ball-automorphism",
        params={"a": [[float(v.real), float(v.imag)] for v in a]}, holomorphic=True,
    )
    return _with_inverse(m, lambda: m)


def deformed_automorphism(a, eps):
    """``D_eps o phi_a`` with ``D_eps(w) = (w + eps conj(w)) / (1 + eps)``.

    The image of the unit ball is the real ellipsoid with semiaxes
    ``(1, (1 - eps)/(1 + eps))`` in every complex coordinate; see
    :func:`deformed_image_domain`.
    """
    a = as_point(a)
    n = a.size
    eps = float(eps)
    if not 0 <= eps < 1:
        raise ValidationError("deformation eps must lie in [0, 1)")
    phi = ball_automorphism(a)
    D = linear_map(np.eye(n) / (1 + eps), eps * np.eye(n) / (1 + eps))
    m = compose(D, phi, name="deformed-automorphism")
    object.__setattr__(m, "params", {"a": [[float(v.real), float(v.imag)] for v in a], "eps": eps})
    object.__setattr__(m, "holomorphic", eps == 0)
    return m


def deformed_image_domain(n, eps):
    from .domains import ellipsoid, unit_ball

    if eps == 0:
        return unit_ball(n)
    return ellipsoid([(1.0, (1 - eps) / (1 + eps))] * n)


def spiral_map():
    """``z -> z exp(i / (1 - |z|))`` on the unit disk, fixing 0.

    Blocks at ``z != 0``::

        dbar f = (i/2) z^2 / (|z| (1-|z|)^2) e^{i/(1-|z|)}
        d f    = ((i/2) |z| / (1-|z|)^2 + 1) e^{i/(1-|z|)}

    Derivatives at 0 are not defined (``|z|`` is not differentiable there).
    """

    def ev(z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = z * np.exp(1j / (1 - r))
        return np.where(r == 0, 0j, out)

    def jac(z):
        z = as_point(z)[0]
        r = abs(z)
        if r == 0:
            raise UndefinedDerivative("spiral map derivatives undefined at 0", witness=z)
        e = np.exp(1j / (1 - r))
        anti = 0.5j * z * z / (r * (1 - r) ** 2) * e
        holo = (0.5j * r / (1 - r) ** 2 + 1) * e
        return np.array([[holo]]), np.array([[anti]])

    def iev(w):
        w = np.asarray(w, dtype=complex)
        r = np.abs(w)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = w * np.exp(-1j / (1 - r))
        return np.where(r == 0, 0j, out)

    def ijac(w):
        w = as_point(w)[0]
        r = abs(w)
        if r == 0:
            raise UndefinedDerivative("spiral inverse derivatives undefined at 0", witness=w)
        e = np.exp(-1j / (1 - r))
        anti = -0.5j * w * w / (r * (1 - r) ** 2) * e
        holo = (-0.5j * r / (1 - r) ** 2 + 1) * e
        return np.array([[holo]]), np.array([[anti]])

    def scale(z):
        r = float(np.abs(as_point(z)[0]))
        return max(min(r, (1 - r) ** 2), 1e-12)

    # The phase 1/(1-|z|) turns rounding in |z| into an absolute error of
    # about 1e-16/(1-|z|)^2, so the step is kept relatively large: with
    # h = 5e-4 * scale both truncation and rounding stay near 1e-7 (relative).
    step = 5e-4
    fwd = SmoothMapSpec(1, 1, ev, jac, fd_step=step, fd_scale=scale, name="example-2-2")
    back = SmoothMapSpec(1, 1, iev, ijac, fd_step=step, fd_scale=scale, name="example-2-2-inverse")
    _with_inverse(back, lambda: fwd)
    return _with_inverse(fwd, lambda: back)


def polynomial_map(components, n):
    """Polynomial in ``z`` and ``conj(z)``.

    ``components`` has one entry per output coordinate, each a list of
    ``(coefficient, holo_exponents, anti_exponents)``.
    """
    comps = []
    for terms in components:
        c = np.array([complex(t[0]) for t in terms])
        al = np.array([list(t[1]) for t in terms], dtype=int).reshape(len(terms), n)
        be = np.array([list(t[2]) for t in terms], dtype=int).reshape(len(terms), n)
        comps.append((c, al, be))

    def mono(z, al, be):
        z = np.asarray(z, dtype=complex)[..., None, :]
        return np.prod(z**al * np.conj(z) ** be, axis=-1)

    def ev(z):
        return np.stack([mono(z, al, be) @ c for c, al, be in comps], axis=-1)

    def jac(z):
        z = as_point(z)
        H = np.zeros((len(comps), n), complex)
        K = np.zeros((len(comps), n), complex)
        for i, (c, al, be) in enumerate(comps):
            for j in range(n):
                da = al.copy()
                da[:, j] = np.maximum(da[:, j] - 1, 0)
                H[i, j] = mono(z, da, be) @ (c * al[:, j])
                db = be.copy()
                db[:, j] = np.maximum(db[:, j] - 1, 0)
                K[i, j] = mono(z, al, db) @ (c * be[:, j])
        return H, K

    holo = all(not np.any(be) for _, _, be in comps)
    return SmoothMapSpec(
        n, len(comps), ev, jac, name="custom-polynomial",
        params={"components": [[[[t[0].real, t[0].imag] if isinstance(t[0], complex) else t[0],
                                   list(t[1]), list(t[2])] for t in terms] for terms in components]},
        holomorphic=holo,
    )
