"""Wirtinger blocks, pointwise dilatation and the generalized qc constant."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domains import as_point, interior_grid, sphere_directions, to_complex
from .errors import NonFinite, UndefinedDerivative, ValidationError

SINGULAR_FLOOR = 1e-12


@dataclass
class DerivativePair:
    holo: np.ndarray
    anti: np.ndarray
    at: np.ndarray

    def apply(self, h):
        """Real differential ``dF(z) h = holo h + anti conj(h)``."""
        h = as_point(h)
        return self.holo @ h + self.anti @ np.conj(h)


def _fd_blocks(fmap, z, h):
    n = z.size
    H = np.empty((fmap.target_dim, n), complex)
    K = np.empty((fmap.target_dim, n), complex)
    for j in range(n):
        e = np.zeros(n, complex)
        e[j] = h
        vals = [fmap.evaluate(z + s) for s in (e, -e, 1j * e, -1j * e)]
        if not all(np.all(np.isfinite(v)) for v in vals):
            raise NonFinite("map returned non-finite values on the stencil", witness=z)
        fx = (vals[0] - vals[1]) / (2 * h)
        fy = (vals[2] - vals[3]) / (2 * h)
        H[:, j] = 0.5 * (fx - 1j * fy)
        K[:, j] = 0.5 * (fx + 1j * fy)
    return H, K


def wirtinger_blocks(fmap, z, method="auto"):
    """Blocks ``(dF, dbarF)`` at ``z``.

    ``method`` is ``"auto"`` (analytic when attached, else central
    differences), ``"analytic"``, ``"fd"`` or ``"richardson"`` (two central
    steps combined to fourth order).
    """
    z = as_point(z)
    if method == "analytic" or (method == "auto" and fmap.jacobians is not None):
        if fmap.jacobians is None:
            raise ValidationError(f"map {fmap.name!r} has no analytic blocks")
        H, K = fmap.jacobians(z)
        return DerivativePair(np.atleast_2d(H), np.atleast_2d(K), z)
    h = fmap.fd_step * (fmap.fd_scale(z) if fmap.fd_scale is not None else 1.0)
    if method in ("auto", "fd"):
        H, K = _fd_blocks(fmap, z, h)
    elif method == "richardson":
        H1, K1 = _fd_blocks(fmap, z, h)
        H2, K2 = _fd_blocks(fmap, z, h / 2)
        H, K = (4 * H2 - H1) / 3, (4 * K2 - K1) / 3
    else:
        raise ValidationError(f"unknown derivative method {method!r}")
    return DerivativePair(H, K, z)


def dilatation(fmap, z, method="auto"):
    """``|dbar f| / |d f|`` for a map of one complex variable.

    Returns ``inf`` when only the holomorphic part vanishes and ``0`` in the
    degenerate case where both do.
    """
    if fmap.source_dim != 1 or fmap.target_dim != 1:
        raise ValidationError("dilatation is defined for maps C -> C")
    d = wirtinger_blocks(fmap, z, method)
    h, a = abs(d.holo[0, 0]), abs(d.anti[0, 0])
    if h == 0:
        return 0.0 if a == 0 else np.inf
    return a / h


def qc_constant_exact(holo, anti):
    """``max_v |anti conj(v)| / |holo v|``.

    With ``u = holo v`` the ratio is ``|anti conj(holo)^{-1} conj(u)| / |u|``,
    so the maximum is the spectral norm of ``anti @ inv(conj(holo))``.
    """
    H = np.atleast_2d(holo)
    K = np.atleast_2d(anti)
    sv = np.linalg.svd(H, compute_uv=False)
    scale = max(sv[0], np.abs(K).max(), 1.0)
    if sv[-1] < SINGULAR_FLOOR * scale:
        return 0.0 if np.abs(K).max() < SINGULAR_FLOOR * scale else np.inf
    return float(np.linalg.norm(K @ np.linalg.inv(np.conj(H)), 2))


def _ratio_and_grad(H, K, v):
    u = K @ np.conj(v)
    w = H @ v
    num = np.vdot(u, u).real
    den = np.vdot(w, w).real
    g_num = 2 * K.T @ np.conj(u)
    g_den = 2 * np.conj(H.T) @ w
    return num / den, (g_num * den - num * g_den) / den**2


def qc_constant_sphere(holo, anti, sphere_samples=64, refine_iters=50, starts=8):
    """Sampling estimate of the same maximum: quasi-uniform directions on the
    unit sphere of C^n, then projected gradient ascent from the best starts."""
    H = np.atleast_2d(holo)
    K = np.atleast_2d(anti)
    n = H.shape[1]
    if sphere_samples < 16:
        raise ValidationError("sphere_samples must be >= 16")
    dirs = to_complex(sphere_directions(2 * n, 2 * sphere_samples, seed=sphere_samples))
    num = np.sum(np.abs(np.conj(dirs) @ K.T) ** 2, axis=1)
    den = np.sum(np.abs(dirs @ H.T) ** 2, axis=1)
    scale = max(np.abs(H).max(), np.abs(K).max(), 1.0)
    tiny = den < (SINGULAR_FLOOR * scale) ** 2
    if np.any(tiny & (num > (SINGULAR_FLOOR * scale) ** 2)):
        return np.inf
    ratio = np.where(tiny, 0.0, num / np.where(tiny, 1.0, den))
    best = float(ratio.max())
    for idx in np.argsort(ratio)[::-1][:starts]:
        v = dirs[idx]
        f, _ = _ratio_and_grad(H, K, v)
        step = 0.5
        for _ in range(refine_iters):
            _, g = _ratio_and_grad(H, K, v)
            g = g - np.vdot(v, g).real * v
            gn = np.linalg.norm(g)
            if gn < 1e-15:
                break
            while step > 1e-12:
                cand = v + step * g / gn
                cand /= np.linalg.norm(cand)
                fc, _ = _ratio_and_grad(H, K, cand)
                if fc > f:
                    v, f = cand, fc
                    step *= 1.5
                    break
                step *= 0.5
            else:
                break
        best = max(best, f)
    return float(np.sqrt(best))


def generalized_qc_constant(fmap, z, sphere_samples=64, refine_iters=50, method="exact"):
    """Smallest ``c`` with ``|dbarF(z) conj(v)| <= c |dF(z) v|`` for all ``v``.

    ``method="exact"`` uses the closed form; ``method="sphere"`` runs the
    sampling-plus-ascent estimator.  Singular holomorphic parts give ``inf``.
    """
    d = wirtinger_blocks(fmap, z)
    if d.holo.shape == (1, 1):
        h, a = abs(d.holo[0, 0]), abs(d.anti[0, 0])
        if h < SINGULAR_FLOOR * max(a, 1.0):
            return 0.0 if a < SINGULAR_FLOOR else np.inf
        return a / h
    if method == "exact":
        return qc_constant_exact(d.holo, d.anti)
    if method == "sphere":
        return qc_constant_sphere(d.holo, d.anti, sphere_samples, refine_iters)
    raise ValidationError(f"unknown qc method {method!r}")


@dataclass
class QCField:
    samples: list = field(default_factory=list)
    sup: float = 0.0
    sup_witness: np.ndarray | None = None
    skipped: int = 0
    degenerate: int = 0


def qc_field(fmap, domain, grid_count=64, margin=1e-3, **kw):
    """Generalized qc constant on a deterministic interior grid.

    Points where the map's derivatives are undefined are skipped and counted.
    """
    if grid_count < 1:
        raise ValidationError("grid_count must be >= 1")
    out = QCField()
    for z in interior_grid(domain, grid_count, margin=margin):
        try:
            c = generalized_qc_constant(fmap, z, **kw)
        except UndefinedDerivative:
            out.skipped += 1
            continue
        if c == 0 and fmap.source_dim == 1:
            d = wirtinger_blocks(fmap, z)
            out.degenerate += int(d.holo[0, 0] == 0)
        out.samples.append((z, c))
        if out.sup_witness is None or c > out.sup:
            out.sup, out.sup_witness = c, z
    return out
