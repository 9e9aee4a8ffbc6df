"""Complexified blocks of the pushed-forward structure ``F_* J_st``.

On ``(v, conj v)`` coordinates the structure is ``[[A, B], [conj B, conj A]]``
with, writing ``G = F^{-1}`` and evaluating ``F``'s blocks at ``G(z)``::

    A = i dF dG - i dbarF d(conj G)
    B = i dF dbarG - i dbarF conj(dG)

``d(conj G)`` is the entrywise conjugate of ``dbar G``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domains import as_point, interior_grid
from .errors import InjectivitySuspect, InverseInconsistent, NewtonDivergence, UndefinedDerivative
from .maps import SmoothMapSpec, real_to_wirtinger, wirtinger_to_real
from .wirtinger import wirtinger_blocks

ROUND_TRIP_TOL = 1e-8


@dataclass
class StructureBlocks:
    A: np.ndarray
    B: np.ndarray
    at: np.ndarray

    def complexified(self):
        return np.block([[self.A, self.B], [np.conj(self.B), np.conj(self.A)]])

    def square_defect(self):
        """``|| J^2 + I ||_2`` for the assembled structure."""
        J = self.complexified()
        return float(np.linalg.norm(J @ J + np.eye(J.shape[0]), 2))

    def deviation(self):
        n = self.A.shape[0]
        return float(np.linalg.norm(self.A - 1j * np.eye(n), 2) + np.linalg.norm(self.B, 2))


def pushforward_blocks(F, F_inverse, z, round_trip_tol=ROUND_TRIP_TOL):
    z = as_point(z)
    y = as_point(F_inverse(z))
    err = float(np.linalg.norm(F(y) - z))
    if err > round_trip_tol:
        raise InverseInconsistent(f"|F(F^-1(z)) - z| = {err:.3e}", witness=z)
    dF = wirtinger_blocks(F, y)
    dG = wirtinger_blocks(F_inverse, z)
    A = 1j * dF.holo @ dG.holo - 1j * dF.anti @ np.conj(dG.anti)
    B = 1j * dF.holo @ dG.anti - 1j * dF.anti @ np.conj(dG.holo)
    return StructureBlocks(A, B, z)


@dataclass
class StructureDeviation:
    sup_norm: float
    per_point: list = field(default_factory=list)
    max_square_defect: float = 0.0
    skipped: int = 0


def structure_deviation(F, F_inverse, target_domain, grid_count=64):
    """Sup over a target grid of ``||A - iI|| + ||B||`` (zeroth order only).

    Grid points where either map has no derivative are skipped and counted.
    """
    out = StructureDeviation(0.0)
    for z in interior_grid(target_domain, grid_count):
        try:
            blk = pushforward_blocks(F, F_inverse, z)
        except UndefinedDerivative:
            out.skipped += 1
            continue
        dev = blk.deviation()
        out.per_point.append((z, dev))
        out.sup_norm = max(out.sup_norm, dev)
        out.max_square_defect = max(out.max_square_defect, blk.square_defect())
    return out


def _newton(F, w, z0, tol, max_iter):
    z = z0.copy()
    r = w - F.evaluate(z)
    rn = np.linalg.norm(r)
    n = z.size
    its = 0
    for its in range(1, max_iter + 1):
        if rn <= tol:
            break
        d = wirtinger_blocks(F, z)
        sol = np.linalg.solve(wirtinger_to_real(d.holo, d.anti), np.concatenate([r.real, r.imag]))
        step_dir = sol[:n] + 1j * sol[n:]
        step = 1.0
        while step > 1e-8:
            cand = z + step * step_dir
            rc = w - F.evaluate(cand)
            rcn = np.linalg.norm(rc)
            if np.isfinite(rcn) and rcn < rn:
                z, r, rn = cand, rc, rcn
                break
            step *= 0.5
        else:
            break
    return z, rn, its


def numeric_inverse(F, domain, tol=1e-13, max_iter=50, check_pairs=1000, seed=0):
    """``F^{-1}`` by damped Newton from the nearest of 64 cached samples.

    The inverse's blocks come from inverting the real differential of ``F``.
    """
    n = F.source_dim
    pts = interior_grid(domain, 2 * check_pairs, seed=seed + 7)
    imgs = np.array([F(z) for z in pts])
    rng = np.random.default_rng(seed)
    idx = rng.permutation(len(pts)).reshape(-1, 2)
    for i, j in idx:
        if np.linalg.norm(imgs[i] - imgs[j]) < 1e-12 and np.linalg.norm(pts[i] - pts[j]) > 1e-8:
            raise InjectivitySuspect("two sample points share an image", witness=pts[i])
    cache_src = interior_grid(domain, 64, seed=seed + 11)
    cache_img = np.array([F(z) for z in cache_src])

    def solve(w):
        w = as_point(w)
        k = int(np.argmin(np.linalg.norm(cache_img - w, axis=1)))
        z, rn, _ = _newton(F, w, cache_src[k].astype(complex), tol * max(1.0, np.linalg.norm(w)), max_iter)
        if rn > 1e-10 * max(1.0, np.linalg.norm(w)):
            raise NewtonDivergence(f"Newton residual {rn:.3e} after {max_iter} iterations", witness=w)
        return z

    def ev(w):
        w = np.asarray(w, dtype=complex)
        if w.ndim == 1:
            return solve(w)
        flat = w.reshape(-1, n)
        return np.array([solve(x) for x in flat]).reshape(w.shape)

    def jac(w):
        d = wirtinger_blocks(F, solve(w))
        return real_to_wirtinger(np.linalg.inv(wirtinger_to_real(d.holo, d.anti)))

    return SmoothMapSpec(
        n, n, ev, jac, inverse=lambda: F, name="numeric-inverse",
        params={"of": F.describe(), "tol": tol}, holomorphic=F.holomorphic,
    )
