"""Closed-form hyperbolic distances on the unit disk and ball.

Normalization: ``d(0, t) = artanh(t)``, so the infinitesimal metric at the
origin is ``|v|`` (the Kobayashi normalization).  The displayed value
``log((1+t)/(1-t))`` common in the literature is twice this.
"""

import numpy as np

from .errors import InvalidDilatation, OutsideBall, OutsideDisk
from .maps import disk_mobius


def _artanh_from(rho2, one_minus_rho2):
    # artanh(r) = log(1 + r) - log(1 - r^2)/2, keeping 1 - r^2 from its product form
    r = np.sqrt(rho2)
    return np.log1p(r) - 0.5 * np.log(one_minus_rho2)


def poincare_distance(z, w):
    """``artanh |(z - w) / (1 - conj(z) w)|``; broadcasts over arrays."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    az, aw = np.abs(z), np.abs(w)
    if np.any(az >= 1) or np.any(aw >= 1):
        raise OutsideDisk("point outside the unit disk", witness=z if np.any(az >= 1) else w)
    den = np.abs(1 - np.conj(z) * w) ** 2
    rho2 = np.abs(z - w) ** 2 / den
    one_m = (1 - az * az) * (1 - aw * aw) / den
    d = _artanh_from(rho2, one_m)
    return float(d) if np.ndim(d) == 0 else d


def ball_distance(z, w):
    """Kobayashi distance of the unit ball; last axis is the coordinate axis."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if z.ndim == 0:
        z = z[None]
    if w.ndim == 0:
        w = w[None]
    nz = np.sum(np.abs(z) ** 2, axis=-1)
    nw = np.sum(np.abs(w) ** 2, axis=-1)
    if np.any(nz >= 1) or np.any(nw >= 1):
        raise OutsideBall("point outside the unit ball", witness=z if np.any(nz >= 1) else w)
    inner = np.sum(w * np.conj(z), axis=-1)
    den = np.abs(1 - inner) ** 2
    delta = w - z
    nd = np.sum(np.abs(delta) ** 2, axis=-1)
    # |z|^2 |w|^2 - |<w,z>|^2 is unchanged when w is replaced by w - z
    wedge = nz * nd - np.abs(np.sum(delta * np.conj(z), axis=-1)) ** 2
    rho2 = np.maximum(nd - wedge, 0.0) / den
    one_m = (1 - nz) * (1 - nw) / den
    d = _artanh_from(rho2, one_m)
    return float(d) if np.ndim(d) == 0 else d


def pseudo_distance(z, w):
    """Moebius pseudo-distance ``|(z - w)/(1 - conj(z) w)|`` on the disk."""
    return float(abs((complex(z) - complex(w)) / (1 - np.conj(complex(z)) * complex(w))))


def mobius_disk_automorphism(a, theta=0.0):
    return disk_mobius(a, theta)


def kiernan_threshold(k):
    """Distance ``(1/32)^((1+k)/(1-k))`` separating the Hoelder and Lipschitz regimes."""
    if not 0 <= k < 1:
        raise InvalidDilatation(f"dilatation bound k = {k} not in [0, 1)")
    return (1.0 / 32.0) ** ((1.0 + k) / (1.0 - k))

