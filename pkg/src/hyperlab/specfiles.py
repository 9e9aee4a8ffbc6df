"""JSON domain and map spec files.

Domain: ``{"kind": "ball" | "disk" | "ellipsoid" | "custom-polynomial",
"dimension": n, "params": [...]}``.  Ellipsoid params are ``[[a, b], ...]``;
custom-polynomial params are ``[[coef, [e1, ..., e2n]], ...]`` over the
interleaved real coordinates, with optional ``"bounding_radius"`` and
``"witness"`` keys.

Map: ``{"kind": ..., "params": ...}``::

    mobius                 [a_re, a_im] or [a_re, a_im, theta]
    example-2-2            []
    linear-antiholo        [a_re, a_im, b_re, b_im]          (z -> a z + b conj z)
                           or {"holo": M, "anti": M} with M[i][j] = [re, im]
    deformed-automorphism  [eps, a1_re, a1_im, ...]           (ball of dim len(a))
    custom-polynomial      {"dimension": n, "components": [[[re, im], [alpha], [beta]], ...]}
"""

from __future__ import annotations

import json
import numbers
from pathlib import Path

import numpy as np

from . import domains as dom
from . import maps
from .errors import SpecError, ValidationError

DOMAIN_KINDS = ("ball", "disk", "ellipsoid", "custom-polynomial")
MAP_KINDS = ("mobius", "example-2-2", "linear-antiholo", "deformed-automorphism", "custom-polynomial")


def _fail(field, msg):
    err = SpecError(f"field {field!r}: {msg}", stage="spec")
    err.field = field
    return err


def _number(v, field):
    if isinstance(v, bool) or not isinstance(v, numbers.Real):
        raise _fail(field, f"expected a number, got {v!r}")
    if not np.isfinite(v):
        raise _fail(field, "must be finite")
    return float(v)


def _int(v, field, low=None):
    if isinstance(v, bool) or not isinstance(v, numbers.Integral):
        raise _fail(field, f"expected an integer, got {v!r}")
    if low is not None and v < low:
        raise _fail(field, f"must be >= {low}")
    return int(v)


def _list(v, field, length=None):
    if not isinstance(v, list):
        raise _fail(field, f"expected a list, got {type(v).__name__}")
    if length is not None and len(v) != length:
        raise _fail(field, f"expected {length} entries, got {len(v)}")
    return v


def _complex(v, field):
    pair = _list(v, field, 2)
    return complex(_number(pair[0], f"{field}[0]"), _number(pair[1], f"{field}[1]"))


def _matrix(v, field):
    rows = _list(v, field)
    out = [[_complex(x, f"{field}[{i}][{j}]") for j, x in enumerate(_list(r, f"{field}[{i}]"))] for i, r in enumerate(rows)]
    if len({len(r) for r in out}) > 1:
        raise _fail(field, "rows have different lengths")
    return np.array(out, dtype=complex)


def _load(source):
    if isinstance(source, dict):
        return source
    text = Path(source).read_text() if not str(source).lstrip().startswith("{") else str(source)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}", stage="spec") from exc
    if not isinstance(obj, dict):
        raise _fail("<root>", "expected a JSON object")
    return obj


def _kind(obj, allowed):
    if "kind" not in obj:
        raise _fail("kind", "missing")
    k = obj["kind"]
    if k not in allowed:
        raise _fail("kind", f"expected one of {', '.join(allowed)}, got {k!r}")
    return k


def parse_domain(source):
    """Build a DomainSpec from a path, a JSON string or a dict."""
    obj = _load(source)
    kind = _kind(obj, DOMAIN_KINDS)
    params = obj.get("params", [])
    if kind == "disk":
        if "dimension" in obj and _int(obj["dimension"], "dimension") != 1:
            raise _fail("dimension", "disk has dimension 1")
        return dom.unit_disk()
    n = _int(obj.get("dimension", 1 if kind != "ellipsoid" else len(_list(params, "params"))), "dimension", 1)
    if kind == "ball":
        return dom.unit_ball(n)
    if kind == "ellipsoid":
        axes = _list(params, "params", n)
        ab = [[_number(x, f"params[{i}][{j}]") for j, x in enumerate(_list(p, f"params[{i}]", 2))] for i, p in enumerate(axes)]
        for i, row in enumerate(ab):
            for j, x in enumerate(row):
                if x <= 0:
                    raise _fail(f"params[{i}][{j}]", "semiaxes must be positive")
        return dom.ellipsoid(ab)
    terms = []
    for i, t in enumerate(_list(params, "params")):
        t = _list(t, f"params[{i}]", 2)
        c = _number(t[0], f"params[{i}][0]")
        e = [_int(x, f"params[{i}][1][{j}]", 0) for j, x in enumerate(_list(t[1], f"params[{i}][1]", 2 * n))]
        terms.append((c, e))
    if not terms:
        raise _fail("params", "custom-polynomial needs at least one term")
    radius = _number(obj.get("bounding_radius", 10.0), "bounding_radius")
    witness = None
    if "witness" in obj:
        witness = np.array([_complex(w, f"witness[{i}]") for i, w in enumerate(_list(obj["witness"], "witness", n))])
    try:
        return dom.polynomial_domain(terms, n, bounding_radius=radius, witness=witness)
    except ValidationError as exc:
        raise _fail("witness", str(exc)) from exc


def parse_map(source):
    """Build a SmoothMapSpec from a path, a JSON string or a dict."""
    obj = _load(source)
    kind = _kind(obj, MAP_KINDS)
    params = obj.get("params", [])
    if kind == "example-2-2":
        return maps.spiral_map()
    if kind == "mobius":
        p = _list(params, "params")
        if len(p) not in (2, 3):
            raise _fail("params", "expected [a_re, a_im] or [a_re, a_im, theta]")
        a = complex(_number(p[0], "params[0]"), _number(p[1], "params[1]"))
        if abs(a) >= 1:
            raise _fail("params", "Moebius centre must lie in the unit disk")
        theta = _number(p[2], "params[2]") if len(p) == 3 else 0.0
        return maps.disk_mobius(a, theta)
    if kind == "linear-antiholo":
        if isinstance(params, dict):
            for key in ("holo", "anti"):
                if key not in params:
                    raise _fail(f"params.{key}", "missing")
            H = _matrix(params["holo"], "params.holo")
            K = _matrix(params["anti"], "params.anti")
            if H.shape != K.shape or H.shape[0] != H.shape[1]:
                raise _fail("params.anti", "holo and anti must be square and of equal shape")
            return maps.linear_map(H, K)
        p = _list(params, "params", 4)
        v = [_number(x, f"params[{i}]") for i, x in enumerate(p)]
        return maps.linear_map([[complex(v[0], v[1])]], [[complex(v[2], v[3])]])
    if kind == "deformed-automorphism":
        p = _list(params, "params")
        if len(p) < 3 or len(p) % 2 == 0:
            raise _fail("params", "expected [eps, a1_re, a1_im, ...]")
        eps = _number(p[0], "params[0]")
        if not 0 <= eps < 1:
            raise _fail("params[0]", "eps must lie in [0, 1)")
        v = [_number(x, f"params[{i + 1}]") for i, x in enumerate(p[1:])]
        a = np.array(v[0::2]) + 1j * np.array(v[1::2])
        if np.linalg.norm(a) >= 1:
            raise _fail("params", "automorphism centre must lie in the unit ball")
        return maps.deformed_automorphism(a, eps)
    if not isinstance(params, dict):
        raise _fail("params", "custom-polynomial params must be an object")
    n = _int(params.get("dimension"), "params.dimension", 1)
    comps = []
    for i, terms in enumerate(_list(params.get("components"), "params.components")):
        row = []
        for j, t in enumerate(_list(terms, f"params.components[{i}]")):
            f = f"params.components[{i}][{j}]"
            t = _list(t, f, 3)
            c = _complex(t[0], f"{f}[0]")
            al = [_int(x, f"{f}[1]", 0) for x in _list(t[1], f"{f}[1]", n)]
            be = [_int(x, f"{f}[2]", 0) for x in _list(t[2], f"{f}[2]", n)]
            row.append((c, al, be))
        comps.append(row)
    if not comps:
        raise _fail("params.components", "need at least one component")
    return maps.polynomial_map(comps, n)


def parse_point(text, dimension=None, field="point"):
    """``"x1,y1,x2,y2,..."`` (interleaved real parts) to a complex vector."""
    try:
        vals = [float(t) for t in str(text).split(",") if t.strip() != ""]
    except ValueError as exc:
        raise _fail(field, f"could not parse {text!r} as comma-separated numbers") from exc
    if len(vals) % 2:
        raise _fail(field, "expected an even number of reals (x1,y1,x2,y2,...)")
    z = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    if dimension is not None and z.size != dimension:
        raise _fail(field, f"expected {dimension} complex coordinates, got {z.size}")
    return z
