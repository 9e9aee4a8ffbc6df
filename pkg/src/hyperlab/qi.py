"""Quasi-isometry envelopes from sampled distance pairs.

An envelope ``(lam, c)`` certifies ``d/lam - c <= d' <= lam d + c`` on a
sample set.  Image distances may be intervals ``[lo, hi]``; the right-hand
inequality is then checked against ``hi`` and the left against ``lo``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .disk import kiernan_threshold, poincare_distance, pseudo_distance
from .domains import (
    as_point,
    boundary_hit,
    contains,
    interior_grid,
    verify_strong_convexity,
)
from .errors import (
    DilatationExceedsK,
    InsufficientSamples,
    NotSelfMap,
    StrongConvexityFailed,
    UndefinedDerivative,
    ValidationError,
)
from .kobayashi import BracketConfig, kobayashi_bracket
from .maps import spiral_map
from .parallel import ordered_map
from .pushforward import numeric_inverse, structure_deviation
from .wirtinger import dilatation, qc_field

TREND_THRESHOLD = 0.1
K_TOL = 1e-9
STRATEGIES = ("uniform-interior", "boundary-approaching", "radial-sequence")


@dataclass
class DistancePairSample:
    source_pair: tuple
    source_distance: float
    image_lower: float
    image_upper: float

    def __post_init__(self):
        if self.image_lower > self.image_upper:
            raise ValidationError("image interval has lower > upper")

    @property
    def exact(self):
        return self.image_lower == self.image_upper


@dataclass
class QIEnvelope:
    lam: float
    c: float
    feasible: bool
    violation_trend: list = field(default_factory=list)
    trend_slope: float = 0.0
    sample_count: int = 0

    def slack(self, samples):
        """Smallest slack over both inequalities (>= 0 when the envelope holds)."""
        d, lo, hi = _arrays(samples)
        right = self.lam * d + self.c - hi
        left = lo - (d / self.lam - self.c)
        return float(min(right.min(), left.min()))

    def to_record(self):
        return {
            "lambda": self.lam,
            "c": self.c,
            "feasible": self.feasible,
            "trend_slope": self.trend_slope,
            "violation_trend": [[int(n), float(c)] for n, c in self.violation_trend],
            "sample_count": self.sample_count,
        }


# ---------------------------------------------------------------------------
# sampling


def _uniform_in_ball(rng, dim, radius):
    g = rng.normal(size=dim)
    g /= np.linalg.norm(g)
    return radius * rng.uniform() ** (1.0 / dim) * g


def _depth_point(domain, direction, frac):
    w = domain.witness
    b = boundary_hit(domain, w, direction)
    return w + frac * (b - w)


def sample_pairs(domain, strategy, count, seed=0):
    """Deterministic point pairs.

    ``boundary-approaching`` puts pair ``n`` (n = 2..count+1) at depth
    fraction ``1 - 1/n`` along two random rays from the witness;
    ``radial-sequence`` gives ``(1 - 1/n, 1 - 1/(n + pi))`` along the first
    coordinate axis, exactly as stated on the disk and ball.
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    rng = np.random.default_rng(seed)
    n_dim = domain.dimension
    m = 2 * n_dim
    R = domain.bounding_radius
    if strategy == "uniform-interior":
        out = []
        while len(out) < count:
            pair = []
            while len(pair) < 2:
                x = _uniform_in_ball(rng, m, R)
                z = x[0::2] + 1j * x[1::2]
                if contains(domain, z):
                    pair.append(z)
            out.append((pair[0], pair[1]))
        return out
    if strategy == "boundary-approaching":
        out = []
        for n in range(2, count + 2):
            g = rng.normal(size=(2, m))
            dirs = g[:, 0::2] + 1j * g[:, 1::2]
            out.append(tuple(_depth_point(domain, d, 1 - 1 / n) for d in dirs))
        return out
    e1 = np.zeros(n_dim, complex)
    e1[0] = 1
    return [
        (_depth_point(domain, e1, 1 - 1 / n), _depth_point(domain, e1, 1 - 1 / (n + np.pi)))
        for n in range(2, count + 2)
    ]


# ---------------------------------------------------------------------------
# envelope fitting


def _arrays(samples):
    d = np.array([s.source_distance for s in samples], dtype=float)
    lo = np.array([s.image_lower for s in samples], dtype=float)
    hi = np.array([s.image_upper for s in samples], dtype=float)
    return d, lo, hi


def min_c(d, lo, hi, lam):
    """Smallest ``c >= 0`` making ``lam`` feasible."""
    return float(max(0.0, np.max(hi - lam * d), np.max(d / lam - lo)))


def _right_slope(d, lo, hi, lam):
    """Right derivative of ``lam + min_c(lam)``."""
    up = hi - lam * d
    dn = d / lam - lo
    top = max(0.0, up.max(), dn.max())
    tol = 1e-12 * max(1.0, abs(top))
    slopes = [0.0] if top <= tol else []
    slopes.extend(-d[up >= top - tol])
    slopes.extend(-d[dn >= top - tol] / lam**2)
    return 1.0 + max(slopes)


def _fit(d, lo, hi):
    if _right_slope(d, lo, hi, 1.0) >= 0:
        return 1.0
    a = 1.0
    b = max(1.0, float(np.max(hi / d))) * 2.0
    while _right_slope(d, lo, hi, b) < 0:
        b *= 2.0
    while b - a > 1e-14 * b:
        mid = 0.5 * (a + b)
        if _right_slope(d, lo, hi, mid) < 0:
            a = mid
        else:
            b = mid
    return b


def _trend(d, lo, hi, lam):
    n = len(d)
    sizes = np.unique(np.geomspace(min(4, n), n, 12).round().astype(int))
    series = [(int(k), min_c(d[:k], lo[:k], hi[:k], lam)) for k in sizes]
    half = series[len(series) // 2 :]
    if len(half) < 2:
        return series, 0.0
    x = np.log([k for k, _ in half])
    y = np.array([c for _, c in half])
    return series, float(np.polyfit(x, y, 1)[0])


def fit_envelope(samples, trend_threshold=TREND_THRESHOLD):
    """Canonical minimal envelope: the smallest minimizer of ``lam + c`` over
    ``lam >= 1`` with ``c = min_c(lam)``.

    That point lies on the Pareto front of feasible ``(lam, c)``.  Feasibility
    is judged by the growth of ``min_c`` at the fitted ``lam`` along nested
    sample prefixes (in the given order): a slope in ``log n`` above
    ``trend_threshold`` marks the envelope as not feasible.
    """
    kept = [s for s in samples if s.source_distance > 0]
    if len(kept) < 2:
        raise InsufficientSamples(f"need at least 2 samples with positive source distance, got {len(kept)}")
    d, lo, hi = _arrays(kept)
    lam = _fit(d, lo, hi)
    c = min_c(d, lo, hi, lam)
    series, slope = _trend(d, lo, hi, lam)
    return QIEnvelope(lam, c, slope <= trend_threshold, series, slope, len(kept))


def is_pareto_minimal(samples, env, lam_step=0.01, c_step=1e-3):
    """Re-check: shrinking ``lam`` by 1% or ``c`` by ``c_step`` breaks feasibility."""
    d, lo, hi = _arrays([s for s in samples if s.source_distance > 0])
    ok_lam = env.lam <= 1.0 or min_c(d, lo, hi, env.lam * (1 - lam_step)) > env.c
    ok_c = env.c <= 0.0 or min_c(d, lo, hi, env.lam) > env.c - c_step
    return ok_lam and ok_c


# ---------------------------------------------------------------------------
# growth bound for disk self-maps and the spiral counterexample


def _prefix_growth(values):
    n = len(values)
    sizes = np.unique(np.geomspace(min(4, n), n, 12).round().astype(int))
    running = np.maximum.accumulate(values)
    series = [(int(k), float(running[k - 1])) for k in sizes]
    half = series[len(series) // 2 :]
    if len(half) < 2:
        return series, 0.0
    slope = np.polyfit(np.log([k for k, _ in half]), [v for _, v in half], 1)[0]
    return series, float(slope)


def proposition_a_check(disk_map, k, pairs, strict=True):
    """Empirical ``C_k`` for ``d(f z, f w) <= C_k (d(z, w) + 1)`` on a disk self-map.

    ``regime_counts`` splits pairs by the pseudo-distance against
    ``kiernan_threshold(k)``.  With ``strict=False`` a dilatation above ``k``
    is reported instead of raised.  The reverse ratio ``d(z, w) / (d(f z, f w) + 1)``
    is reported separately and never asserted.
    """
    if disk_map.source_dim != 1:
        raise ValidationError("proposition_a_check needs a map of the disk")
    thr = kiernan_threshold(k)
    pts = {}
    for z, w in pairs:
        for x in (complex(np.ravel(z)[0]), complex(np.ravel(w)[0])):
            pts.setdefault(x, None)
    worst_k, worst_at = 0.0, None
    for x in pts:
        fx = complex(disk_map(np.array([x]))[0])
        if not abs(fx) < 1:
            raise NotSelfMap("image leaves the unit disk", witness=np.array([x]))
        pts[x] = fx
        try:
            kx = dilatation(disk_map, x)
        except UndefinedDerivative:
            continue
        if kx > worst_k:
            worst_k, worst_at = kx, x
    violated = worst_k > k + K_TOL
    if violated and strict:
        raise DilatationExceedsK(f"dilatation {worst_k:.6g} exceeds k = {k}", witness=np.array([worst_at]))
    ratios, reverse = [], []
    near = far = 0
    for z, w in pairs:
        z, w = complex(np.ravel(z)[0]), complex(np.ravel(w)[0])
        d = poincare_distance(z, w)
        dd = poincare_distance(pts[z], pts[w])
        ratios.append(dd / (d + 1))
        reverse.append(d / (dd + 1))
        if pseudo_distance(z, w) < thr:
            near += 1
        else:
            far += 1
    ratios = np.array(ratios)
    series, slope = _prefix_growth(ratios)
    return {
        "C_k_estimate": float(ratios.max()),
        "reverse_estimate": float(max(reverse)),
        "regime_counts": (near, far),
        "threshold": thr,
        "holds": bool(np.isfinite(ratios.max())),
        "prefix_trend": series,
        "trend_slope": slope,
        "max_dilatation": worst_k,
        "dilatation_violated": bool(violated),
    }


def divergence_source_closed_form(n):
    return 0.5 * np.log((2 * n + 2 * np.pi - 1) / (2 * n - 1))


def counterexample_divergence(N):
    """Rows ``(n, source_distance, image_distance)`` along ``(1 - 1/n, 1 - 1/(n + pi))``."""
    if N < 2:
        raise ValidationError("N must be >= 2")
    f = spiral_map()
    rows = []
    for n in range(2, N + 1):
        a, b = 1 - 1 / n, 1 - 1 / (n + np.pi)
        src = poincare_distance(a, b)
        img = poincare_distance(complex(f(np.array([a]))[0]), complex(f(np.array([b]))[0]))
        if abs(src - divergence_source_closed_form(n)) > 1e-9:
            raise AssertionError(f"source distance off its closed form at n = {n}")
        if rows and n >= 3 and not img > rows[-1]["image_distance"]:
            raise AssertionError(f"image distance not increasing at n = {n}")
        rows.append({"n": n, "source_distance": src, "image_distance": img})
    return rows


# ---------------------------------------------------------------------------
# end-to-end pipeline


@dataclass
class PipelineConfig:
    pairs: int = 200
    strategy: str = "uniform-interior"
    seed: int = 0
    grid_count: int = 64
    spot_checks: int = 256
    bracket: BracketConfig = field(default_factory=BracketConfig)
    workers: int | None = None


def theorem_pipeline(F, source, target, config=None):
    """qc constant, structure deviation and a fitted envelope for ``F: source -> target``."""
    config = config or PipelineConfig()
    report = {"map": F.describe(), "source": source.describe(), "target": target.describe()}
    for name, dom in (("source", source), ("target", target)):
        cr = verify_strong_convexity(dom)
        report[f"{name}_curvature"] = cr.min_normal_curvature
        if not cr.passed:
            raise StrongConvexityFailed(f"{name} domain is not strongly convex", stage=name, witness=cr.witness_point)

    for z in interior_grid(source, config.spot_checks, seed=config.seed + 3):
        if not contains(target, F(z)):
            raise NotSelfMap("F maps a source point outside the target", stage="spot-check", witness=z)

    field_ = qc_field(F, source, config.grid_count)
    inv = F.inverse_map() or numeric_inverse(F, source, seed=config.seed)
    sd = structure_deviation(F, inv, target, config.grid_count)

    pairs = sample_pairs(source, config.strategy, config.pairs, config.seed)
    src_cfg = BracketConfig(**{**config.bracket.__dict__, "closed_form": True})
    pairs = [(p, q) for p, q in pairs if not np.array_equal(p, q)]

    def one(pair):
        p, q = pair
        sb = kobayashi_bracket(source, p, q, src_cfg)
        tb = kobayashi_bracket(target, F(p), F(q), config.bracket)
        return DistancePairSample(pair, 0.5 * (sb.lower + sb.upper), tb.lower, tb.upper), (sb.width, tb.width)

    results = ordered_map(one, pairs, config.workers)
    samples = [r[0] for r in results]
    widths = [r[1] for r in results]
    env = fit_envelope(samples)
    widths = np.array(widths)
    report.update({
        "qc_sup": field_.sup,
        "qc_skipped": field_.skipped,
        "structure_dev": sd.sup_norm,
        "max_square_defect": sd.max_square_defect,
        "envelope": env.to_record(),
        "pair_count": len(samples),
        "max_bracket_width": float(widths[:, 1].max()),
        "total_bracket_width": float(widths[:, 1].sum()),
        "max_source_width": float(widths[:, 0].max()),
    })
    return {
        "qc_sup": field_.sup,
        "envelope": env,
        "structure_dev": sd.sup_norm,
        "samples": samples,
        "report": report,
    }


def pair_table(samples):
    return [
        {
            "p": as_point(s.source_pair[0]).tolist(),
            "q": as_point(s.source_pair[1]).tolist(),
            "source_distance": s.source_distance,
            "image_lower": s.image_lower,
            "image_upper": s.image_upper,
        }
        for s in samples
    ]
