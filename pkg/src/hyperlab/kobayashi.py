"""Two-sided brackets for the Kobayashi distance of a bounded convex domain.

Upper bounds come from polynomial discs ``P: Δ -> D`` with ``P(σ) = p`` and
``P(τ) = q``, which certify ``d_D(p, q) <= d_Δ(σ, τ)``.  Containment is only
enforced on the boundary circle: for convex ``D`` the values of a holomorphic
disc are averages of its boundary values, so ``P(∂Δ) ⊂ D̄`` gives
``P(Δ) ⊂ D̄``.

Lower bounds come from holomorphic maps ``D -> Δ``: supporting half-planes
followed by a Cayley transform, and the bounding ball ``B(0, R) ⊃ D``.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from .disk import ball_distance, poincare_distance
from .domains import (
    SupportingFunctional,
    as_point,
    boundary_hit,
    rolling_radius,
    sphere_directions,
    supporting_functional_at,
    to_complex,
    to_real,
)
from .errors import BracketInverted, NoFeasibleDisc, ValidationError

PENALTY_STAGES = 5
PENALTY_START = 1.0
DENSE_FACTOR = 8
MAX_REPAIRS = 6
LBFGS_TOL = {"ftol": 1e-12, "gtol": 1e-8}
SQP_FTOL = 1e-10
# sample slack may undershoot the margin by this fraction (SQP round-off)
SAMPLE_TOL = 1e-3
# a cold-start polish may end at most this (relative) amount above the penalty value
POLISH_SLACK = 1e-3
NODE_JITTER = 0.02
COEF_JITTER = 0.005


@dataclass
class BracketConfig:
    degree: int = 8
    boundary_samples: int = 256
    functional_count: int = 32
    restarts: int = 1
    seed: int = 0
    closed_form: bool = True
    containment_margin: float | None = None
    maxiter: int = 400

    def margin_for(self, domain):
        if self.containment_margin is not None:
            return self.containment_margin
        return 1e-6 * domain.bounding_radius


@dataclass
class AnalyticDisc:
    """Polynomial disc ``f(ζ) = Σ a_k ζ^k`` with ``f(σ) = p`` and ``f(τ) = q``."""

    coefficients: np.ndarray
    nodes: tuple
    converged: bool = True
    iterations: int = 0

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        powers = zeta[..., None] ** np.arange(self.degree + 1)
        return powers @ self.coefficients

    @property
    def value(self):
        if max(abs(self.nodes[0]), abs(self.nodes[1])) >= 1:
            return np.inf
        return poincare_distance(*self.nodes)

    def to_record(self):
        return {
            "degree": self.degree,
            "coefficients": [[[float(v.real), float(v.imag)] for v in row] for row in self.coefficients],
            "nodes": [[float(s.real), float(s.imag)] for s in self.nodes],
            "converged": self.converged,
            "iterations": self.iterations,
        }


# ---------------------------------------------------------------------------
# upper bound


def _to_disk(w):
    s = np.sqrt(1.0 + abs(w) ** 2)
    return w / s, s


def _from_disk(z):
    return z / np.sqrt(max(1.0 - abs(z) ** 2, 1e-300))


def _pull_back(g, w, s):
    """Gradient through ``z = w / sqrt(1 + |w|^2)`` (complex-form gradients)."""
    return g / s - w * (np.conj(w) * g).real / s**3


def _distance_and_grad(sig, tau):
    X = abs(sig - tau) ** 2
    Y = abs(1 - np.conj(sig) * tau) ** 2
    one_m = (1 - abs(sig) ** 2) * (1 - abs(tau) ** 2) / Y
    s = X / Y
    r = np.sqrt(s)
    d = np.log1p(r) - 0.5 * np.log(one_m)
    dds = 1.0 / (one_m * 2.0 * r)
    gs_sig = (2 * (sig - tau) * Y - X * (-2 * tau * np.conj(1 - np.conj(sig) * tau))) / Y**2
    gs_tau = (2 * (tau - sig) * Y - X * (-2 * sig * (1 - np.conj(sig) * tau))) / Y**2
    return d, dds * gs_sig, dds * gs_tau


class _DiscProblem:
    """Penalized disc search in the variables ``(w_σ, w_τ, a_2..a_m)``.

    ``a_0`` and ``a_1`` are eliminated through the two interpolation
    conditions; the map is holomorphic in every remaining variable, which
    keeps the gradient algebra complex-linear.
    """

    def __init__(self, domain, p, q, degree, samples):
        self.domain = domain
        self.p = p
        self.q = q
        self.n = p.size
        self.m = degree
        self.omega = np.exp(2j * np.pi * np.arange(samples) / samples)
        self.ks = np.arange(2, degree + 1)
        self.W = self.omega[:, None] ** self.ks  # (M, m-1)

    def size(self):
        return 4 + 2 * self.n * (self.m - 1)

    def unpack(self, x):
        ws = x[0] + 1j * x[1]
        wt = x[2] + 1j * x[3]
        rest = to_complex(x[4:]).reshape(self.m - 1, self.n) if self.m > 1 else np.zeros((0, self.n), complex)
        return ws, wt, rest

    def pack(self, sig, tau, rest):
        ws, wt = _from_disk(sig), _from_disk(tau)
        return np.concatenate([[ws.real, ws.imag, wt.real, wt.imag], to_real(rest.ravel())])

    def coefficients(self, sig, tau, rest):
        R = lambda z: (z ** self.ks) @ rest
        a1 = (self.q - self.p - R(tau) + R(sig)) / (tau - sig)
        a0 = self.p - a1 * sig - R(sig)
        return np.vstack([a0, a1, rest])

    def boundary_values(self, x, omega=None):
        ws, wt, rest = self.unpack(x)
        sig, _ = _to_disk(ws)
        tau, _ = _to_disk(wt)
        coef = self.coefficients(sig, tau, rest)
        om = self.omega if omega is None else omega
        return (om[:, None] ** np.arange(self.m + 1)) @ coef

    def _state(self, x, need_derivatives=True):
        key = x.tobytes()
        memo = getattr(self, "_memo", None)
        if memo is not None and memo[0] == key and (memo[1] or not need_derivatives):
            return memo[2]
        st = self._compute_state(x, need_derivatives)
        self._memo = (key, need_derivatives, st)
        return st

    def _compute_state(self, x, need_derivatives):
        ws, wt, rest = self.unpack(x)
        sig, s_sig = _to_disk(ws)
        tau, s_tau = _to_disk(wt)
        ks = self.ks
        R = lambda z: (z**ks) @ rest
        dR = lambda z: (ks * z ** (ks - 1)) @ rest
        D = tau - sig
        a1 = (self.q - self.p - R(tau) + R(sig)) / D
        S = self.omega - sig
        st = {"ws": ws, "wt": wt, "sig": sig, "tau": tau, "s_sig": s_sig, "s_tau": s_tau}
        st["f"] = self.p + np.outer(S, a1) + self.W @ rest - R(sig)
        if need_derivatives:
            da1_sig = (dR(sig) + a1) / D
            da1_tau = (-dR(tau) - a1) / D
            st["df_sig"] = np.outer(S, da1_sig) - a1 - dR(sig)
            st["df_tau"] = np.outer(S, da1_tau)
            st["C"] = np.outer(S, (sig**ks - tau**ks) / D) + self.W - sig**ks
        return st

    def _real_grad(self, st, g_sig, g_tau, g_rest):
        gs = _pull_back(g_sig, st["ws"], st["s_sig"])
        gt = _pull_back(g_tau, st["wt"], st["s_tau"])
        return np.concatenate([[gs.real, gs.imag, gt.real, gt.imag], to_real(g_rest.ravel())])

    def __call__(self, x, mu, margin):
        """Distance plus quadratic hinge penalty, with its gradient."""
        st = self._state(x)
        xr = to_real(st["f"])
        h = np.maximum(self.domain.rho(xr) + margin, 0.0)
        val, g_sig, g_tau = _distance_and_grad(st["sig"], st["tau"])
        val = val + mu * float(h @ h)
        g_rest = np.zeros((self.m - 1, self.n), complex)
        if np.any(h > 0):
            Wt = (2 * mu * h)[:, None] * to_complex(self.domain.grad(xr))
            g_sig = g_sig + np.sum(Wt * np.conj(st["df_sig"]))
            g_tau = g_tau + np.sum(Wt * np.conj(st["df_tau"]))
            g_rest = np.conj(st["C"]).T @ Wt
        return float(val), self._real_grad(st, g_sig, g_tau, g_rest)

    def objective(self, x):
        st = self._state(x, need_derivatives=False)
        val, g_sig, g_tau = _distance_and_grad(st["sig"], st["tau"])
        return float(val), self._real_grad(st, g_sig, g_tau, np.zeros((self.m - 1, self.n), complex))

    def slack(self, x, margin):
        """``-(rho + margin)`` at the boundary samples (feasible when >= 0)."""
        st = self._state(x, need_derivatives=False)
        return -(self.domain.rho(to_real(st["f"])) + margin)

    def slack_jac(self, x, margin=0.0):
        st = self._state(x)
        G = to_complex(self.domain.grad(to_real(st["f"])))  # (M, n)
        g_sig = np.sum(G * np.conj(st["df_sig"]), axis=1)
        g_tau = np.sum(G * np.conj(st["df_tau"]), axis=1)
        gs = _pull_back(g_sig, st["ws"], st["s_sig"])
        gt = _pull_back(g_tau, st["wt"], st["s_tau"])
        g_rest = G[:, None, :] * np.conj(st["C"])[:, :, None]  # (M, m-1, n)
        J = np.concatenate(
            [np.stack([gs.real, gs.imag, gt.real, gt.imag], axis=1),
             to_real(g_rest.reshape(len(G), -1))], axis=1)
        return -J

    def feasibility(self, x, margin):
        """(worst sample slack vs margin, worst dense-circle rho)."""
        rho_s = self.domain.rho(to_real(self.boundary_values(x)))
        dense = np.exp(2j * np.pi * np.arange(DENSE_FACTOR * self.omega.size) / (DENSE_FACTOR * self.omega.size))
        rho_d = self.domain.rho(to_real(self.boundary_values(x, dense)))
        return float(np.max(rho_s + margin)), float(np.max(rho_d))

    def disc(self, x, converged, its):
        ws, wt, rest = self.unpack(x)
        sig, _ = _to_disk(ws)
        tau, _ = _to_disk(wt)
        return AnalyticDisc(self.coefficients(sig, tau, rest), (sig, tau), converged, its)


def _line_slice_disc(domain, p, q):
    """Affine disc in the complex line through p and q, centred in the slice."""
    L = float(np.linalg.norm(q - p))
    u = (q - p) / L
    phis = np.exp(2j * np.pi * np.arange(16) / 16)
    gamma = 0.5 * L + 0j

    def hits(g, dirs):
        c = p + g * u
        return np.array([np.vdot(u, boundary_hit(domain, c, e * u) - c) for e in dirs])

    for _ in range(10):
        gamma = gamma + np.mean(hits(gamma, phis))
    fine = np.exp(2j * np.pi * np.arange(64) / 64)
    r = 0.999 * float(np.min(np.abs(hits(gamma, fine))))
    sig = -gamma / r
    tau = (L - gamma) / r
    worst = max(abs(sig), abs(tau))
    if worst >= 0.98:
        # p or q outside the inscribed disc: enlarge (infeasible start)
        r *= worst / 0.95
        sig, tau = -gamma / r, (L - gamma) / r
    return p + gamma * u, r * u, sig, tau


def _ladder(degree):
    out = []
    d = degree
    while d >= 1:
        out.append(d)
        d //= 2
    return out[::-1]


def _optimize(prob, x0, margin, maxiter):
    """Penalty continuation as a warm start (intermediate stages are capped)."""
    x = x0
    its = 0
    mu = PENALTY_START
    for _ in range(PENALTY_STAGES):
        res = minimize(prob, x, args=(mu, margin), jac=True, method="L-BFGS-B",
                       options={"maxiter": max(maxiter // 4, 25), **LBFGS_TOL})
        x = res.x
        its += res.nit
        mu *= 10
    return x, its


def _polish(prob, x, margin, maxiter):
    """SQP on the sampled constraints; the penalty leaves a small violation
    that this step removes exactly."""
    res = minimize(
        prob.objective, x, jac=True, method="SLSQP",
        constraints=[{"type": "ineq", "fun": prob.slack, "jac": prob.slack_jac, "args": (margin,)}],
        options={"maxiter": max(maxiter // 4, 25), "ftol": SQP_FTOL},
    )
    # status 9 is the iteration cap; 8 (no descent direction) at a feasible
    # point means the sampled problem is solved to working precision
    return res.x, res.nit, res.status != 9


def _feasible(prob, x, margin):
    viol_s, viol_d = prob.feasibility(x, margin)
    return viol_s <= SAMPLE_TOL * margin and viol_d <= 0, max(viol_s, viol_d, 0.0)


def _penalty_repair(prob, x, margin, maxiter):
    """Largest-weight penalty with an inflated margin until contained."""
    mu = PENALTY_START * 10.0 ** (PENALTY_STAGES - 1)
    work = margin
    for _ in range(MAX_REPAIRS):
        ok, viol = _feasible(prob, x, margin)
        if ok:
            return x
        work = work + 2 * viol + 1e-12
        x = minimize(prob, x, args=(mu, work), jac=True, method="L-BFGS-B",
                     options={"maxiter": maxiter, **LBFGS_TOL}).x
    return x if _feasible(prob, x, margin)[0] else None


def _solve_feasible(prob, x0, margin, maxiter, mode="cold"):
    """Optimize, then tighten the working margin until the disc is contained
    at the samples and on a circle grid ``DENSE_FACTOR`` times finer.

    ``mode`` is ``"cold"`` (penalty schedule, then polish), ``"warm"`` (x0 is
    a feasible disc; polish only, never return anything worse) or
    ``"restart"`` (perturbed start; polish only).  A polish that lands far
    above its starting value is treated as a failed step and replaced by the
    penalty-only repair of the starting point.
    """
    x, its = (x0, 0) if mode != "cold" else _optimize(prob, x0, margin, maxiter)
    start = prob.objective(x)[0]
    if mode == "warm":
        ceiling = start + 1e-9
    elif mode == "cold":
        ceiling = start + POLISH_SLACK * (1 + start)
    else:
        ceiling = np.inf
    work = margin
    found = []
    conv = False
    xs = x
    for _ in range(MAX_REPAIRS):
        xp, nit, conv = _polish(prob, xs, work, maxiter)
        its += nit
        ok, viol = _feasible(prob, xp, margin)
        if ok:
            found.append(xp)
            break
        if np.all(np.isfinite(xp)):
            xs = xp
        work = work + 2 * viol + 1e-12
    if not found or prob.objective(found[0])[0] > ceiling:
        conv = conv and bool(found)
        fallback = x if mode == "warm" else _penalty_repair(prob, x, margin, maxiter)
        if fallback is not None and _feasible(prob, fallback, margin)[0]:
            found.append(fallback)
    if not found:
        return None, its, False
    best = min(found, key=lambda v: prob.objective(v)[0])
    return best, its, conv


def _check_dims(domain, p, q):
    for name, z in (("p", p), ("q", q)):
        if z.size != domain.dimension:
            raise ValidationError(f"{name} has dimension {z.size}, domain has {domain.dimension}")


def upper_bound_disc(domain, p, q, degree=8, boundary_samples=256, restarts=1, seed=0,
                     containment_margin=None, maxiter=400):
    """Best polynomial-disc upper bound for ``d_D(p, q)``.

    Degrees are climbed ``m >> k, ..., m//2, m``, each stage warm-started
    from the previous best (zero-padded), so doubling the degree never
    increases the returned value.  Every stage also tries ``restarts - 1``
    perturbed starts drawn from a generator seeded by ``(seed, degree)``.
    """
    p, q = as_point(p), as_point(q)
    _check_dims(domain, p, q)
    if np.array_equal(p, q):
        raise ValidationError("upper_bound_disc needs p != q")
    if degree < 1:
        raise ValidationError("degree must be >= 1")
    if boundary_samples < 8 * degree:
        raise ValidationError("boundary_samples must be >= 8 * degree")
    for z in (p, q):
        if not domain.rho_at(z) < 0:
            raise ValidationError("points must lie strictly inside the domain", witness=z)
    margin = 1e-6 * domain.bounding_radius if containment_margin is None else containment_margin

    center, axis, sig0, tau0 = _line_slice_disc(domain, p, q)
    scale = max(float(np.linalg.norm(axis)), 1e-3)
    best = None  # (value, x, prob)
    total_its = 0
    all_converged = True
    for deg in _ladder(degree):
        prob = _DiscProblem(domain, p, q, deg, boundary_samples)
        rest = np.zeros((deg - 1, p.size), complex)
        if best is None:
            base = prob.pack(sig0, tau0, rest)
            cands = [(base, "cold")]
        else:
            old = best[2].disc(best[1], True, 0)
            k = old.degree - 1
            if k > 0:
                rest[:k] = old.coefficients[2:]
            base = prob.pack(old.nodes[0], old.nodes[1], rest)
            cands = [(base, "warm")]
            best = (best[0], base, prob)
        if restarts > 1:
            rng = np.random.default_rng([seed, deg])
            for _ in range(restarts - 1):
                noise = rng.normal(size=base.size)
                noise[:4] *= NODE_JITTER
                noise[4:] *= COEF_JITTER * scale
                cands.append((base + noise, "restart"))
        for x0, mode in cands:
            x, its, conv = _solve_feasible(prob, x0, margin, maxiter, mode)
            total_its += its
            all_converged = all_converged and (conv or mode == "restart")
            if x is None:
                continue
            val = prob.disc(x, conv, its).value
            if np.isfinite(val) and (best is None or val < best[0]):
                best = (val, x, prob)

    if best is None:
        raise NoFeasibleDisc("no candidate disc stayed inside the domain", witness=(p, q))
    if not all_converged:
        warnings.warn("disc optimizer hit its iteration cap; returning best feasible disc", RuntimeWarning)
    disc = best[2].disc(best[1], all_converged, total_its)
    return float(disc.value), disc


# ---------------------------------------------------------------------------
# lower bound


@dataclass
class LowerWitness:
    kind: str
    functional: SupportingFunctional | None = None
    radius: float | None = None
    center: np.ndarray | None = None

    def to_record(self):
        out = {"kind": self.kind}
        if self.functional is not None:
            out["anchor"] = [[float(v.real), float(v.imag)] for v in self.functional.anchor]
            out["normal"] = [[float(v.real), float(v.imag)] for v in self.functional.normal]
        if self.radius is not None:
            out["radius"] = self.radius
        if self.center is not None:
            out["center"] = [[float(v.real), float(v.imag)] for v in self.center]
        return out


def half_plane_distance(lp, lq):
    """Hyperbolic distance in ``{Re w < 0}`` via the Cayley map ``w -> (w + s)/(w - s)``."""
    s = -np.real(lp)
    return poincare_distance((lp + s) / (lp - s), (lq + s) / (lq - s))


def lower_bound_caratheodory(domain, p, q, functional_count=32, bounding_ball=True):
    """Largest contraction bound over supporting half-planes and enclosing balls.

    Anchors: the two boundary hits of the real line through p and q, then
    ``functional_count - 2`` quasi-uniform boundary points.  With
    ``bounding_ball`` the domain is also compared with ``B(0, R)`` and, for
    quadrics, with the rolling balls tangent near p and near q.
    """
    p, q = as_point(p), as_point(q)
    _check_dims(domain, p, q)
    if functional_count < 4:
        raise ValidationError("functional_count must be >= 4")
    if np.array_equal(p, q):
        return 0.0, LowerWitness("coincident")
    anchors = [boundary_hit(domain, p, q - p), boundary_hit(domain, p, p - q)]
    for d in sphere_directions(2 * domain.dimension, functional_count - 2):
        anchors.append(boundary_hit(domain, domain.witness, to_complex(d)))
    best, witness = -np.inf, None
    for xi in anchors:
        ell = supporting_functional_at(domain, xi)
        val = half_plane_distance(ell(p), ell(q))
        if val > best:
            best, witness = val, LowerWitness("half-plane", ell)
    if not bounding_ball:
        return float(best), witness
    R = domain.bounding_radius
    val = ball_distance(p / R, q / R)
    if val > best:
        best, witness = val, LowerWitness("bounding-ball", radius=R)
    r = rolling_radius(domain)
    if r is not None:
        # tangent at the foot of the normal ray from each point
        for z in (p, q):
            n = domain.complex_grad(z)
            if np.linalg.norm(n) < domain.gradient_floor:
                continue
            xi = boundary_hit(domain, z, n)
            g = domain.complex_grad(xi)
            c = xi - r * g / np.linalg.norm(g)
            val = ball_distance((p - c) / r, (q - c) / r)
            if val > best:
                best, witness = val, LowerWitness("rolling-ball", radius=r, center=c)
    return float(best), witness


# ---------------------------------------------------------------------------


@dataclass
class DistanceBracket:
    lower: float
    upper: float
    lower_witness: LowerWitness | None = None
    upper_witness: AnalyticDisc | None = None
    config: dict = field(default_factory=dict)
    exact: bool = False

    @property
    def width(self):
        return self.upper - self.lower

    def to_record(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "width": self.width,
            "exact": self.exact,
            "lower_witness": None if self.lower_witness is None else self.lower_witness.to_record(),
            "upper_witness": None if self.upper_witness is None else self.upper_witness.to_record(),
            "config": self.config,
        }


def kobayashi_bracket(domain, p, q, config=None):
    config = config or BracketConfig()
    p, q = as_point(p), as_point(q)
    _check_dims(domain, p, q)
    echo = asdict(config)
    if np.array_equal(p, q):
        return DistanceBracket(0.0, 0.0, config=echo, exact=True)
    if config.closed_form and domain.kind in ("disk", "ball"):
        d = ball_distance(p, q)
        return DistanceBracket(d, d, LowerWitness("closed-form"), None, echo, exact=True)
    upper, disc = upper_bound_disc(
        domain, p, q, config.degree, config.boundary_samples, config.restarts, config.seed,
        config.margin_for(domain), config.maxiter,
    )
    lower, wit = lower_bound_caratheodory(domain, p, q, config.functional_count)
    if lower > upper + 1e-9:
        raise BracketInverted(f"lower {lower:.12g} exceeds upper {upper:.12g}", witness=(p, q))
    return DistanceBracket(lower, upper, wit, disc, echo)
