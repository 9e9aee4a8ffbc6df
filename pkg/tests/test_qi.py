import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlab.disk import poincare_distance
from hyperlab.domains import contains, ellipsoid, unit_ball, unit_disk
from hyperlab.errors import DilatationExceedsK, InsufficientSamples, NotSelfMap, ValidationError
from hyperlab.kobayashi import BracketConfig
from hyperlab.maps import disk_mobius, linear_map, spiral_map
from hyperlab.qi import (
    DistancePairSample,
    PipelineConfig,
    counterexample_divergence,
    divergence_source_closed_form,
    fit_envelope,
    is_pareto_minimal,
    min_c,
    proposition_a_check,
    sample_pairs,
    theorem_pipeline,
)


def synthetic(lam0, c0, n=200, seed=0):
    """Samples inside the (lam0, c0) envelope with both sides saturated."""
    rng = np.random.default_rng(seed)
    out = []
    for d in rng.uniform(0.05, 6, n):
        a, b = max(d / lam0 - c0, 0.0), lam0 * d + c0
        lo = rng.uniform(a, b)
        out.append(DistancePairSample((None, None), d, lo, rng.uniform(lo, b)))
    out.append(DistancePairSample((None, None), 0.5, 0.5 * lam0, 0.5 * lam0 + c0))
    out.append(DistancePairSample((None, None), 4.0, 4.0 * lam0, 4.0 * lam0 + c0))
    return out


def brute_force_dominated(samples, env, step=1e-3, span=0.1):
    d = np.array([s.source_distance for s in samples])
    lo = np.array([s.image_lower for s in samples])
    hi = np.array([s.image_upper for s in samples])
    lams = np.arange(max(1.0, env.lam - span), env.lam + span, step)
    for lam in lams:
        need = min_c(d, lo, hi, lam)
        if lam + need < env.lam + env.c - 1e-9:
            return True
        if lam <= env.lam and need < env.c - 1e-9:
            return True
    return False


def test_isometric_samples_give_unit_envelope():
    s = [DistancePairSample((None, None), d, d, d) for d in np.linspace(0.1, 5, 50)]
    env = fit_envelope(s)
    assert env.lam == 1.0 and env.c == 0.0 and env.feasible


def test_needs_two_samples():
    with pytest.raises(InsufficientSamples):
        fit_envelope([DistancePairSample((None, None), 1.0, 1.0, 1.0)])
    with pytest.raises(InsufficientSamples):
        fit_envelope([DistancePairSample((None, None), 0.0, 0.0, 0.0)] * 5)


def test_inverted_interval_rejected():
    with pytest.raises(ValidationError):
        DistancePairSample((None, None), 1.0, 2.0, 1.0)


@pytest.mark.parametrize("lam0,c0", [(1.3, 0.2), (2.0, 0.05), (1.05, 1.0)])
def test_recovers_known_envelope(lam0, c0):
    s = synthetic(lam0, c0)
    env = fit_envelope(s)
    assert env.lam == pytest.approx(lam0, abs=1e-6)
    assert env.c == pytest.approx(c0, abs=1e-6)
    assert env.slack(s) >= -1e-9
    assert is_pareto_minimal(s, env)
    assert not brute_force_dominated(s, env)


@given(st.floats(1.0, 3.0), st.floats(0.0, 2.0), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_fit_is_feasible_and_minimal(lam0, c0, seed):
    s = synthetic(lam0, c0, n=60, seed=seed)
    env = fit_envelope(s)
    assert env.slack(s) >= -1e-9
    assert env.lam + env.c <= lam0 + c0 + 1e-9


def test_growing_violation_flagged():
    # image distance grows like d + log n: no fixed c works as n grows
    s = [DistancePairSample((None, None), 1.0, 1.0 + np.log(n), 1.0 + np.log(n)) for n in range(2, 300)]
    env = fit_envelope(s)
    assert not env.feasible and env.trend_slope > 0.1


def test_sampling_strategies():
    E = ellipsoid([[1, 0.6], [1.5, 1]])
    for strat in ("uniform-interior", "boundary-approaching", "radial-sequence"):
        pairs = sample_pairs(E, strat, 30, seed=1)
        assert len(pairs) == 30
        assert all(contains(E, p) and contains(E, q) for p, q in pairs)
        again = sample_pairs(E, strat, 30, seed=1)
        assert all(np.array_equal(a[0], b[0]) for a, b in zip(pairs, again))
    with pytest.raises(ValidationError):
        sample_pairs(E, "nope", 3)


def test_radial_sequence_on_disk():
    pairs = sample_pairs(unit_disk(), "radial-sequence", 5)
    for n, (p, q) in zip(range(2, 7), pairs):
        assert p[0] == pytest.approx(1 - 1 / n, abs=1e-15)
        assert q[0] == pytest.approx(1 - 1 / (n + np.pi), abs=1e-15)


def test_divergence_table():
    rows = counterexample_divergence(60)
    assert rows[0]["source_distance"] == pytest.approx(0.564790, abs=1e-5)
    assert rows[0]["image_distance"] == pytest.approx(1.66386, abs=1e-3)
    bound = 0.5 * np.log(1 + 2 * np.pi)
    assert all(r["source_distance"] <= bound for r in rows)
    assert divergence_source_closed_form(2) == pytest.approx(rows[0]["source_distance"], abs=1e-12)


def test_disk_bound_holomorphic():
    pairs = sample_pairs(unit_disk(), "uniform-interior", 300)
    res = proposition_a_check(disk_mobius(0.3 + 0.2j, 0.7), 0.0, pairs)
    assert res["C_k_estimate"] <= 1 + 1e-9
    assert sum(res["regime_counts"]) == 300


def test_disk_bound_rejects_large_dilatation():
    pairs = sample_pairs(unit_disk(), "radial-sequence", 50)
    with pytest.raises(DilatationExceedsK):
        proposition_a_check(spiral_map(), 0.5, pairs)
    res = proposition_a_check(spiral_map(), 0.5, pairs, strict=False)
    assert res["dilatation_violated"]


def test_disk_bound_not_self_map():
    grow = linear_map([[2.0]], [[0.0]])
    with pytest.raises(NotSelfMap):
        proposition_a_check(grow, 0.0, [(np.array([0.6]), np.array([0.1]))])


def test_pipeline_small_ball():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        F = linear_map(np.eye(2) / 1.1, 0.1 * np.eye(2) / 1.1)
        from hyperlab.maps import deformed_image_domain

        out = theorem_pipeline(F, unit_ball(2), deformed_image_domain(2, 0.1),
                               PipelineConfig(pairs=12, grid_count=16, spot_checks=32))
    assert out["qc_sup"] == pytest.approx(0.1, abs=1e-9)
    env = out["envelope"]
    assert env.lam >= 1 and env.slack(out["samples"]) >= -1e-9


def test_pipeline_rejects_non_self_map():
    with pytest.raises(NotSelfMap):
        theorem_pipeline(linear_map([[2.0]], [[0.0]]), unit_disk(), unit_disk(),
                         PipelineConfig(pairs=4, grid_count=4, spot_checks=16,
                                        bracket=BracketConfig()))


def test_mobius_samples_unit_envelope():
    f = disk_mobius(0.4 - 0.2j, 0.3)
    s = []
    for p, q in sample_pairs(unit_disk(), "uniform-interior", 200):
        d = poincare_distance(p[0], q[0])
        dd = poincare_distance(f(p)[0], f(q)[0])
        s.append(DistancePairSample((p, q), d, dd, dd))
    env = fit_envelope(s)
    assert env.lam == pytest.approx(1.0, abs=1e-9) and env.c <= 1e-9


@given(st.integers(0, 10**6), st.integers(1, 40))
@settings(max_examples=40, deadline=None)
def test_more_data_never_shrinks_envelope(seed, extra):
    rng = np.random.default_rng(seed)
    base = synthetic(rng.uniform(1, 2), rng.uniform(0, 1), n=40, seed=seed)
    more = base + synthetic(rng.uniform(1, 3), rng.uniform(0, 2), n=extra, seed=seed + 1)
    a, b = fit_envelope(base), fit_envelope(more)
    assert b.lam + b.c >= a.lam + a.c - 1e-9
