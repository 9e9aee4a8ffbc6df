import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlab.domains import interior_grid, unit_ball, unit_disk
from hyperlab.errors import UndefinedDerivative, ValidationError
from hyperlab.maps import (
    ball_automorphism,
    compose,
    deformed_automorphism,
    disk_mobius,
    linear_map,
    polynomial_map,
    spiral_map,
)
from hyperlab.wirtinger import (
    dilatation,
    generalized_qc_constant,
    qc_constant_exact,
    qc_constant_sphere,
    qc_field,
    wirtinger_blocks,
)

cplx = st.tuples(st.floats(-1, 1), st.floats(-1, 1)).map(lambda t: complex(*t))


def test_linear_blocks_exact():
    F = linear_map([[1.0]], [[0.1]])
    d = wirtinger_blocks(F, np.array([0.3 + 0.2j]), "fd")
    assert d.holo[0, 0] == pytest.approx(1.0, abs=1e-9)
    assert d.anti[0, 0] == pytest.approx(0.1, abs=1e-9)


def test_polynomial_blocks_oracle():
    # f = z^2 conj(z): df = 2 z conj z, dbar f = z^2
    f = polynomial_map([[(1.0, [2], [1])]], 1)
    z = np.array([0.4 - 0.3j])
    H, K = f.jacobians(z)
    assert H[0, 0] == pytest.approx(2 * abs(z[0]) ** 2, abs=1e-15)
    assert K[0, 0] == pytest.approx(z[0] ** 2, abs=1e-15)
    assert not f.holomorphic


def test_spiral_blocks_match_written_formulas():
    f = spiral_map()
    z = 0.6 * np.exp(0.7j)
    r = abs(z)
    e = np.exp(1j / (1 - r))
    d = wirtinger_blocks(f, np.array([z]), "analytic")
    assert d.anti[0, 0] == pytest.approx(0.5j * z**2 / (r * (1 - r) ** 2) * e, abs=1e-14)
    assert d.holo[0, 0] == pytest.approx((0.5j * r / (1 - r) ** 2 + 1) * e, abs=1e-14)


def test_spiral_undefined_at_origin():
    with pytest.raises(UndefinedDerivative):
        wirtinger_blocks(spiral_map(), np.array([0j]), "analytic")


def test_spiral_fd_agrees():
    f = spiral_map()
    for z in interior_grid(unit_disk(), 200):
        if abs(z[0]) < 1e-6:
            continue
        a = wirtinger_blocks(f, z, "analytic")
        d = wirtinger_blocks(f, z, "fd")
        scale = max(1.0, abs(a.holo[0, 0]), abs(a.anti[0, 0]))
        assert abs(a.holo - d.holo).max() / scale < 1e-6
        assert abs(a.anti - d.anti).max() / scale < 1e-6


def test_richardson_is_more_accurate():
    f = polynomial_map([[(1.0, [3], [2])]], 1)
    z = np.array([0.5 + 0.2j])
    exact = wirtinger_blocks(f, z, "analytic")
    spec = f.__class__(1, 1, f.evaluate, None, fd_step=1e-2)
    e1 = abs(wirtinger_blocks(spec, z, "fd").holo - exact.holo).max()
    e2 = abs(wirtinger_blocks(spec, z, "richardson").holo - exact.holo).max()
    assert e2 < e1 / 100


def test_dilatation_degenerate_cases():
    const = polynomial_map([[(0.5, [0], [0])]], 1)
    assert dilatation(const, np.array([0.1j])) == 0.0
    anti = linear_map([[0.0]], [[1.0]])
    assert dilatation(anti, np.array([0.1j])) == np.inf
    with pytest.raises(ValidationError):
        dilatation(ball_automorphism(np.array([0.1, 0])), np.zeros(2))


def test_qc_linear_oracle_on_ball():
    F = linear_map(np.eye(2), 0.05 * np.eye(2))
    field_ = qc_field(F, unit_ball(2), 32)
    assert all(abs(c - 0.05) <= 1e-4 for _, c in field_.samples)


def test_qc_holomorphic_is_zero():
    assert qc_field(ball_automorphism(np.array([0.3, 0.2j])), unit_ball(2), 32).sup <= 1e-12
    assert qc_field(disk_mobius(0.5j, 1.0), unit_disk(), 32).sup <= 1e-12


def test_qc_deformed_automorphism_equals_eps():
    F = deformed_automorphism(np.array([0.3, 0.2j]), 0.1)
    assert qc_field(F, unit_ball(2), 32).sup == pytest.approx(0.1, abs=1e-9)


def test_singular_holo_gives_inf():
    assert qc_constant_exact(np.zeros((2, 2)), np.eye(2)) == np.inf
    assert qc_constant_exact(np.zeros((2, 2)), np.zeros((2, 2))) == 0.0


@given(st.lists(cplx, min_size=8, max_size=8))
@settings(max_examples=60, deadline=None)
def test_sphere_estimator_brackets_exact(v):
    H = np.array(v[:4]).reshape(2, 2) + 2 * np.eye(2)
    K = 0.5 * np.array(v[4:]).reshape(2, 2)
    exact = qc_constant_exact(H, K)
    est = qc_constant_sphere(H, K, sphere_samples=64, refine_iters=50)
    assert est <= exact + 1e-9
    assert est >= exact * (1 - 1e-4) - 1e-12


@given(cplx, cplx)
@settings(max_examples=60, deadline=None)
def test_chain_rule_matches_fd(a, b):
    inner = linear_map([[1.0 + 0.2 * a]], [[0.3 * b]])
    outer = polynomial_map([[(1.0, [2], [0]), (0.2, [0], [1])]], 1)
    F = compose(outer, inner)
    z = np.array([0.3 - 0.1j])
    an = wirtinger_blocks(F, z, "analytic")
    fd = wirtinger_blocks(F.__class__(1, 1, F.evaluate, None), z, "richardson")
    assert np.allclose(an.holo, fd.holo, atol=1e-8)
    assert np.allclose(an.anti, fd.anti, atol=1e-8)


def test_generalized_constant_reduces_to_dilatation():
    f = spiral_map()
    z = np.array([0.4 + 0.1j])
    assert generalized_qc_constant(f, z) == pytest.approx(dilatation(f, z), rel=1e-14)


def test_spiral_spec_values():
    f = spiral_map()
    d = wirtinger_blocks(f, np.array([0.5 + 0j]))
    assert abs(d.anti[0, 0]) == pytest.approx(1.0, abs=1e-6)
    assert abs(d.holo[0, 0]) == pytest.approx(np.sqrt(2), abs=1e-6)
    assert dilatation(f, np.array([0.5 + 0j])) == pytest.approx(1 / np.sqrt(2), abs=1e-6)
    n = 2
    assert f(np.array([1 - 1 / n]))[0] == pytest.approx(0.5 * np.exp(2j), abs=1e-15)
    b = 1 - 1 / (n + np.pi)
    assert f(np.array([b]))[0] == pytest.approx(-b * np.exp(2j), abs=1e-12)
    assert f(np.array([0j]))[0] == 0


def test_spiral_dilatation_closed_form():
    f = spiral_map()
    for z in interior_grid(unit_disk(), 500):
        r = abs(z[0])
        if r == 0:
            continue
        s = r / (2 * (1 - r) ** 2)
        assert dilatation(f, z) == pytest.approx(s / abs(1 + 1j * s), abs=1e-9)
        assert abs(f(z)[0]) == pytest.approx(r, abs=1e-15)


def test_diagonal_antiholo_constant():
    F = linear_map(np.eye(2), 0.1 * np.diag([1.0, 0.5]))
    z = np.array([0.1, 0.2j])
    assert generalized_qc_constant(F, z) == pytest.approx(0.1, abs=1e-4)
    assert generalized_qc_constant(F, z, method="sphere") == pytest.approx(0.1, abs=1e-4)


def test_qc_unitary_invariance():
    rng = np.random.default_rng(2)
    H = np.eye(2) + 0.3 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    K = 0.2 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    U, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    assert qc_constant_exact(U @ H, U @ K) == pytest.approx(qc_constant_exact(H, K), abs=1e-8)


def test_real_differential_reconstruction():
    F = deformed_automorphism(np.array([0.3, 0.2j]), 0.1)
    z = np.array([0.1 - 0.2j, 0.3j])
    d = wirtinger_blocks(F, z)
    h = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    t = 1e-6
    fd = (F(z + t * h) - F(z - t * h)) / (2 * t)
    assert np.allclose(d.apply(h), fd, atol=1e-8)
