import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlab.disk import ball_distance, kiernan_threshold, poincare_distance, pseudo_distance
from hyperlab.errors import InvalidDilatation, OutsideBall, OutsideDisk
from hyperlab.maps import ball_automorphism, disk_mobius


def disk_points(rmax=0.999):
    return st.tuples(st.floats(0, rmax), st.floats(0, 2 * np.pi)).map(lambda t: t[0] * np.exp(1j * t[1]))


def test_poincare_oracle_on_real_axis():
    assert poincare_distance(0, 0.5) == pytest.approx(np.arctanh(0.5), abs=1e-15)
    assert poincare_distance(0.1, 0.1) == 0.0


def test_poincare_near_boundary_is_finite_and_large():
    d = poincare_distance(0, 1 - 1e-12)
    assert d == pytest.approx(np.arctanh(1 - 1e-12), rel=1e-6)


def test_outside_points_raise():
    with pytest.raises(OutsideDisk):
        poincare_distance(0, 1.0)
    with pytest.raises(OutsideBall):
        ball_distance(np.array([0.8, 0.7]), np.zeros(2))


def test_ball_restricts_to_disk():
    z, w = np.array([0.3 + 0.1j, 0]), np.array([-0.2j, 0])
    assert ball_distance(z, w) == pytest.approx(poincare_distance(z[0], w[0]), abs=1e-14)


def test_ball_distance_from_origin():
    w = np.array([0.3, 0.4j])
    assert ball_distance(np.zeros(2), w) == pytest.approx(np.arctanh(0.5), abs=1e-14)


def test_pseudo_distance_matches_tanh():
    z, w = 0.2 + 0.3j, -0.4 + 0.1j
    assert np.tanh(poincare_distance(z, w)) == pytest.approx(pseudo_distance(z, w), abs=1e-14)


def test_kiernan_threshold_values():
    assert kiernan_threshold(0) == 0.03125
    ks = np.arange(10) / 10
    th = [kiernan_threshold(k) for k in ks]
    assert all(a > b for a, b in zip(th, th[1:]))
    with pytest.raises(InvalidDilatation):
        kiernan_threshold(1.0)
    with pytest.raises(InvalidDilatation):
        kiernan_threshold(-0.1)


@given(disk_points(), disk_points(), disk_points(0.9), st.floats(0, 2 * np.pi))
@settings(max_examples=200, deadline=None)
def test_mobius_invariance(z, w, a, theta):
    f = disk_mobius(a, theta)
    fz, fw = f(np.array([z]))[0], f(np.array([w]))[0]
    d = poincare_distance(z, w)
    assert poincare_distance(fz, fw) == pytest.approx(d, rel=1e-7, abs=1e-9)


@given(disk_points(0.99), disk_points(0.99), disk_points(0.99))
@settings(max_examples=200, deadline=None)
def test_triangle_inequality(a, b, c):
    assert poincare_distance(a, c) <= poincare_distance(a, b) + poincare_distance(b, c) + 1e-12


@given(st.lists(st.floats(-0.5, 0.5), min_size=8, max_size=8))
@settings(max_examples=100, deadline=None)
def test_ball_automorphism_invariance(v):
    z = np.array([v[0] + 1j * v[1], v[2] + 1j * v[3]])
    w = np.array([v[4] + 1j * v[5], v[6] + 1j * v[7]])
    phi = ball_automorphism(np.array([0.3, 0.2j]))
    d = ball_distance(z, w)
    assert ball_distance(phi(z), phi(w)) == pytest.approx(d, rel=1e-7, abs=1e-9)
    assert ball_distance(w, z) == pytest.approx(d, abs=1e-14)


def test_spec_values():
    assert poincare_distance(0, 0.5) == pytest.approx(0.549306, abs=1e-6)
    assert poincare_distance(0.5, 1 - 1 / (2 + np.pi)) == pytest.approx(0.564790, abs=1e-5)
    # 1 - rho^2 = 0.91 * 0.84
    assert ball_distance(np.array([0.3, 0]), np.array([0, 0.4])) == pytest.approx(np.arctanh(np.sqrt(0.2356)), abs=1e-14)
    assert kiernan_threshold(1 / 3) == pytest.approx(1 / 32**2, rel=1e-12)
    f = disk_mobius(0.5)
    assert abs(f(np.array([0.5]))[0]) < 1e-15


def test_disk_is_one_dimensional_ball():
    rng = np.random.default_rng(0)
    z = rng.uniform(-0.7, 0.7, (1000, 2)) @ [1, 1j]
    w = rng.uniform(-0.7, 0.7, (1000, 2)) @ [1, 1j]
    assert np.allclose(poincare_distance(z, w), ball_distance(z[:, None], w[:, None]), atol=1e-12)


def test_ball_unitary_invariance():
    rng = np.random.default_rng(1)
    for _ in range(200):
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        z, w = (rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))) / 8
        assert ball_distance(Q @ z, Q @ w) == pytest.approx(ball_distance(z, w), abs=1e-9)
