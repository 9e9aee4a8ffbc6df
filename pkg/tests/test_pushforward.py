import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlab.domains import interior_grid, unit_ball, unit_disk
from hyperlab.errors import InverseInconsistent
from hyperlab.maps import (
    ball_automorphism,
    deformed_automorphism,
    deformed_image_domain,
    linear_map,
    polynomial_map,
    spiral_map,
)
from hyperlab.pushforward import numeric_inverse, pushforward_blocks, structure_deviation


def test_linear_oracle():
    # G = F^-1 has blocks 1/0.99 and -0.1/0.99, so A = i (1 + 0.01)/0.99
    F = linear_map([[1.0]], [[0.1]])
    b = pushforward_blocks(F, F.inverse_map(), np.array([0.2 + 0.1j]))
    assert b.A[0, 0] == pytest.approx(1.01 / 0.99 * 1j, abs=1e-12)
    assert abs(b.A[0, 0] - 1.020202j) < 1e-6
    assert b.square_defect() < 1e-6


def test_holomorphic_collapse_ball():
    F = ball_automorphism(np.array([0.3, 0.2j]))
    sd = structure_deviation(F, F.inverse_map(), unit_ball(2), 64)
    assert sd.sup_norm <= 1e-8
    assert sd.max_square_defect <= 1e-8


def test_deformed_family_monotone_in_eps():
    a = np.array([0.3, 0.2j])
    devs = []
    for eps in (0.0, 0.05, 0.1):
        F = deformed_automorphism(a, eps)
        devs.append(structure_deviation(F, F.inverse_map(), deformed_image_domain(2, eps), 32).sup_norm)
    assert devs[0] <= 1e-8
    assert devs[0] < devs[1] < devs[2]


def test_spiral_structure_away_from_rim():
    f = spiral_map()
    for z in interior_grid(unit_disk(), 64, margin=0.2):
        b = pushforward_blocks(f, f.inverse_map(), z)
        # relative to |J|^2, since the blocks grow like (1 - |z|)^-2
        assert b.square_defect() <= 1e-9 * np.linalg.norm(b.complexified(), 2) ** 2


def test_spiral_deviation_is_large():
    f = spiral_map()
    sd = structure_deviation(f, f.inverse_map(), unit_disk(), 64)
    assert sd.sup_norm > 1e3 and sd.skipped <= 1


def test_wrong_inverse_is_caught():
    F = linear_map([[1.0]], [[0.1]])
    with pytest.raises(InverseInconsistent):
        pushforward_blocks(F, F, np.array([0.5 + 0.1j]))


def test_numeric_inverse_round_trip():
    F = polynomial_map([[(1.0, [1], [0]), (0.1, [0], [2])]], 1)
    inv = numeric_inverse(F, unit_disk(), check_pairs=100)
    for w in interior_grid(unit_disk(), 20):
        z = inv(F(w))
        assert np.allclose(z, w, atol=1e-10)


@given(st.floats(0, 0.5), st.floats(0, 2 * np.pi))
@settings(max_examples=40, deadline=None)
def test_structure_squares_to_minus_identity(k, t):
    F = linear_map([[1.0]], [[k * np.exp(1j * t)]])
    for z in interior_grid(unit_disk(), 8):
        assert pushforward_blocks(F, F.inverse_map(), z).square_defect() < 1e-10


def test_linear_deviation_closed_form():
    # F = z + eps conj z: A = i (1 + eps^2)/(1 - eps^2), B = -2i eps/(1 - eps^2)
    eps = 0.1
    F = linear_map([[1.0]], [[eps]])
    b = pushforward_blocks(F, F.inverse_map(), np.array([0.3j]))
    assert b.B[0, 0] == pytest.approx(-2j * eps / (1 - eps**2), abs=1e-12)
    sd = structure_deviation(F, F.inverse_map(), unit_disk(), 16)
    expect = (1 + eps**2) / (1 - eps**2) - 1 + 2 * eps / (1 - eps**2)
    assert sd.sup_norm == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("eps", [0.0, 0.05, 0.1])
def test_collapse_iff_holomorphic(eps):
    from hyperlab.wirtinger import qc_field

    F = linear_map(np.eye(2), eps * np.eye(2))
    qc = qc_field(F, unit_ball(2), 32).sup
    dev = structure_deviation(F, F.inverse_map(), unit_ball(2), 32).sup_norm
    assert (qc <= 1e-9) == (dev <= 1e-8)


def test_numeric_inverse_oracles():
    from hyperlab.maps import disk_mobius, identity

    I = identity(2)
    inv = numeric_inverse(I, unit_ball(2), check_pairs=50)
    z = np.array([0.2, -0.1j])
    assert np.abs(inv(z) - z).max() <= 1e-15
    m = disk_mobius(0.5)
    inv = numeric_inverse(m, unit_disk(), check_pairs=200)
    exact = m.inverse_map()
    for w in interior_grid(unit_disk(), 200):
        assert np.abs(inv(w) - exact(w)).max() <= 1e-10
    F = linear_map([[1.0]], [[0.1]])
    inv = numeric_inverse(F, unit_disk(), check_pairs=200)
    for w in interior_grid(unit_disk(), 100):
        closed = (w - 0.1 * np.conj(w)) / 0.99
        assert np.abs(inv(w) - closed).max() <= 1e-12


def test_blocks_stable_under_inverse_accuracy():
    F = polynomial_map([[(1.0, [1], [0]), (0.1, [0], [2])]], 1)
    loose = numeric_inverse(F, unit_disk(), tol=1e-11, check_pairs=50)
    tight = numeric_inverse(F, unit_disk(), tol=1e-14, check_pairs=50)
    for z in interior_grid(unit_disk(), 20, margin=0.1):
        z = F(z)
        a, b = pushforward_blocks(F, loose, z), pushforward_blocks(F, tight, z)
        assert np.abs(a.A - b.A).max() <= 1e-7 and np.abs(a.B - b.B).max() <= 1e-7
