import math

import numpy as np
import pytest

from bellcheck.errors import DimensionMismatchError, NonUnitVectorError
from bellcheck.quantum.core import (
    I2, embed_local, is_hermitian, pauli, pauli_correlation_matrix, quantum_correlation, singlet, spin_operator,
    tensor, total_spin,
)
from bellcheck.quantum.vectors import (
    angle_between, normalized, planar, planar_angle, random_rotation, random_unit_vectors, unit_vector,
)


def test_pauli_algebra():
    assert np.array_equal(pauli(3), np.diag([1, -1]))
    assert np.allclose(pauli(1) @ pauli(2), 1j * pauli(3))
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            assert np.trace(pauli(i) @ pauli(j)) == pytest.approx(2.0 if i == j else 0.0)
    with pytest.raises(ValueError):
        pauli(0)


def test_spin_operator_axes_and_spectrum():
    assert np.allclose(spin_operator((0, 0, 1)), np.diag([1, -1]))
    assert np.allclose(spin_operator((1, 0, 0)), pauli(1))
    rng = np.random.default_rng(3)
    for a in random_unit_vectors(rng, 20):
        s = spin_operator(a)
        assert abs(np.linalg.det(s) + 1) < 1e-12
        assert abs(np.trace(s)) < 1e-12
    with pytest.raises(NonUnitVectorError):
        spin_operator((1, 1, 0))


def test_tensor_products():
    assert np.array_equal(tensor(I2, I2), np.eye(4))
    assert np.array_equal(tensor(pauli(3), pauli(3)), np.diag([1, -1, -1, 1]))
    rng = np.random.default_rng(5)
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2))
    a, b = a + a.T, b + b.T
    ea, eb = np.linalg.eigvalsh(a), np.linalg.eigvalsh(b)
    assert np.allclose(np.sort(np.outer(ea, eb).ravel()), np.linalg.eigvalsh(tensor(a, b)))


def test_embed_local_matches_kron():
    sx = pauli(1)
    assert np.array_equal(embed_local(sx, 0, (2, 2)), np.kron(sx, I2))
    assert np.array_equal(embed_local(sx, 1, (2, 2)), np.kron(I2, sx))
    assert embed_local(sx, 1, (3, 2, 4)).shape == (24, 24)
    with pytest.raises(DimensionMismatchError):
        embed_local(sx, 0, (3, 2))
    with pytest.raises(IndexError):
        embed_local(sx, 2, (2, 2))


def test_singlet_state():
    psi = singlet()
    assert np.array_equal(psi, np.array([0, 0.7071067811865476, -0.7071067811865476, 0]))
    assert np.vdot(psi, psi).real == pytest.approx(1.0, abs=1e-15)
    rng = np.random.default_rng(11)
    for a in random_unit_vectors(rng, 50):
        assert np.max(np.abs(total_spin(a) @ psi)) < 1e-12


def test_quantum_correlation_examples():
    assert quantum_correlation((0, 0, 1), (0, 0, 1)) == pytest.approx(-1.0, abs=1e-12)
    assert quantum_correlation((1, 0, 0), (0, 1, 0)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(NonUnitVectorError):
        quantum_correlation((0, 0, 2), (0, 0, 1))


def test_quantum_correlation_random_pairs():
    rng = np.random.default_rng(42)
    a = random_unit_vectors(rng, 1000)
    b = random_unit_vectors(rng, 1000)
    for x, y in zip(a, b):
        assert abs(quantum_correlation(x, y) + float(x @ y)) < 1e-12


def test_quantum_correlation_is_bilinear():
    rng = np.random.default_rng(5)
    for _ in range(200):
        a1, a2, b1, b2 = rng.standard_normal((4, 3))
        s, t = rng.uniform(-2, 2, 2)
        q = lambda x, y: quantum_correlation(x, y, require_unit=False)
        assert q(s * a1 + t * a2, b1) == pytest.approx(s * q(a1, b1) + t * q(a2, b1), abs=1e-11)
        assert q(a1, s * b1 + t * b2) == pytest.approx(s * q(a1, b1) + t * q(a1, b2), abs=1e-11)


def test_is_hermitian():
    for i in (1, 2, 3):
        assert is_hermitian(pauli(i))
        assert not is_hermitian(1j * pauli(i))
    assert is_hermitian(tensor(pauli(1), pauli(2)))
    assert not is_hermitian(np.array([[0, 1], [0, 0]]))
    # entrywise threshold 1e-12
    assert is_hermitian(np.array([[1, 0.5e-12], [0, 1]]))
    assert not is_hermitian(np.array([[1, 2e-12], [0, 1]]))


def test_pauli_correlation_matrix_of_singlet():
    assert np.allclose(pauli_correlation_matrix(singlet()), -np.eye(3), atol=1e-12)


def test_vectors_helpers():
    v = unit_vector((0.6, 0.0, 0.8))
    with pytest.raises(ValueError):
        v[0] = 1.0  # read-only
    assert np.allclose(normalized((0, 0, 5)), (0, 0, 1))
    assert planar_angle(planar(0.3)) == pytest.approx(0.3)
    with pytest.raises(NonUnitVectorError):
        planar_angle((0.0, 1.0, 0.0))
    assert angle_between(planar(0.0), planar(math.pi / 4)) == pytest.approx(math.pi / 4)
    r = random_rotation(np.random.default_rng(1))
    assert np.allclose(r @ r.T, np.eye(3))
    assert np.linalg.det(r) == pytest.approx(1.0)
