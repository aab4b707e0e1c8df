"""Pauli algebra and the two-spin singlet.

Matrices and states are plain complex128 numpy arrays. Two-spin states use
the basis ordering |++>, |+->, |-+>, |--> (the Kronecker ordering).
"""
import logging
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from bellcheck.errors import DimensionMismatchError, NonUnitVectorError
from bellcheck.quantum.vectors import UNIT_TOL, unit_vector

logger = logging.getLogger("bellcheck.quantum")

ComplexMatrix = NDArray[np.complex128]
StateVector = NDArray[np.complex128]

IDENTITY_TOL = 1e-10

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)
for _m in _PAULI:
    _m.setflags(write=False)

I2 = np.eye(2, dtype=np.complex128)
I2.setflags(write=False)


def as_matrix(m) -> ComplexMatrix:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatchError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def hermitian_deviation(m: ComplexMatrix) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(m: ComplexMatrix, tol: float = 1e-12) -> bool:
    return hermitian_deviation(as_matrix(m)) < tol


def as_state(v, tol: float = UNIT_TOL) -> StateVector:
    psi = np.asarray(v, dtype=np.complex128).reshape(-1)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > tol:
        raise NonUnitVectorError(f"state norm {norm!r} is not 1 within {tol:.1e}")
    return psi


def expectation(op: ComplexMatrix, psi: StateVector) -> complex:
    """<psi|op|psi>."""
    if op.shape != (psi.size, psi.size):
        raise DimensionMismatchError(f"operator {op.shape} does not act on a state of dim {psi.size}")
    return complex(np.vdot(psi, op @ psi))


def pauli(i: int) -> ComplexMatrix:
    """Pauli matrix sigma_i for axis i in {1, 2, 3}."""
    if i not in (1, 2, 3):
        raise ValueError(f"Pauli axis must be 1, 2 or 3, got {i!r}")
    return _PAULI[i - 1]


def spin_operator(a: Sequence[float], *, require_unit: bool = True) -> ComplexMatrix:
    """sigma . a. With require_unit=False the map is the plain linear extension."""
    v = unit_vector(a) if require_unit else np.asarray(a, dtype=np.float64).reshape(3)
    return v[0] * _PAULI[0] + v[1] * _PAULI[1] + v[2] * _PAULI[2]


def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return np.kron(as_matrix(a), as_matrix(b))


def embed_local(op: ComplexMatrix, site: int, dims: Sequence[int]) -> ComplexMatrix:
    """Place a single-site operator on factor `site` of H_1 x ... x H_n."""
    op = as_matrix(op)
    if not 0 <= site < len(dims):
        raise IndexError(f"site {site} out of range for {len(dims)} factors")
    if op.shape[0] != dims[site]:
        raise DimensionMismatchError(f"operator of dim {op.shape[0]} does not fit factor of dim {dims[site]}")
    out = np.eye(1, dtype=np.complex128)
    for k, d in enumerate(dims):
        out = np.kron(out, op if k == site else np.eye(d, dtype=np.complex128))
    return out


def singlet() -> StateVector:
    """(|+-> - |-+>)/sqrt(2)."""
    s = np.sqrt(0.5)
    return np.array([0.0, s, -s, 0.0], dtype=np.complex128)


def total_spin(a: Sequence[float]) -> ComplexMatrix:
    s = spin_operator(a)
    return np.kron(s, I2) + np.kron(I2, s)


def quantum_correlation(a: Sequence[float], b: Sequence[float], *, require_unit: bool = True) -> float:
    """<psi| sigma.a (x) sigma.b |psi> on the singlet, evaluated as a full 4x4 sandwich."""
    va = unit_vector(a) if require_unit else np.asarray(a, dtype=np.float64).reshape(3)
    vb = unit_vector(b) if require_unit else np.asarray(b, dtype=np.float64).reshape(3)
    op = np.kron(spin_operator(va, require_unit=False), spin_operator(vb, require_unit=False))
    value = expectation(op, singlet())
    if abs(value.imag) >= 1e-12:
        raise ArithmeticError(f"correlation has imaginary part {value.imag!r}")
    closed = -float(va @ vb)
    if abs(value.real - closed) > IDENTITY_TOL * max(1.0, abs(closed)):
        raise ArithmeticError(f"sandwich {value.real!r} disagrees with -a.b = {closed!r}")
    return value.real


def pauli_correlation_matrix(psi: StateVector) -> NDArray[np.float64]:
    """3x3 matrix of <psi|sigma_i (x) sigma_j|psi>."""
    psi = as_state(psi)
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            out[i, j] = expectation(np.kron(_PAULI[i], _PAULI[j]), psi).real
    return out
