"""Joint eigenbases of commuting Hermitian operators and their classical representation.

Given commuting observables A_1..A_n and a state psi, the joint eigenbasis
turns every product moment <psi|A_1...A_n|psi> into an expectation over the
finite space Omega = {basis vectors} with P(w) = |<b_w|psi>|^2 and
f_i(w) = eigenvalue of A_i on b_w. Each f_i depends only on A_i.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from bellcheck.config.settings import settings
from bellcheck.errors import DimensionMismatchError, NonCommutingError, NonHermitianError
from bellcheck.quantum.core import ComplexMatrix, StateVector, as_matrix, as_state, hermitian_deviation

logger = logging.getLogger("bellcheck.quantum")

GAP_MIN = 1e-8
MAX_RETRIES = 5
WEIGHT_FLOOR = -1e-15


@dataclass(frozen=True)
class DiscreteProbabilitySpace:
    weights: Tuple[float, ...]
    value_table: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if np.any(w < WEIGHT_FLOOR):
            raise ValueError(f"negative weight {w.min()!r}")
        w = np.where(w < 0.0, 0.0, w)
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        for row in self.value_table:
            if len(row) != w.size:
                raise DimensionMismatchError(f"value row of length {len(row)} for {w.size} outcomes")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @property
    def size(self) -> int:
        return len(self.weights)

    def moment(self, indices: Optional[Iterable[int]] = None) -> float:
        """Sum over w of prod_{i in indices} f_i(w) P(w); all observables when indices is None."""
        idx = range(len(self.value_table)) if indices is None else list(indices)
        prod = np.ones(self.size)
        for i in idx:
            prod = prod * np.asarray(self.value_table[i])
        return float(prod @ np.asarray(self.weights))


def _check_operators(ops: Sequence[ComplexMatrix], tol: float) -> List[ComplexMatrix]:
    if not ops:
        raise ValueError("no operators given")
    mats = [as_matrix(m) for m in ops]
    d = mats[0].shape[0]
    for k, m in enumerate(mats):
        if m.shape[0] != d:
            raise DimensionMismatchError(f"operator {k} has dim {m.shape[0]}, expected {d}")
        dev = hermitian_deviation(m)
        if dev >= tol:
            raise NonHermitianError(k, dev)
    for i, j in itertools.combinations(range(len(mats)), 2):
        norm = float(np.max(np.abs(mats[i] @ mats[j] - mats[j] @ mats[i])))
        if norm >= tol:
            raise NonCommutingError((i, j), norm)
    return mats


def _min_gap(evals: np.ndarray) -> float:
    return float(np.min(np.diff(evals))) if evals.size > 1 else np.inf


def _split_blocks(mats: Sequence[ComplexMatrix], vecs: np.ndarray, level: int) -> np.ndarray:
    """Recursively refine `vecs` (an orthonormal basis of an invariant subspace) per eigenspace."""
    if level == len(mats) or vecs.shape[1] == 1:
        return vecs
    sub = vecs.conj().T @ mats[level] @ vecs
    sub = (sub + sub.conj().T) / 2
    evals, evecs = np.linalg.eigh(sub)
    rotated = vecs @ evecs
    out = []
    start = 0
    for k in range(1, evals.size + 1):
        if k == evals.size or evals[k] - evals[k - 1] > GAP_MIN:
            out.append(_split_blocks(mats, rotated[:, start:k], level + 1))
            start = k
    return np.hstack(out)


def _canonical_order(vecs: np.ndarray, table: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # Fix the phase so the largest component is real positive, then sort by
    # descending eigenvalue tuple with ties broken by leading component index.
    lead = np.argmax(np.abs(vecs) > np.abs(vecs).max(axis=0) - 1e-9, axis=0)
    phases = vecs[lead, np.arange(vecs.shape[1])]
    vecs = vecs * (np.abs(phases) / phases)
    keys = [lead] + [-np.round(row, 9) for row in table[::-1]]
    order = np.lexsort(keys)
    return vecs[:, order], table[:, order]


def simultaneous_diagonalize(
    ops: Sequence[ComplexMatrix],
    tol: Optional[float] = None,
    seed: int = 0,
) -> Tuple[List[StateVector], NDArray[np.float64]]:
    """Orthonormal joint eigenbasis of commuting Hermitian `ops` and the eigenvalue table.

    eigen_table[i][w] is the eigenvalue of ops[i] on basis[w].
    """
    tol = settings.operator_tol if tol is None else tol
    mats = _check_operators(ops, tol)
    d = mats[0].shape[0]
    rng = np.random.default_rng(seed)

    vecs = None
    for attempt in range(MAX_RETRIES):
        coeffs = rng.standard_normal(len(mats))
        combo = sum(c * m for c, m in zip(coeffs, mats))
        combo = (combo + combo.conj().T) / 2
        evals, candidate = np.linalg.eigh(combo)
        if _min_gap(evals) >= GAP_MIN:
            vecs = candidate
            break
        logger.debug("random combination %d has a near-degenerate spectrum; retrying", attempt)
    if vecs is None:
        logger.debug("falling back to block diagonalization for dim %d", d)
        vecs = _split_blocks(mats, np.eye(d, dtype=np.complex128), 0)

    table = np.array([
        np.real(np.einsum("iw,ij,jw->w", vecs.conj(), m, vecs)) for m in mats
    ])
    vecs, table = _canonical_order(vecs, table)
    return [vecs[:, w].copy() for w in range(d)], table


def spectral_representation(
    ops: Sequence[ComplexMatrix],
    psi: StateVector,
    tol: Optional[float] = None,
) -> DiscreteProbabilitySpace:
    """Finite probability space whose product moments reproduce <psi|A_S|psi> for every subset S."""
    psi = as_state(psi)
    basis, table = simultaneous_diagonalize(ops, tol)
    if len(basis) != psi.size:
        raise DimensionMismatchError(f"state of dim {psi.size} for operators of dim {len(basis)}")
    weights = np.abs([np.vdot(b, psi) for b in basis]) ** 2
    # as_state admits |psi| = 1 within UNIT_TOL; renormalize so P sums to 1.
    weights = weights / weights.sum()
    return DiscreteProbabilitySpace(
        weights=tuple(float(x) for x in weights),
        value_table=tuple(tuple(float(x) for x in row) for row in table),
    )


def product_expectation(ops: Sequence[ComplexMatrix], psi: StateVector, indices: Iterable[int]) -> float:
    """<psi| prod_{i in indices} A_i |psi> by direct matrix products."""
    psi = as_state(psi)
    d = psi.size
    prod = np.eye(d, dtype=np.complex128)
    for i in indices:
        prod = prod @ as_matrix(ops[i])
    return float(np.real(np.vdot(psi, prod @ psi)))
