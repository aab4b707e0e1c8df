"""Finite problem of moments: can targets C[i][j] be written as an integral of f^(1) f^(2) dP with |f| <= 1?

Theory note. For finitely many settings the achievable tables
integral(f^(1)_i f^(2)_j dP) with |f^(k)| <= 1 form the convex hull of the
outer products u v^T with u in [-1, 1]^m, v in [-1, 1]^n. The outer product
is linear in each factor separately, so the extreme points are the sign
vectors u in {+-1}^m, v in {+-1}^n: the deterministic strategies. Membership
is therefore exactly the LP

    lambda >= 0, sum_s lambda_s = 1, sum_s lambda_s u_i v_j = C[i][j].

The continuum version (every angle at once) has no solution as soon as one
finite truncation is infeasible; the 2x2 CHSH truncation already is.

Infeasible instances carry a certificate B (a Bell inequality): the duals of
min sum mu_s s.t. sum mu_s E_s = C, mu >= 0 satisfy <B, E_s> <= 1 for all
strategies with <B, C> equal to the optimum, so B is the most violated
inequality. Only pair correlations are constrained; no marginals.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from bellcheck.bell.simplex import DenseSimplex
from bellcheck.config.settings import settings
from bellcheck.errors import (
    EnumerationCapError, MalformedTargetsError, MarginalFeasibilityError, ShapeMismatchError, SimplexError,
)
from bellcheck.quantum.core import quantum_correlation
from bellcheck.quantum.vectors import UnitVector3, planar, unit_vector

logger = logging.getLogger("bellcheck.lp")

MAX_SETTINGS = 24
TARGET_SLACK = 1e-12
TOL_RANGE = (1e-12, 1e-6)
RECONSTRUCTION_TOL = 1e-8
CERTIFICATE_SLACK = 1e-9

SettingSpec = Union[float, Sequence[float]]


@dataclass(frozen=True)
class DeterministicStrategy:
    u: Tuple[int, ...]
    v: Tuple[int, ...]

    def __post_init__(self):
        if any(x not in (1, -1) for x in self.u + self.v):
            raise ValueError(f"strategy entries must be +-1: u={self.u}, v={self.v}")

    def correlations(self) -> np.ndarray:
        return np.outer(self.u, self.v).astype(np.float64)


class FeasibilityStatus(str, Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class BellCertificate:
    coefficients: Tuple[Tuple[float, ...], ...]
    bound: float
    value: float

    @property
    def gap(self) -> float:
        return self.value - self.bound

    @property
    def relative_gap(self) -> float:
        """value / bound - 1; independent of how the coefficients are scaled."""
        return self.value / self.bound - 1.0

    def matrix(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class FeasibilityResult:
    """Outcome of check_feasibility.

    ``signs`` holds one row (u | v) per strategy in enumerate_strategies
    order; ``weights`` (feasible) is aligned with its rows.
    """

    status: FeasibilityStatus
    signs: np.ndarray
    m: int
    objective: float
    weights: Optional[Tuple[float, ...]] = None
    certificate: Optional[BellCertificate] = None

    @cached_property
    def strategies(self) -> Tuple[DeterministicStrategy, ...]:
        return _strategies_from_signs(self.signs, self.m)

    def support(self, floor: float = 1e-12) -> List[Tuple[DeterministicStrategy, float]]:
        """Strategies carrying weight above ``floor``, in enumeration order."""
        if self.weights is None:
            return []
        w = np.asarray(self.weights)
        return [
            (_strategies_from_signs(self.signs[k:k + 1], self.m)[0], float(w[k]))
            for k in np.flatnonzero(w > floor)
        ]


def _resolve_setting(s: SettingSpec) -> Tuple[UnitVector3, Optional[float]]:
    if np.ndim(s) == 0:
        return planar(float(s)), float(s)
    return unit_vector(s), None


@dataclass(frozen=True, eq=False)
class MomentInstance:
    party1: Tuple[UnitVector3, ...]
    party2: Tuple[UnitVector3, ...]
    targets: np.ndarray
    party1_angles: Optional[Tuple[float, ...]] = None
    party2_angles: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        m, n = len(self.party1), len(self.party2)
        if m < 1 or n < 1:
            raise MalformedTargetsError(f"each party needs at least one setting (m={m}, n={n})")
        if m + n > MAX_SETTINGS:
            raise EnumerationCapError(f"m + n = {m + n} exceeds the enumeration cap {MAX_SETTINGS}")
        c = np.array(self.targets, dtype=np.float64)
        if c.shape != (m, n):
            raise MalformedTargetsError(f"targets have shape {c.shape}, expected ({m}, {n})")
        if not np.all(np.isfinite(c)):
            raise MalformedTargetsError("targets must be finite")
        if np.any(np.abs(c) > 1.0 + TARGET_SLACK):
            raise MalformedTargetsError(f"target {c.flat[np.argmax(np.abs(c))]!r} lies outside [-1, 1]")
        c.setflags(write=False)
        object.__setattr__(self, "targets", c)

    @property
    def m(self) -> int:
        return len(self.party1)

    @property
    def n(self) -> int:
        return len(self.party2)

    @classmethod
    def from_settings(
        cls, party1: Sequence[SettingSpec], party2: Sequence[SettingSpec], targets=None,
    ) -> "MomentInstance":
        """Settings are planar angles (radians) or 3-vectors; targets default to the quantum values."""
        r1 = [_resolve_setting(s) for s in party1]
        r2 = [_resolve_setting(s) for s in party2]
        if targets is None:
            targets = quantum_targets(party1, party2)
        angles1 = tuple(a for _, a in r1) if all(a is not None for _, a in r1) else None
        angles2 = tuple(a for _, a in r2) if all(a is not None for _, a in r2) else None
        return cls(tuple(v for v, _ in r1), tuple(v for v, _ in r2), targets, angles1, angles2)

    def permuted(self, rows: Sequence[int], cols: Sequence[int]) -> "MomentInstance":
        rows, cols = list(rows), list(cols)
        return MomentInstance(
            tuple(self.party1[i] for i in rows),
            tuple(self.party2[j] for j in cols),
            self.targets[np.ix_(rows, cols)],
            tuple(self.party1_angles[i] for i in rows) if self.party1_angles else None,
            tuple(self.party2_angles[j] for j in cols) if self.party2_angles else None,
        )


def sign_matrix(m: int, n: int) -> np.ndarray:
    """2^(m+n) rows of +-1 (u | v), first position varying slowest, +1 before -1."""
    if m < 1 or n < 1:
        raise ValueError(f"m and n must be >= 1, got m={m}, n={n}")
    k = m + n
    if k > MAX_SETTINGS:
        raise EnumerationCapError(f"m + n = {k} exceeds the enumeration cap {MAX_SETTINGS}")
    bits = np.arange(k - 1, -1, -1)
    return (1 - 2 * ((np.arange(2 ** k)[:, None] >> bits) & 1)).astype(np.int8)


def _strategies_from_signs(signs: np.ndarray, m: int) -> Tuple[DeterministicStrategy, ...]:
    return tuple(DeterministicStrategy(tuple(int(x) for x in r[:m]), tuple(int(x) for x in r[m:])) for r in signs)


def enumerate_strategies(m: int, n: int) -> List[DeterministicStrategy]:
    """All 2^(m+n) sign assignments, u varying slowest; u[0] = +1 for the first half."""
    return list(_strategies_from_signs(sign_matrix(m, n), m))


def strategy_matrix(signs: np.ndarray, m: int) -> np.ndarray:
    """Columns are the flattened correlation tables u v^T of the sign rows."""
    u = np.asarray(signs[:, :m], dtype=np.float64)
    v = np.asarray(signs[:, m:], dtype=np.float64)
    return np.einsum("si,sj->ijs", u, v).reshape(u.shape[1] * v.shape[1], len(signs))


def quantum_targets(party1: Sequence[SettingSpec], party2: Sequence[SettingSpec]) -> np.ndarray:
    """C[i][j] = singlet correlation of settings i and j via the full matrix sandwich."""
    vs1 = [_resolve_setting(s)[0] for s in party1]
    vs2 = [_resolve_setting(s)[0] for s in party2]
    return np.array([[quantum_correlation(a, b) for b in vs2] for a in vs1])


def cosine_targets(alpha: Sequence[float], beta: Sequence[float], scale: float = 0.5) -> np.ndarray:
    """scale * cos(alpha_i - beta_j); scale 1/2 is the relaxed, representable problem."""
    return scale * np.cos(np.subtract.outer(np.asarray(alpha, float), np.asarray(beta, float)))


def _check_tol(tol: Optional[float]) -> float:
    tol = settings.lp_tol if tol is None else tol
    lo, hi = TOL_RANGE
    if not lo <= tol <= hi:
        raise ValueError(f"tolerance {tol!r} outside [{lo:.0e}, {hi:.0e}]")
    return tol


def _certificate(instance: MomentInstance, canonical: np.ndarray, tol: float) -> BellCertificate:
    c = instance.targets.ravel()
    lp = DenseSimplex(canonical, c)
    if lp.phase_one() > tol:
        raise SimplexError("strategy tables do not span the target space")
    ones = np.ones(canonical.shape[1])
    optimum = lp.phase_two(ones)
    b = lp.duals(ones)
    bound = float(np.max(b @ canonical))
    value = float(b @ c)
    logger.debug("gauge optimum %.12f, dual value %.12f, raw bound %.12f", optimum, value, bound)
    if instance.m == 2 and instance.n == 2:
        scale = 2.0 / bound
    else:
        scale = 1.0 / float(np.max(np.abs(b)))
    b = b * scale
    return BellCertificate(
        coefficients=tuple(tuple(float(x) for x in row) for row in b.reshape(instance.m, instance.n)),
        bound=bound * scale,
        value=value * scale,
    )


def check_feasibility(instance: MomentInstance, tol: Optional[float] = None) -> FeasibilityResult:
    tol = _check_tol(tol)
    signs = sign_matrix(instance.m, instance.n)
    signs.setflags(write=False)
    # (u, v) and (-u, -v) give the same table; keep the u[0] = +1 half.
    half = len(signs) // 2
    canonical = strategy_matrix(signs[:half], instance.m)

    a = np.vstack([canonical, np.ones((1, half))])
    b = np.concatenate([instance.targets.ravel(), [1.0]])
    lp = DenseSimplex(a, b)
    objective = lp.phase_one()
    logger.info("phase-1 objective %.3e for %dx%d instance (%d columns)", objective, instance.m, instance.n, half)

    if objective < tol:
        x = np.maximum(lp.solution(), 0.0)
        weights = tuple(float(w) for w in x) + (0.0,) * half
        return FeasibilityResult(FeasibilityStatus.FEASIBLE, signs, instance.m, objective, weights=weights)

    cert = _certificate(instance, canonical, tol)
    if cert.relative_gap <= tol:
        raise MarginalFeasibilityError(objective, cert.relative_gap, tol)
    logger.info("infeasible: certificate value %.12f against bound %.12f", cert.value, cert.bound)
    return FeasibilityResult(FeasibilityStatus.INFEASIBLE, signs, instance.m, objective, certificate=cert)


def verify_result(instance: MomentInstance, result: FeasibilityResult) -> bool:
    """Independent audit of a result by reconstruction or by enumerating every strategy."""
    m, n = instance.m, instance.n
    signs = np.asarray(result.signs)
    if result.m != m or signs.shape != (2 ** (m + n), m + n):
        raise ShapeMismatchError(f"result strategies {signs.shape} do not match a {m}x{n} instance")
    c = instance.targets

    if result.status is FeasibilityStatus.FEASIBLE:
        if result.weights is None or len(result.weights) != len(signs):
            raise ShapeMismatchError("feasible result without one weight per strategy")
        w = np.asarray(result.weights, dtype=np.float64)
        if np.any(w < -TARGET_SLACK):
            logger.info("audit failed: negative weight %r", float(w.min()))
            return False
        if abs(float(w.sum()) - 1.0) > 1e-9:
            logger.info("audit failed: weights sum to %r", float(w.sum()))
            return False
        u, v = signs[:, :m].astype(np.float64), signs[:, m:].astype(np.float64)
        recon = np.einsum("s,si,sj->ij", w, u, v)
        err = float(np.max(np.abs(recon - c)))
        if err > RECONSTRUCTION_TOL:
            logger.info("audit failed: reconstruction error %.3e", err)
            return False
        return True

    cert = result.certificate
    if cert is None:
        raise ShapeMismatchError("infeasible result without a certificate")
    bmat = cert.matrix()
    if bmat.shape != (m, n):
        raise ShapeMismatchError(f"certificate shape {bmat.shape} for a {m}x{n} instance")
    every = sign_matrix(m, n).astype(np.float64)
    classical = float(np.max(np.einsum("si,ij,sj->s", every[:, :m], bmat, every[:, m:])))
    if classical > cert.bound + CERTIFICATE_SLACK:
        logger.info("audit failed: strategy reaches %.12f above bound %.12f", classical, cert.bound)
        return False
    value = float(np.sum(bmat * c))
    if abs(value - cert.value) > RECONSTRUCTION_TOL or value <= cert.bound + CERTIFICATE_SLACK:
        logger.info("audit failed: <B, C> = %.12f does not exceed bound %.12f", value, cert.bound)
        return False
    return True
