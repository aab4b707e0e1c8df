"""CHSH functional, classical bound and the search for the quantum optimum.

The combination is kept literally as C(a,b) - C(a,b') + C(a',b) + C(a',b');
callers take |.| when comparing with the classical bound 2.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from bellcheck.config.settings import settings
from bellcheck.errors import UnknownModelError
from bellcheck.models.hidden_variables import (
    cosine_correlation, default_triple_model, scalar_sign_correlation, triple_correlation,
)
from bellcheck.quantum.core import quantum_correlation
from bellcheck.quantum.vectors import UnitVector3, planar, planar_angle, unit_vector

logger = logging.getLogger("bellcheck.chsh")

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
MIN_STEP = 1e-9


class SourceKind(str, Enum):
    QUANTUM = "quantum"
    TRIPLE = "triple"
    COSINE_PLANAR = "cosine-planar"
    SCALAR_SIGN = "scalar-sign"
    TABLE = "table"


@dataclass(frozen=True, eq=False)
class MeasurementQuad:
    a: UnitVector3
    a_prime: UnitVector3
    b: UnitVector3
    b_prime: UnitVector3

    def __post_init__(self):
        for name in ("a", "a_prime", "b", "b_prime"):
            object.__setattr__(self, name, unit_vector(getattr(self, name)))

    @classmethod
    def from_angles(cls, a: float, a_prime: float, b: float, b_prime: float) -> "MeasurementQuad":
        """Coplanar quad from x-z plane angles in radians."""
        return cls(planar(a), planar(a_prime), planar(b), planar(b_prime))

    def angles(self) -> Tuple[float, float, float, float]:
        return tuple(planar_angle(v) for v in (self.a, self.a_prime, self.b, self.b_prime))

    def rotated(self, rotation: np.ndarray) -> "MeasurementQuad":
        r = np.asarray(rotation, dtype=np.float64)
        return MeasurementQuad(r @ self.a, r @ self.a_prime, r @ self.b, r @ self.b_prime)


@dataclass(frozen=True)
class CorrelationSource:
    kind: SourceKind
    table: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None

    def __post_init__(self):
        if self.kind is SourceKind.TABLE:
            if self.table is None:
                raise ValueError("a table source needs a 2x2 table")
            t = np.asarray(self.table, dtype=np.float64)
            if t.shape != (2, 2) or np.any(np.abs(t) > 1.0):
                raise ValueError(f"table must be 2x2 with entries in [-1, 1], got {self.table!r}")
            object.__setattr__(self, "table", tuple(tuple(float(x) for x in row) for row in t))

    @classmethod
    def parse(cls, name: Union[str, "CorrelationSource"], table=None) -> "CorrelationSource":
        if isinstance(name, CorrelationSource):
            return name
        try:
            kind = SourceKind(name)
        except ValueError:
            known = ", ".join(k.value for k in SourceKind)
            raise UnknownModelError(f"unknown correlation source {name!r} (known: {known})") from None
        return cls(kind, table)

    def correlation(self, x: UnitVector3, y: UnitVector3) -> float:
        if self.kind is SourceKind.QUANTUM:
            return quantum_correlation(x, y)
        if self.kind is SourceKind.TRIPLE:
            return triple_correlation(default_triple_model(), x, y)
        if self.kind is SourceKind.COSINE_PLANAR:
            return cosine_correlation(planar_angle(x), planar_angle(y))
        if self.kind is SourceKind.SCALAR_SIGN:
            return scalar_sign_correlation(x, y)
        raise UnknownModelError(f"source {self.kind.value!r} has no correlation function")


def chsh_value(source: Union[str, CorrelationSource], quad: MeasurementQuad) -> float:
    """C(a,b) - C(a,b') + C(a',b) + C(a',b')."""
    source = CorrelationSource.parse(source)
    if source.kind is SourceKind.TABLE:
        (c_ab, c_abp), (c_apb, c_apbp) = source.table
    else:
        c_ab = source.correlation(quad.a, quad.b)
        c_abp = source.correlation(quad.a, quad.b_prime)
        c_apb = source.correlation(quad.a_prime, quad.b)
        c_apbp = source.correlation(quad.a_prime, quad.b_prime)
    return c_ab - c_abp + c_apb + c_apbp


def tsirelson_quad() -> MeasurementQuad:
    return MeasurementQuad.from_angles(0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)


def chsh_variants(table: Sequence[Sequence[float]]) -> List[float]:
    """The four relabelled CHSH combinations, with the minus sign on each entry in turn."""
    t = np.asarray(table, dtype=np.float64)
    total = float(t.sum())
    return [total - 2.0 * float(t[i, j]) for i in range(2) for j in range(2)]


def max_abs_chsh(table: Sequence[Sequence[float]]) -> float:
    return max(abs(v) for v in chsh_variants(table))


def best_chsh_variant(table: Sequence[Sequence[float]]) -> Tuple[Tuple[int, int], float]:
    """Entry (i, j) carrying the minus sign in the relabelling with the largest |CHSH|; first wins ties."""
    values = chsh_variants(table)
    k = max(range(len(values)), key=lambda i: abs(values[i]))
    return divmod(k, 2), abs(values[k])


def deterministic_chsh_values() -> List[float]:
    """Signed CHSH value of each of the 16 assignments (u_a, u_a', v_b, v_b') in {+-1}^4."""
    return [
        float(ua * vb - ua * vbp + uap * vb + uap * vbp)
        for ua, uap, vb, vbp in itertools.product((1, -1), repeat=4)
    ]


def max_chsh_deterministic() -> float:
    return max(abs(v) for v in deterministic_chsh_values())


def _planar_objective(source: CorrelationSource, angles: Tuple[float, float, float]) -> float:
    return abs(chsh_value(source, MeasurementQuad.from_angles(0.0, *angles)))


def max_chsh(
    source: Union[str, CorrelationSource],
    grid_steps: Optional[int] = None,
    refine_iters: Optional[int] = None,
) -> Tuple[MeasurementQuad, float]:
    """Maximize |CHSH| over coplanar quads with a pinned at angle 0.

    Grid search over (a', b, b') followed by coordinate descent whose step
    halves from pi/grid_steps down to MIN_STEP. Ties keep the lexicographically
    smallest angle tuple.

    A table source has no angles; its optimum is the best relabelling of the
    fixed table (see best_chsh_variant) and the quad returned is all zeros.
    """
    source = CorrelationSource.parse(source)
    grid_steps = settings.grid_steps if grid_steps is None else grid_steps
    refine_iters = settings.refine_iters if refine_iters is None else refine_iters
    if grid_steps < 8:
        raise ValueError(f"grid_steps must be >= 8, got {grid_steps}")
    if refine_iters < 0:
        raise ValueError(f"refine_iters must be >= 0, got {refine_iters}")
    if source.kind is SourceKind.TABLE:
        _, best = best_chsh_variant(source.table)
        return MeasurementQuad.from_angles(0.0, 0.0, 0.0, 0.0), best

    grid = [2.0 * math.pi * k / grid_steps for k in range(grid_steps)]
    best_angles = (grid[0],) * 3
    best = _planar_objective(source, best_angles)
    for angles in itertools.product(grid, repeat=3):
        value = _planar_objective(source, angles)
        if value > best:
            best, best_angles = value, angles
    logger.debug("grid optimum %.12f at %s", best, best_angles)

    step = math.pi / grid_steps
    for _ in range(refine_iters):
        if step < MIN_STEP:
            break
        improved = False
        for k in range(3):
            for direction in (-1.0, 1.0):
                trial = list(best_angles)
                trial[k] += direction * step
                value = _planar_objective(source, tuple(trial))
                if value > best:
                    best, best_angles, improved = value, tuple(trial), True
        if not improved:
            step /= 2.0
    logger.debug("refined optimum %.12f at %s (final step %.1e)", best, best_angles, step)
    return MeasurementQuad.from_angles(0.0, *best_angles), best
