"""Classical hidden-variable models of a spin pair.

Three models share one interface (sample space, per-party factor f^(k),
closed-form correlation):

* ``triple``: three +-1 step functions xi_1, xi_2, xi_3 on [0, 1] with an
  identity Gram matrix. Party 1 uses f = xi . a, party 2 uses f = -xi . b.
  The pair correlation is exactly -a.b, but |f| reaches sqrt(3) for general
  directions, so the per-sample bound |f| <= 1 fails.
* ``cosine``: omega uniform on [0, 2pi), f = sqrt(2) cos(setting - omega) for
  both parties; correlation cos(alpha - beta) with |f| up to sqrt(2).
* ``scalar-sign``: lambda uniform on the unit sphere, f = sign(a . lambda) and
  -sign(b . lambda); correlation -1 + 2 theta / pi with |f| = 1.

Factor values of the triple model are integrand values, not outcomes of
individual measurements along ``a``. Only the three coordinate axes carry
individual +-1 outcomes (see ``axis_outcomes``).
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from bellcheck.config.settings import settings
from bellcheck.errors import NonUnitVectorError, OutsideSampleSpaceError, UnknownModelError
from bellcheck.models.dyadic import PiecewiseConstantRV, dyadic, gram_matrix
from bellcheck.quantum.vectors import angle_between, planar_angle, unit_vector

logger = logging.getLogger("bellcheck.models")

Setting = Union[float, np.ndarray]

MIN_QUADRATURE_NODES = 2 ** 10
QUADRATURE_TOL = 1e-10
SQRT2 = math.sqrt(2.0)


class ModelKind(str, Enum):
    TRIPLE = "triple"
    COSINE = "cosine"
    SCALAR_SIGN = "scalar-sign"


@dataclass(frozen=True)
class LHVModelSpec:
    kind: ModelKind
    parameters: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def parse(cls, name: Union[str, "LHVModelSpec", ModelKind]) -> "LHVModelSpec":
        if isinstance(name, LHVModelSpec):
            return name
        try:
            return cls(ModelKind(name))
        except ValueError:
            known = ", ".join(k.value for k in ModelKind)
            raise UnknownModelError(f"unknown model {name!r} (known: {known})") from None


@dataclass(frozen=True)
class TripleSpinModel:
    xi: Tuple[PiecewiseConstantRV, PiecewiseConstantRV, PiecewiseConstantRV]

    def __post_init__(self):
        if len(self.xi) != 3:
            raise ValueError(f"a triple model needs 3 variables, got {len(self.xi)}")
        g = gram_matrix(self.xi)
        if any(g[i][j] != (1 if i == j else 0) for i in range(3) for j in range(3)):
            raise ValueError(f"Gram matrix is not the identity: {g}")

    def party_variables(self, party: int) -> Tuple[PiecewiseConstantRV, ...]:
        _check_party(party)
        return self.xi if party == 1 else tuple(-x for x in self.xi)

    @cached_property
    def cross_gram(self) -> List[List[Fraction]]:
        """Exact integral of xi_i^(1) xi_j^(2)."""
        return gram_matrix(self.party_variables(1), self.party_variables(2))

    @cached_property
    def _cross_gram_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.cross_gram])

    def sample_table(self, omegas: np.ndarray) -> np.ndarray:
        """3 x N array of xi_i(omega_k)."""
        return np.vstack([x.evaluate(omegas) for x in self.xi])


def _check_party(party: int) -> None:
    if party not in (1, 2):
        raise ValueError(f"party must be 1 or 2, got {party!r}")


def triple_spin_model() -> TripleSpinModel:
    bps = tuple(dyadic(k, 2) for k in range(5))
    return TripleSpinModel(xi=(
        PiecewiseConstantRV(bps, (1, 1, 1, 1)),
        PiecewiseConstantRV(bps, (-1, 1, -1, 1)),
        PiecewiseConstantRV(bps, (1, 1, -1, -1)),
    ))


@lru_cache(maxsize=1)
def default_triple_model() -> TripleSpinModel:
    return triple_spin_model()


def axis_outcomes(model: TripleSpinModel, party: int, axis: int) -> PiecewiseConstantRV:
    """+-1 outcome variable of an individual measurement along coordinate axis 1, 2 or 3."""
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis!r}")
    return model.party_variables(party)[axis - 1]


def triple_correlation(model: TripleSpinModel, a, b) -> float:
    """sum_ij a_i b_j integral(xi_i^(1) xi_j^(2)), evaluated from the exact cross Gram matrix."""
    va, vb = unit_vector(a), unit_vector(b)
    return float(va @ model._cross_gram_float @ vb)


def rotated_triple_correlation(model: TripleSpinModel, rotation: np.ndarray, a, b) -> float:
    """Correlation with both parties' variables read in a frame rotated by `rotation`."""
    r = np.asarray(rotation, dtype=np.float64)
    return triple_correlation(model, r @ unit_vector(a), r @ unit_vector(b))


def cosine_quadrature(alpha: float, beta: float, nodes: Optional[int] = None) -> float:
    """2 * (1/2pi) * integral over [0, 2pi) of cos(alpha - w) cos(beta - w), periodic trapezoid rule."""
    nodes = settings.quadrature_nodes if nodes is None else nodes
    if nodes < MIN_QUADRATURE_NODES:
        raise ValueError(f"quadrature needs at least {MIN_QUADRATURE_NODES} nodes, got {nodes}")
    w = 2.0 * math.pi * np.arange(nodes) / nodes
    return float(2.0 * np.mean(np.cos(alpha - w) * np.cos(beta - w)))


def cosine_correlation(alpha: float, beta: float, nodes: Optional[int] = None) -> float:
    closed = math.cos(alpha - beta)
    quad = cosine_quadrature(alpha, beta, nodes)
    if abs(closed - quad) > QUADRATURE_TOL:
        raise ArithmeticError(f"quadrature {quad!r} disagrees with cos(alpha - beta) = {closed!r}")
    return closed


def scalar_sign_correlation(a, b) -> float:
    theta = angle_between(unit_vector(a), unit_vector(b))
    return -1.0 + 2.0 * theta / math.pi


def _sign(x: np.ndarray) -> np.ndarray:
    # sign(0) := +1; the tie set has measure zero
    return np.where(x >= 0.0, 1.0, -1.0)


def coerce_setting(model: LHVModelSpec, setting: Setting) -> Setting:
    """Angle (radians) for the cosine model, validated unit vector otherwise."""
    if model.kind is ModelKind.COSINE:
        if np.ndim(setting) == 0:
            return float(setting)
        return planar_angle(setting)
    if np.ndim(setting) == 0:
        raise NonUnitVectorError(f"model {model.kind.value} needs a 3-vector setting, got {setting!r}")
    return unit_vector(setting)


def sample_omegas(model: LHVModelSpec, gen: np.random.Generator, size: int) -> np.ndarray:
    """Draw `size` points from the model's measure."""
    if model.kind is ModelKind.TRIPLE:
        return gen.random(size)
    if model.kind is ModelKind.COSINE:
        return 2.0 * math.pi * gen.random(size)
    if model.kind is ModelKind.SCALAR_SIGN:
        g = gen.standard_normal((size, 3))
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    raise UnknownModelError(f"unknown model {model.kind!r}")


def factor_values(model: LHVModelSpec, party: int, setting: Setting, omegas: np.ndarray) -> np.ndarray:
    """Vectorized f^(party)(setting, omega) over sample points drawn by `sample_omegas`."""
    _check_party(party)
    s = coerce_setting(model, setting)
    if model.kind is ModelKind.TRIPLE:
        f = s @ default_triple_model().sample_table(omegas)
        return f if party == 1 else -f
    if model.kind is ModelKind.COSINE:
        return SQRT2 * np.cos(s - np.asarray(omegas))
    if model.kind is ModelKind.SCALAR_SIGN:
        f = _sign(np.asarray(omegas) @ s)
        return f if party == 1 else -f
    raise UnknownModelError(f"unknown model {model.kind!r}")


def _check_omega(model: LHVModelSpec, omega) -> np.ndarray:
    if model.kind is ModelKind.TRIPLE:
        if np.ndim(omega) != 0 or not 0.0 <= float(omega) <= 1.0:
            raise OutsideSampleSpaceError(f"omega={omega!r} is outside [0, 1]")
        return np.array([float(omega)])
    if model.kind is ModelKind.COSINE:
        if np.ndim(omega) != 0 or not 0.0 <= float(omega) < 2.0 * math.pi:
            raise OutsideSampleSpaceError(f"omega={omega!r} is outside [0, 2pi)")
        return np.array([float(omega)])
    try:
        return unit_vector(omega).reshape(1, 3)
    except NonUnitVectorError as e:
        raise OutsideSampleSpaceError(f"omega must be a point on the unit sphere: {e}") from None


def factor_value(model: Union[str, LHVModelSpec], party: int, setting: Setting, omega) -> float:
    """Single-sample integrand factor f^(party)(setting, omega)."""
    model = LHVModelSpec.parse(model)
    return float(factor_values(model, party, setting, _check_omega(model, omega))[0])


def factor_bound(model: Union[str, LHVModelSpec]) -> float:
    """Supremum of |f^(k)| over settings and sample points."""
    model = LHVModelSpec.parse(model)
    return {
        ModelKind.TRIPLE: math.sqrt(3.0),
        ModelKind.COSINE: SQRT2,
        ModelKind.SCALAR_SIGN: 1.0,
    }[model.kind]


def exact_correlation(model: Union[str, LHVModelSpec], a: Setting, b: Setting) -> float:
    model = LHVModelSpec.parse(model)
    sa, sb = coerce_setting(model, a), coerce_setting(model, b)
    if model.kind is ModelKind.TRIPLE:
        return triple_correlation(default_triple_model(), sa, sb)
    if model.kind is ModelKind.COSINE:
        return cosine_correlation(sa, sb)
    return scalar_sign_correlation(sa, sb)
