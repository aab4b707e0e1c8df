"""Unit 3-vectors, planar settings and random geometry."""
import math
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from bellcheck.errors import NonUnitVectorError

UnitVector3 = NDArray[np.float64]

UNIT_TOL = 1e-12


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def unit_vector(components: Sequence[float], tol: float = UNIT_TOL) -> UnitVector3:
    """Validate a direction; raises NonUnitVectorError unless |v| = 1 within tol."""
    v = np.asarray(components, dtype=np.float64).reshape(-1)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise NonUnitVectorError(f"expected 3 finite components, got {components!r}")
    norm2 = float(v @ v)
    if abs(norm2 - 1.0) > tol:
        raise NonUnitVectorError(f"|v|^2 = {norm2!r} is not 1 within {tol:.1e}")
    return _frozen(v.copy())


def normalized(components: Sequence[float]) -> UnitVector3:
    v = np.asarray(components, dtype=np.float64).reshape(-1)
    norm = float(np.linalg.norm(v))
    if v.shape != (3,) or norm == 0.0 or not math.isfinite(norm):
        raise NonUnitVectorError(f"cannot normalize {components!r}")
    return _frozen(v / norm)


def planar(theta: float) -> UnitVector3:
    """Unit vector in the x-z plane at angle theta (radians) from +z towards +x."""
    return _frozen(np.array([math.sin(theta), 0.0, math.cos(theta)]))


def planar_angle(v: Sequence[float], tol: float = UNIT_TOL) -> float:
    u = unit_vector(v)
    if abs(u[1]) > tol:
        raise NonUnitVectorError(f"{list(u)} does not lie in the x-z plane")
    return math.atan2(u[0], u[2])


def angle_between(a: UnitVector3, b: UnitVector3) -> float:
    # atan2 form stays accurate near 0 and pi
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(a @ b))


def random_unit_vectors(rng: np.random.Generator, n: int) -> NDArray[np.float64]:
    """n x 3 array of points uniform on the sphere (normalized Gaussian triples)."""
    g = rng.standard_normal((n, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def random_rotation(rng: np.random.Generator) -> NDArray[np.float64]:
    q = rng.standard_normal(4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])
