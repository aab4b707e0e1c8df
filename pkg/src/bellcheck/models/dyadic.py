"""Step functions on [0, 1] with dyadic-rational breakpoints, integrated exactly."""
import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from bellcheck.errors import MalformedBreakpointsError, OutsideSampleSpaceError

Number = Union[int, float, Fraction]


def dyadic(numerator: int, exponent: int) -> Fraction:
    """numerator / 2**exponent."""
    return Fraction(numerator, 2 ** exponent)


def _is_dyadic(x: Fraction) -> bool:
    d = x.denominator
    return d & (d - 1) == 0


@dataclass(frozen=True)
class PiecewiseConstantRV:
    """Real step function on [0, 1].

    values[k] holds on [breakpoints[k], breakpoints[k+1]); the last piece also
    owns the point 1 so the function is total on the closed segment.
    """

    breakpoints: Tuple[Fraction, ...]
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        bps = tuple(Fraction(b) for b in self.breakpoints)
        if len(bps) < 2 or bps[0] != 0 or bps[-1] != 1:
            raise MalformedBreakpointsError(f"breakpoints must run from 0 to 1, got {bps}")
        if any(b1 <= b0 for b0, b1 in zip(bps, bps[1:])):
            raise MalformedBreakpointsError(f"breakpoints must be strictly increasing: {bps}")
        if not all(_is_dyadic(b) for b in bps):
            raise MalformedBreakpointsError(f"breakpoints must be dyadic rationals: {bps}")
        if len(self.values) != len(bps) - 1:
            raise MalformedBreakpointsError(
                f"{len(bps) - 1} pieces need as many values, got {len(self.values)}"
            )
        vals = []
        for v in self.values:
            if isinstance(v, float) and not np.isfinite(v):
                raise MalformedBreakpointsError(f"non-finite value {v!r}")
            vals.append(Fraction(v))
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", tuple(vals))

    def piece_index(self, omega: Number) -> int:
        if not 0 <= omega <= 1:
            raise OutsideSampleSpaceError(f"omega={omega!r} is outside [0, 1]")
        k = bisect.bisect_right(self.breakpoints, Fraction(omega)) - 1
        return min(k, len(self.values) - 1)

    def __call__(self, omega: Number) -> Fraction:
        return self.values[self.piece_index(omega)]

    def __neg__(self) -> "PiecewiseConstantRV":
        return PiecewiseConstantRV(self.breakpoints, tuple(-v for v in self.values))

    def evaluate(self, omegas: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation at sample points in [0, 1]."""
        w = np.asarray(omegas, dtype=np.float64)
        if w.size and (w.min() < 0.0 or w.max() > 1.0):
            raise OutsideSampleSpaceError("sample points must lie in [0, 1]")
        edges = np.array([float(b) for b in self.breakpoints])
        idx = np.minimum(np.searchsorted(edges, w, side="right") - 1, len(self.values) - 1)
        return np.array([float(v) for v in self.values])[idx]


def merged_breakpoints(*rvs: PiecewiseConstantRV) -> List[Fraction]:
    return sorted(set().union(*(rv.breakpoints for rv in rvs)))


def integrate_product(u: PiecewiseConstantRV, v: PiecewiseConstantRV) -> Fraction:
    """Exact integral over [0, 1] of u(w) v(w) dw."""
    total = Fraction(0)
    bps = merged_breakpoints(u, v)
    for lo, hi in zip(bps, bps[1:]):
        total += (hi - lo) * u(lo) * v(lo)
    return total


def integrate(u: PiecewiseConstantRV) -> Fraction:
    return sum(((hi - lo) * val for lo, hi, val in zip(u.breakpoints, u.breakpoints[1:], u.values)), Fraction(0))


def gram_matrix(rvs: Sequence[PiecewiseConstantRV], others: Optional[Sequence[PiecewiseConstantRV]] = None) -> List[List[Fraction]]:
    """G[i][j] = integral of rvs[i] * others[j] (others defaults to rvs)."""
    others = rvs if others is None else others
    return [[integrate_product(u, v) for v in others] for u in rvs]
