import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from bellcheck.config.settings import settings
from bellcheck.engine.rng import block_generator, block_spans, check_seed
from bellcheck.models.hidden_variables import (
    LHVModelSpec, Setting, coerce_setting, factor_values, sample_omegas,
)

logger = logging.getLogger("bellcheck.mc")


@dataclass(frozen=True)
class McResult:
    estimate: float
    stderr: float
    n: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"sample count must be >= 1, got {self.n}")
        if not self.stderr >= 0.0:
            raise ValueError(f"stderr must be non-negative, got {self.stderr}")

    def z_score(self, exact: float) -> Optional[float]:
        """(estimate - exact) / stderr; None when stderr is 0 and the estimate is exact."""
        diff = self.estimate - exact
        if self.stderr == 0.0:
            return None if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.stderr


# (count, mean, sum of squared deviations)
_Moments = Tuple[int, float, float]


def _merge(left: _Moments, right: _Moments) -> _Moments:
    na, ma, sa = left
    nb, mb, sb = right
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def _block_moments(model: LHVModelSpec, a: Setting, b: Setting, seed: int, block: int, size: int) -> _Moments:
    omegas = sample_omegas(model, block_generator(seed, block), size)
    prod = factor_values(model, 1, a, omegas) * factor_values(model, 2, b, omegas)
    mean = float(np.mean(prod))
    return size, mean, float(np.sum((prod - mean) ** 2))


def mc_correlation(
    model: Union[str, LHVModelSpec],
    a: Setting,
    b: Setting,
    n: int,
    seed: Optional[int] = None,
    lanes: Optional[int] = None,
    block_size: Optional[int] = None,
) -> McResult:
    """Estimate E[f^(1)(a, w) f^(2)(b, w)] from n i.i.d. draws of the model's measure.

    The result depends only on (model, a, b, n, seed, block_size); lanes only
    changes how many blocks are evaluated at once.
    """
    model = LHVModelSpec.parse(model)
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    seed = check_seed(settings.seed if seed is None else seed)
    lanes = settings.mc_lanes if lanes is None else lanes
    block_size = settings.mc_block_size if block_size is None else block_size
    if lanes < 1:
        raise ValueError(f"lanes must be >= 1, got {lanes}")
    a, b = coerce_setting(model, a), coerce_setting(model, b)

    spans = list(block_spans(n, block_size))
    if lanes == 1:
        parts: List[_Moments] = [_block_moments(model, a, b, seed, j, size) for j, size in spans]
    else:
        with ThreadPoolExecutor(max_workers=lanes) as pool:
            parts = list(pool.map(lambda span: _block_moments(model, a, b, seed, *span), spans))

    total = parts[0]
    for part in parts[1:]:
        total = _merge(total, part)
    count, mean, m2 = total
    stderr = math.sqrt(m2 / (count - 1)) / math.sqrt(count) if count > 1 else 0.0
    logger.debug("mc %s n=%d seed=%d lanes=%d -> %.6f +- %.2e", model.kind.value, n, seed, lanes, mean, stderr)
    return McResult(estimate=mean, stderr=stderr, n=count, seed=seed)
