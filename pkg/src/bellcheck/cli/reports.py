"""Command builders shared by the CLI and the HTTP service.

Each ``cmd_*`` function takes already-parsed arguments (radians, unit
vectors, instances) and returns a ``RunReport``. Reports contain no
timestamps, so identical arguments give byte-identical JSON.
"""
import itertools
import logging
import math
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from bellcheck.bell.chsh import (
    CLASSICAL_BOUND, TSIRELSON_BOUND, CorrelationSource, MeasurementQuad, SourceKind,
    best_chsh_variant, chsh_value, max_chsh, tsirelson_quad,
)
from bellcheck.bell.moments import FeasibilityStatus, MomentInstance, check_feasibility, verify_result
from bellcheck.config.settings import settings
from bellcheck.engine.montecarlo import mc_correlation
from bellcheck.engine.rng import block_generator, check_seed
from bellcheck.errors import MarginalFeasibilityError, NonCommutingError, NonHermitianError
from bellcheck.models.hidden_variables import LHVModelSpec, ModelKind, exact_correlation, factor_bound
from bellcheck.quantum.core import pauli, quantum_correlation, singlet, tensor, total_spin, I2
from bellcheck.quantum.spectral import product_expectation, spectral_representation
from bellcheck.quantum.vectors import planar, planar_angle, random_unit_vectors, unit_vector

logger = logging.getLogger("bellcheck.cli")

SEARCH_TOL = 1e-6
Z_LIMIT = 5.0
MAX_LISTED_SAMPLES = 10
MAX_SUBSET_OPERATORS = 6
AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


class Check(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    expected: Any
    actual: Any
    tolerance: Optional[float] = None
    passed: bool = Field(alias="pass")


class RunReport(BaseModel):
    command: str
    parameters: Dict[str, Any]
    results: Dict[str, Any]
    checks: List[Check]
    overall_pass: bool

    @model_validator(mode="after")
    def _overall_is_conjunction(self) -> "RunReport":
        if self.overall_pass != all(c.passed for c in self.checks):
            raise ValueError("overall_pass must equal the conjunction of the checks")
        return self

    @classmethod
    def build(cls, command: str, parameters: Dict[str, Any], results: Dict[str, Any], checks: List[Check]) -> "RunReport":
        return cls(
            command=command,
            parameters=_plain(parameters),
            results=_plain(results),
            checks=checks,
            overall_pass=all(c.passed for c in checks),
        )

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


def _plain(value: Any) -> Any:
    """JSON-native copy of a payload; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating, Fraction)):
        f = float(value)
        return f if math.isfinite(f) else None
    if isinstance(value, complex):
        return {"real": _plain(value.real), "imag": _plain(value.imag)}
    return value


def check(name: str, expected: Any, actual: Any, passed: bool, tolerance: Optional[float] = None) -> Check:
    return Check(name=name, expected=_plain(expected), actual=_plain(actual), tolerance=tolerance, passed=bool(passed))


def error_report(command: str, parameters: Dict[str, Any], error: BaseException) -> RunReport:
    detail: Dict[str, Any] = {"type": type(error).__name__, "message": str(error)}
    if isinstance(error, NonCommutingError):
        detail.update(pair=list(error.pair), norm=error.norm)
    elif isinstance(error, NonHermitianError):
        detail.update(index=error.index, deviation=error.deviation)
    elif isinstance(error, MarginalFeasibilityError):
        detail.update(objective=error.objective, gap=error.gap, tol=error.tol)
    path = getattr(error, "path", None) or getattr(error, "filename", None)
    if path:
        detail["path"] = str(path)
    return RunReport.build(
        command, parameters, {"error": detail},
        [check("input", "valid input", type(error).__name__, False)],
    )


def parse_setting(value: Union[str, float, Sequence[float]], degrees: bool = True) -> Union[float, np.ndarray]:
    """Axis name, angle (float) or 3-vector. Angles come back in radians."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in AXES:
            return unit_vector(AXES[text])
        if "," in text:
            return unit_vector([float(x) for x in text.split(",")])
        value = float(text)
    if np.ndim(value) == 0:
        angle = float(value)
        return math.radians(angle) if degrees else angle
    return unit_vector(value)


def _as_vector(setting: Union[float, np.ndarray]) -> np.ndarray:
    return planar(setting) if np.ndim(setting) == 0 else unit_vector(setting)


def _describe(setting: Union[float, np.ndarray]) -> Dict[str, Any]:
    if np.ndim(setting) == 0:
        return {"angle_rad": float(setting), "vector": planar(setting)}
    return {"vector": setting}


# --- verify-quantum ---


def cmd_verify_quantum(
    trials: int = 1000,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
    a: Optional[Union[float, np.ndarray]] = None,
    b: Optional[Union[float, np.ndarray]] = None,
) -> RunReport:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    seed = check_seed(settings.seed if seed is None else seed)
    tol = settings.quantum_tol if tol is None else tol
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")

    rng = block_generator(seed, 0)
    va = random_unit_vectors(rng, trials) if a is None else np.tile(_as_vector(a), (trials, 1))
    vb = random_unit_vectors(rng, trials) if b is None else np.tile(_as_vector(b), (trials, 1))

    psi = singlet()
    samples = []
    max_dev = max_null = 0.0
    for x, y in zip(va, vb):
        value = quantum_correlation(x, y)
        expected = -float(x @ y)
        dev = abs(value - expected)
        null = max(float(np.linalg.norm(total_spin(x) @ psi)), float(np.linalg.norm(total_spin(y) @ psi)))
        max_dev, max_null = max(max_dev, dev), max(max_null, null)
        if len(samples) < MAX_LISTED_SAMPLES:
            samples.append({"a": x, "b": y, "correlation": value, "minus_dot": expected, "deviation": dev})

    checks = [
        check("correlation_equals_minus_dot", 0.0, max_dev, max_dev <= tol, tol),
        check("singlet_annihilated_by_total_spin", 0.0, max_null, max_null <= tol, tol),
    ]
    if a is not None and b is not None:
        value, expected = samples[0]["correlation"], samples[0]["minus_dot"]
        checks.append(check("fixed_pair_correlation", expected, value, abs(value - expected) <= tol, tol))

    logger.info("verify-quantum: %d trials, max deviation %.3e", trials, max_dev)
    return RunReport.build(
        "verify-quantum",
        {"trials": trials, "seed": seed, "tol": tol,
         "a": None if a is None else _describe(a), "b": None if b is None else _describe(b)},
        {"max_deviation": max_dev, "max_total_spin_norm": max_null, "samples": samples},
        checks,
    )


# --- chsh ---

_SOURCE_OPTIMUM = {
    SourceKind.QUANTUM: TSIRELSON_BOUND,
    SourceKind.TRIPLE: TSIRELSON_BOUND,
    SourceKind.COSINE_PLANAR: TSIRELSON_BOUND,
    SourceKind.SCALAR_SIGN: CLASSICAL_BOUND,
}
# Largest |S| any table of correlations in [-1, 1] can reach.
ALGEBRAIC_BOUND = 4.0


def _quad_payload(quad: MeasurementQuad) -> Dict[str, Any]:
    out: Dict[str, Any] = {"a": quad.a, "a_prime": quad.a_prime, "b": quad.b, "b_prime": quad.b_prime}
    try:
        out["angles_deg"] = [math.degrees(t) for t in quad.angles()]
    except ValueError:
        pass
    return out


def _correlation_table(source: CorrelationSource, quad: MeasurementQuad) -> List[List[float]]:
    if source.kind is SourceKind.TABLE:
        return [list(row) for row in source.table]
    return [[source.correlation(x, y) for y in (quad.b, quad.b_prime)] for x in (quad.a, quad.a_prime)]


def cmd_chsh(
    source: Union[str, CorrelationSource] = "quantum",
    quad: Optional[MeasurementQuad] = None,
    search: bool = False,
    table: Optional[Sequence[Sequence[float]]] = None,
    tol: Optional[float] = None,
    grid_steps: Optional[int] = None,
    refine_iters: Optional[int] = None,
) -> RunReport:
    source = CorrelationSource.parse(source, table)
    tol = settings.quantum_tol if tol is None else tol
    default_quad = quad is None
    quad = tsirelson_quad() if quad is None else quad

    value = chsh_value(source, quad)
    bound = _SOURCE_OPTIMUM.get(source.kind, ALGEBRAIC_BOUND)
    results: Dict[str, Any] = {
        "quad": _quad_payload(quad),
        "correlations": _correlation_table(source, quad),
        "chsh": value,
        "abs_chsh": abs(value),
        "classical_bound": CLASSICAL_BOUND,
        "tsirelson_bound": TSIRELSON_BOUND,
        "violates_classical_bound": abs(value) > CLASSICAL_BOUND + tol,
    }
    checks = [check("within_source_bound", f"<= {bound!r}", abs(value), abs(value) <= bound + tol, tol)]
    if default_quad and source.kind in _SOURCE_OPTIMUM:
        checks.append(check("value_at_tsirelson_quad", bound, abs(value), abs(abs(value) - bound) <= tol, tol))

    if search:
        best_quad, best = max_chsh(source, grid_steps, refine_iters)
        results["search"] = {"optimum": best, "quad": _quad_payload(best_quad)}
        if source.kind is SourceKind.TABLE:
            results["search"]["minus_entry"] = list(best_chsh_variant(source.table)[0])
        if source.kind in _SOURCE_OPTIMUM:
            checks.append(check("search_optimum", bound, best, abs(best - bound) <= SEARCH_TOL, SEARCH_TOL))
        else:
            checks.append(check("search_within_bound", f"<= {bound!r}", best, best <= bound + tol, tol))

    return RunReport.build(
        "chsh",
        {"source": source.kind, "table": source.table, "search": search, "tol": tol,
         "grid_steps": grid_steps if grid_steps is not None else settings.grid_steps,
         "refine_iters": refine_iters if refine_iters is not None else settings.refine_iters},
        results,
        checks,
    )


# --- moment-check ---


def cmd_moment_check(
    instance: MomentInstance,
    tol: Optional[float] = None,
    expect: Optional[Union[str, FeasibilityStatus]] = None,
    source: Optional[str] = None,
) -> RunReport:
    """Feasibility plus an independent audit; MarginalFeasibilityError propagates to the caller."""
    tol = settings.lp_tol if tol is None else tol
    if expect is not None and not isinstance(expect, FeasibilityStatus):
        expect = FeasibilityStatus(str(expect).capitalize())
    result = check_feasibility(instance, tol)
    audited = verify_result(instance, result)

    results: Dict[str, Any] = {
        "m": instance.m,
        "n": instance.n,
        "targets": instance.targets,
        "status": result.status,
        "phase1_objective": result.objective,
        "audit_passed": audited,
    }
    if result.status is FeasibilityStatus.FEASIBLE:
        w = np.asarray(result.weights)
        results["support"] = [{"u": s.u, "v": s.v, "weight": wk} for s, wk in result.support()]
        results["dominant_weight"] = float(w.max())
    else:
        cert = result.certificate
        results["certificate"] = {
            "coefficients": cert.coefficients, "bound": cert.bound, "value": cert.value, "gap": cert.gap,
        }

    checks = [check("audit", True, audited, audited)]
    if expect is not None:
        checks.append(check("expected_status", expect, result.status, result.status is expect))
    return RunReport.build(
        "moment-check",
        {"instance": source, "tol": tol, "expect": expect},
        results,
        checks,
    )


# --- simulate ---


def cmd_simulate(
    model: Union[str, LHVModelSpec],
    a: Union[float, np.ndarray],
    b: Union[float, np.ndarray],
    n: int,
    seed: Optional[int] = None,
    lanes: Optional[int] = None,
) -> RunReport:
    model = LHVModelSpec.parse(model)
    if model.kind is not ModelKind.COSINE:
        a, b = _as_vector(a), _as_vector(b)
    seed = check_seed(settings.seed if seed is None else seed)
    mc = mc_correlation(model, a, b, n, seed=seed, lanes=lanes)
    exact = exact_correlation(model, a, b)
    z = mc.z_score(exact)
    ok = z is None or abs(z) <= Z_LIMIT

    return RunReport.build(
        "simulate",
        {"model": model.kind, "a": _describe(a), "b": _describe(b), "n": n, "seed": seed},
        {"estimate": mc.estimate, "stderr": mc.stderr, "exact": exact, "z_score": z,
         "factor_bound": factor_bound(model)},
        [check("z_score", f"|z| <= {Z_LIMIT}", z, ok, Z_LIMIT)],
    )


# --- spectral-demo ---


def _presets() -> Dict[str, Dict[str, Any]]:
    sz, sx = pauli(3), pauli(1)
    return {
        "singlet-zz": {
            "operators": [tensor(sz, I2), tensor(I2, sz)],
            "state": singlet(),
            "expected_weights": [0.0, 0.5, 0.5, 0.0],
            "expected_product": -1.0,
        },
        "singlet-xx-zz": {
            "operators": [tensor(sx, sx), tensor(sz, sz)],
            "state": singlet(),
            "expected_product": 1.0,
        },
        "diagonal": {
            "operators": [np.diag([1.0, 2.0, 3.0]), np.diag([3.0, 1.0, 2.0])],
            "state": np.full(3, 1.0 / math.sqrt(3.0)),
            "expected_weights": [1.0 / 3.0] * 3,
        },
    }


PRESETS = tuple(_presets())


def cmd_spectral_demo(
    preset: Optional[str] = None,
    operators: Optional[Sequence[np.ndarray]] = None,
    state: Optional[np.ndarray] = None,
    tol: Optional[float] = None,
) -> RunReport:
    tol = settings.operator_tol if tol is None else tol
    expected: Dict[str, Any] = {}
    if preset is not None:
        presets = _presets()
        if preset not in presets:
            raise ValueError(f"unknown preset {preset!r} (known: {', '.join(PRESETS)})")
        expected = presets[preset]
        operators, state = expected["operators"], expected["state"]
    elif operators is None or state is None:
        raise ValueError("spectral-demo needs a preset or operators and a state")

    space = spectral_representation(operators, state, tol)
    k = len(operators)
    subsets = (
        [s for r in range(k + 1) for s in itertools.combinations(range(k), r)]
        if k <= MAX_SUBSET_OPERATORS else [()] + [(i,) for i in range(k)] + [tuple(range(k))]
    )
    moments = []
    max_dev = 0.0
    for s in subsets:
        via_space = space.moment(s)
        direct = product_expectation(operators, state, s)
        max_dev = max(max_dev, abs(via_space - direct))
        moments.append({"subset": s, "spectral": via_space, "direct": direct})

    checks = [check("moment_identity", 0.0, max_dev, max_dev <= tol, tol)]
    if "expected_weights" in expected:
        w = np.asarray(space.weights)
        dev = float(np.max(np.abs(w - expected["expected_weights"])))
        checks.append(check("weights", expected["expected_weights"], space.weights, dev <= tol, tol))
    if "expected_product" in expected:
        full = space.moment(range(k))
        checks.append(check("product_moment", expected["expected_product"], full,
                            abs(full - expected["expected_product"]) <= tol, tol))

    return RunReport.build(
        "spectral-demo",
        {"preset": preset, "operators": k, "dimension": space.size, "tol": tol},
        {"omega": list(range(space.size)), "weights": space.weights, "values": space.value_table,
         "moments": moments},
        checks,
    )
