import dataclasses
import math
import time

import numpy as np
import pytest

from bellcheck.bell.chsh import max_abs_chsh
from bellcheck.bell.moments import (
    FeasibilityStatus, MomentInstance, check_feasibility, cosine_targets, enumerate_strategies, sign_matrix,
    strategy_matrix, quantum_targets, verify_result,
)
from bellcheck.errors import (
    EnumerationCapError, MalformedTargetsError, MarginalFeasibilityError, ShapeMismatchError,
)

R2 = math.sqrt(2.0)
ALPHA = (0.0, math.pi / 2)
BETA = (math.pi / 4, 3 * math.pi / 4)


def test_strategy_enumeration():
    assert len(enumerate_strategies(1, 1)) == 4
    strategies = enumerate_strategies(2, 2)
    assert len(strategies) == 16
    assert len({s.correlations().tobytes() for s in strategies}) == 8
    assert all(s.u[0] == 1 for s in strategies[:8])
    with pytest.raises(EnumerationCapError):
        enumerate_strategies(12, 13)


def test_quantum_targets():
    assert np.allclose(quantum_targets([0.0], [0.0]), [[-1.0]], atol=1e-15)
    assert np.allclose(quantum_targets([0.0], [math.pi / 2]), [[0.0]], atol=1e-15)
    expected = [[-R2 / 2, R2 / 2], [-R2 / 2, -R2 / 2]]
    assert np.allclose(quantum_targets(ALPHA, BETA), expected, atol=1e-15)
    # vectors and angles give the same targets
    assert np.allclose(quantum_targets([(0, 0, 1)], [(1, 0, 0)]), [[0.0]])


def test_chsh_instance_is_infeasible_with_tsirelson_gap():
    instance = MomentInstance.from_settings(ALPHA, BETA)
    result = check_feasibility(instance)
    assert result.status is FeasibilityStatus.INFEASIBLE
    assert result.objective > 1e-9
    cert = result.certificate
    assert cert.bound == pytest.approx(2.0, abs=1e-9)
    assert cert.gap == pytest.approx(2 * R2 - 2, abs=1e-9)
    assert verify_result(instance, result)
    # the certificate is a CHSH facet: entries +-1/2 scaled to bound 2
    assert np.allclose(np.abs(cert.matrix()), 1.0, atol=1e-9)


def test_half_cosine_targets_are_feasible():
    instance = MomentInstance.from_settings(ALPHA, BETA, cosine_targets(ALPHA, BETA))
    result = check_feasibility(instance)
    assert result.status is FeasibilityStatus.FEASIBLE
    assert len(result.weights) == 16
    assert sum(result.weights) == pytest.approx(1.0, abs=1e-9)
    assert verify_result(instance, result)


@pytest.mark.parametrize("size", [3, 4])
@pytest.mark.parametrize("case", range(10))
def test_half_cosine_random_grids_are_feasible(size, case):
    rng = np.random.default_rng(100 * size + case)
    alpha = rng.uniform(0, 2 * math.pi, size)
    beta = rng.uniform(0, 2 * math.pi, size)
    instance = MomentInstance.from_settings(list(alpha), list(beta), cosine_targets(alpha, beta))
    result = check_feasibility(instance)
    assert result.status is FeasibilityStatus.FEASIBLE
    w = np.asarray(result.weights)
    recon = sum(wk * s.correlations() for wk, s in zip(w, result.strategies))
    assert np.max(np.abs(recon - instance.targets)) <= 1e-8
    assert verify_result(instance, result)


def test_vertex_instance_puts_weight_on_one_strategy():
    u, v = (1, -1), (1, 1)
    instance = MomentInstance.from_settings(ALPHA, BETA, np.outer(u, v))
    result = check_feasibility(instance)
    assert result.status is FeasibilityStatus.FEASIBLE
    w = np.asarray(result.weights)
    k = int(np.argmax(w))
    assert w[k] == pytest.approx(1.0, abs=1e-9)
    s = result.strategies[k]
    assert np.array_equal(np.outer(s.u, s.v), np.outer(u, v))
    assert verify_result(instance, result)


def test_corrupted_weights_fail_the_audit():
    instance = MomentInstance.from_settings(ALPHA, BETA, cosine_targets(ALPHA, BETA))
    result = check_feasibility(instance)
    w = list(result.weights)
    k = int(np.argmax(w))
    w[k] = -w[k]
    assert not verify_result(instance, dataclasses.replace(result, weights=tuple(w)))


def test_wrong_shape_result_is_rejected():
    small = MomentInstance.from_settings([0.0], [0.0], [[0.5]])
    result = check_feasibility(MomentInstance.from_settings(ALPHA, BETA, cosine_targets(ALPHA, BETA)))
    with pytest.raises(ShapeMismatchError):
        verify_result(small, result)


def test_permuting_settings_keeps_status():
    instance = MomentInstance.from_settings(ALPHA, BETA)
    swapped = instance.permuted([1, 0], [1, 0])
    assert swapped.party1_angles == (ALPHA[1], ALPHA[0])
    result = check_feasibility(swapped)
    assert result.status is FeasibilityStatus.INFEASIBLE
    assert result.certificate.gap == pytest.approx(2 * R2 - 2, abs=1e-9)
    # the certificate's rows and columns follow the settings
    original = check_feasibility(instance).certificate.matrix()
    assert np.allclose(result.certificate.matrix(), original[np.ix_([1, 0], [1, 0])], atol=1e-9)


def test_scaling_crosses_the_boundary():
    base = quantum_targets(ALPHA, BETA)
    # t = 1/sqrt(2) is the boundary; stay clear of the marginal band
    inside = MomentInstance.from_settings(ALPHA, BETA, base * (1 / R2 - 1e-3))
    outside = MomentInstance.from_settings(ALPHA, BETA, base * (1 / R2 + 1e-3))
    assert check_feasibility(inside).status is FeasibilityStatus.FEASIBLE
    assert check_feasibility(outside).status is FeasibilityStatus.INFEASIBLE


def test_marginal_instance_on_the_boundary():
    exact = MomentInstance.from_settings(ALPHA, BETA, [[-0.5, 0.5], [-0.5, -0.5]])
    assert check_feasibility(exact).status is FeasibilityStatus.FEASIBLE
    # pushed out by 1 + eps: phase-1 objective >= 2 eps, relative gap exactly eps
    pushed = MomentInstance.from_settings(ALPHA, BETA, exact.targets * (1 + 0.75e-9))
    with pytest.raises(MarginalFeasibilityError) as info:
        check_feasibility(pushed, tol=1e-9)
    assert info.value.objective >= 1e-9
    assert info.value.gap == pytest.approx(0.75e-9, abs=1e-12)
    # a clear push is decided
    far = MomentInstance.from_settings(ALPHA, BETA, exact.targets * (1 + 1e-6))
    assert check_feasibility(far, tol=1e-9).status is FeasibilityStatus.INFEASIBLE


@pytest.mark.parametrize("case", range(40))
def test_random_two_by_two_matches_chsh_criterion(case):
    rng = np.random.default_rng(500 + case)
    targets = rng.uniform(-1, 1, (2, 2))
    # stay away from the facets where either answer is marginal
    if abs(max_abs_chsh(targets) - 2.0) < 1e-6:
        pytest.skip("too close to a CHSH facet")
    instance = MomentInstance.from_settings(ALPHA, BETA, targets)
    result = check_feasibility(instance)
    expected = FeasibilityStatus.FEASIBLE if max_abs_chsh(targets) <= 2.0 else FeasibilityStatus.INFEASIBLE
    assert result.status is expected
    assert verify_result(instance, result)


def test_instance_validation():
    with pytest.raises(MalformedTargetsError):
        MomentInstance.from_settings(ALPHA, BETA, [[0.0, 0.0]])
    with pytest.raises(MalformedTargetsError):
        MomentInstance.from_settings(ALPHA, BETA, [[1.5, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        check_feasibility(MomentInstance.from_settings(ALPHA, BETA), tol=1e-3)


def test_sign_matrix_matches_strategy_enumeration():
    signs = sign_matrix(2, 3)
    assert signs.shape == (32, 5)
    strategies = enumerate_strategies(2, 3)
    assert [tuple(r) for r in signs] == [s.u + s.v for s in strategies]
    cols = strategy_matrix(signs, 2)
    assert np.array_equal(cols[:, 7], strategies[7].correlations().ravel())
    with pytest.raises(EnumerationCapError):
        sign_matrix(12, 13)


@pytest.mark.parametrize("targets", [None, cosine_targets((0.1, 1.3, 2.0), (0.4, 2.2, 5.0))])
def test_identical_instances_give_identical_results(targets):
    alpha, beta = (0.1, 1.3, 2.0), (0.4, 2.2, 5.0)
    first = check_feasibility(MomentInstance.from_settings(alpha, beta, targets))
    second = check_feasibility(MomentInstance.from_settings(alpha, beta, targets))
    assert first.status is second.status
    assert first.objective == second.objective
    assert first.weights == second.weights
    assert first.certificate == second.certificate


def test_seven_by_seven_instance_is_decided_quickly():
    rng = np.random.default_rng(77)
    alpha = rng.uniform(0, math.pi, 7)
    beta = rng.uniform(0, math.pi, 7)
    instance = MomentInstance.from_settings(list(alpha), list(beta))
    start = time.perf_counter()
    result = check_feasibility(instance)
    elapsed = time.perf_counter() - start
    assert len(result.signs) == 2 ** 14
    assert verify_result(instance, result)
    assert elapsed < 20.0
