import math

import numpy as np
import pytest

from bellcheck.engine.montecarlo import McResult, mc_correlation
from bellcheck.engine.rng import block_generator, block_spans, check_seed
from bellcheck.models.hidden_variables import exact_correlation
from bellcheck.quantum.vectors import planar, random_unit_vectors


def test_block_streams_are_pure_functions_of_seed_and_block():
    a = block_generator(7, 3).random(5)
    b = block_generator(7, 3).random(5)
    c = block_generator(7, 4).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert list(block_spans(10, 4)) == [(0, 4), (1, 4), (2, 2)]
    with pytest.raises(ValueError):
        check_seed(-1)
    with pytest.raises(ValueError):
        check_seed(2 ** 64)


def test_triple_aligned_settings_are_exact():
    for seed in (0, 1, 12345):
        r = mc_correlation("triple", (0, 0, 1), (0, 0, 1), n=10_000, seed=seed)
        assert r.estimate == -1.0
        assert r.stderr == 0.0
        assert r.z_score(-1.0) is None


def test_triple_orthogonal_settings():
    r = mc_correlation("triple", (1, 0, 0), (0, 0, 1), n=10 ** 6, seed=7)
    assert abs(r.estimate) < 5 * r.stderr


def test_cosine_aligned():
    r = mc_correlation("cosine", 0.0, 0.0, n=10 ** 5, seed=3)
    assert abs(r.estimate - 1.0) < 5 * r.stderr


@pytest.mark.parametrize("model, a, b", [
    ("triple", (0.6, 0.0, 0.8), (0.0, 0.6, 0.8)),
    ("cosine", 0.7, 0.1),
    ("scalar-sign", (0.0, 0.0, 1.0), tuple(planar(math.pi / 3))),
])
def test_bit_identical_across_lanes(model, a, b):
    runs = [mc_correlation(model, a, b, n=50_000, seed=11, lanes=lanes, block_size=4096) for lanes in (1, 2, 8)]
    assert all(r == runs[0] for r in runs)
    assert runs[0].n == 50_000


def test_regression_suite_within_five_sigma():
    rng = np.random.default_rng(20240501)
    cases = []
    for k in range(50):
        model = ("triple", "cosine", "scalar-sign")[k % 3]
        if model == "cosine":
            a, b = rng.uniform(0, 2 * math.pi, 2)
        else:
            a, b = random_unit_vectors(rng, 2)
        cases.append((model, a, b))
    for k, (model, a, b) in enumerate(cases):
        r = mc_correlation(model, a, b, n=20_000, seed=1000 + k)
        exact = exact_correlation(model, a, b)
        assert abs(r.estimate - exact) < 5 * r.stderr, (model, a, b, r)


def test_single_sample_and_validation():
    r = mc_correlation("cosine", 0.0, 0.0, n=1, seed=0)
    assert r.n == 1 and r.stderr == 0.0
    assert r.z_score(r.estimate) is None
    assert r.z_score(r.estimate + 1.0) == -math.inf
    with pytest.raises(ValueError):
        mc_correlation("cosine", 0.0, 0.0, n=0)
    with pytest.raises(ValueError):
        mc_correlation("cosine", 0.0, 0.0, n=10, lanes=0)
    with pytest.raises(ValueError):
        McResult(estimate=0.0, stderr=-1.0, n=10, seed=0)
