import itertools
import math

import numpy as np
import pytest

from sparsecert.data.dataset import Dataset
from sparsecert.data.synthetic import planted_separable
from sparsecert.linalg.sparsity import effective_sparsity, truncate_top_s
from sparsecert.linear.bounds import COMPRESSED_LINEAR, bound_linear_sparse, bound_linear_stochastic
from sparsecert.linear.model import LinearClassifier, StochasticCompressionParams, clip_round_step, \
    clip_threshold, compress_vector_clip_round, compress_vector_effective_sparse, compress_vector_stochastic, \
    expected_nonzeros, label_to_binary, linear_adversarial_margin, linear_margin_loss, sparse_budget
from sparsecert.misc.exceptions import DataError, DomainError, PreconditionError


def _unit_l1(rng, n, sparsity=0.0):
    w = rng.normal(size=n)
    w[rng.random(n) < sparsity] = 0.0
    if not np.any(w):
        w[0] = 1.0
    return w / np.sum(np.abs(w)) * rng.uniform(0.5, 1.0)


def _corners(n):
    return np.array(list(itertools.product([-1.0, 1.0], repeat=n)))


def test_margin_example():
    c = LinearClassifier([1.0, -2.0])
    assert linear_adversarial_margin(c, [0.5, 0.5], 2, 0.1) == pytest.approx(-0.8)
    assert linear_adversarial_margin(c, [0.5, 0.5], 2, 0.1, form="infimum") == pytest.approx(-0.8)


def test_margin_without_adversary_and_zero_classifier(rng):
    for _ in range(20):
        w, x = rng.normal(size=5), rng.uniform(-1, 1, size=5)
        c = LinearClassifier(w)
        for y in (1, 2):
            assert linear_adversarial_margin(c, x, y, 0.0) == pytest.approx((2 * y - 3) * np.dot(w, x))
            assert linear_adversarial_margin(LinearClassifier(np.zeros(5)), x, y, 0.3) == 0


def test_margin_forms_differ_for_the_first_label():
    c = LinearClassifier([0.5, 0.5])
    x = [0.2, 0.2]
    factored = linear_adversarial_margin(c, x, 1, 0.1)
    infimum = linear_adversarial_margin(c, x, 1, 0.1, form="infimum")
    assert factored == pytest.approx(-(0.2 - 0.1))
    assert infimum == pytest.approx(-0.2 - 0.1)


def test_margin_infimum_matches_corner_oracle(rng):
    for _ in range(500):
        n = int(rng.integers(1, 13))
        w = rng.normal(size=n)
        x = rng.uniform(-1, 1, size=n)
        eps = rng.uniform(0, 0.5)
        y = int(rng.integers(1, 3))
        c = LinearClassifier(w)
        brute = np.min((2 * y - 3) * ((x + eps * _corners(n)) @ w))
        assert linear_adversarial_margin(c, x, y, eps, form="infimum") == pytest.approx(brute, rel=1e-12, abs=1e-12)
        if y == 2:
            assert linear_adversarial_margin(c, x, y, eps) == pytest.approx(brute, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("y", [0, 3, 1.5])
def test_margin_rejects_bad_label(y):
    with pytest.raises(DomainError):
        linear_adversarial_margin(LinearClassifier([1.0]), [0.5], y, 0.1)


def test_margin_asserts_unit_ball():
    with pytest.raises(AssertionError):
        linear_adversarial_margin(LinearClassifier([1.0]), [1.5], 2, 0.1)


def test_label_to_binary():
    assert label_to_binary(0) == 1
    assert label_to_binary(1) == 2
    with pytest.raises(DomainError):
        label_to_binary(2)


def test_linear_margin_loss_on_planted_data():
    dataset = planted_separable(10, 200, seed=3, margin=0.1)
    c = LinearClassifier(dataset.metadata["planted_w"])
    assert linear_margin_loss(c, dataset, 0.05, 0.0) == 0.0
    inner = np.abs(dataset.x @ c.w)
    assert linear_margin_loss(c, dataset, 0.0, 0.2) == pytest.approx(np.mean(inner <= 0.2))
    flipped = LinearClassifier(-c.w)
    assert linear_margin_loss(flipped, dataset, 0.0, 0.0) == 1.0
    assert linear_margin_loss(c, dataset, 0.05, 0.03, form="factored") <= linear_margin_loss(c, dataset, 0.05, 0.03)


def test_linear_margin_loss_rejects_unsuitable_data():
    c = LinearClassifier([0.5, 0.5])
    with pytest.raises(DomainError):
        linear_margin_loss(c, Dataset(np.zeros((2, 2)), [0, 2], 3), 0.1, 0.0)
    with pytest.raises(DataError):
        linear_margin_loss(c, Dataset(np.zeros((2, 3)), [0, 1], 2), 0.1, 0.0)
    with pytest.raises(DataError):
        linear_margin_loss(c, Dataset(np.zeros((0, 2)), [], 2), 0.1, 0.0)


def test_params_validation():
    with pytest.raises(DomainError):
        StochasticCompressionParams(gamma=0.0)
    with pytest.raises(DomainError):
        StochasticCompressionParams(gamma=0.1, delta=0.0)
    with pytest.raises(DomainError):
        StochasticCompressionParams(gamma=0.1, eps=-0.1)


def test_stochastic_zero_and_saturated():
    params = StochasticCompressionParams(gamma=0.5, eps=0.0, delta=0.5, seed=3)
    assert np.array_equal(compress_vector_stochastic(LinearClassifier(np.zeros(4)), params), np.zeros(4))
    w = np.array([0.5, -0.3, 0.2])
    # p_i = |w_i| / (0.5 * 0.25) >= 1 for every entry
    assert np.array_equal(compress_vector_stochastic(LinearClassifier(w), params), w)


def test_stochastic_requires_unit_l1():
    with pytest.raises(PreconditionError):
        compress_vector_stochastic(LinearClassifier([0.8, 0.8]), StochasticCompressionParams(gamma=0.5))


def test_stochastic_is_deterministic_per_seed():
    c = LinearClassifier([0.4, -0.1, 0.05, 0.2])
    params = StochasticCompressionParams(gamma=0.9, delta=0.9, seed=11)
    assert np.array_equal(compress_vector_stochastic(c, params), compress_vector_stochastic(c, params))


def test_stochastic_is_unbiased():
    w = np.array([0.3, -0.2, 0.15, -0.05, 0.01])
    params = StochasticCompressionParams(gamma=0.9, eps=0.1, delta=0.5, seed=7)
    draws = compress_vector_stochastic(LinearClassifier(w), params, draws=400000)
    assert draws.shape == (400000, 5)
    stderr = draws.std(axis=0) / math.sqrt(draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - w) <= 3 * stderr + 1e-12)
    assert np.all(np.abs(np.abs(draws).mean(axis=0) - np.abs(w)) <= 3 * stderr + 1e-12)


def test_stochastic_nonzero_count(rng):
    w = _unit_l1(rng, 200)
    params = StochasticCompressionParams(gamma=0.5, eps=0.2, delta=0.5, seed=5)
    c = LinearClassifier(w)
    draws = compress_vector_stochastic(c, params, draws=20000)
    counts = np.count_nonzero(draws, axis=1)
    expected = expected_nonzeros(c, params)
    assert expected <= (1 + params.eps) ** 2 / (params.delta * params.gamma ** 2)
    assert abs(counts.mean() - expected) <= 4 * counts.std() / math.sqrt(counts.shape[0]) + 1e-12


def test_clip_round_fixed_point():
    gamma, eps, n = 0.4, 0.0, 2
    step = clip_round_step(gamma, eps, n)
    w = np.array([5 * step, -3 * step])
    params = StochasticCompressionParams(gamma=gamma, eps=eps, delta=0.1, seed=1)
    assert np.allclose(compress_vector_clip_round(LinearClassifier(w), params), w, rtol=0, atol=1e-15)


def test_clip_round_clips_everything_below_threshold(rng):
    n, gamma, eps = 8, 0.4, 0.1
    w = rng.uniform(-1, 1, size=n) * clip_threshold(gamma, eps, n) * 0.99
    params = StochasticCompressionParams(gamma=gamma, eps=eps, delta=0.1, seed=2)
    c = LinearClassifier(w)
    assert np.array_equal(compress_vector_clip_round(c, params), np.zeros(n))
    for x in _corners(n):
        for y in (1, 2):
            deviation = abs(linear_adversarial_margin(c, x, y, eps))
            assert deviation <= gamma / 4 + 1e-12


def test_clip_round_failure_frequency(rng):
    n, gamma, eps, delta = 40, 0.5, 0.1, 0.2
    c = LinearClassifier(_unit_l1(rng, n))
    x = rng.uniform(-1, 1, size=n)
    trials = 2000
    failures = 0
    for seed in range(trials):
        params = StochasticCompressionParams(gamma=gamma, eps=eps, delta=delta, seed=seed)
        w_hat = LinearClassifier(compress_vector_clip_round(c, params))
        deviation = abs(linear_adversarial_margin(c, x, 2, eps) - linear_adversarial_margin(w_hat, x, 2, eps))
        failures += deviation > gamma
    assert failures / trials <= delta + 3 * math.sqrt(delta * (1 - delta) / trials)


def test_effective_sparse_example():
    c = LinearClassifier([0.5, 0.25, 0.25])
    gamma, eps = 0.5, 0.0
    sbar = effective_sparsity(c.w)
    assert sbar == pytest.approx((math.sqrt(0.5) + 1.0) ** 2)
    assert sparse_budget(sbar, gamma, eps, 3) == 3
    w_hat = LinearClassifier(compress_vector_effective_sparse(c, gamma, eps))
    for x in _corners(3):
        for y in (1, 2):
            assert abs(linear_adversarial_margin(c, x, y, eps) - linear_adversarial_margin(w_hat, x, y, eps)) \
                <= gamma + 1e-12


def test_effective_sparse_fixed_point():
    gamma, eps = 0.5, 0.0
    w = np.array([0.0, 0.5, 0.0])
    assert np.allclose(compress_vector_effective_sparse(LinearClassifier(w), gamma, eps), w, rtol=0, atol=1e-15)


def test_effective_sparse_exhaustive_corners(rng):
    for _ in range(100):
        n = int(rng.integers(1, 11))
        c = LinearClassifier(_unit_l1(rng, n, sparsity=0.4))
        gamma, eps = rng.uniform(0.05, 1.0), rng.uniform(0, 0.3)
        w_hat = LinearClassifier(compress_vector_effective_sparse(c, gamma, eps))
        for x in _corners(n):
            for y in (1, 2):
                deviation = abs(linear_adversarial_margin(c, x, y, eps) - linear_adversarial_margin(w_hat, x, y, eps))
                assert deviation <= gamma * (1 + 1e-9)


def test_effective_sparse_stage_errors(rng):
    for _ in range(200):
        n = int(rng.integers(2, 40))
        c = LinearClassifier(_unit_l1(rng, n))
        gamma, eps = rng.uniform(0.05, 1.0), rng.uniform(0, 0.3)
        s = sparse_budget(effective_sparsity(c.w), gamma, eps, n)
        truncated = truncate_top_s(c.w, s)
        final = compress_vector_effective_sparse(c, gamma, eps)
        assert np.sum(np.abs(c.w - truncated)) * (1 + eps) <= gamma / 2 * (1 + 1e-9)
        assert np.sum(np.abs(truncated - final)) * (1 + eps) <= gamma / 2 * (1 + 1e-9)


def test_effective_sparse_rejects_bad_arguments():
    with pytest.raises(DomainError):
        compress_vector_effective_sparse(LinearClassifier([0.5]), 0.0, 0.0)
    with pytest.raises(PreconditionError):
        compress_vector_effective_sparse(LinearClassifier([0.8, -0.8]), 0.5, 0.0)


def test_bound_linear_stochastic_terms():
    report = bound_linear_stochastic(0.5, 0.2, 10 ** 4, 1024)
    assert report.bounded_quantity == COMPRESSED_LINEAR
    assert not report.invalid_regime
    assert report.terms["delta"] == pytest.approx((1.44 / (0.25 * 1e4)) ** (1 / 3))
    assert report.bound == report.empirical_loss + report.capacity_term
    assert bound_linear_stochastic(0.5, 0.2, 2 * 10 ** 4, 1024).capacity_term < report.capacity_term


def test_bound_linear_stochastic_eps_zero_specialization():
    report = bound_linear_stochastic(0.5, 0.0, 5000, 100)
    delta = (1 / (0.25 * 5000)) ** (1 / 3)
    q = 1 / (delta * 0.25)
    r = 4 * 100 * delta * 0.5
    assert report.capacity_term == pytest.approx(math.sqrt(q * math.log(r) / 5000) + delta, rel=1e-12)


def test_bound_linear_stochastic_flags_invalid_regime():
    report = bound_linear_stochastic(0.5, 0.0, 1, 1)
    assert report.invalid_regime
    assert report.notes


def test_bound_linear_sparse_scaling():
    base = bound_linear_sparse(10, 0.5, 0.0, 10 ** 4)
    assert 0 < base.confidence < 1
    assert base.confidence == pytest.approx(1 - math.exp(-base.log_cardinality))
    big = bound_linear_sparse(10, 0.5, 0.0, 10 ** 12)
    assert big.capacity_term < base.capacity_term / 1000
    # q grows by (1 + eps) and log r by log((1 + eps)^2)
    adv = bound_linear_sparse(10, 0.5, 0.2, 10 ** 4)
    ratio = (adv.capacity_term / base.capacity_term) ** 2
    assert ratio == pytest.approx(1.2 * math.log(4 * 10 * 1.44 / 0.25) / math.log(4 * 10 / 0.25), rel=1e-12)


def test_bound_linear_sparse_validation():
    with pytest.raises(DomainError):
        bound_linear_sparse(0.5, 0.5, 0.0, 100)
    with pytest.raises(DomainError):
        bound_linear_sparse(2, 0.5, 0.0, 0)
    assert bound_linear_sparse(1, 10.0, 0.0, 100).invalid_regime
