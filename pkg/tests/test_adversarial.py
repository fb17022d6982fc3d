import itertools

import numpy as np
import pytest

from sparsecert.adversarial.attacks import AttackConfig, adversarial_margin_estimate, fgsm_attack, pgd_attack, \
    pgd_attack_batch
from sparsecert.adversarial.risk import CHUNK_SIZE, adversarial_margins, adversarial_risk, \
    compressibility_fraction, worker_count
from sparsecert.adversarial.training import ADVERSARIAL, STANDARD, adversarial_training_step, epsilon_schedule
from sparsecert.data.dataset import Dataset
from sparsecert.linear.model import LinearClassifier, linear_adversarial_margin
from sparsecert.misc.config_manager import ConfigManager
from sparsecert.misc.exceptions import DataError, DomainError
from sparsecert.nn.network import LayeredNetwork, backprop_gradients, margins, predict
from sparsecert.nn.optimizer import MomentumSGD
from tests.helpers import random_network, rebalanced_network


def _linear_network(w):
    # scores (0, <w, x>), so class 1 has margin <w, x>
    return LayeredNetwork([np.stack([np.zeros_like(w), w], axis=1)], final_activation="identity")


def test_attack_config_validation():
    assert AttackConfig(eps=0.2, steps=10).resolved_step_size == pytest.approx(0.05)
    assert AttackConfig(eps=0.2, step_size=0.01).resolved_step_size == 0.01
    with pytest.raises(DomainError):
        AttackConfig(eps=-0.1)
    with pytest.raises(DomainError):
        AttackConfig(steps=0)
    with pytest.raises(DomainError):
        AttackConfig(step_size=0.0)


def test_attack_config_from_config_manager():
    config_manager = ConfigManager(default_variables={"eps": "0.1", "steps": "5", "step_size": "",
                                                      "random_init": "false", "seed": 4})
    cfg = AttackConfig.from_config_manager(config_manager)
    assert cfg == AttackConfig(eps=0.1, steps=5, step_size=None, random_init=False, seed=4)


def test_pgd_zero_radius_gives_zero_perturbation(rng):
    net = random_network(rng, [5, 4, 3], final_activation="identity")
    x = rng.uniform(-1, 1, size=5)
    assert not np.any(pgd_attack(net, x, 1, AttackConfig(eps=0.0)))
    assert adversarial_margin_estimate(net, x, 1, 0.0, AttackConfig()) == pytest.approx(
        float(margins(net, x[None, :], [1])[0]))


def test_pgd_matches_linear_closed_form(rng):
    for _ in range(100):
        n = int(rng.integers(1, 12))
        w = rng.normal(size=n)
        x = rng.uniform(-1, 1, size=n)
        eps = rng.uniform(0.01, 0.3)
        net = _linear_network(w)
        estimate = adversarial_margin_estimate(net, x, 1, eps, AttackConfig(seed=int(rng.integers(100))))
        expected = linear_adversarial_margin(LinearClassifier(w), x, 2, eps)
        assert estimate == pytest.approx(expected, abs=1e-6)
        eta = fgsm_attack(net, x, 1, eps)
        assert float(margins(net, x + eta, [1])[0]) == pytest.approx(expected, abs=1e-9)


def test_pgd_trajectory_is_monotone_without_random_start(rng):
    w = rng.normal(size=6)
    net = _linear_network(w)
    x = rng.uniform(-1, 1, size=(20, 6))
    y = np.ones(20, dtype=int)
    _, trajectory = pgd_attack_batch(net, x, y, AttackConfig(eps=0.2, random_init=False), return_trajectory=True)
    assert trajectory.shape == (20, 11)
    assert np.all(np.diff(trajectory, axis=1) <= 1e-12)


def test_pgd_stays_in_the_ball_and_never_increases_the_margin(rng):
    net = random_network(rng, [8, 6, 4], final_activation="identity")
    x = rng.uniform(-1, 1, size=(50, 8))
    y = rng.integers(0, 4, size=50)
    cfg = AttackConfig(eps=0.15, steps=7, seed=9)
    eta = pgd_attack_batch(net, x, y, cfg)
    assert np.max(np.abs(eta)) <= 0.15
    assert np.all(margins(net, x + eta, y) <= margins(net, x, y))
    assert np.array_equal(eta, pgd_attack_batch(net, x, y, cfg))


def test_pgd_with_dead_units_stays_in_the_ball():
    net = LayeredNetwork([np.zeros((3, 2)), np.ones((2, 2))])
    eta = pgd_attack(net, np.array([0.1, 0.2, 0.3]), 0, AttackConfig(eps=0.1))
    assert np.max(np.abs(eta)) <= 0.1


def test_pgd_random_start_does_not_depend_on_the_batch(rng):
    net = random_network(rng, [5, 4, 3], final_activation="identity")
    x = rng.uniform(-1, 1, size=(6, 5))
    y = rng.integers(0, 3, size=6)
    cfg = AttackConfig(eps=0.2, seed=1)
    batch = pgd_attack_batch(net, x, y, cfg, indices=np.arange(10, 16))
    for row in range(6):
        single = pgd_attack(net, x[row], int(y[row]), cfg, index=10 + row)
        assert np.allclose(single, batch[row], atol=1e-12)


def test_pgd_rejects_wrong_dimension(rng):
    net = random_network(rng, [5, 3], final_activation="identity")
    with pytest.raises(DomainError):
        pgd_attack_batch(net, np.zeros((2, 4)), [0, 1], AttackConfig())


def test_pgd_estimate_is_below_the_clean_margin(rng):
    for _ in range(20):
        net = random_network(rng, [4, 5, 3], final_activation="identity")
        x = rng.uniform(-1, 1, size=4)
        y = int(rng.integers(0, 3))
        estimate = adversarial_margin_estimate(net, x, y, 0.2, AttackConfig(seed=3))
        assert estimate <= float(margins(net, x[None, :], [y])[0]) + 1e-12


def test_adversarial_risk_examples(rng):
    net = random_network(rng, [6, 5, 3], final_activation="identity")
    x = rng.uniform(-1, 1, size=(40, 6))
    y = rng.integers(0, 3, size=40)
    data = Dataset(x, y, 3)
    cfg = AttackConfig(seed=2)
    assert adversarial_risk(net, data, 1e9, 0.2, cfg).value == 1.0
    clean = adversarial_risk(net, data, 0.0, 0.0, cfg)
    assert clean.value == pytest.approx(np.mean(margins(net, x, y) <= 0))
    assert clean.value >= np.mean(predict(net, x) != y)
    assert adversarial_risk(net, data, 0.0, 0.2, cfg).value >= clean.value
    with pytest.raises(DataError):
        adversarial_risk(net, Dataset(np.zeros((0, 6)), np.zeros(0, dtype=int), 3), 0.0, 0.1, cfg)


def test_adversarial_risk_monotone_in_radius_on_linear_model(rng):
    w = rng.normal(size=10)
    w /= np.sum(np.abs(w))
    x = rng.uniform(-1, 1, size=(300, 10))
    y = (x @ w > 0).astype(int)
    data = Dataset(x, y, 2)
    risks = [adversarial_risk(_linear_network(w), data, 0.0, eps, AttackConfig(seed=5)).value
             for eps in (0.0, 0.05, 0.1, 0.2)]
    assert risks == sorted(risks)
    assert risks[0] <= np.mean(y == 0) + 1e-12


def test_margins_do_not_depend_on_thread_count(rng):
    net = random_network(rng, [6, 5, 3], final_activation="identity")
    m = CHUNK_SIZE * 2 + 17
    x = rng.uniform(-1, 1, size=(m, 6))
    y = rng.integers(0, 3, size=m)
    cfg = AttackConfig(eps=0.1, seed=8)
    assert np.array_equal(adversarial_margins(net, x, y, cfg, threads=1), adversarial_margins(net, x, y, cfg, threads=4))


def test_worker_count_reads_the_environment(monkeypatch):
    monkeypatch.setenv("SPARSE_CERT_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("SPARSE_CERT_THREADS", "0")
    assert worker_count() == 1


def test_compressibility_fraction_of_identical_networks(rng):
    net = random_network(rng, [4, 3, 2])
    data = Dataset(rng.uniform(-1, 1, size=(30, 4)), rng.integers(0, 2, size=30), 2)
    assert compressibility_fraction(net, net.copy(), data, 0.01, 0.05, AttackConfig(seed=1)) == 1.0


def test_epsilon_schedule_ramp():
    phases = [epsilon_schedule(epoch, 20, 0.5, 0.05, 0.2) for epoch in range(20)]
    assert all(phase == STANDARD and eps == 0 for phase, eps in phases[:10])
    assert phases[10] == (ADVERSARIAL, pytest.approx(0.05))
    assert phases[19] == (ADVERSARIAL, pytest.approx(0.2))
    ramp = np.diff([eps for _, eps in phases[10:]])
    assert np.allclose(ramp, ramp[0])
    assert epsilon_schedule(1, 2, 0.5, 0.05, 0.2) == (ADVERSARIAL, 0.05)
    assert all(epsilon_schedule(e, 5, 1.0, 0.05, 0.2)[0] == STANDARD for e in range(5))
    assert all(epsilon_schedule(e, 5, 0.0, 0.1, 0.1) == (ADVERSARIAL, 0.1) for e in range(5))
    with pytest.raises(DomainError):
        epsilon_schedule(5, 5, 0.5, 0.05, 0.2)


def test_adversarial_training_step(rng):
    net = random_network(rng, [5, 4, 3], final_activation="identity")
    x = rng.uniform(-1, 1, size=(8, 5))
    y = rng.integers(0, 3, size=8)
    clean = net.copy()
    expected = [W - 0.1 * g for W, g in zip(clean.layers, backprop_gradients(clean, x, y))]
    stepped, loss = adversarial_training_step(net.copy(), (x, y), AttackConfig(eps=0.0), MomentumSGD(0.1, 0.0))
    for W, V in zip(stepped.layers, expected):
        assert np.allclose(W, V)
    a, loss_a = adversarial_training_step(net.copy(), (x, y), AttackConfig(eps=0.1, seed=3), MomentumSGD(0.1))
    b, loss_b = adversarial_training_step(net.copy(), (x, y), AttackConfig(eps=0.1, seed=3), MomentumSGD(0.1))
    assert loss_a == loss_b and np.isfinite(loss_a)
    for W, V in zip(a.layers, b.layers):
        assert np.array_equal(W, V)


def _grid_minimum(net, x, y, eps, points=9):
    # every corner of the ball is on the grid
    offsets = np.array(list(itertools.product(np.linspace(-eps, eps, points), repeat=x.shape[0])))
    return float(np.min(margins(net, x + offsets, np.full(offsets.shape[0], y))))


def test_pgd_estimate_is_never_below_the_true_adversarial_margin(rng):
    for _ in range(30):
        n = int(rng.integers(2, 5))
        net = rebalanced_network(rng, [n, 5, 3], final_activation="identity")
        x = rng.uniform(-0.8, 0.8, size=n)
        y = int(rng.integers(3))
        eps = float(rng.uniform(0.05, 0.3))
        estimate = adversarial_margin_estimate(net, x, y, eps, AttackConfig(steps=40, seed=int(rng.integers(100))))
        # the margin is 2-Lipschitz in l_inf for a rebalanced network, grid points are eps/8 from any point
        lower = _grid_minimum(net, x, y, eps) - 2 * eps / 8
        assert estimate - lower >= -1e-12


def test_pgd_reaches_most_of_the_grid_minimum(rng):
    close = 0
    for _ in range(30):
        n = int(rng.integers(2, 5))
        net = rebalanced_network(rng, [n, 5, 3], final_activation="identity")
        x = rng.uniform(-0.8, 0.8, size=n)
        y = int(rng.integers(3))
        eps = float(rng.uniform(0.05, 0.3))
        clean = float(margins(net, x[None, :], [y])[0])
        grid = _grid_minimum(net, x, y, eps)
        estimate = adversarial_margin_estimate(net, x, y, eps, AttackConfig(steps=40, seed=int(rng.integers(100))))
        assert estimate <= clean + 1e-12
        close += estimate <= grid + 0.25 * (clean - grid) + 1e-9
    assert close >= 15
