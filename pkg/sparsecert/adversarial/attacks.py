"""
l_inf bounded attacks on the classification margin.

Every sample owns a random stream seeded with (seed, sample index), so the random start of a sample does not depend
on the batch it is attacked in.
"""
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from sparsecert.misc.exceptions import DomainError
from sparsecert.nn.network import LayeredNetwork, input_gradient, margins


@dataclass(frozen=True)
class AttackConfig:
    """
    PGD settings; without an explicit step size the step is 2.5 eps / steps
    """
    eps: float = 0.2
    steps: int = 10
    step_size: Optional[float] = None
    random_init: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.eps >= 0:
            raise DomainError("attack radius must be nonnegative, got {}".format(self.eps))
        if self.steps < 1:
            raise DomainError("attack needs at least one step, got {}".format(self.steps))
        if self.step_size is not None and not self.step_size > 0:
            raise DomainError("step size must be positive, got {}".format(self.step_size))

    @property
    def resolved_step_size(self) -> float:
        if self.step_size is not None:
            return self.step_size
        return 2.5 * self.eps / self.steps

    def with_eps(self, eps: float) -> "AttackConfig":
        return replace(self, eps=eps)

    @classmethod
    def from_config_manager(cls, config_manager) -> "AttackConfig":
        step_size = config_manager.get_value("step_size")
        return cls(eps=config_manager.get_float("eps"),
                   steps=config_manager.get_int("steps"),
                   step_size=None if step_size in (None, "") else config_manager.get_float("step_size"),
                   random_init=config_manager.get_bool("random_init"),
                   seed=config_manager.get_int("seed"))

    def to_dict(self) -> dict:
        return {"eps": self.eps, "steps": self.steps, "step_size": self.resolved_step_size,
                "random_init": self.random_init, "seed": self.seed}


def _indices(count: int, indices) -> np.ndarray:
    if indices is None:
        return np.arange(count)
    indices = np.asarray(indices)
    if indices.shape != (count,):
        raise DomainError("need one sample index per row, got {}".format(indices.shape))
    return indices


def random_start(shape, eps: float, seed: int, indices) -> np.ndarray:
    eta = np.empty(shape)
    for row, index in enumerate(indices):
        eta[row] = np.random.default_rng([seed, int(index)]).uniform(-eps, eps, size=shape[1])
    return eta


def pgd_attack_batch(net: LayeredNetwork, x, y, cfg: AttackConfig, indices=None, return_trajectory: bool = False):
    """
    projected signed gradient descent on the margin, eta <- clip(eta - step sign(grad), -eps, eps). The returned
    perturbation of every row is the iterate with the lowest margin, the unperturbed input included.

    :param net:
    :param x: batch of shape (m, n)
    :param y: labels of shape (m,)
    :param cfg:
    :param indices: sample indices that seed the random starts, defaults to 0..m-1
    :param return_trajectory: also return the margins of all iterates, shape (m, steps + 1)
    :return: perturbations of shape (m, n)
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y))
    if x.shape[1] != net.input_dim:
        raise DomainError("network expects inputs of dimension {}, got {}".format(net.input_dim, x.shape[1]))
    indices = _indices(x.shape[0], indices)
    best = np.zeros_like(x)
    best_margin = margins(net, x, y)
    trajectory = []
    if cfg.eps == 0:
        trajectory = [best_margin] * (cfg.steps + 1)
    else:
        eta = random_start(x.shape, cfg.eps, cfg.seed, indices) if cfg.random_init else np.zeros_like(x)
        step = cfg.resolved_step_size
        for _ in range(cfg.steps):
            current, grad = input_gradient(net, x + eta, y)
            trajectory.append(current)
            improved = current < best_margin
            best[improved] = eta[improved]
            best_margin = np.where(improved, current, best_margin)
            eta = np.clip(eta - step * np.sign(grad), -cfg.eps, cfg.eps)
        final = margins(net, x + eta, y)
        trajectory.append(final)
        improved = final < best_margin
        best[improved] = eta[improved]
    if return_trajectory:
        return best, np.stack(trajectory, axis=1)
    return best


def pgd_attack(net: LayeredNetwork, x, y: int, cfg: AttackConfig, index: int = 0) -> np.ndarray:
    """
    PGD perturbation of a single input

    :param net:
    :param x: input with ||x||_inf <= 1
    :param y: class index
    :param cfg:
    :param index: sample index seeding the random start
    :return: eta with ||eta||_inf <= cfg.eps
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DomainError("pgd_attack takes a single input, use pgd_attack_batch for batches")
    assert np.max(np.abs(x)) <= 1 + 1e-12, "inputs must lie in the unit l_inf ball"
    return pgd_attack_batch(net, x[None, :], [y], cfg, indices=[index])[0]


def fgsm_attack(net: LayeredNetwork, x, y, eps: float) -> np.ndarray:
    """
    one signed gradient step of size eps from the clean input

    :param net:
    :param x: batch of shape (m, n)
    :param y:
    :param eps:
    :return:
    """
    if eps < 0:
        raise DomainError("attack radius must be nonnegative, got {}".format(eps))
    _, grad = input_gradient(net, np.atleast_2d(x), np.atleast_1d(y))
    return np.clip(-eps * np.sign(grad), -eps, eps)


def adversarial_margin_estimate(net: LayeredNetwork, x, y: int, eps: float, cfg: AttackConfig,
                                index: int = 0) -> float:
    """
    margin at the PGD perturbation. This is an upper bound on the adversarial margin, the infimum over the ball.

    :return:
    """
    cfg = cfg.with_eps(eps)
    eta = pgd_attack(net, x, y, cfg, index=index)
    return float(margins(net, (np.asarray(x, dtype=np.float64) + eta)[None, :], [y])[0])
