import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Iterable

import numpy as np
import pandas as pd

from sparsecert.adversarial.attacks import AttackConfig
from sparsecert.adversarial.risk import adversarial_risk
from sparsecert.adversarial.training import adversarial_training_step, epsilon_schedule
from sparsecert.data.dataset import Dataset
from sparsecert.linalg.sparsity import sparsity_profile
from sparsecert.misc.exceptions import ConfigError, DataError, PreconditionError
from sparsecert.nn.bounds import bound_network
from sparsecert.nn.network import LayeredNetwork, rebalance
from sparsecert.nn.optimizer import OPTIMIZERS, MomentumSGD
from sparsecert.reports import metrics_columns

TRAINING_DEFAULTS = {
    "epochs": 20,
    "batch_size": 128,
    "learning_rate": 0.01,
    "optimizer": "momentum",
    "momentum": 0.9,
    "adversarial_phase_start": 0.5,
    "eps_lo": 0.05,
    "eps_hi": 0.2,
    "attack_steps": 10,
    "eval_eps": 0.2,
    "eval_size": 1000,
    "bound_gamma": 0.1,
    "bound_eps": 0.01,
    "seed": 0,
}


@dataclass(frozen=True)
class TrainingConfig:
    """
    two phase schedule: standard training for the first adversarial_phase_start share of the epochs, then PGD
    examples at a radius ramped linearly from eps_lo to eps_hi. The bound of every epoch is evaluated at
    (bound_gamma, bound_eps) in rebalanced units.
    """
    epochs: int = 20
    batch_size: int = 128
    learning_rate: float = 0.01
    optimizer: str = "momentum"
    momentum: float = 0.9
    adversarial_phase_start: float = 0.5
    eps_lo: float = 0.05
    eps_hi: float = 0.2
    attack_steps: int = 10
    eval_eps: float = 0.2
    eval_size: int = 1000
    bound_gamma: float = 0.1
    bound_eps: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.attack_steps < 1 or self.eval_size < 1:
            raise ConfigError("epochs, batch_size, attack_steps and eval_size must be positive")
        if not 0 <= self.adversarial_phase_start <= 1:
            raise ConfigError("adversarial_phase_start must lie in [0, 1], got {}".format(
                self.adversarial_phase_start))
        if not 0 <= self.eps_lo <= self.eps_hi:
            raise ConfigError("need 0 <= eps_lo <= eps_hi, got {} and {}".format(self.eps_lo, self.eps_hi))
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError("unknown optimizer {}, expected one of {}".format(self.optimizer, OPTIMIZERS))
        if not self.learning_rate > 0 or not 0 <= self.momentum < 1:
            raise ConfigError("need learning_rate > 0 and 0 <= momentum < 1")
        if not 0 <= self.bound_eps < self.bound_gamma / 4:
            raise ConfigError("need 0 <= bound_eps < bound_gamma/4, got {} and {}".format(self.bound_eps,
                                                                                           self.bound_gamma))

    @classmethod
    def from_config_manager(cls, config_manager) -> "TrainingConfig":
        return cls(epochs=config_manager.get_int("epochs"),
                   batch_size=config_manager.get_int("batch_size"),
                   learning_rate=config_manager.get_float("learning_rate"),
                   optimizer=str(config_manager.get_value("optimizer")),
                   momentum=config_manager.get_float("momentum"),
                   adversarial_phase_start=config_manager.get_float("adversarial_phase_start"),
                   eps_lo=config_manager.get_float("eps_lo"),
                   eps_hi=config_manager.get_float("eps_hi"),
                   attack_steps=config_manager.get_int("attack_steps"),
                   eval_eps=config_manager.get_float("eval_eps"),
                   eval_size=config_manager.get_int("eval_size"),
                   bound_gamma=config_manager.get_float("bound_gamma"),
                   bound_eps=config_manager.get_float("bound_eps"),
                   seed=config_manager.get_int("seed"))

    def to_dict(self) -> dict:
        return asdict(self)

    def attack(self, eps: float, epoch: int) -> AttackConfig:
        seed = int(np.random.SeedSequence([self.seed, epoch]).generate_state(1)[0])
        return AttackConfig(eps=eps, steps=self.attack_steps, random_init=True, seed=seed)


@dataclass
class TrainingResult:
    network: LayeredNetwork
    history: pd.DataFrame


def evaluate_epoch(net: LayeredNetwork, train_size: int, evaluation: Dataset, cfg: TrainingConfig, epoch: int,
                   threads: int = 1) -> dict:
    """
    clean and adversarial risk on the evaluation set, the sparsity of every layer and the network bound

    :param net: network with the training head
    :param train_size: m of the bound
    :param evaluation: samples the empirical terms are measured on
    :param cfg:
    :param epoch:
    :param threads:
    :return:
    """
    attack = cfg.attack(cfg.eval_eps, epoch)
    metrics = {"clean_risk": adversarial_risk(net, evaluation, 0.0, 0.0, attack, threads).value,
               "adv_risk": adversarial_risk(net, evaluation, 0.0, cfg.eval_eps, attack, threads).value}
    profile = sparsity_profile(net.layers)
    try:
        balanced, _ = rebalance(net.with_final_activation("relu"))
        loss = adversarial_risk(balanced, evaluation, cfg.bound_gamma, cfg.bound_eps, attack, threads).value
        report = bound_network(net, profile, cfg.bound_gamma, cfg.bound_eps, train_size, loss, units="rebalanced")
        metrics["bound_exact"] = report.bound
        metrics["bound_surrogate"] = report.surrogate
    except PreconditionError as e:
        logging.warning("bound of epoch {} is undefined: {}".format(epoch + 1, e))
        metrics["bound_exact"] = math.nan
        metrics["bound_surrogate"] = math.nan
    for j, (s1, s2) in enumerate(profile.pairs, start=1):
        metrics["eff_s1_{}".format(j)] = s1
        metrics["eff_s2_{}".format(j)] = s2
    return metrics


def train(net: LayeredNetwork, dataset: Dataset, cfg: TrainingConfig,
          callbacks: Iterable[Callable[[dict], None]] = (), evaluation: Dataset = None,
          threads: int = 1) -> TrainingResult:
    """
    trains the network in place with mini-batch SGD, standard first and adversarial after the phase switch. After
    every epoch the metrics row is handed to every callback.

    :param net: network with the training head, usually an identity final layer
    :param dataset: training samples inside the unit l_inf ball
    :param cfg:
    :param callbacks: callables receiving the metrics of an epoch
    :param evaluation: samples for the per-epoch metrics, defaults to the first eval_size training samples
    :param threads: attack workers for the metrics
    :return:
    """
    if dataset.m == 0:
        raise DataError("cannot train on an empty dataset")
    if dataset.input_dim != net.input_dim:
        raise DataError("dataset dimension {} does not match the network input {}".format(dataset.input_dim,
                                                                                          net.input_dim))
    if evaluation is None:
        evaluation = dataset.subset(np.arange(min(dataset.m, cfg.eval_size)))
    rng = np.random.default_rng(cfg.seed)
    optimizer = MomentumSGD.from_kind(cfg.optimizer, cfg.learning_rate, cfg.momentum)
    rows = []
    for epoch in range(cfg.epochs):
        phase, eps = epsilon_schedule(epoch, cfg.epochs, cfg.adversarial_phase_start, cfg.eps_lo, cfg.eps_hi)
        attack = cfg.attack(eps, epoch)
        order = rng.permutation(dataset.m)
        losses = []
        for chosen, x, y in dataset.batches(cfg.batch_size, order, with_indices=True):
            net, loss = adversarial_training_step(net, (x, y), attack, optimizer, indices=chosen)
            losses.append(loss)
        row = {"epoch": epoch + 1, "phase": phase, "eps_attack": eps, "train_loss": float(np.mean(losses))}
        row.update(evaluate_epoch(net, dataset.m, evaluation, cfg, epoch, threads))
        logging.info("epoch {} ({}, eps={:.3f}): loss {:.4f}, clean risk {:.4f}, adv risk {:.4f}, bound {:.4g}".format(
            row["epoch"], phase, eps, row["train_loss"], row["clean_risk"], row["adv_risk"], row["bound_exact"]))
        for callback in callbacks:
            callback(dict(row))
        rows.append(row)
    history = pd.DataFrame(rows, columns=metrics_columns(net.depth))
    return TrainingResult(network=net, history=history)
