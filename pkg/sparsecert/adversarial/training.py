from typing import Tuple

import numpy as np

from sparsecert.adversarial.attacks import AttackConfig, pgd_attack_batch
from sparsecert.misc.exceptions import DomainError
from sparsecert.nn.network import LayeredNetwork, backprop_gradients
from sparsecert.nn.optimizer import MomentumSGD

STANDARD = "standard"
ADVERSARIAL = "adversarial"


def epsilon_schedule(epoch: int, epochs: int, phase_start: float, eps_lo: float, eps_hi: float) -> Tuple[str, float]:
    """
    phase and attack radius of a 0-based epoch. The first round(phase_start * epochs) epochs are standard; the
    radius then grows linearly per epoch from eps_lo to eps_hi over the adversarial epochs.

    :return: (phase, eps)
    """
    if not 0 <= epoch < epochs:
        raise DomainError("epoch {} outside [0, {})".format(epoch, epochs))
    standard = int(round(phase_start * epochs))
    if epoch < standard:
        return STANDARD, 0.0
    adversarial = epochs - standard
    if adversarial == 1:
        return ADVERSARIAL, eps_lo
    return ADVERSARIAL, eps_lo + (eps_hi - eps_lo) * (epoch - standard) / (adversarial - 1)


def adversarial_training_step(net: LayeredNetwork, batch: Tuple[np.ndarray, np.ndarray], cfg: AttackConfig,
                              optimizer: MomentumSGD, indices=None) -> Tuple[LayeredNetwork, float]:
    """
    adds PGD examples at radius cfg.eps to the batch and takes one cross entropy step on the union

    :param net: network with the training head
    :param batch: (x, y)
    :param cfg: attack settings of the current epoch
    :param optimizer:
    :param indices: sample indices seeding the random starts
    :return: the updated network and the loss of the augmented batch
    """
    x, y = batch
    if cfg.eps > 0:
        eta = pgd_attack_batch(net, x, y, cfg, indices=indices)
        x = np.concatenate([x, x + eta])
        y = np.concatenate([y, y])
    grads, loss = backprop_gradients(net, x, y, return_loss=True)
    optimizer.step(net, grads)
    return net, loss
