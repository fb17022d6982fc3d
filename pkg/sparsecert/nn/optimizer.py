from typing import List

import numpy as np

from sparsecert.misc.exceptions import DomainError
from sparsecert.nn.network import LayeredNetwork

OPTIMIZERS = ("sgd", "momentum")


class MomentumSGD:
    """
    heavy ball SGD, v <- momentum v - lr g, W <- W + v; momentum 0 gives plain SGD. Updates the network in place.
    """

    def __init__(self, learning_rate: float = 0.01, momentum: float = 0.9):
        if not learning_rate > 0:
            raise DomainError("learning rate must be positive, got {}".format(learning_rate))
        if not 0 <= momentum < 1:
            raise DomainError("momentum must lie in [0, 1), got {}".format(momentum))
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.velocity: List[np.ndarray] = None

    @classmethod
    def from_kind(cls, kind: str, learning_rate: float, momentum: float = 0.9) -> "MomentumSGD":
        if kind not in OPTIMIZERS:
            raise DomainError("unknown optimizer {}, expected one of {}".format(kind, OPTIMIZERS))
        return cls(learning_rate, momentum if kind == "momentum" else 0.0)

    def step(self, net: LayeredNetwork, grads: List[np.ndarray]) -> LayeredNetwork:
        assert len(grads) == net.depth, "one gradient per layer is required"
        if self.velocity is None:
            self.velocity = [np.zeros_like(W) for W in net.layers]
        for i, grad in enumerate(grads):
            self.velocity[i] = self.momentum * self.velocity[i] - self.learning_rate * grad
            net.layers[i] += self.velocity[i]
        return net
