from dataclasses import dataclass
from typing import List, Tuple

from sparsecert.linalg.sparsity import SparsityProfile
from sparsecert.misc.exceptions import DomainError, PreconditionError


@dataclass(frozen=True)
class ErrorSchedule:
    """
    deviation bounds eps^0 <= ... <= eps^d on the layer outputs and the per-layer compression budgets
    gamma_i = (eps^i - eps^(i-1)) / (1 + eps + eps^(i-1))
    """
    levels: Tuple[float, ...]
    budgets: Tuple[float, ...]
    gamma: float
    eps: float

    @property
    def depth(self) -> int:
        return len(self.budgets)

    def to_dict(self) -> dict:
        return {"levels": list(self.levels), "budgets": list(self.budgets), "gamma": self.gamma, "eps": self.eps}


def check_margin_budget(gamma: float, eps: float) -> None:
    if not gamma > 0:
        raise DomainError("gamma must be positive, got {}".format(gamma))
    if eps < 0:
        raise DomainError("eps must be nonnegative, got {}".format(eps))
    if not eps < gamma / 4:
        raise PreconditionError("the network bound needs eps < gamma/4, got eps={} gamma={}".format(eps, gamma))


def error_schedule(profile: SparsityProfile, gamma: float, eps: float) -> ErrorSchedule:
    """
    eps^0 = 2 eps and eps^d = gamma/2; the remaining gamma/2 - 2 eps is split across layers proportionally to
    sqrt(sbar1^i sbar2^i), so layers with more effective parameters absorb more error

    :param profile: sparsity of every layer
    :param gamma: margin
    :param eps: attack radius, eps < gamma/4
    :return:
    """
    check_margin_budget(gamma, eps)
    weights = profile.layer_weights()
    total = sum(weights)
    spread = gamma / 2 - 2 * eps
    levels: List[float] = [2 * eps]
    for i, weight in enumerate(weights):
        if i == len(weights) - 1:
            levels.append(gamma / 2)
        else:
            levels.append(levels[-1] + weight / total * spread)
    budgets = tuple((levels[i] - levels[i - 1]) / (1 + eps + levels[i - 1]) for i in range(1, len(levels)))
    return ErrorSchedule(levels=tuple(levels), budgets=budgets, gamma=gamma, eps=eps)
