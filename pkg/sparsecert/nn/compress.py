import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from sparsecert.compression.matrix import REBALANCE_TOL, CapacityCount, CompressionPlan, matrix_compress, \
    plan_compression
from sparsecert.linalg.norms import INF, as_matrix, as_vector, lp_norm, mixed_norm
from sparsecert.linalg.sparsity import sparsity_profile
from sparsecert.misc.exceptions import DomainError, PreconditionError
from sparsecert.nn.network import LayeredNetwork
from sparsecert.nn.schedule import ErrorSchedule, check_margin_budget, error_schedule


@dataclass
class NetworkCompression:
    """
    outcome of compressing every layer of a rebalanced network with its scheduled budget
    """
    network: LayeredNetwork
    schedule: ErrorSchedule
    plans: List[CompressionPlan]
    counts: List[CapacityCount]
    errors: List[float]

    @property
    def total(self) -> CapacityCount:
        total = self.counts[0]
        for count in self.counts[1:]:
            total = total + count
        return total

    def audit(self) -> List[dict]:
        rows = []
        for i, (plan, count, error) in enumerate(zip(self.plans, self.counts, self.errors)):
            rows.append({"layer": i + 1, "budget": plan.gamma, "error": error,
                         "within_budget": bool(error <= plan.gamma), "plan": plan.to_dict(),
                         "log_card": count.log_card})
        return rows


def require_rebalanced(net: LayeredNetwork) -> None:
    for i, norm in enumerate(net.layer_norms()):
        if norm > 1 + REBALANCE_TOL:
            raise PreconditionError("layer {} has ||W||_(1,inf) = {} > 1; rebalance the network first".format(
                i + 1, norm))


def compress_layers(net: LayeredNetwork, gamma: float, eps: float,
                    plans: Sequence[CompressionPlan] = None) -> NetworkCompression:
    """
    compresses layer i with budget (eps^i - eps^(i-1)) / (1 + eps + eps^(i-1)). For inputs in the unit l_inf ball
    and any perturbation with ||eta||_inf <= eps, the outputs of the original and the compressed network then
    differ by at most gamma/2 in l_inf.

    :param net: rebalanced network
    :param gamma: margin, eps < gamma/4
    :param eps: attack radius
    :param plans: optional fixed per-layer plans, e.g. from a previous audit; the rebalancing check is skipped then
    :return:
    """
    check_margin_budget(gamma, eps)
    schedule = error_schedule(sparsity_profile(net.layers), gamma, eps)
    if plans is None:
        require_rebalanced(net)
    elif len(plans) != net.depth:
        raise DomainError("got {} plans for {} layers".format(len(plans), net.depth))
    layers, used, counts, errors = [], [], [], []
    for i, W in enumerate(net.layers):
        budget = schedule.budgets[i] if plans is None else plans[i].gamma
        plan = plan_compression(W, budget) if plans is None else plans[i]
        compressed, count = matrix_compress(W, budget, plan=plan)
        error = mixed_norm(W - compressed, 1, INF)
        logging.debug("layer {}: budget {:.4g}, error {:.4g}, log card {:.4g}".format(i + 1, budget, error,
                                                                                    count.log_card))
        layers.append(compressed)
        used.append(plan)
        counts.append(count)
        errors.append(error)
    return NetworkCompression(network=LayeredNetwork(layers, net.final_activation), schedule=schedule, plans=used,
                              counts=counts, errors=errors)


def compress_network(net: LayeredNetwork, gamma: float, eps: float) -> Tuple[LayeredNetwork, CapacityCount]:
    """
    compresses a rebalanced network layer by layer

    :param net:
    :param gamma:
    :param eps:
    :return: the compressed network and the summed capacity count of all layers
    """
    result = compress_layers(net, gamma, eps)
    return result.network, result.total


def _phi(a: np.ndarray, activation: str) -> np.ndarray:
    return np.maximum(a, 0.0) if activation == "relu" else a


def lipschitz_layer_check(W, W_hat, x, eta, activation: str = "relu", rtol: float = 1e-12) -> Tuple[float, float]:
    """
    the two deviations of a 1-Lipschitz layer,
    ||phi(W^T x) - phi(W^T (x + eta))||_inf <= ||W||_{1,inf} ||eta||_inf and
    ||phi(W^T x) - phi(W_hat^T x)||_inf <= ||W - W_hat||_{1,inf} ||x||_inf, both asserted

    :return: the two left hand sides
    """
    W, W_hat = as_matrix(W), as_matrix(W_hat)
    x, eta = as_vector(x), as_vector(eta)
    if W.shape != W_hat.shape or W.shape[0] != x.shape[0] or x.shape != eta.shape:
        raise DomainError("inconsistent shapes {} {} {} {}".format(W.shape, W_hat.shape, x.shape, eta.shape))
    clean = _phi(W.T @ x, activation)
    input_deviation = lp_norm(clean - _phi(W.T @ (x + eta), activation), INF)
    weight_deviation = lp_norm(clean - _phi(W_hat.T @ x, activation), INF)
    input_bound = mixed_norm(W, 1, INF) * lp_norm(eta, INF)
    weight_bound = mixed_norm(W - W_hat, 1, INF) * lp_norm(x, INF)
    assert input_deviation <= input_bound * (1 + rtol) + rtol, \
        "input deviation {} exceeds {}".format(input_deviation, input_bound)
    assert weight_deviation <= weight_bound * (1 + rtol) + rtol, \
        "weight deviation {} exceeds {}".format(weight_deviation, weight_bound)
    return input_deviation, weight_deviation
